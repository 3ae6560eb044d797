"""func: functions, calls and returns."""

from __future__ import annotations

from miniir.dialects.table import load_dialect
from miniir.ir import types as T
from miniir.ir.context import InlinerInterface
from miniir.ir.core import Region
from miniir.ir.symbols import resolve_symbol
from miniir.textio.printer import format_symbol

TABLE = """
[func.func]
summary = function definition or declaration (empty body)
traits = SymbolDefiner IsolatedFromAbove
attrs = sym_name:string function_type:function-type
regions = 1
verify = verify_func
print = print_func
parse = parse_func

[func.return]
summary = return from the enclosing function
traits = Terminator
operands = any*
verify = verify_return
print = print_return
parse = parse_return

[func.call]
summary = direct call of a function symbol
operands = any*
results = any*
attrs = callee:symbol-ref
verify = verify_call
"""


def function_type(op) -> T.FunctionType:
    return op.attributes["function_type"].type


def verify_func(op):
    ft = function_type(op)
    body = op.regions[0]
    if body.blocks and body.blocks[0].arg_types != ft.inputs:
        yield "entry block argument types do not match the function type"


def verify_return(op):
    fn = op.parent_op
    if fn is None or fn.name != "func.func":
        yield "must be nested directly in func.func"
        return
    want = function_type(fn).results
    if op.operand_types != want:
        got = ", ".join(map(str, op.operand_types))
        yield (f"return operand types ({got}) do not match function result types "
               f"({', '.join(map(str, want))})")


def verify_call(op):
    name = op.attributes["callee"].name
    callee = resolve_symbol(op, name)
    if callee is None or callee.name != "func.func":
        yield "undefined-symbol", f"callee @{name} is not a function"
        return
    ft = function_type(callee)
    if op.operand_types != ft.inputs or op.result_types != ft.results:
        yield "call-signature", f"call signature does not match callee @{name} of type {ft}"


def print_func(p, op):
    name = op.attributes.get("sym_name")
    ft = op.attributes.get("function_type")
    if not isinstance(name, T.StringAttr) or not isinstance(ft, T.TypeAttr):
        return False
    if not isinstance(ft.type, T.FunctionType):
        return False
    body = op.regions[0] if len(op.regions) == 1 else None
    if body is None or (body.blocks and body.blocks[0].arg_types != ft.type.inputs):
        return False
    p.w("func.func " + format_symbol(name.text))
    if body.blocks:
        p.w("(" + ", ".join(f"{p.val(a)}: {p.type(a.type)}" for a in body.blocks[0].args) + ")")
    else:
        p.w("(" + p.types(ft.type.inputs) + ")")
    res = ft.type.results
    if len(res) == 1 and not isinstance(res[0], T.FunctionType):
        p.w(" -> " + p.type(res[0]))
    elif res:
        p.w(" -> (" + p.types(res) + ")")
    p.attr_dict(op, elide=("sym_name", "function_type"), keyword="attributes")
    if body.blocks:
        p.w(" ")
        p.region(body, print_entry_args=False)


def parse_func(parser, name, pos):
    ctx = parser.ctx
    sym = parser.parse_symbol_name()
    parser.expect("(")
    args, types = [], []
    if not parser.at(")"):
        named = parser.tok.kind == "value"
        while True:
            if named:
                ref = parser.parse_value_ref()
                parser.expect(":")
                args.append((ref, parser.parse_type()))
            else:
                types.append(parser.parse_type())
            if not parser.accept(","):
                break
    parser.expect(")")
    results = []
    if parser.accept("->"):
        results = parser.parse_type_list() if parser.at("(") else [parser.parse_type()]
    attrs = {}
    if parser.accept("attributes"):
        attrs = parser.parse_attr_dict()
    for k in ("sym_name", "function_type"):
        if k in attrs:
            parser.fail(f"'{k}' must not be given in the attribute dictionary of func.func", pos)
    inputs = [t for _, t in args] if args else types
    attrs["sym_name"] = ctx.intern_attr(T.StringAttr(sym))
    attrs["function_type"] = ctx.intern_attr(T.TypeAttr(T.FunctionType(tuple(inputs), tuple(results))))
    region = Region()
    if parser.at("{"):
        if types:
            parser.fail("a function with a body must name its arguments")
        region = parser.parse_region(entry_args=args, isolated=True)
    return parser.create(name, (), (), attrs, [region], pos=pos)


def print_return(p, op):
    if op.attributes:
        return False
    if not op.operands:
        # a bare `func.return` followed by more ops would swallow their result names
        if op.parent is not None and op.parent.ops[-1] is not op:
            return False
        p.w("func.return")
        return
    p.w(f"func.return {p.vals(op.operands)} : {p.types(op.operand_types)}")


def parse_return(parser, name, pos):
    refs = parser.parse_ref_list()
    operands = []
    if refs:
        parser.expect(":")
        types = [parser.parse_type()]
        while parser.accept(","):
            types.append(parser.parse_type())
        operands = parser.resolve_all(refs, types, pos)
    return parser.create(name, operands, (), {}, pos=pos)


def _rewrite_return(op, cont_block):
    from miniir.ir.core import Builder

    b = Builder.before(op)
    b.location = op.location
    b.create("cf.br", successors=[(cont_block, list(op.operands))])
    op.erase()


def make_dialect():
    return load_dialect(
        "func",
        TABLE,
        globals(),
        inliner=InlinerInterface(
            is_legal_to_inline=lambda op, dest: True,
            handle_terminator=_rewrite_return,
        ),
    )
