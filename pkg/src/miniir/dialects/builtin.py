"""builtin: the top-level module container."""

from __future__ import annotations

from miniir.dialects.table import load_dialect
from miniir.ir import types as T
from miniir.ir.core import Operation
from miniir.textio.printer import format_symbol

TABLE = """
[builtin.module]
summary = top-level container holding a symbol table
traits = IsolatedFromAbove SymbolTableHolder SingleRegionSingleBlock
attrs = sym_name:string?
regions = 1
verify = verify_module
print = print_module
parse = parse_module

[builtin.module_end]
summary = implicit terminator of a module body
traits = Terminator
"""


def _is_end(op: Operation) -> bool:
    return op.name == "builtin.module_end"


def verify_module(op):
    for b in op.regions[0].blocks:
        if b.ops and not _is_end(b.ops[-1]):
            yield "missing-terminator", "module body must end with builtin.module_end"


def print_module(p, op):
    body = op.regions[0]
    name = op.attributes.get("sym_name")
    if len(body.blocks) != 1 or body.blocks[0].args:
        return False
    ops = body.blocks[0].ops
    if not ops or not _is_end(ops[-1]) or ops[-1].attributes or ops[-1].operands:
        return False
    if name is not None and not isinstance(name, T.StringAttr):
        return False
    p.w("module")
    if name is not None:
        p.w(" " + format_symbol(name.text))
    p.attr_dict(op, elide=("sym_name",), keyword="attributes")
    p.w(" ")
    p.region(body, print_entry_args=False, elide_terminator=_is_end)


def parse_module(parser, name, pos):
    attrs = {}
    if parser.tok.kind == "sym":
        attrs["sym_name"] = parser.ctx.intern_attr(T.StringAttr(parser.parse_symbol_name()))
    if parser.accept("attributes"):
        extra_pos = parser.tok.pos
        for k, v in parser.parse_attr_dict().items():
            if k in attrs:
                parser.fail(f"duplicate attribute '{k}'", extra_pos)
            attrs[k] = v
    region = parser.parse_region(entry_args=[], isolated=True)
    last = region.blocks[-1]
    if not last.ops or not _is_end(last.ops[-1]):
        last.append(parser.create("builtin.module_end", pos=pos))
    return parser.create(name, (), (), attrs, [region], pos=pos)


def make_dialect():
    return load_dialect("builtin", TABLE, globals())


def new_module(ctx) -> Operation:
    """An empty module whose body holds only the implicit terminator."""
    from miniir.ir.core import Block, Region

    body = Block(ctx)
    body.append(Operation(ctx, "builtin.module_end"))
    return Operation(ctx, "builtin.module", regions=[Region([body])])
