"""affine: loops with affine bounds and affine-indexed memory access."""

from __future__ import annotations

from miniir.dialects.table import load_dialect
from miniir.ir import types as T
from miniir.ir.affine import AffineMap, eval_affine_map
from miniir.ir.context import InlinerInterface
from miniir.ir.core import BlockArgument, Operation, Region, Value

TABLE = """
[affine.for]
summary = counted loop; iterates the induction variable from lb to ub-1 by step
traits = SingleRegionSingleBlock
operands = index*
attrs = lower_bound:affine-map upper_bound:affine-map step:int
regions = 1
verify = verify_for
print = print_for
parse = parse_for

[affine.apply]
summary = evaluate a single-result affine map
traits = NoSideEffect
operands = index*
results = index
attrs = map:affine-map
verify = verify_apply
fold = fold_apply

[affine.load]
summary = read a buffer element at affine indices
operands = memref index*
results = any
attrs = map:affine-map
verify = verify_load

[affine.store]
summary = write a buffer element at affine indices
operands = any memref index*
attrs = map:affine-map
verify = verify_store

[affine.yield]
summary = terminates an affine.for body
traits = Terminator
verify = verify_yield
"""


def bounds(op: Operation) -> tuple[AffineMap, AffineMap, int]:
    a = op.attributes
    return a["lower_bound"].map, a["upper_bound"].map, a["step"].value


def bound_operands(op: Operation) -> tuple[tuple[Value, ...], tuple[Value, ...]]:
    """Split the operands of an affine.for into lower- and upper-bound map operands."""
    n = op.attributes["lower_bound"].map.num_inputs
    return op.operands[:n], op.operands[n:]


def induction_var(op: Operation) -> BlockArgument:
    return op.regions[0].entry.args[0]


def _in_affine_loop(op: Operation | None) -> bool:
    return op is not None and any(a.name == "affine.for" for a in (op, *op.ancestors()))


def is_affine_index(v: Value) -> bool:
    """Loop iterators of enclosing loops, and symbols fixed for the whole loop nest."""
    if isinstance(v, BlockArgument):
        owner = v.owner.parent_op
        if owner is None:
            return False
        if owner.name == "affine.for" or (owner.name == "func.func" and v.owner.is_entry()):
            return True
        return not _in_affine_loop(owner)
    d = v.defining_op()
    if d.name == "arith.constant":
        return True
    if d.name == "affine.apply":
        return all(is_affine_index(x) for x in d.operands)
    return not _in_affine_loop(d.parent_op)


def _check_map_operands(op, m: AffineMap, operands, what: str):
    if m.num_inputs != len(operands):
        yield "arity", f"{what} map takes {m.num_inputs} operands, got {len(operands)}"
        return
    for i, x in enumerate(operands):
        if not is_affine_index(x):
            yield "affine", f"{what} operand #{i} is not an affine loop iterator or symbol"


def verify_for(op):
    lb, ub, step = bounds(op)
    for name, m in (("lower", lb), ("upper", ub)):
        if m.num_results < 1:
            yield "affine", f"{name} bound map must have at least one result"
    if step <= 0:
        yield "affine", f"step must be positive, got {step}"
    if op.num_operands != lb.num_inputs + ub.num_inputs:
        yield "arity", (f"bound maps take {lb.num_inputs} + {ub.num_inputs} operands, "
                        f"got {op.num_operands}")
        return
    lo, hi = bound_operands(op)
    yield from _check_map_operands(op, lb, lo, "lower bound")
    yield from _check_map_operands(op, ub, hi, "upper bound")
    body = op.regions[0]
    if len(body.blocks) != 1:
        return
    entry = body.entry
    if entry.arg_types != (T.index,):
        yield "affine", "body must have a single index argument (the induction variable)"
    last = entry.last_op
    if last is None or last.name != "affine.yield":
        yield "affine", "body must end with affine.yield"


def verify_apply(op):
    m = op.attributes["map"].map
    if m.num_results != 1:
        yield "affine", f"map must have exactly one result, got {m.num_results}"
    yield from _check_map_operands(op, m, op.operands, "apply")


def _check_access(op, memref, indices, value_type):
    m = op.attributes["map"].map
    t = memref.type
    if m.num_results != t.rank:
        yield "arity", f"map yields {m.num_results} indices but {t} has rank {t.rank}"
    if value_type != t.elem:
        yield "type-constraint", f"element type {value_type} does not match {t}"
    yield from _check_map_operands(op, m, indices, "index")


def verify_load(op):
    yield from _check_access(op, op.operand(0), op.operands[1:], op.results[0].type)


def verify_store(op):
    yield from _check_access(op, op.operand(1), op.operands[2:], op.operand(0).type)


def verify_yield(op):
    p = op.parent_op
    if p is None or p.name != "affine.for":
        yield "must be nested directly in affine.for"


def fold_apply(op, consts):
    if not all(isinstance(c, T.IntegerAttr) for c in consts):
        return None
    m = op.attributes["map"].map
    if m.num_results != 1 or m.num_inputs != len(consts):
        return None
    vals = [T.to_signed(c.value, 64) for c in consts]
    (r,) = eval_affine_map(m, vals[: m.num_dims], vals[m.num_dims:])
    return [T.IntegerAttr(T.wrap_int(r, 64), T.index)]


# -- custom syntax -------------------------------------------------------------
# affine.for %i = <lb> to <ub> step <s> { body }
# A bound is an integer (constant map), an SSA value (the map ()[s0] -> (s0)),
# or `[max|min] map(dims)[syms]`. The trailing affine.yield is implicit.


def _print_bound(p, m: AffineMap, operands, combine: str) -> str:
    c = m.constant_value()
    if c is not None:
        return str(c)
    if m == AffineMap.symbol_identity():
        return p.val(operands[0])
    text = (combine + " " if m.num_results > 1 else "") + p.affine_map(T.AffineMapAttr(m))
    text += "(" + p.vals(operands[: m.num_dims]) + ")"
    if m.num_syms:
        text += "[" + p.vals(operands[m.num_dims:]) + "]"
    return text


def _elide_yield(op) -> bool:
    return op.name == "affine.yield" and not op.operands and not op.attributes


def print_for(p, op):
    a = op.attributes
    if set(a) != {"lower_bound", "upper_bound", "step"}:
        return False
    lbm, ubm, step = a["lower_bound"], a["upper_bound"], a["step"]
    if not (isinstance(lbm, T.AffineMapAttr) and isinstance(ubm, T.AffineMapAttr)):
        return False
    if not isinstance(step, T.IntegerAttr) or step.type != T.index:
        return False
    if lbm.map.num_inputs + ubm.map.num_inputs != op.num_operands:
        return False
    body = op.regions[0] if len(op.regions) == 1 else None
    if body is None or len(body.blocks) != 1 or body.entry.arg_types != (T.index,):
        return False
    last = body.entry.last_op
    if last is None or not _elide_yield(last):
        return False
    lo, hi = bound_operands(op)
    p.w(f"affine.for {p.val(induction_var(op))} = {_print_bound(p, lbm.map, lo, 'max')} to "
        f"{_print_bound(p, ubm.map, hi, 'min')} step {T.to_signed(step.value, 64)} ")
    p.region(body, print_entry_args=False, elide_terminator=_elide_yield)


def _parse_bound(parser, combine: str):
    ctx = parser.ctx
    if parser.tok.kind == "value":
        v = parser.resolve(parser.parse_value_ref(), T.index)
        return AffineMap.symbol_identity(), [v]
    if parser.tok.kind == "int" or parser.at("-"):
        return AffineMap.constant(parser.parse_int()), []
    pos = parser.tok.pos
    keyword = parser.accept(combine)
    m = parser.parse_affine_map_attr().map
    if m.num_results > 1 and not keyword:
        parser.fail(f"multi-result bound map must be prefixed with '{combine}'", pos)
    parser.expect("(")
    dims = parser.parse_ref_list()
    parser.expect(")")
    syms = []
    if parser.accept("["):
        syms = parser.parse_ref_list()
        parser.expect("]")
    if len(dims) != m.num_dims or len(syms) != m.num_syms:
        parser.fail(f"bound map expects {m.num_dims} dims and {m.num_syms} symbols", pos)
    operands = [parser.resolve(r, T.index) for r in dims + syms]
    return ctx.intern_attr(T.AffineMapAttr(m)).map, operands


def parse_for(parser, name, pos):
    ctx = parser.ctx
    iv = parser.parse_value_ref()
    parser.expect("=")
    lb, lo = _parse_bound(parser, "max")
    parser.expect("to")
    ub, hi = _parse_bound(parser, "min")
    step = 1
    if parser.accept("step"):
        spos = parser.tok.pos
        step = parser.parse_int()
        if step <= 0:
            parser.fail(f"step must be positive, got {step}", spos)
    body = parser.parse_region(entry_args=[(iv, T.index)])
    block = body.entry
    last = block.last_op
    if last is None or not last.is_terminator:
        block.append(Operation(ctx, "affine.yield"))
    attrs = {
        "lower_bound": ctx.intern_attr(T.AffineMapAttr(lb)),
        "upper_bound": ctx.intern_attr(T.AffineMapAttr(ub)),
        "step": ctx.intern_attr(T.IntegerAttr(step, T.index)),
    }
    return parser.create(name, lo + hi, (), attrs, [body], pos=pos)


def _legal_destination(op, dest: Region) -> bool:
    host = dest.parent
    return host is not None and host.name in ("func.func", "affine.for")


def make_dialect():
    return load_dialect(
        "affine", TABLE, globals(), inliner=InlinerInterface(is_legal_to_inline=_legal_destination)
    )
