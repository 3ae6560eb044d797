"""Lowering of affine loops and accesses to arith, cf and memref."""

from __future__ import annotations

from typing import Sequence

from miniir.ir import types as T
from miniir.ir.affine import AffineBinary, AffineConst, AffineDim, AffineExpr, AffineMap, AffineSym, eval_expr
from miniir.ir.core import Block, Builder, Operation, Value
from miniir.rewrite.driver import ChangeReport


class LoweringError(Exception):
    pass


def _const(b: Builder, value: int) -> Value:
    return b.create("arith.constant", (), [T.index], {"value": T.IntegerAttr(value, T.index)}).results[0]


def _bin(b: Builder, name: str, x: Value, y: Value) -> Value:
    return b.create(name, [x, y], [T.index]).results[0]


def _cmp(b: Builder, pred: str, x: Value, y: Value) -> Value:
    return b.create("arith.cmpi", [x, y], [T.i1], {"predicate": T.StringAttr(pred)}).results[0]


def _select(b: Builder, c: Value, x: Value, y: Value) -> Value:
    return b.create("arith.select", [c, x, y], [T.index]).results[0]


def _floordiv(b: Builder, a: Value, d: int) -> Value:
    # a < 0: -1 - (-1 - a) / d, else a / d
    cd, m1 = _const(b, d), _const(b, -1)
    neg = _cmp(b, "slt", a, _const(b, 0))
    dividend = _select(b, neg, _bin(b, "arith.subi", m1, a), a)
    q = _bin(b, "arith.divsi", dividend, cd)
    return _select(b, neg, _bin(b, "arith.subi", m1, q), q)


def _ceildiv(b: Builder, a: Value, d: int) -> Value:
    # a <= 0: -((-a) / d), else (a - 1) / d + 1
    cd, zero, one = _const(b, d), _const(b, 0), _const(b, 1)
    nonpos = _cmp(b, "sle", a, zero)
    dividend = _select(b, nonpos, _bin(b, "arith.subi", zero, a), _bin(b, "arith.subi", a, one))
    q = _bin(b, "arith.divsi", dividend, cd)
    return _select(b, nonpos, _bin(b, "arith.subi", zero, q), _bin(b, "arith.addi", q, one))


def _mod(b: Builder, a: Value, d: int) -> Value:
    cd = _const(b, d)
    r = _bin(b, "arith.remsi", a, cd)
    neg = _cmp(b, "slt", r, _const(b, 0))
    return _select(b, neg, _bin(b, "arith.addi", r, cd), r)


def _expand(b: Builder, e: AffineExpr, dims: Sequence[Value], syms: Sequence[Value]) -> Value:
    if isinstance(e, AffineConst):
        return _const(b, e.value)
    if isinstance(e, AffineDim):
        return dims[e.position]
    if isinstance(e, AffineSym):
        return syms[e.position]
    assert isinstance(e, AffineBinary)
    lhs = _expand(b, e.lhs, dims, syms)
    if e.kind == "add":
        return _bin(b, "arith.addi", lhs, _expand(b, e.rhs, dims, syms))
    c = eval_expr(e.rhs, (), ())
    if e.kind == "mul":
        return _bin(b, "arith.muli", lhs, _const(b, c))
    return {"floordiv": _floordiv, "ceildiv": _ceildiv, "mod": _mod}[e.kind](b, lhs, c)


def materialize_affine_map(b: Builder, m: AffineMap, operands: Sequence[Value]) -> list[Value]:
    """Emit arith ops at ``b`` computing each result of ``m``; one value per result."""
    if len(operands) != m.num_inputs or any(v.type != T.index for v in operands):
        raise LoweringError(f"map {m} needs {m.num_inputs} index operands")
    dims, syms = operands[: m.num_dims], operands[m.num_dims:]
    return [_expand(b, e, dims, syms) for e in m.exprs]


def _combine(b: Builder, values: list[Value], pred: str) -> Value:
    acc = values[0]
    for v in values[1:]:
        acc = _select(b, _cmp(b, pred, v, acc), v, acc)
    return acc


def _lower_for(op: Operation) -> None:
    from miniir.dialects.affine import bound_operands, bounds

    lb_map, ub_map, step = bounds(op)
    lo, hi = bound_operands(op)
    pre = op.parent
    region = pre.parent
    b = Builder.before(op)
    b.location = op.location
    lb = _combine(b, materialize_affine_map(b, lb_map, lo), "sgt")
    ub = _combine(b, materialize_affine_map(b, ub_map, hi), "slt")

    exit_block = pre.split_before(op)
    cond = Block(op.context, [T.index])
    region.insert_block_after(pre, cond)
    Builder.at_end(pre).create("cf.br", successors=[(cond, [lb])], location=op.location)

    body_blocks = list(op.regions[0].blocks)
    entry = body_blocks[0]
    entry.args[0].replace_all_uses_with(cond.args[0])
    entry.erase_argument(0)
    anchor = cond
    for blk in body_blocks:
        region.insert_block_after(anchor, blk.detach())
        anchor = blk
    step_block = Block(op.context)
    region.insert_block_after(anchor, step_block)

    cb = Builder.at_end(cond)
    cb.location = op.location
    c = _cmp(cb, "slt", cond.args[0], ub)
    cb.create("cf.cond_br", [c], successors=[(entry, []), (exit_block, [])])

    sb = Builder.at_end(step_block)
    sb.location = op.location
    nxt = _bin(sb, "arith.addi", cond.args[0], _const(sb, step))
    sb.create("cf.br", successors=[(cond, [nxt])])

    for blk in body_blocks:
        last = blk.last_op
        if last is not None and last.name == "affine.yield":
            yb = Builder.before(last)
            yb.location = last.location
            yb.create("cf.br", successors=[(step_block, [])])
            last.erase()
    op.erase()


def _lower_simple(op: Operation) -> None:
    b = Builder.before(op)
    b.location = op.location
    m = op.attributes["map"].map
    if op.name == "affine.apply":
        (v,) = materialize_affine_map(b, m, op.operands)
        op.replace_all_uses_with([v])
    elif op.name == "affine.load":
        idx = materialize_affine_map(b, m, op.operands[1:])
        new = b.create("memref.load", [op.operand(0), *idx], op.result_types)
        op.replace_all_uses_with(new.results)
    else:
        idx = materialize_affine_map(b, m, op.operands[2:])
        b.create("memref.store", [op.operand(0), op.operand(1), *idx])
    op.erase()


def lower_affine(func: Operation) -> ChangeReport:
    """Rewrite every affine op under ``func`` into arith/cf/memref, innermost loops first."""
    report = ChangeReport()
    for op in list(func.walk("post")):
        if op is func or not op.name.startswith("affine."):
            continue
        if op.name == "affine.for":
            _lower_for(op)
        elif op.name in ("affine.apply", "affine.load", "affine.store"):
            _lower_simple(op)
        elif op.name == "affine.yield":
            continue
        else:
            raise LoweringError(f"cannot lower {op.name}")
        report.rewrites_applied += 1
        report.trace.append(op.name)
    report.converged = True
    report.iterations = 1
    return report
