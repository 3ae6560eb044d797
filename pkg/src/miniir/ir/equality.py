"""Structural (isomorphism) comparison of operations."""

from __future__ import annotations

from miniir.ir.core import Operation


def structural_equal(a: Operation, b: Operation) -> bool:
    """True iff ``a`` and ``b`` are isomorphic up to value and block identity.

    Values defined outside the compared ops must be the very same objects.
    Locations are not compared.
    """
    vmap: dict[int, object] = {}
    bmap: dict[int, object] = {}
    pairs: list[tuple[Operation, Operation]] = []
    if not _shape_equal(a, b, vmap, bmap, pairs):
        return False
    for x, y in pairs:
        if x.num_operands != y.num_operands:
            return False
        for u, v in zip(x.operands, y.operands):
            if vmap.get(id(u), u) is not v:
                return False
        for s, t in zip(x.successors, y.successors):
            if bmap.get(id(s.block), s.block) is not t.block:
                return False
            if len(s.operands) != len(t.operands):
                return False
            for u, v in zip(s.operands, t.operands):
                if vmap.get(id(u), u) is not v:
                    return False
    return True


def _shape_equal(a: Operation, b: Operation, vmap, bmap, pairs) -> bool:
    if (
        a.name != b.name
        or a.attributes != b.attributes
        or a.result_types != b.result_types
        or a.operand_types != b.operand_types
        or len(a.regions) != len(b.regions)
        or len(a.successors) != len(b.successors)
    ):
        return False
    pairs.append((a, b))
    for x, y in zip(a.results, b.results):
        vmap[id(x)] = y
    for ra, rb in zip(a.regions, b.regions):
        if len(ra.blocks) != len(rb.blocks):
            return False
        for ba, bb in zip(ra.blocks, rb.blocks):
            if ba.arg_types != bb.arg_types or len(ba.ops) != len(bb.ops):
                return False
            bmap[id(ba)] = bb
            for x, y in zip(ba.args, bb.args):
                vmap[id(x)] = y
        for ba, bb in zip(ra.blocks, rb.blocks):
            for oa, ob in zip(ba.ops, bb.ops):
                if not _shape_equal(oa, ob, vmap, bmap, pairs):
                    return False
    return True
