"""Common subexpression elimination scoped by dominance."""

from __future__ import annotations

from collections import ChainMap

from miniir.ir.context import Trait
from miniir.ir.core import Operation, Region
from miniir.ir.dominance import DomTree
from miniir.rewrite.driver import ChangeReport


def _eligible(op: Operation) -> bool:
    return (
        op.is_registered
        and op.has_trait(Trait.NO_SIDE_EFFECT)
        and not op.regions
        and not op.successors
        and not op.is_terminator
    )


def _key(op: Operation):
    return (
        op.name,
        tuple(op.operands),
        tuple(sorted(op.attributes.items())),
        op.result_types,
    )


def run_cse(scope: Operation) -> ChangeReport:
    """Replace each side-effect-free op by an identical op that dominates it."""
    report = ChangeReport(iterations=1, converged=True)
    for region in scope.regions:
        _cse_region(region, ChainMap(), report)
    return report


def _cse_region(region: Region, table: ChainMap, report: ChangeReport) -> None:
    if not region.blocks:
        return
    tree = DomTree(region)
    # explicit stack of (block, scope) to walk the dominator tree
    stack = [(region.blocks[0], table.new_child())]
    while stack:
        block, scope = stack.pop()
        for op in list(block.ops):
            for r in op.regions:
                inner = ChainMap() if op.has_trait(Trait.ISOLATED_FROM_ABOVE) else scope.new_child()
                _cse_region(r, inner, report)
            if not _eligible(op):
                continue
            k = _key(op)
            prev = scope.get(k)
            if prev is None:
                scope[k] = op
                continue
            op.replace_all_uses_with(prev.results)
            op.erase()
            report.rewrites_applied += 1
            report.ops_erased += 1
            report.trace.append(f"cse:{op.name}")
        for child in reversed(tree.kids(block)):
            stack.append((child, scope.new_child()))
