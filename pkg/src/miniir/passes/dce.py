"""Dead code elimination: unused side-effect-free ops and unreachable blocks."""

from __future__ import annotations

from miniir.ir.core import Block, Operation, Region
from miniir.rewrite.driver import ChangeReport
from miniir.rewrite.pattern import is_trivially_dead


def _reachable(region: Region) -> set[int]:
    seen = {id(region.blocks[0])}
    stack = [region.blocks[0]]
    while stack:
        for s in stack.pop().successors():
            if id(s) not in seen and s.parent is region:
                seen.add(id(s))
                stack.append(s)
    return seen


def _drop_unreachable(scope: Operation, report: ChangeReport) -> None:
    regions = [r for op in scope.walk() for r in op.regions]
    for region in regions:
        if len(region.blocks) < 2:
            continue
        live = _reachable(region)
        dead: list[Block] = [b for b in region.blocks if id(b) not in live]
        for b in dead:
            for op in b.ops:
                op.drop_all_references()
        for b in dead:
            report.ops_erased += sum(1 for op in b.ops for _ in op.walk())
            report.trace.append("dce:block")
            b.erase()
            report.rewrites_applied += 1


def run_dce(scope: Operation) -> ChangeReport:
    report = ChangeReport(converged=True)
    _drop_unreachable(scope, report)
    changed = True
    while changed:
        report.iterations += 1
        changed = False
        # reverse document order reaches users before their producers
        for op in reversed(list(scope.walk("post"))):
            if op is not scope and not op._erased and is_trivially_dead(op):
                report.ops_erased += 1
                report.rewrites_applied += 1
                report.trace.append(f"dce:{op.name}")
                op.erase()
                changed = True
    return report
