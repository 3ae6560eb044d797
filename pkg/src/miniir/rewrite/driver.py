"""Greedy worklist driver applying folds and patterns to a fixpoint."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from miniir.ir import types as T
from miniir.ir.core import Operation, Value
from miniir.rewrite.pattern import (
    Listener,
    Pattern,
    PatternRewriter,
    PatternSet,
    constant_value,
    is_trivially_dead,
)


@dataclass
class ChangeReport:
    rewrites_applied: int = 0
    ops_erased: int = 0
    iterations: int = 0
    converged: bool = False
    # one entry per applied change: a pattern name, "fold:<op>" or "dead:<op>"
    trace: list[str] = field(default_factory=list)

    def merge(self, other: "ChangeReport") -> "ChangeReport":
        self.rewrites_applied += other.rewrites_applied
        self.ops_erased += other.ops_erased
        self.iterations = max(self.iterations, other.iterations)
        self.converged = self.converged and other.converged
        self.trace.extend(other.trace)
        return self


@dataclass
class RewriteConfig:
    max_iterations: int = 10
    fold: bool = True
    erase_dead: bool = False
    # "post" (default), "pre" or "reverse-post": initial worklist order
    seed_order: str = "post"
    # guards a single sweep against patterns that undo each other
    max_rewrites_per_sweep: int | None = None


# An engine picks the pattern to apply at an op: returns (pattern, match) or None.
Engine = Callable[[Operation], "tuple[Pattern, Any] | None"]


def direct_engine(patterns: PatternSet) -> Engine:
    def select(op: Operation):
        for p in patterns.for_op(op.name):
            m = p.match(op)
            if m is not None and m is not False:
                return p, m
        return None

    return select


def try_fold(op: Operation) -> list[Value | T.Attribute] | None:
    """Run the op's fold hook; None when there is no hook or nothing folds."""
    opdef = op.opdef
    if opdef is None or opdef.fold is None or not op.results:
        return None
    res = opdef.fold(op, [constant_value(v) for v in op.operands])
    if res is None:
        return None
    if len(res) != len(op.results):
        raise ValueError(f"fold of {op.name} returned {len(res)} values for {len(op.results)} results")
    if any(r is op.results[i] for i, r in enumerate(res)):
        return None
    return list(res)


class _Worklist(Listener):
    def __init__(self, report: ChangeReport):
        self.stack: list[Operation] = []
        self.report = report

    def push(self, op: Operation) -> None:
        self.stack.append(op)

    def created(self, op):
        self.stack.append(op)

    def erased(self, op):
        self.report.ops_erased += 1

    def changed(self, op):
        self.stack.append(op)


def _seed(scope: Operation, order: str) -> list[Operation]:
    if order == "pre":
        ops = list(scope.walk("pre"))
    elif order in ("post", "reverse-post"):
        ops = list(scope.walk("post"))
        if order == "reverse-post":
            ops.reverse()
    else:
        raise ValueError(f"unknown seed order {order!r}")
    return [o for o in ops if o is not scope]


def apply_patterns_greedily(
    scope: Operation,
    patterns: PatternSet | None = None,
    config: RewriteConfig | None = None,
    engine: Engine | None = None,
) -> ChangeReport:
    """Apply folds and patterns to ops nested under ``scope`` until nothing changes.

    Each sweep seeds a LIFO worklist with every nested op and drains it. The run
    converges when a whole sweep makes no change; at most ``max_iterations``
    sweeps are made.
    """
    config = config or RewriteConfig()
    patterns = patterns if patterns is not None else PatternSet()
    select = engine or direct_engine(patterns)
    report = ChangeReport()
    for _ in range(config.max_iterations):
        report.iterations += 1
        wl = _Worklist(report)
        rewriter = PatternRewriter(wl)
        seed = _seed(scope, config.seed_order)
        # LIFO: push in reverse so ops pop in seed order
        wl.stack.extend(reversed(seed))
        cap = config.max_rewrites_per_sweep or 1000 + 10 * len(seed)
        changes = 0
        while wl.stack and changes < cap:
            op = wl.stack.pop()
            if op._erased or op.parent is None or op is scope:
                continue
            if _process(op, select, rewriter, config, report):
                changes += 1
        if changes == 0:
            report.converged = True
            break
    return report


def _process(op, select, rewriter, config, report) -> bool:
    if config.erase_dead and is_trivially_dead(op):
        rewriter.set_root(op, "dead")
        report.trace.append(f"dead:{op.name}")
        rewriter.erase_if_dead([op])
        return True
    if config.fold:
        res = try_fold(op)
        if res is not None:
            rewriter.set_root(op, f"fold:{op.name}")
            values = [
                r if isinstance(r, Value) else rewriter.constant(r, op.results[i].type)
                for i, r in enumerate(res)
            ]
            rewriter.replace_op(op, values)
            report.rewrites_applied += 1
            report.trace.append(f"fold:{op.name}")
            return True
    hit = select(op)
    if hit is None:
        return False
    pattern, m = hit
    rewriter.set_root(op, pattern.name)
    pattern.rewrite(op, m, rewriter)
    report.rewrites_applied += 1
    report.trace.append(pattern.name)
    return True
