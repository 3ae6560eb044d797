"""The canonicalizer: folds, registered canonicalization patterns and dead-op cleanup."""

from __future__ import annotations

from miniir.ir.context import Context
from miniir.ir.core import Operation
from miniir.rewrite.driver import ChangeReport, RewriteConfig, apply_patterns_greedily
from miniir.rewrite.pattern import PatternSet


def canonicalization_patterns(ctx: Context) -> PatternSet:
    """One pattern per (op, factory) pair declared in the registered op tables."""
    ps = PatternSet()
    for name in sorted(ctx.op_defs):
        for factory in ctx.op_defs[name].canonicalize:
            p = factory(name)
            if ps.get(p.name) is None:
                ps.add(p)
    return ps


def run_canonicalizer(
    scope: Operation,
    extra: PatternSet | None = None,
    config: RewriteConfig | None = None,
    engine_factory=None,
) -> ChangeReport:
    """``engine_factory`` maps the combined pattern set to a selection engine."""
    ps = canonicalization_patterns(scope.context)
    if extra is not None:
        ps.extend(extra.patterns)
    base = config or RewriteConfig()
    cfg = RewriteConfig(
        max_iterations=base.max_iterations,
        fold=True,
        erase_dead=True,
        seed_order=base.seed_order,
        max_rewrites_per_sweep=base.max_rewrites_per_sweep,
    )
    engine = engine_factory(ps) if engine_factory is not None else None
    return apply_patterns_greedily(scope, ps, cfg, engine)
