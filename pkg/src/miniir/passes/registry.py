"""Named passes. Each declares the op it may be anchored on (None = any op)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from miniir.ir.core import Operation
from miniir.pdl.runtime import MatcherStats
from miniir.rewrite.driver import ChangeReport, RewriteConfig
from miniir.rewrite.pattern import PatternSet


class PassError(Exception):
    """A pass could not run; aborts the pipeline."""


@dataclass
class PassEnv:
    """Pipeline-wide inputs shared by passes (read-only while passes run)."""

    patterns: PatternSet | None = None
    # "direct" or "fsm"; fsm selects the declarative rules by running ``matcher``
    engine: str = "direct"
    matcher: Operation | None = None
    stats: MatcherStats = field(default_factory=MatcherStats)
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Pass:
    name: str
    run: Callable[[Operation, dict, PassEnv], ChangeReport]
    anchor: str | None = None
    options: tuple[str, ...] = ()
    summary: str = ""


def _int_option(options: dict, key: str, default: int) -> int:
    if key not in options:
        return default
    try:
        v = int(options[key])
    except ValueError:
        raise PassError(f"option '{key}' expects an integer, got '{options[key]}'") from None
    if v < 1:
        raise PassError(f"option '{key}' must be positive, got {v}")
    return v


def _cse(op, options, env):
    from miniir.passes.cse import run_cse

    return run_cse(op)


def _dce(op, options, env):
    from miniir.passes.dce import run_dce

    return run_dce(op)


def _canonicalize(op, options, env):
    from miniir.rewrite.canonicalize import run_canonicalizer

    cfg = RewriteConfig(max_iterations=_int_option(options, "max-iterations", 10))
    if env.engine != "fsm":
        return run_canonicalizer(op, env.patterns, cfg)
    if env.matcher is None:
        raise PassError("the fsm engine needs a compiled matcher")
    from miniir.pdl.runtime import matcher_engine

    local = MatcherStats()
    try:
        return run_canonicalizer(op, env.patterns, cfg, lambda ps: matcher_engine(env.matcher, ps, local))
    finally:
        env.stats.merge(local)


def _inline(op, options, env):
    from miniir.passes.inliner import DEFAULT_MAX_OPS, run_inliner

    return run_inliner(op, _int_option(options, "max-ops", DEFAULT_MAX_OPS))


def _lower_affine(op, options, env):
    from miniir.dialects.lower_affine import LoweringError, lower_affine

    try:
        return lower_affine(op)
    except LoweringError as e:
        raise PassError(str(e)) from None


PASSES: dict[str, Pass] = {}


def register_pass(p: Pass) -> Pass:
    if p.name in PASSES:
        raise ValueError(f"pass '{p.name}' registered twice")
    PASSES[p.name] = p
    return p


for _p in (
    Pass("cse", _cse, summary="dominance-scoped common subexpression elimination"),
    Pass("dce", _dce, summary="erase unused side-effect-free ops and unreachable blocks"),
    Pass("canonicalize", _canonicalize, options=("max-iterations",),
         summary="folds, canonicalization patterns and any --patterns rules"),
    Pass("inline", _inline, anchor="builtin.module", options=("max-ops",),
         summary="inline calls to small non-recursive functions"),
    Pass("lower-affine", _lower_affine, anchor="func.func",
         summary="lower affine loops and accesses to arith, cf and memref"),
):
    register_pass(_p)
