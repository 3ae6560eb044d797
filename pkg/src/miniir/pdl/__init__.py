"""Rewrite rules compiled to matcher programs in the ``pat`` dialect."""

from miniir.pdl.compiler import (
    STAGES, compile_patterns_to_matcher, contract_matcher, factor_matcher, matcher_stages,
    optimize_matcher, reorder_predicates,
)
from miniir.pdl.runtime import MatcherStats, match_op, matcher_engine, run_matcher

__all__ = [
    "MatcherStats", "STAGES", "compile_patterns_to_matcher", "contract_matcher", "factor_matcher",
    "match_op", "matcher_engine", "matcher_stages", "optimize_matcher", "reorder_predicates",
    "run_matcher",
]
