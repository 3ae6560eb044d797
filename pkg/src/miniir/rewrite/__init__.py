"""Pattern rewriting: patterns, the rule DSL, folding and the greedy driver."""

from miniir.rewrite.canonicalize import canonicalization_patterns, run_canonicalizer
from miniir.rewrite.driver import (
    ChangeReport,
    RewriteConfig,
    apply_patterns_greedily,
    direct_engine,
    try_fold,
)
from miniir.rewrite.dsl import DslPattern, parse_pattern_file
from miniir.rewrite.pattern import (
    CommutativeConstantsRight,
    Listener,
    Pattern,
    PatternRewriter,
    PatternSet,
    RewriteError,
    constant_value,
    is_trivially_dead,
    materialize_constant,
)

__all__ = [
    "ChangeReport", "CommutativeConstantsRight", "DslPattern", "Listener", "Pattern",
    "PatternRewriter", "PatternSet", "RewriteConfig", "RewriteError", "apply_patterns_greedily",
    "canonicalization_patterns", "constant_value", "direct_engine", "is_trivially_dead",
    "materialize_constant", "parse_pattern_file", "run_canonicalizer", "try_fold",
]
