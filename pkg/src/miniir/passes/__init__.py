from miniir.passes.cse import run_cse
from miniir.passes.dce import run_dce
from miniir.passes.inliner import DEFAULT_MAX_OPS, InlineReport, run_inliner
from miniir.passes.manager import PassManager, PassRecord, PassReport, collect_anchors, run_pipeline
from miniir.passes.pipeline import PassInvocation, PipelineError, PipelineSpec, parse_pipeline
from miniir.passes.registry import PASSES, Pass, PassEnv, PassError, register_pass

__all__ = [
    "DEFAULT_MAX_OPS", "InlineReport", "PASSES", "Pass", "PassEnv", "PassError", "PassInvocation",
    "PassManager", "PassRecord", "PassReport", "PipelineError", "PipelineSpec", "collect_anchors",
    "parse_pipeline", "register_pass", "run_cse", "run_dce", "run_inliner", "run_pipeline",
]
