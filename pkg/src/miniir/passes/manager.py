"""Runs pass pipelines over nested anchor ops, optionally on a thread pool."""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from miniir.diagnostics import Diagnostic, error
from miniir.ir.context import Trait
from miniir.ir.core import IRError, Operation
from miniir.passes.pipeline import PassInvocation, PipelineError, PipelineSpec
from miniir.passes.registry import PASSES, PassEnv, PassError
from miniir.rewrite.driver import ChangeReport
from miniir.rewrite.pattern import RewriteError
from miniir.textio.printer import print_op
from miniir.verifier import verify


@dataclass
class PassRecord:
    pass_name: str
    anchor: str
    report: ChangeReport
    time_ms: float
    verified: bool | None  # None when verify-each is off
    ir_after: str | None = None  # printed anchor, when the manager captures IR


@dataclass
class PassReport:
    records: list[PassRecord] = field(default_factory=list)
    ok: bool = True
    diagnostics: list[Diagnostic] = field(default_factory=list)
    wall_ms: float = 0.0

    @property
    def passes_run(self) -> int:
        return len(self.records)

    def format_table(self) -> str:
        rows = [("pass", "anchor", "rewrites", "time-ms")]
        for r in self.records:
            rows.append((r.pass_name, r.anchor, str(r.report.rewrites_applied), f"{r.time_ms:.2f}"))
        widths = [max(len(row[i]) for row in rows) for i in range(4)]
        return "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows
        )


class _Abort(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics


def anchor_label(op: Operation) -> str:
    name = op.attributes.get("sym_name")
    return f"{op.name} @{name.text}" if name is not None and hasattr(name, "text") else op.name


def collect_anchors(root: Operation, anchor: str) -> list[Operation]:
    """Ops named ``anchor`` nested in ``root``, in document order, outermost only."""
    out: list[Operation] = []
    stack = [op for r in reversed(root.regions) for b in reversed(r.blocks) for op in reversed(b.ops)]
    while stack:
        op = stack.pop()
        if op.name == anchor:
            out.append(op)
            continue
        for r in reversed(op.regions):
            for b in reversed(r.blocks):
                stack.extend(reversed(b.ops))
    return out


def validate_pipeline(spec: PipelineSpec, root_name: str, ctx=None) -> None:
    if spec.anchor != root_name:
        raise PipelineError(f"pipeline anchored on '{spec.anchor}' cannot run on '{root_name}'")
    _validate(spec, ctx)


def _validate(spec: PipelineSpec, ctx) -> None:
    for e in spec.entries:
        if isinstance(e, PipelineSpec):
            if ctx is not None and ctx.get_op_def(e.anchor) is None:
                raise PipelineError(f"unknown anchor op '{e.anchor}'")
            _validate(e, ctx)
            continue
        p = PASSES.get(e.name)
        if p is None:
            raise PipelineError(f"unknown pass '{e.name}'")
        if p.anchor is not None and p.anchor != spec.anchor:
            raise PipelineError(f"pass '{e.name}' must be anchored on '{p.anchor}', not '{spec.anchor}'")
        for k in e.options:
            if k not in p.options:
                raise PipelineError(f"pass '{e.name}' has no option '{k}'")


class PassManager:
    def __init__(
        self,
        threads: int = 1,
        verify_each: bool = True,
        env: PassEnv | None = None,
        capture_ir: str | None = None,
    ):
        """``capture_ir`` ("custom" or "generic") prints each anchor after every pass."""
        if threads < 1:
            raise ValueError("threads must be at least 1")
        self.threads = threads
        self.verify_each = verify_each
        self.env = env or PassEnv()
        self.capture_ir = capture_ir
        self._local = threading.local()
        self._cancel = threading.Event()

    def run(self, module: Operation, spec: PipelineSpec) -> PassReport:
        start = time.perf_counter()
        report = PassReport()
        validate_pipeline(spec, module.name, module.context)
        self._cancel.clear()
        try:
            self._run_entries(module, spec.entries, report.records)
        except _Abort as a:
            report.ok = False
            report.diagnostics = a.diagnostics
        report.wall_ms = (time.perf_counter() - start) * 1000
        return report

    def _run_entries(self, op: Operation, entries, sink: list[PassRecord]) -> None:
        for e in entries:
            if isinstance(e, PassInvocation):
                self._run_pass(op, e, sink)
            else:
                self._run_nested(op, e, sink)

    def _run_nested(self, op: Operation, spec: PipelineSpec, sink: list[PassRecord]) -> None:
        anchors = collect_anchors(op, spec.anchor)
        parallel = (
            self.threads > 1
            and len(anchors) > 1
            and not getattr(self._local, "in_worker", False)
            and all(a.has_trait(Trait.ISOLATED_FROM_ABOVE) for a in anchors)
        )
        if not parallel:
            for a in anchors:
                self._run_entries(a, spec.entries, sink)
            return

        def work(a):
            self._local.in_worker = True
            local: list[PassRecord] = []
            try:
                self._run_entries(a, spec.entries, local)
                return local, None
            except _Abort as ab:
                self._cancel.set()
                return local, ab
            finally:
                self._local.in_worker = False

        with ThreadPoolExecutor(max_workers=min(self.threads, len(anchors))) as pool:
            results = list(pool.map(work, anchors))
        # merge in document order so reports do not depend on scheduling
        for local, ab in results:
            sink.extend(local)
            if ab is not None:
                raise ab

    def _run_pass(self, op: Operation, inv: PassInvocation, sink: list[PassRecord]) -> None:
        if self._cancel.is_set():
            raise _Abort([error("pipeline cancelled after a failure in another anchor", op, rule="pass")])
        p = PASSES[inv.name]
        t0 = time.perf_counter()
        try:
            rep = p.run(op, inv.options, self.env)
        except (PassError, RewriteError, IRError, ValueError) as e:
            raise _Abort([error(f"pass '{inv.name}' failed: {e}", op, rule="pass")]) from None
        elapsed = (time.perf_counter() - t0) * 1000
        dump = print_op(op, self.capture_ir) if self.capture_ir else None
        if not self.verify_each:
            sink.append(PassRecord(inv.name, anchor_label(op), rep, elapsed, None, dump))
            return
        diags = verify(op)
        sink.append(PassRecord(inv.name, anchor_label(op), rep, elapsed, not diags, dump))
        if diags:
            note = error(
                f"verification failed after pass '{inv.name}' on {anchor_label(op)}", op, rule="verify-each"
            )
            raise _Abort([note, *diags])


def run_pipeline(
    module: Operation,
    spec: PipelineSpec,
    threads: int = 1,
    verify_each: bool = True,
    env: PassEnv | None = None,
    capture_ir: str | None = None,
) -> PassReport:
    return PassManager(threads, verify_each, env, capture_ir).run(module, spec)
