"""Inlining of direct calls, guarded by the dialects' inlining interfaces."""

from __future__ import annotations

from dataclasses import dataclass, field

from miniir.ir.core import Block, Builder, Operation, Region
from miniir.ir.symbols import resolve_symbol
from miniir.rewrite.driver import ChangeReport

DEFAULT_MAX_OPS = 32


@dataclass
class InlineReport(ChangeReport):
    inlined: int = 0
    # reason -> number of call sites left alone
    skipped: dict = field(default_factory=dict)

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1


def _callee(call: Operation) -> Operation | None:
    fn = resolve_symbol(call, call.attributes["callee"].name)
    return fn if fn is not None and fn.name == "func.func" else None


def _calls(fn: Operation) -> list[Operation]:
    return [o for o in fn.walk() if o.name == "func.call"]


def _recursive(funcs: list[Operation]) -> set[int]:
    """Functions in a call-graph cycle (Tarjan's SCC algorithm, iterative)."""
    edges = {id(f): [c for c in (_callee(x) for x in _calls(f)) if c is not None] for f in funcs}
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[Operation] = []
    out: set[int] = set()
    counter = 0
    for root in funcs:
        if id(root) in index:
            continue
        work = [(root, iter(edges.get(id(root), [])))]
        index[id(root)] = low[id(root)] = counter
        counter += 1
        stack.append(root)
        on_stack.add(id(root))
        while work:
            f, it = work[-1]
            nxt = next(it, None)
            if nxt is not None:
                if id(nxt) not in index:
                    index[id(nxt)] = low[id(nxt)] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(id(nxt))
                    work.append((nxt, iter(edges.get(id(nxt), []))))
                elif id(nxt) in on_stack:
                    low[id(f)] = min(low[id(f)], index[id(nxt)])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[id(parent)] = min(low[id(parent)], low[id(f)])
            if low[id(f)] == index[id(f)]:
                scc = []
                while True:
                    g = stack.pop()
                    on_stack.discard(id(g))
                    scc.append(g)
                    if g is f:
                        break
                if len(scc) > 1 or any(c is f for c in edges.get(id(f), [])):
                    out.update(id(g) for g in scc)
    return out


def _post_order(funcs: list[Operation]) -> list[Operation]:
    """Callees before callers; ties in document order."""
    seen: set[int] = set()
    order: list[Operation] = []
    for root in funcs:
        if id(root) in seen:
            continue
        seen.add(id(root))
        work = [(root, iter([c for c in (_callee(x) for x in _calls(root)) if c is not None]))]
        while work:
            f, it = work[-1]
            nxt = next(it, None)
            if nxt is None:
                order.append(f)
                work.pop()
            elif id(nxt) not in seen and nxt in funcs:
                seen.add(id(nxt))
                work.append((nxt, iter([c for c in (_callee(x) for x in _calls(nxt)) if c is not None])))
    return order


def _legal(callee: Operation, dest: Region) -> bool:
    ctx = callee.context
    for op in callee.walk():
        if op is callee:
            continue
        if not op.is_registered:
            return False
        d = ctx.get_dialect(op.dialect)
        if d is None or d.inliner is None or not d.inliner.is_legal_to_inline(op, dest):
            return False
    return True


def _inline_call(call: Operation, callee: Operation) -> None:
    body = callee.regions[0]
    mapping: dict = {}
    if len(body.blocks) == 1:
        entry = body.entry
        for a, v in zip(entry.args, call.operands):
            mapping[a] = v
        b = Builder.before(call)
        ret = entry.last_op
        for op in entry.ops[:-1]:
            b.insert(op.clone(mapping))
        call.replace_all_uses_with([mapping.get(v, v) for v in ret.operands])
        call.erase()
        return
    pre = call.parent
    region = pre.parent
    cont = pre.split_before(call)
    for r in call.results:
        r.replace_all_uses_with(cont.add_argument(r.type))
    call_operands = list(call.operands)
    location = call.location
    call.erase()
    staging = Region()
    body.clone_into(staging, mapping)
    anchor = pre
    cloned = list(staging.blocks)
    for blk in cloned:
        region.insert_block_after(anchor, blk.detach())
        anchor = blk
    Builder.at_end(pre).create("cf.br", successors=[(cloned[0], call_operands)], location=location)
    ctx = callee.context
    for blk in cloned:
        term = blk.last_op
        if term is not None and term.name == "func.return":
            ctx.get_dialect("func").inliner.handle_terminator(term, cont)


def run_inliner(module: Operation, max_ops: int = DEFAULT_MAX_OPS) -> InlineReport:
    """Inline direct calls to small, non-recursive functions whose ops may be inlined."""
    report = InlineReport(iterations=1, converged=True)
    funcs = [o for o in module.walk() if o.name == "func.func"]
    recursive = _recursive(funcs)
    for fn in _post_order(funcs):
        for call in _calls(fn):
            callee = _callee(call)
            if callee is None or not callee.regions[0].blocks:
                report.skip("unresolved")
            elif id(callee) in recursive:
                report.skip("recursive")
            elif sum(1 for _ in callee.walk()) - 1 > max_ops:
                report.skip("too-large")
            elif not _legal(callee, call.parent.parent):
                report.skip("illegal")
            else:
                _inline_call(call, callee)
                report.inlined += 1
                report.rewrites_applied += 1
                report.trace.append(f"inline:@{call.attributes['callee'].name}")
    return report
