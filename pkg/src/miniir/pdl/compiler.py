"""Compiling rewrite rules to matcher programs, and optimizing those programs."""

from __future__ import annotations

from collections import Counter

from miniir.dialects.builtin import new_module
from miniir.ir import types as T
from miniir.ir.core import Operation
from miniir.passes.cse import run_cse
from miniir.pdl.program import (
    STRUCTURAL, AttrPos, Chain, Check, CheckNode, Emit, OpPos, SwitchNode, ValuePos,
    chain_nodes, flatten, i64, matchers, new_matcher, read_matcher, replace_matchers, s,
)
from miniir.rewrite.driver import ChangeReport
from miniir.rewrite.dsl import BackRef, Capture, DagNode, DslPattern
from miniir.rewrite.pattern import PatternSet

STAGES = ("naive", "contracted", "reordered", "factored", "final")

# structural checks first: they guard every deeper position
KIND_RANK = {
    "check_op_arity": 0, "check_opcode": 0, "check_arity": 1,
    "check_attrs": 2, "check_attr": 2, "check_type": 3, "check_same": 4,
}


def _check(kind: str, pos, **params) -> Check:
    return Check(kind, tuple(pos), tuple(sorted(params.items())))


# -- naive compilation -------------------------------------------------------------


def pattern_chain(ctx, p: DslPattern) -> Chain:
    """The predicates of ``p`` in the order the direct matcher tests them."""
    checks: list[Check] = []
    bound: dict = {}

    def node(n: DagNode, pos: OpPos):
        checks.append(_check("check_opcode", [pos], opcode=s(ctx, n.opcode)))
        checks.append(_check("check_arity", [pos], n=i64(ctx, len(n.args))))
        for name, want in n.attrs:
            if isinstance(want, Capture):
                checks.append(_check("check_attr", [pos], name=s(ctx, name)))
                bound[want.name] = AttrPos(pos, name)
            else:
                checks.append(_check("check_attr", [pos], name=s(ctx, name), value=want))
        for i, arg in enumerate(n.args):
            here = ValuePos(pos, i)
            if isinstance(arg, Capture):
                bound[arg.name] = here
            elif isinstance(arg, BackRef):
                checks.append(_check("check_same", [here, bound[arg.name]]))
            else:
                node(arg, OpPos(pos.path + (i,)))

    node(p.source, OpPos())
    for pred in p.preds:
        if pred.kind == "same":
            checks.append(_check("check_same", [bound[pred.args[0].name], bound[pred.args[1].name]]))
        elif pred.kind == "attr_eq":
            at = bound[pred.args[0].name]
            checks.append(_check("check_attr", [at.op], name=s(ctx, at.name), value=pred.args[1]))
        else:
            ty = ctx.intern_attr(T.TypeAttr(pred.args[1]))
            checks.append(_check("check_type", [bound[pred.args[0].name]], type=ty))
    return Chain(checks, Emit(p.name, p.benefit, tuple(bound.items())))


def compile_patterns_to_matcher(ctx, patterns: PatternSet) -> Operation:
    """One ``pat.matcher`` per root opcode; each holds one linear chain per pattern.

    Chains are ordered by priority (benefit, then declaration), roots by the
    declaration of their first pattern.
    """
    roots: list[str] = []
    for p in patterns.patterns:
        if not isinstance(p, DslPattern):
            raise TypeError(f"pattern {p.name!r} is not a declarative rule and cannot be compiled")
        if p.root not in roots:
            roots.append(p.root)
    module = new_module(ctx)
    replace_matchers(
        module,
        [
            new_matcher(ctx, [chain_nodes(pattern_chain(ctx, p)) for p in patterns.index[r]], r)
            for r in roots
        ],
    )
    return module


# -- contraction ------------------------------------------------------------------


def _fuse(ctx, a: Check, b: Check) -> Check | None:
    if a.pos != b.pos:
        return None
    kinds = {a.kind, b.kind}
    if kinds == {"check_opcode", "check_arity"}:
        op = a if a.kind == "check_opcode" else b
        ar = b if op is a else a
        return _check("check_op_arity", a.pos, opcode=op.param("opcode"), n=ar.param("n"))
    if kinds <= {"check_attr", "check_attrs"}:
        expected: dict = {}
        present: set = set()
        for c in (a, b):
            if c.kind == "check_attrs":
                items = c.param("expected").as_dict()
                names = {x.text for x in c.param("present")}
            else:
                name = c.param("name").text
                v = c.param("value")
                items = {} if v is None else {name: v}
                names = set() if v is not None else {name}
            for k, v in items.items():
                if k in expected and expected[k] != v:
                    return None  # contradictory; leave the chain as written
                expected[k] = v
            present |= names
        present -= set(expected)
        return _check(
            "check_attrs",
            a.pos,
            expected=ctx.intern_attr(T.DictAttr.from_mapping(expected)),
            present=ctx.intern_attr(T.ArrayAttr(tuple(s(ctx, n) for n in sorted(present)))),
        )
    return None


def _contract(ctx, nodes: list) -> int:
    n_fused = 0
    for i, n in enumerate(nodes):
        if isinstance(n, CheckNode):
            while len(n.children) == 1 and isinstance(n.children[0], CheckNode):
                child = n.children[0]
                fused = _fuse(ctx, n.check, child.check)
                if fused is None:
                    break
                n = nodes[i] = CheckNode(fused, child.children)
                n_fused += 1
            n_fused += _contract(ctx, n.children)
        elif isinstance(n, SwitchNode):
            for _, _, children in n.cases:
                n_fused += _contract(ctx, children)
    return n_fused


def contract_matcher(module: Operation) -> ChangeReport:
    """Fuse a check whose only successor is another check on the same position."""
    ctx = module.context
    report = ChangeReport(iterations=1, converged=True)
    new = []
    for m in matchers(module):
        nodes = read_matcher(m)
        report.rewrites_applied += _contract(ctx, nodes)
        new.append(new_matcher(ctx, nodes, _root(m)))
    if report.rewrites_applied:
        replace_matchers(module, new)
    return report


def _root(m: Operation) -> str | None:
    r = m.attributes.get("root")
    return None if r is None else r.text


# -- predicate reordering --------------------------------------------------------


def _op_of(p) -> OpPos:
    return p if isinstance(p, OpPos) else p.op


def _depends(c: Check, on: Check) -> bool:
    """``on`` guards a position ``c`` reads: a structural check above it (or at
    the op whose operand or attribute ``c`` reads)."""
    if on.kind not in STRUCTURAL or on is c:
        return False
    q = on.pos[0].path
    for r in c.pos:
        path = _op_of(r).path
        if isinstance(r, OpPos):
            if len(q) < len(path) and path[: len(q)] == q:
                return True
        elif isinstance(r, ValuePos) and path[: len(q)] == q:
            return True
        elif isinstance(r, AttrPos) and len(q) < len(path) and path[: len(q)] == q:
            return True
    return False


def schedule(checks: list[Check], freq: Counter) -> list[Check]:
    """Topological order of ``checks`` picking the smallest canonical key first."""
    todo = list(dict.fromkeys(checks))
    out: list[Check] = []
    while todo:
        ready = [c for c in todo if not any(_depends(c, d) for d in todo if d is not c)]
        best = min(ready, key=lambda c: (KIND_RANK[c.kind], -freq[c], c.key()))
        out.append(best)
        todo.remove(best)
    return out


def reorder_predicates(module: Operation) -> ChangeReport:
    """Sort each chain's independent predicates by (kind, global frequency, text)."""
    ctx = module.context
    report = ChangeReport(iterations=1, converged=True)
    groups = [(m, flatten(read_matcher(m), ctx)) for m in matchers(module)]
    freq: Counter = Counter()
    for _, chains in groups:
        for ch in chains:
            freq.update(set(ch.checks))
    new = []
    for m, chains in groups:
        out = []
        for ch in chains:
            order = schedule(ch.checks, freq)
            if order != ch.checks:
                report.rewrites_applied += 1
            out.append(chain_nodes(Chain(order, ch.emit)))
        new.append(new_matcher(ctx, out, _root(m)))
    if report.rewrites_applied:
        replace_matchers(module, new)
    return report


# -- factoring ------------------------------------------------------------------


def _insert(trie: list, chain: Chain) -> int:
    merged = 0
    level = trie
    for c in chain.checks:
        last = level[-1] if level else None
        if isinstance(last, CheckNode) and last.check == c:
            merged += 1
        else:
            last = CheckNode(c)
            level.append(last)
        level = last.children
    level.append(chain.emit)
    return merged


def _opcode_case(n) -> tuple | None:
    if isinstance(n, CheckNode) and n.check.kind in ("check_opcode", "check_op_arity"):
        arity = n.check.param("n")
        return n.check.pos[0], n.check.param("opcode").text, -1 if arity is None else arity.value
    return None


def _switchify(nodes: list) -> tuple[list, int]:
    """Merge runs of opcode checks on one position with distinct opcodes into switches."""
    out: list = []
    made = 0
    i = 0
    while i < len(nodes):
        n = nodes[i]
        case = _opcode_case(n)
        if case is not None:
            run = [(case, n)]
            j = i + 1
            while j < len(nodes):
                nxt = _opcode_case(nodes[j])
                if nxt is None or nxt[0] != case[0] or nxt[1] in {c[0][1] for c in run}:
                    break
                run.append((nxt, nodes[j]))
                j += 1
            if len(run) > 1:
                cases = []
                for (_, opcode, arity), node in run:
                    children, k = _switchify(node.children)
                    made += k
                    cases.append((opcode, arity, children))
                out.append(SwitchNode(case[0], cases))
                made += 1
                i = j
                continue
        if isinstance(n, CheckNode):
            children, k = _switchify(n.children)
            made += k
            out.append(CheckNode(n.check, children))
        elif isinstance(n, SwitchNode):
            cases = []
            for opcode, arity, ch in n.cases:
                children, k = _switchify(ch)
                made += k
                cases.append((opcode, arity, children))
            out.append(SwitchNode(n.pos, cases))
        else:
            out.append(n)
        i += 1
    return out, made


def factor_matcher(module: Operation) -> ChangeReport:
    """Merge all chains into one prefix trie, then turn opcode fan-outs into switches.

    Only a chain's direct predecessor in priority order is merged with, so the
    trie's leaves stay in priority order.
    """
    ctx = module.context
    report = ChangeReport(iterations=1, converged=True)
    ms = matchers(module)
    roots = {_root(m) for m in ms}
    trie: list = []
    for m in ms:
        for ch in flatten(read_matcher(m), ctx):
            report.rewrites_applied += _insert(trie, ch)
    trie, switches = _switchify(trie)
    report.rewrites_applied += switches
    if report.rewrites_applied or len(ms) > 1:
        root = next(iter(roots)) if len(roots) == 1 else None
        replace_matchers(module, [new_matcher(ctx, trie, root)] if trie else [])
    return report


# -- stages ---------------------------------------------------------------------


def clone_module(module: Operation) -> Operation:
    return module.clone()


def matcher_stages(ctx, patterns: PatternSet) -> dict[str, Operation]:
    """Every optimization stage, each as its own module."""
    out = {"naive": compile_patterns_to_matcher(ctx, patterns)}
    m = clone_module(out["naive"])
    contract_matcher(m)
    out["contracted"] = m
    m = clone_module(m)
    reorder_predicates(m)
    out["reordered"] = m
    m = clone_module(m)
    factor_matcher(m)
    out["factored"] = m
    m = clone_module(m)
    run_cse(m)
    out["final"] = m
    return out


def optimize_matcher(module: Operation) -> ChangeReport:
    """contract, reorder, factor, then CSE; in place."""
    report = ChangeReport(iterations=1, converged=True)
    for step in (contract_matcher, reorder_predicates, factor_matcher, run_cse):
        report.merge(step(module))
    return report
