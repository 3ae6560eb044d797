"""Running matcher programs as the rewrite driver's pattern-selection engine."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from miniir.ir.core import Block, Operation
from miniir.pdl.program import matchers
from miniir.rewrite.driver import ChangeReport, RewriteConfig, apply_patterns_greedily
from miniir.rewrite.dsl import DslPattern
from miniir.rewrite.pattern import PatternSet


@dataclass
class MatcherStats:
    evaluations: int = 0  # predicate and switch ops executed
    matches: int = 0  # emits reached
    rewrites: int = 0  # matches handed to the driver for rewriting
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def merge(self, other: "MatcherStats") -> "MatcherStats":
        with self._lock:
            self.evaluations += other.evaluations
            self.matches += other.matches
            self.rewrites += other.rewrites
        return self

    def as_dict(self) -> dict[str, int]:
        return {"evaluations": self.evaluations, "matches": self.matches, "rewrites": self.rewrites}


def _descend(op, i):
    if op is None or i >= op.num_operands:
        return None
    d = op.operand(i).defining_op()
    return d if d is not None and len(d.results) == 1 else None


def _operand(op, i):
    return None if op is None or i >= op.num_operands else op.operand(i)


def _holds(o: Operation, env: dict) -> bool:
    name = o.name
    a = o.attributes
    h = env[o.operand(0)]
    if h is None:
        return False
    if name == "pat.check_opcode":
        return h.name == a["opcode"].text
    if name == "pat.check_arity":
        return h.num_operands == a["n"].value
    if name == "pat.check_op_arity":
        return h.name == a["opcode"].text and h.num_operands == a["n"].value
    if name == "pat.check_attr":
        got = h.attributes.get(a["name"].text)
        want = a.get("value")
        return got is not None and (want is None or got == want)
    if name == "pat.check_attrs":
        attrs = h.attributes
        return all(attrs.get(k) == v for k, v in a["expected"].entries) and all(
            p.text in attrs for p in a["present"]
        )
    if name == "pat.check_type":
        return h.type == a["type"].type
    if name == "pat.check_same":
        return h is env[o.operand(1)]
    raise ValueError(f"unknown predicate {name}")


def _switch_region(o: Operation, h) -> int:
    if h is not None:
        for k, (c, n) in enumerate(zip(o.attributes["cases"], o.attributes["arities"])):
            if h.name == c.text and (n.value < 0 or h.num_operands == n.value):
                return k
    return len(o.regions) - 1


def _run(block: Block, env: dict, stats: MatcherStats) -> Operation | None:
    for o in block.ops:
        name = o.name
        if name == "pat.descend":
            env[o.results[0]] = _descend(env[o.operand(0)], o.attributes["index"].value)
        elif name == "pat.operand":
            env[o.results[0]] = _operand(env[o.operand(0)], o.attributes["index"].value)
        elif name == "pat.attr":
            h = env[o.operand(0)]
            env[o.results[0]] = None if h is None else h.attributes.get(o.attributes["name"].text)
        elif name == "pat.emit":
            return o
        elif name == "pat.fail":
            return None
        elif name == "pat.switch_opcode":
            stats.evaluations += 1
            k = _switch_region(o, env[o.operand(0)])
            hit = _run(o.regions[k].blocks[0], env, stats)
            if hit is not None:
                return hit
        else:
            stats.evaluations += 1
            if _holds(o, env):
                hit = _run(o.regions[0].blocks[0], env, stats)
                if hit is not None:
                    return hit
    return None


def match_op(module: Operation, op: Operation, stats: MatcherStats) -> tuple[str, dict] | None:
    """First emit reached by the module's matchers on ``op``: (pattern name, captures)."""
    for m in matchers(module):
        entry = m.regions[0].blocks[0]
        env = {entry.args[0]: op}
        emit = _run(entry, env, stats)
        if emit is not None:
            stats.matches += 1
            names = [c.text for c in emit.attributes["captures"]]
            return emit.attributes["pattern"].text, {n: env[v] for n, v in zip(names, emit.operands)}
    return None


def _emitted(module: Operation) -> set[str]:
    return {o.attributes["pattern"].text for o in module.walk() if o.name == "pat.emit"}


def matcher_engine(module: Operation, patterns: PatternSet, stats: MatcherStats):
    """An engine for :func:`apply_patterns_greedily` that selects patterns by running ``module``.

    Patterns of ``patterns`` that are not declarative rules cannot be compiled;
    they are still tried directly, in priority order around the matcher's pick.
    """
    unknown = sorted(n for n in _emitted(module) if patterns.get(n) is None)
    if unknown:
        raise ValueError(f"matcher emits unknown patterns: {', '.join(unknown)}")

    def select(op: Operation):
        hit = match_op(module, op, stats)
        chosen = patterns.get(hit[0]) if hit is not None else None
        for p in patterns.for_op(op.name):
            if isinstance(p, DslPattern):
                continue
            if chosen is not None and patterns.priority(p) > patterns.priority(chosen):
                break
            m = p.match(op)
            if m is not None and m is not False:
                return p, m
        if chosen is None:
            return None
        stats.rewrites += 1
        return chosen, hit[1]

    return select


def run_matcher(
    module: Operation,
    scope: Operation,
    patterns: PatternSet,
    config: RewriteConfig | None = None,
) -> tuple[ChangeReport, MatcherStats]:
    """Greedy rewriting of ``scope`` with patterns selected by the matcher program."""
    stats = MatcherStats()
    report = apply_patterns_greedily(scope, patterns, config, engine=matcher_engine(module, patterns, stats))
    return report, stats
