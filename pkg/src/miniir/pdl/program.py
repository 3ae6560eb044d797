"""Position-based view of matcher programs, and conversion to and from pat IR.

Predicates name the position they inspect by its operand path from the root
op, so equal predicates from different patterns compare equal. This is what
reordering and factoring work on; the IR is rebuilt afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from miniir.ir import types as T
from miniir.ir.core import Block, Builder, Operation, Region
from miniir.pdl.dialect import ATTR, OP, VALUE
from miniir.textio.printer import Printer


@dataclass(frozen=True)
class OpPos:
    path: tuple[int, ...] = ()

    def __str__(self):
        return "root" + "".join(f".{i}" for i in self.path)


@dataclass(frozen=True)
class ValuePos:
    op: OpPos
    index: int

    def __str__(self):
        return f"{self.op}#{self.index}"


@dataclass(frozen=True)
class AttrPos:
    op: OpPos
    name: str

    def __str__(self):
        return f"{self.op}[{self.name}]"


Position = Union[OpPos, ValuePos, AttrPos]

STRUCTURAL = frozenset({"check_opcode", "check_arity", "check_op_arity"})


@dataclass(frozen=True)
class Check:
    """One predicate. ``params`` is a tuple of (name, Attribute) pairs."""

    kind: str
    pos: tuple  # positions read; one entry except for check_same
    params: tuple = ()

    def param(self, name, default=None):
        for k, v in self.params:
            if k == name:
                return v
        return default

    def key(self) -> str:
        p = Printer()
        args = ", ".join(map(str, self.pos))
        return f"{self.kind}({args})" + "".join(f" {k}={p.attr(v)}" for k, v in self.params)

    def reads(self) -> list[Position]:
        return list(self.pos)


@dataclass(frozen=True)
class Emit:
    pattern: str
    benefit: int
    captures: tuple  # (name, ValuePos | AttrPos)


@dataclass
class CheckNode:
    check: Check
    children: list = field(default_factory=list)


@dataclass
class SwitchNode:
    pos: OpPos
    cases: list  # (opcode, arity or -1, children)


Node = Union[CheckNode, SwitchNode, Emit]


@dataclass
class Chain:
    checks: list[Check]
    emit: Emit


# -- construction --------------------------------------------------------------


def s(ctx, text: str) -> T.Attribute:
    return ctx.intern_attr(T.StringAttr(text))


def i64(ctx, v: int) -> T.Attribute:
    return ctx.intern_attr(T.IntegerAttr(v, T.i64))


class _Emitter:
    """Materializes position handles afresh at every use; CSE removes the repeats."""

    def __init__(self, root):
        self.root = root

    def op(self, b: Builder, pos: OpPos):
        v = self.root
        for i in pos.path:
            v = b.create("pat.descend", [v], [OP], {"index": i64(b.context, i)}).results[0]
        return v

    def handle(self, b: Builder, pos: Position):
        if isinstance(pos, OpPos):
            return self.op(b, pos)
        base = self.op(b, pos.op)
        if isinstance(pos, ValuePos):
            return b.create("pat.operand", [base], [VALUE], {"index": i64(b.context, pos.index)}).results[0]
        return b.create("pat.attr", [base], [ATTR], {"name": s(b.context, pos.name)}).results[0]

    def check(self, b: Builder, c: Check) -> Operation:
        operands = [self.handle(b, p) for p in c.pos]
        attrs = dict(c.params)
        return b.create(f"pat.{c.kind}", operands, [], attrs, regions=[Region([Block(b.context)])])

    def emit(self, b: Builder, e: Emit) -> Operation:
        ctx = b.context
        ops = [self.handle(b, p) for _, p in e.captures]
        attrs = {
            "pattern": s(ctx, e.pattern),
            "benefit": i64(ctx, e.benefit),
            "captures": ctx.intern_attr(T.ArrayAttr(tuple(s(ctx, n) for n, _ in e.captures))),
        }
        return b.create("pat.emit", ops, [], attrs)

    def switch(self, b: Builder, n: SwitchNode) -> list[Block]:
        ctx = b.context
        h = self.op(b, n.pos)
        attrs = {
            "cases": ctx.intern_attr(T.ArrayAttr(tuple(s(ctx, c[0]) for c in n.cases))),
            "arities": ctx.intern_attr(T.ArrayAttr(tuple(i64(ctx, c[1]) for c in n.cases))),
        }
        regions = [Region([Block(ctx)]) for _ in range(len(n.cases) + 1)]
        b.create("pat.switch_opcode", [h], [], attrs, regions=regions)
        return [r.blocks[0] for r in regions]


def build_nodes(block: Block, nodes: list, em: _Emitter) -> None:
    """Lower a node list into ``block``; siblings after an emit are unreachable and dropped."""
    b = Builder.at_end(block)
    for n in nodes:
        if isinstance(n, Emit):
            em.emit(b, n)
            return
        if isinstance(n, CheckNode):
            op = em.check(b, n.check)
            build_nodes(op.regions[0].blocks[0], n.children, em)
        else:
            blocks = em.switch(b, n)
            for blk, (_, _, children) in zip(blocks, n.cases):
                build_nodes(blk, children, em)
            Builder.at_end(blocks[-1]).create("pat.fail")
    b.create("pat.fail")


def new_matcher(ctx, nodes: list, root: str | None = None) -> Operation:
    entry = Block(ctx, [OP])
    attrs = {"root": s(ctx, root)} if root is not None else {}
    m = Operation(ctx, "pat.matcher", [], [], attrs, regions=[Region([entry])])
    build_nodes(entry, nodes, _Emitter(entry.args[0]))
    return m


def chain_nodes(chain: Chain) -> Node:
    node: Node = chain.emit
    for c in reversed(chain.checks):
        node = CheckNode(c, [node])
    return node


# -- reading IR back -------------------------------------------------------------


class MatcherFormatError(ValueError):
    pass


def read_matcher(m: Operation) -> list:
    entry = m.regions[0].blocks[0]
    return _read_block(entry, {entry.args[0]: OpPos()})


def _read_block(block: Block, pos: dict) -> list:
    out = []
    for op in block.ops:
        name = op.name
        if name == "pat.descend":
            base = pos[op.operand(0)]
            pos[op.results[0]] = OpPos(base.path + (op.attributes["index"].value,))
        elif name == "pat.operand":
            pos[op.results[0]] = ValuePos(pos[op.operand(0)], op.attributes["index"].value)
        elif name == "pat.attr":
            pos[op.results[0]] = AttrPos(pos[op.operand(0)], op.attributes["name"].text)
        elif name == "pat.emit":
            names = [a.text for a in op.attributes["captures"]]
            caps = tuple(zip(names, (pos[v] for v in op.operands)))
            out.append(Emit(op.attributes["pattern"].text, op.attributes["benefit"].value, caps))
            return out
        elif name == "pat.fail":
            return out
        elif name == "pat.switch_opcode":
            cases = []
            for k, (c, a) in enumerate(zip(op.attributes["cases"], op.attributes["arities"])):
                cases.append((c.text, a.value, _read_block(op.regions[k].blocks[0], pos)))
            default = _read_block(op.regions[-1].blocks[0], pos)
            if default:
                raise MatcherFormatError("switch default regions other than pat.fail are not supported")
            out.append(SwitchNode(pos[op.operand(0)], cases))
        elif name.startswith("pat.check_"):
            params = tuple(sorted(op.attributes.items()))
            c = Check(name[4:], tuple(pos[v] for v in op.operands), params)
            out.append(CheckNode(c, _read_block(op.regions[0].blocks[0], pos)))
        else:
            raise MatcherFormatError(f"unexpected op {name} in matcher")
    return out


def case_check(ctx, pos: OpPos, opcode: str, arity: int) -> Check:
    if arity < 0:
        return Check("check_opcode", (pos,), (("opcode", s(ctx, opcode)),))
    return Check("check_op_arity", (pos,), (("n", i64(ctx, arity)), ("opcode", s(ctx, opcode))))


def flatten(nodes: list, ctx, prefix=()) -> list[Chain]:
    """Root-to-leaf paths in evaluation order (a trie evaluated with fallthrough)."""
    out = []
    for n in nodes:
        if isinstance(n, Emit):
            out.append(Chain(list(prefix), n))
            break
        if isinstance(n, CheckNode):
            out.extend(flatten(n.children, ctx, prefix + (n.check,)))
        else:
            for opcode, arity, children in n.cases:
                out.extend(flatten(children, ctx, prefix + (case_check(ctx, n.pos, opcode, arity),)))
    return out


def matchers(module: Operation) -> list[Operation]:
    return [op for op in module.regions[0].blocks[0].ops if op.name == "pat.matcher"]


def replace_matchers(module: Operation, new: list[Operation]) -> None:
    body = module.regions[0].blocks[0]
    for m in matchers(module):
        m.erase()
    end = body.ops[-1]
    for m in new:
        body.insert_before(end, m)
