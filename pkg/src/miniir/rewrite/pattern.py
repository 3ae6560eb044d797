"""Rewrite patterns and the rewriter handed to them."""

from __future__ import annotations

from typing import Any, Sequence

from miniir.ir import types as T
from miniir.ir.context import Trait
from miniir.ir.core import Builder, Operation, Value


class RewriteError(Exception):
    """A pattern produced an invalid replacement."""


class Pattern:
    """Base class. ``root`` is the opcode the pattern is anchored on (None = any op).

    ``match`` returns a truthy match record or None; ``rewrite`` applies it.
    """

    name = "pattern"
    benefit = 1
    root: str | None = None

    def match(self, op: Operation) -> Any:
        raise NotImplementedError

    def rewrite(self, op: Operation, m: Any, rewriter: "PatternRewriter") -> None:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} benefit={self.benefit}>"


class PatternSet:
    """Patterns in declaration order, indexed by root opcode.

    Each index bucket is sorted by (benefit descending, declaration order).
    """

    def __init__(self, patterns: Sequence[Pattern] = ()):
        self.patterns: list[Pattern] = []
        self.index: dict[str | None, list[Pattern]] = {}
        self._by_name: dict[str, Pattern] = {}
        self._order: dict[int, int] = {}
        for p in patterns:
            self.add(p)

    def priority(self, p: Pattern) -> tuple[int, int]:
        return (-p.benefit, self._order[id(p)])

    def add(self, p: Pattern) -> None:
        if p.name in self._by_name:
            raise ValueError(f"duplicate pattern name {p.name!r}")
        self._by_name[p.name] = p
        self._order[id(p)] = len(self.patterns)
        self.patterns.append(p)
        bucket = self.index.setdefault(p.root, [])
        bucket.append(p)
        bucket.sort(key=self.priority)

    def extend(self, other: "PatternSet | Sequence[Pattern]") -> "PatternSet":
        for p in (other.patterns if isinstance(other, PatternSet) else other):
            self.add(p)
        return self

    def for_op(self, name: str) -> list[Pattern]:
        specific = self.index.get(name, [])
        generic = self.index.get(None, [])
        if not generic:
            return specific
        return sorted(specific + generic, key=self.priority)

    def get(self, name: str) -> Pattern | None:
        return self._by_name.get(name)

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)


class Listener:
    """Notified by the rewriter so a driver can maintain its worklist."""

    def created(self, op: Operation) -> None: ...

    def erased(self, op: Operation) -> None: ...

    def changed(self, op: Operation) -> None: ...


def constant_value(v: Value) -> T.Attribute | None:
    """The attribute of a constant-like defining op, if any."""
    op = v.defining_op()
    if op is not None and op.name == "arith.constant":
        return op.attributes.get("value")
    return None


def materialize_constant(builder: Builder, attr: T.Attribute, type: T.Type, dialect: str | None = None) -> Value:
    ctx = builder.context
    for ns in (dialect, "arith"):
        d = ctx.get_dialect(ns) if ns else None
        if d is not None and d.materialize_constant is not None:
            op = d.materialize_constant(builder, attr, type)
            if op is not None:
                return op.results[0]
    raise RewriteError(f"no dialect can materialize constant {attr} of type {type}")


class PatternRewriter:
    """Mutation API for patterns; inserts new ops before the current root."""

    def __init__(self, listener: Listener | None = None):
        self.listener = listener or Listener()
        self.root: Operation | None = None
        self.pattern_name = ""

    def set_root(self, op: Operation, pattern_name: str = "") -> None:
        self.root = op
        self.pattern_name = pattern_name

    def builder(self) -> Builder:
        b = Builder.before(self.root)
        b.location = self.root.location
        return b

    def create(self, name, operands=(), result_types=(), attributes=None, regions=0, successors=()) -> Operation:
        op = self.builder().create(name, operands, result_types, attributes, regions, successors)
        self.listener.created(op)
        return op

    def constant(self, attr: T.Attribute, type: T.Type) -> Value:
        v = materialize_constant(self.builder(), attr, type, self.root.dialect)
        self.listener.created(v.defining_op())
        return v

    def replace_op(self, op: Operation, values: Sequence[Value]) -> None:
        if len(values) != len(op.results):
            raise RewriteError(
                f"pattern {self.pattern_name}: {op.name} has {len(op.results)} results "
                f"but the replacement provides {len(values)} values"
            )
        for r, v in zip(op.results, values):
            if r.type != v.type:
                raise RewriteError(
                    f"pattern {self.pattern_name}: replacement type {v.type} does not match "
                    f"result type {r.type} of {op.name}"
                )
        for r, v in zip(op.results, values):
            for user in r.users():
                self.listener.changed(user)
            r.replace_all_uses_with(v)
        producers = [x.defining_op() for x in op.operands]
        self.erase_op(op)
        self.erase_if_dead([p for p in producers if p is not None])

    def erase_op(self, op: Operation) -> None:
        for o in op.walk("post"):
            self.listener.erased(o)
        for x in op.operands:
            d = x.defining_op()
            if d is not None:
                self.listener.changed(d)
        op.erase()

    def erase_if_dead(self, ops: Sequence[Operation]) -> None:
        stack = list(ops)
        while stack:
            op = stack.pop()
            if op._erased or not is_trivially_dead(op):
                continue
            producers = [x.defining_op() for x in op.operands]
            self.erase_op(op)
            stack.extend(p for p in producers if p is not None)

    def modify(self, op: Operation, fn) -> None:
        fn()
        self.listener.changed(op)


def is_trivially_dead(op: Operation) -> bool:
    return (
        op.parent is not None
        and op.has_trait(Trait.NO_SIDE_EFFECT)
        and not op.is_terminator
        and all(not r.uses for r in op.results)
    )


class CommutativeConstantsRight(Pattern):
    """Move a constant left operand of a commutative binary op to the right."""

    benefit = 1

    def __init__(self, opcode: str):
        self.root = opcode
        self.name = f"{opcode}.constants_right"

    def match(self, op):
        if op.num_operands != 2:
            return None
        lhs, rhs = op.operands
        if constant_value(lhs) is not None and constant_value(rhs) is None:
            return True
        return None

    def rewrite(self, op, m, rewriter):
        lhs, rhs = op.operands
        rewriter.modify(op, lambda: op.set_operands([rhs, lhs]))
