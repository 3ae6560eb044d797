"""Declarative rewrite rules.

A pattern file holds any number of rules::

    pattern add_zero benefit(2) {
      match: "arith.addi"($x, "arith.constant"() {value = $c})
      where attr_eq($c, 0 : i32)
      rewrite:
      replace: $x
    }

The source DAG names an opcode, its operands (nested DAGs, ``$x`` captures or
``%x`` back-references to an earlier capture) and optional attribute matches
(``{name = literal}`` or ``{name = $a}``). Operand count must match exactly.
Target ops build fresh values from captures and earlier targets; ``replace``
lists one value per result of the matched root.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from miniir.ir import types as T
from miniir.ir.context import Context
from miniir.ir.core import Operation, Value
from miniir.rewrite.pattern import Pattern, PatternRewriter, PatternSet
from miniir.textio.parser import ParseError, Parser, _diag, _Fail


@dataclass(frozen=True)
class Capture:
    name: str


@dataclass(frozen=True)
class BackRef:
    name: str


@dataclass(frozen=True)
class TargetRef:
    name: str


@dataclass(frozen=True)
class TypeOf:
    ref: Union[Capture, TargetRef]


@dataclass
class DagNode:
    opcode: str
    args: list = field(default_factory=list)  # DagNode | Capture | BackRef
    attrs: list = field(default_factory=list)  # (name, Attribute | Capture)


@dataclass(frozen=True)
class Pred:
    kind: str  # same | attr_eq | type_is
    args: tuple


@dataclass
class TargetOp:
    name: str
    opcode: str
    operands: list  # Capture | TargetRef
    attrs: list  # (name, Attribute | Capture)
    result_type: object  # Type | TypeOf | None for no results


def preorder(node: DagNode):
    """(path, node) for every DAG node; a path is the operand-index trail from the root."""
    stack = [((), node)]
    while stack:
        path, n = stack.pop()
        yield path, n
        for i in reversed(range(len(n.args))):
            if isinstance(n.args[i], DagNode):
                stack.append((path + (i,), n.args[i]))


class DslPattern(Pattern):
    def __init__(self, name, benefit, source, preds, targets, replace):
        self.name = name
        self.benefit = benefit
        self.source: DagNode = source
        self.preds: list[Pred] = preds
        self.targets: list[TargetOp] = targets
        self.replace: list = replace
        self.root = source.opcode

    # -- matching --------------------------------------------------------------

    def match(self, op: Operation):
        caps: dict[str, Value | T.Attribute] = {}
        if not self._match_node(self.source, op, caps):
            return None
        if not all(check_pred(p, caps) for p in self.preds):
            return None
        return caps

    def _match_node(self, node: DagNode, op: Operation, caps) -> bool:
        if op.name != node.opcode or op.num_operands != len(node.args):
            return False
        for name, want in node.attrs:
            a = op.attributes.get(name)
            if a is None:
                return False
            if isinstance(want, Capture):
                caps[want.name] = a
            elif a != want:
                return False
        for i, arg in enumerate(node.args):
            v = op.operand(i)
            if isinstance(arg, Capture):
                caps[arg.name] = v
            elif isinstance(arg, BackRef):
                if caps[arg.name] is not v:
                    return False
            else:
                d = v.defining_op()
                if d is None or len(d.results) != 1 or not self._match_node(arg, d, caps):
                    return False
        return True

    # -- rewriting -------------------------------------------------------------

    def rewrite(self, op: Operation, caps, rewriter: PatternRewriter) -> None:
        env: dict[str, Value | None] = {}

        def value(ref):
            return caps[ref.name] if isinstance(ref, Capture) else env[ref.name]

        for t in self.targets:
            attrs = {k: (caps[v.name] if isinstance(v, Capture) else v) for k, v in t.attrs}
            if t.result_type is None:
                types = []
            elif isinstance(t.result_type, TypeOf):
                types = [value(t.result_type.ref).type]
            else:
                types = [t.result_type]
            new = rewriter.create(t.opcode, [value(r) for r in t.operands], types, attrs)
            env[t.name] = new.results[0] if new.results else None
        rewriter.replace_op(op, [value(r) for r in self.replace])


def check_pred(p: Pred, caps) -> bool:
    a = caps[p.args[0].name]
    if p.kind == "same":
        return a is caps[p.args[1].name]
    if p.kind == "attr_eq":
        return a == p.args[1]
    return a.type == p.args[1]


class _PatternParser(Parser):
    def __init__(self, ctx, src, filename):
        super().__init__(ctx, src, filename)
        self.kinds: dict[str, tuple[str, int]] = {}  # capture -> ("value"|"attr", pos)

    def parse_file(self) -> PatternSet:
        ps = PatternSet()
        while self.tok.kind != "eof":
            start = self.tok.pos
            p = self.parse_pattern()
            if ps.get(p.name) is not None:
                self.fail(f"duplicate pattern name {p.name}", start)
            ps.add(p)
        return ps

    def parse_pattern(self) -> DslPattern:
        self.kinds = {}
        self.expect("pattern")
        name_tok = self.tok
        if name_tok.kind not in ("ident", "string"):
            self.fail(f"expected pattern name, found {self._describe()}")
        self.advance()
        self.expect("benefit")
        self.expect("(")
        benefit = self.parse_int()
        if benefit < 0:
            self.fail("benefit must be non-negative", name_tok.pos)
        self.expect(")")
        self.expect("{")
        self.expect("match")
        self.expect(":")
        source = self.parse_dag()
        preds = []
        if self.accept("where"):
            preds.append(self.parse_pred())
            while self.accept(","):
                preds.append(self.parse_pred())
        self.expect("rewrite")
        self.expect(":")
        targets, defined = [], {}
        while self.tok.kind == "value":
            targets.append(self.parse_target(defined))
        self.expect("replace")
        self.expect(":")
        replace = []
        if not self.at("}"):
            replace.append(self.parse_operand(defined))
            while self.accept(","):
                replace.append(self.parse_operand(defined))
        self.expect("}")
        root_def = self.ctx.get_op_def(source.opcode)
        if root_def is not None and not (root_def.results and root_def.results[-1].variadic):
            if len(root_def.results) != len(replace):
                self.fail(
                    f"replacement provides {len(replace)} values but {source.opcode} has "
                    f"{len(root_def.results)} results",
                    name_tok.pos,
                )
        return DslPattern(name_tok.text, benefit, source, preds, targets, replace)

    def _opcode(self) -> str:
        t = self.expect_kind("string", "quoted opcode")
        self.check_opcode(t.text, t.pos)
        return t.text

    def _bind(self, tok, kind: str) -> Capture:
        name = tok.text[1:]
        if name in self.kinds:
            self.fail(f"capture {name} bound twice", tok.pos)
        self.kinds[name] = (kind, tok.pos)
        return Capture(name)

    def _use(self, tok, kind: str) -> Capture:
        name = tok.text[1:]
        if name not in self.kinds:
            self.fail(f"unbound capture {name}", tok.pos)
        if self.kinds[name][0] != kind:
            self.fail(f"capture {name} is an {self.kinds[name][0]} capture, expected {kind}", tok.pos)
        return Capture(name)

    def parse_dag(self) -> DagNode:
        node = DagNode(self._opcode())
        self.expect("(")
        while not self.at(")"):
            t = self.tok
            if t.kind == "string":
                node.args.append(self.parse_dag())
            elif t.kind == "capture":
                self.advance()
                node.args.append(self._bind(t, "value"))
            elif t.kind == "value":
                self.advance()
                node.args.append(BackRef(self._use(t, "value").name))
            else:
                self.fail(f"expected operand pattern, found {self._describe()}")
            self.accept(",")
        self.expect(")")
        if self.at("{"):
            node.attrs = self.parse_attr_set(bind=True)
        return node

    def parse_attr_set(self, bind: bool) -> list:
        self.expect("{")
        out, seen = [], set()
        while not self.at("}"):
            t = self.tok
            if t.kind not in ("ident", "string"):
                self.fail(f"expected attribute name, found {self._describe()}")
            self.advance()
            if t.text in seen:
                self.fail(f"duplicate attribute '{t.text}'", t.pos)
            seen.add(t.text)
            self.expect("=")
            if self.tok.kind == "capture":
                c = self.advance()
                out.append((t.text, self._bind(c, "attr") if bind else self._use(c, "attr")))
            else:
                out.append((t.text, self.parse_attr()))
            if not self.accept(","):
                break
        self.expect("}")
        return out

    def parse_pred(self) -> Pred:
        t = self.tok
        if t.text not in ("same", "attr_eq", "type_is") or t.kind != "ident":
            self.fail(f"unknown predicate {self._describe()}")
        self.advance()
        self.expect("(")
        c = self.expect_kind("capture", "capture")
        self.expect(",")
        if t.text == "same":
            a = self._use(c, "value")
            d = self.expect_kind("capture", "capture")
            args = (a, self._use(d, "value"))
        elif t.text == "attr_eq":
            args = (self._use(c, "attr"), self.parse_attr())
        else:
            args = (self._use(c, "value"), self.parse_type())
        self.expect(")")
        return Pred(t.text, args)

    def parse_operand(self, defined):
        t = self.advance()
        if t.kind == "capture":
            return self._use(t, "value")
        if t.kind == "value":
            if t.text[1:] not in defined:
                self.fail(f"use of undefined target value {t.text}", t.pos)
            if defined[t.text[1:]] is None:
                self.fail(f"target {t.text} has no result", t.pos)
            return TargetRef(t.text[1:])
        self.fail(f"expected capture or target value, found '{t.text}'", t.pos)

    def parse_target(self, defined) -> TargetOp:
        res = self.advance()
        name = res.text[1:]
        if name in defined:
            self.fail(f"redefinition of target value {res.text}", res.pos)
        self.expect("=")
        opcode = self._opcode()
        self.expect("(")
        operands = []
        while not self.at(")"):
            operands.append(self.parse_operand(defined))
            if not self.accept(","):
                break
        self.expect(")")
        attrs = self.parse_attr_set(bind=False) if self.at("{") else []
        self.expect(":")
        if self.accept("("):
            self.expect(")")
            rtype = None
        elif self.at("type"):
            self.advance()
            self.expect("(")
            rtype = TypeOf(self.parse_operand(defined))
            self.expect(")")
        else:
            rtype = self.parse_type()
        defined[name] = rtype
        return TargetOp(name, opcode, operands, attrs, rtype)


def parse_pattern_file(ctx: Context, text: str, filename: str = "<patterns>") -> PatternSet:
    """Parse rewrite rules. Raises ParseError carrying diagnostics."""
    p = _PatternParser(ctx, text, filename)
    try:
        return p.parse_file()
    except _Fail as e:
        raise ParseError([_diag(p, e.message, e.pos)]) from None
    except (T.ValidationError, ValueError) as e:
        raise ParseError([_diag(p, str(e), p.tok.pos)]) from None


__all__ = [
    "BackRef", "Capture", "DagNode", "DslPattern", "Pred", "TargetOp", "TargetRef", "TypeOf",
    "check_pred", "parse_pattern_file", "preorder",
]
