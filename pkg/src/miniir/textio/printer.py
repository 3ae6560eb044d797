"""Textual IR printer (generic form plus per-op custom hooks)."""

from __future__ import annotations

import math
import re
import struct

from miniir.ir import types as T
from miniir.ir.affine import print_map
from miniir.ir.context import Trait
from miniir.ir.core import Block, Operation, Region, Value
from miniir.textio.lexer import escape_string

_BARE_SYM = re.compile(r"[A-Za-z_$.][A-Za-z0-9_$.]*")
_BARE_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_$.]*")


def format_float(value: float, type: T.Type) -> str:
    """Shortest decimal that reads back to the same value; hex bits for non-finite."""
    if not math.isfinite(value):
        return "0x%016X" % struct.unpack("<Q", struct.pack("<d", value))[0]
    if type == T.f32:
        for digits in range(1, 18):
            s = f"{value:.{digits}g}"
            if T.round_f32(float(s)) == value:
                break
    else:
        s = repr(value)
    if not any(c in s for c in ".en"):
        s += ".0"
    elif "e" in s and "." not in s.split("e")[0]:
        mant, exp = s.split("e")
        s = f"{mant}.0e{exp}"
    return s


def format_type(t) -> str:
    return str(t)


def format_symbol(name: str) -> str:
    return "@" + name if _BARE_SYM.fullmatch(name) else "@" + escape_string(name)


def format_location(loc: T.Location) -> str:
    def inner(l):
        if isinstance(l, T.FileLineColLoc):
            return f"{escape_string(l.file)}:{l.line}:{l.col}"
        if isinstance(l, T.NameLoc):
            if isinstance(l.child, T.UnknownLoc):
                return escape_string(l.tag)
            return f"{escape_string(l.tag)}({inner(l.child)})"
        return "unknown"

    return f"loc({inner(loc)})"


class Printer:
    def __init__(self, mode: str = "custom", aliases: dict | None = None):
        if mode not in ("custom", "generic"):
            raise ValueError(f"print mode must be 'custom' or 'generic', got {mode!r}")
        self.mode = mode
        self.aliases = aliases or {}
        self.map_uses: dict[T.AffineMapAttr, int] = {}
        self.map_order: list[T.AffineMapAttr] = []
        self.names: dict[int, str] = {}
        self.block_names: dict[int, str] = {}
        self.buf: list[str] = []
        self.indent = 0

    # -- naming ----------------------------------------------------------------

    def _name_scope(self, scope: Operation) -> None:
        counters = {"arg": 0, "val": 0}
        for region in scope.regions:
            self._name_region(region, counters)

    def _name_region(self, region: Region, counters) -> None:
        for i, b in enumerate(region.blocks):
            self.block_names[id(b)] = f"^bb{i}"
            for a in b.args:
                if i == 0:
                    self.names[id(a)] = f"%arg{counters['arg']}"
                    counters["arg"] += 1
                else:
                    self.names[id(a)] = f"%{counters['val']}"
                    counters["val"] += 1
            for op in b.ops:
                self._name_op(op, counters)

    def _name_op(self, op: Operation, counters) -> None:
        for r in op.results:
            self.names[id(r)] = f"%{counters['val']}"
            counters["val"] += 1
        if op.has_trait(Trait.ISOLATED_FROM_ABOVE):
            self._name_scope(op)
        else:
            for region in op.regions:
                self._name_region(region, counters)

    # -- output primitives used by custom hooks -------------------------------

    def w(self, text: str) -> None:
        self.buf.append(text)

    def newline(self) -> None:
        self.buf.append("\n" + "  " * self.indent)

    def val(self, v: Value) -> str:
        return self.names.get(id(v), "%<<UNKNOWN VALUE>>")

    def vals(self, vs) -> str:
        return ", ".join(self.val(v) for v in vs)

    def block_ref(self, b: Block) -> str:
        return self.block_names.get(id(b), "^<<UNKNOWN BLOCK>>")

    def type(self, t) -> str:
        return format_type(t)

    def types(self, ts) -> str:
        return ", ".join(map(format_type, ts))

    def affine_map(self, a: T.AffineMapAttr) -> str:
        if a not in self.map_uses:
            self.map_order.append(a)
        self.map_uses[a] = self.map_uses.get(a, 0) + 1
        alias = self.aliases.get(a)
        return alias if alias is not None else f"affine_map<{print_map(a.map)}>"

    def attr(self, a: T.Attribute) -> str:
        if isinstance(a, T.IntegerAttr):
            if a.type == T.i1:
                return "true" if a.value else "false"
            return f"{a.value} : {a.type}"
        if isinstance(a, T.FloatAttr):
            return f"{format_float(a.value, a.type)} : {a.type}"
        if isinstance(a, T.StringAttr):
            return escape_string(a.text)
        if isinstance(a, T.TypeAttr):
            return format_type(a.type)
        if isinstance(a, T.AffineMapAttr):
            return self.affine_map(a)
        if isinstance(a, T.ArrayAttr):
            return "[" + ", ".join(self.attr(e) for e in a) + "]"
        if isinstance(a, T.DictAttr):
            return self.dict_body(a.entries)
        if isinstance(a, T.SymbolRefAttr):
            return format_symbol(a.name)
        if isinstance(a, T.UnitAttr):
            return "unit"
        return "<<UNKNOWN ATTRIBUTE>>"

    def dict_body(self, items) -> str:
        parts = []
        for k, v in sorted(items, key=lambda kv: kv[0]):
            key = k if _BARE_KEY.fullmatch(k) else escape_string(k)
            parts.append(f"{key} = {self.attr(v)}")
        return "{" + ", ".join(parts) + "}"

    def attr_dict(self, op: Operation, elide=(), keyword: str = "") -> None:
        items = [(k, v) for k, v in op.attributes.items() if k not in elide]
        if items:
            self.w(f" {keyword}{' ' if keyword else ''}{self.dict_body(items)}")

    def successor(self, succ) -> str:
        s = self.block_ref(succ.block)
        if succ.operands:
            s += f"({self.vals(succ.operands)} : {self.types(v.type for v in succ.operands)})"
        return s

    def location(self, op: Operation) -> None:
        if not isinstance(op.location, T.UnknownLoc):
            self.w(" " + format_location(op.location))

    # -- structure -------------------------------------------------------------

    def region(self, region: Region, print_entry_args: bool = True, elide_terminator=None) -> None:
        self.w("{")
        self.indent += 1
        for i, b in enumerate(region.blocks):
            ops = b.ops
            if elide_terminator is not None and ops and elide_terminator(ops[-1]):
                ops = ops[:-1]
            # without entry args, `{}` would read back as a region with no blocks
            show_label = i > 0 or (print_entry_args and (b.args or not ops))
            if show_label:
                self.buf.append("\n" + "  " * (self.indent - 1))
                self.w(self.block_ref(b))
                if b.args and (i > 0 or print_entry_args):
                    args = ", ".join(f"{self.val(a)}: {self.type(a.type)}" for a in b.args)
                    self.w(f"({args})")
                self.w(":")
            for op in ops:
                self.newline()
                self.op(op)
        self.indent -= 1
        self.newline()
        self.w("}")

    def op(self, op: Operation) -> None:
        if op.results:
            self.w(self.vals(op.results) + " = ")
        hook = op.opdef.print if op.opdef is not None else None
        if self.mode == "custom" and hook is not None:
            mark = len(self.buf)
            saved_uses = dict(self.map_uses)
            saved_order = list(self.map_order)
            if hook(self, op) is not False:
                self.location(op)
                return
            del self.buf[mark:]
            self.map_uses, self.map_order = saved_uses, saved_order
        self.generic(op)

    def generic(self, op: Operation) -> None:
        self.w(f"{escape_string(op.name)}({self.vals(op.operands)})")
        if op.successors:
            self.w(" [" + ", ".join(self.successor(s) for s in op.successors) + "]")
        if op.attributes:
            self.w(" " + self.dict_body(op.attributes.items()))
        if op.regions:
            self.w(" (")
            for i, r in enumerate(op.regions):
                if i:
                    self.w(", ")
                self.region(r)
            self.w(")")
        self.w(f" : ({self.types(op.operand_types)}) -> ")
        rt = op.result_types
        if len(rt) == 1 and not isinstance(rt[0], T.FunctionType):
            self.w(self.type(rt[0]))
        else:
            self.w(f"({self.types(rt)})")
        self.location(op)

    def render(self, op: Operation) -> str:
        counters = {"arg": 0, "val": 0}
        for r in op.results:
            self.names[id(r)] = f"%{counters['val']}"
            counters["val"] += 1
        self._name_scope(op)
        self.op(op)
        return "".join(self.buf)


def print_op(op: Operation, mode: str = "custom") -> str:
    """Print ``op`` (typically a module). Output ends with a newline."""
    first = Printer(mode)
    body = first.render(op)
    repeated = [a for a in first.map_order if first.map_uses[a] >= 2]
    if not repeated:
        return body + "\n"
    aliases = {a: f"#map{i}" for i, a in enumerate(repeated)}
    second = Printer(mode, aliases)
    body = second.render(op)
    header = "".join(f"#map{i} = affine_map<{print_map(a.map)}>\n" for i, a in enumerate(repeated))
    return header + body + "\n"
