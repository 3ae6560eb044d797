"""Parser for the textual IR (generic form plus custom-syntax hooks)."""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass

from miniir.diagnostics import Diagnostic, render_all
from miniir.ir import types as T
from miniir.ir.affine import AffineBinary, AffineConst, AffineDim, AffineError, AffineMap, AffineSym
from miniir.ir.context import Context, Trait, UnregisteredOpError
from miniir.ir.core import Block, IRError, Operation, Region, Value
from miniir.textio.lexer import Lexer, LexError, Token, line_col


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__(render_all(diagnostics))
        self.diagnostics = diagnostics


class _Fail(Exception):
    def __init__(self, message: str, pos: int):
        super().__init__(message)
        self.message = message
        self.pos = pos


@dataclass(frozen=True)
class Ref:
    name: str
    pos: int


class _Forward(Value):
    """Stand-in for a value referenced before its definition."""

    __slots__ = ("name", "pos", "block")

    def __init__(self, type, name, pos, block):
        super().__init__(type, -1)
        self.name = name
        self.pos = pos
        self.block = block

    @property
    def parent_block(self):
        return None


class _Frame:
    def __init__(self, isolated: bool):
        self.isolated = isolated
        self.values: dict[str, Value] = {}
        self.forwards: dict[str, _Forward] = {}
        self.blocks: dict[str, Block] = {}
        self.pending: dict[str, int] = {}


_SHAPED = re.compile(r"((?:(?:[0-9]+|\?)x)*)(i[0-9]+|f32|f64|index)")
_INT_TYPE = re.compile(r"i([0-9]+)")


class Parser:
    def __init__(self, ctx: Context, src: str, filename: str = "<input>"):
        self.ctx = ctx
        self.src = src
        self.filename = filename
        self.lex = Lexer(src)
        self.tok: Token = self._lex()
        self.frames: list[_Frame] = []
        self.aliases: dict[str, T.Attribute] = {}
        self.cur_block: Block | None = None

    # -- token helpers ---------------------------------------------------------

    def _lex(self) -> Token:
        try:
            return self.lex.next()
        except LexError as e:
            raise _Fail(e.message, e.pos) from None

    def advance(self) -> Token:
        t = self.tok
        self.tok = self._lex()
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "arrow", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.advance()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}', found {self._describe()}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.fail(f"expected {what}, found {self._describe()}")
        return self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "eof" else f"'{self.tok.text}'"

    def fail(self, message: str, pos: int | None = None):
        raise _Fail(message, self.tok.pos if pos is None else pos)

    def file_pos(self, pos: int) -> tuple[str, int, int]:
        line, col = line_col(self.src, pos)
        return (self.filename, line, col)

    # -- scopes ----------------------------------------------------------------

    def push_frame(self, isolated: bool) -> None:
        self.frames.append(_Frame(isolated))

    def pop_frame(self) -> None:
        f = self.frames.pop()
        if f.pending:
            label, pos = min(f.pending.items(), key=lambda kv: kv[1])
            self.fail(f"reference to undefined block {label}", pos)
        if not f.forwards:
            return
        if f.isolated or not self.frames:
            fw = min(f.forwards.values(), key=lambda v: v.pos)
            self.fail(f"use of undefined value {fw.name}", fw.pos)
        parent = self.frames[-1]
        for name, fw in f.forwards.items():
            other = parent.forwards.get(name)
            if other is None:
                parent.forwards[name] = fw
            else:
                if other.type != fw.type:
                    self.fail(f"type mismatch for {name}: used as {fw.type} and {other.type}", fw.pos)
                fw.replace_all_uses_with(other)

    def resolve(self, ref: Ref, type: T.Type) -> Value:
        for f in reversed(self.frames):
            v = f.values.get(ref.name) or f.forwards.get(ref.name)
            if v is not None:
                if v.type != type:
                    self.fail(
                        f"type mismatch for {ref.name}: used as {type} but defined as {v.type}",
                        ref.pos,
                    )
                return v
            if f.isolated:
                break
        fw = _Forward(type, ref.name, ref.pos, self.cur_block)
        self.frames[-1].forwards[ref.name] = fw
        return fw

    def define(self, ref: Ref, value: Value) -> None:
        for f in reversed(self.frames):
            if ref.name in f.values:
                self.fail(f"redefinition of value {ref.name}", ref.pos)
            if f.isolated:
                break
        frame = self.frames[-1]
        fw = frame.forwards.pop(ref.name, None)
        if fw is not None:
            if fw.block is not None and fw.block is self.cur_block:
                self.fail(f"use of undefined value {ref.name}", fw.pos)
            if fw.type != value.type:
                self.fail(
                    f"type mismatch for {ref.name}: used as {fw.type} but defined as {value.type}",
                    fw.pos,
                )
            fw.replace_all_uses_with(value)
        frame.values[ref.name] = value

    def block_ref(self, label: str, pos: int) -> Block:
        f = self.frames[-1]
        b = f.blocks.get(label)
        if b is None:
            b = f.blocks[label] = Block(self.ctx)
            f.pending[label] = pos
        return b

    def define_block(self, label: str, pos: int) -> Block:
        f = self.frames[-1]
        if label in f.blocks and label not in f.pending:
            self.fail(f"redefinition of block {label}", pos)
        f.pending.pop(label, None)
        b = f.blocks.get(label)
        if b is None:
            b = f.blocks[label] = Block(self.ctx)
        return b

    # -- types -----------------------------------------------------------------

    def at_type(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return t.text in ("index", "f32", "f64", "memref", "tensor") or bool(
                _INT_TYPE.fullmatch(t.text)
            )
        return t.kind == "bang" or (t.kind == "punct" and t.text == "(")

    def parse_type(self) -> T.Type:
        t = self.tok
        try:
            if t.kind == "ident":
                if t.text == "index":
                    self.advance()
                    return self.ctx.intern_type(T.index)
                if t.text in ("f32", "f64"):
                    self.advance()
                    return self.ctx.intern_type(T.FloatType(t.text))
                m = _INT_TYPE.fullmatch(t.text)
                if m:
                    self.advance()
                    return self.ctx.intern_type(T.IntegerType(int(m.group(1))))
                if t.text in ("memref", "tensor"):
                    return self._parse_shaped()
            if t.kind == "bang":
                ns, _, name = t.text[1:].partition(".")
                if self.ctx.get_dialect(ns) is None:
                    self.fail(f"type {t.text} belongs to unregistered dialect '{ns}'", t.pos)
                self.advance()
                return self.ctx.intern_type(T.OpaqueType(ns, name))
            if self.at("("):
                return self.parse_function_type()
        except T.ValidationError as e:
            self.fail(str(e), t.pos)
        self.fail(f"expected type, found {self._describe()}")

    def _parse_shaped(self) -> T.Type:
        t = self.tok
        start = t.end
        if self.src[start : start + 1] != "<":
            self.fail(f"expected '<' after {t.text}", start)
        end = self.src.find(">", start)
        if end < 0:
            self.fail(f"unterminated {t.text} type", start)
        body = self.src[start + 1 : end]
        m = _SHAPED.fullmatch(body)
        if not m:
            self.fail(f"malformed {t.text} type '{t.text}<{body}>'", start)
        dims = tuple(
            T.DYNAMIC if d == "?" else int(d) for d in m.group(1).split("x")[:-1]
        )
        elem = _scalar_type(m.group(2))
        cls = T.MemRefType if t.text == "memref" else T.TensorType
        self.lex.pos = end + 1
        self.tok = self._lex()
        return self.ctx.intern_type(cls(dims, elem))

    def parse_type_list(self) -> list[T.Type]:
        """Parenthesised, possibly empty, comma-separated type list."""
        self.expect("(")
        types = []
        if not self.at(")"):
            types.append(self.parse_type())
            while self.accept(","):
                types.append(self.parse_type())
        self.expect(")")
        return types

    def parse_function_type(self) -> T.FunctionType:
        inputs = self.parse_type_list()
        self.expect("->")
        if self.at("("):
            results = self.parse_type_list()
        else:
            results = [self.parse_type()]
        return self.ctx.intern_type(T.FunctionType(tuple(inputs), tuple(results)))

    # -- attributes ------------------------------------------------------------

    def parse_int(self) -> int:
        neg = self.accept("-")
        t = self.expect_kind("int", "integer")
        return -int(t.text) if neg else int(t.text)

    def parse_number(self) -> tuple[str, object, int]:
        """Returns (kind, value, pos) for an optionally negated int/float/hex literal."""
        pos = self.tok.pos
        neg = self.accept("-")
        t = self.tok
        if t.kind == "int":
            self.advance()
            return "int", (-int(t.text) if neg else int(t.text)), pos
        if t.kind == "float":
            self.advance()
            return "float", (-float(t.text) if neg else float(t.text)), pos
        if t.kind == "hexint" and not neg:
            self.advance()
            return "hex", int(t.text, 16), pos
        self.fail(f"expected number, found {self._describe()}")

    def make_number_attr(self, kind, value, type: T.Type, pos: int) -> T.Attribute:
        try:
            if isinstance(type, T.FloatType):
                if kind == "hex":
                    if value >> 64:
                        self.fail("hexadecimal float literal wider than 64 bits", pos)
                    value = struct.unpack("<d", struct.pack("<Q", value))[0]
                return self.ctx.intern_attr(T.FloatAttr(float(value), type))
            if isinstance(type, (T.IntegerType, T.IndexType)):
                if kind == "float":
                    self.fail(f"floating point literal used with integer type {type}", pos)
                return self.ctx.intern_attr(T.IntegerAttr(value, type))
        except T.ValidationError as e:
            self.fail(str(e), pos)
        self.fail(f"numeric literal cannot have type {type}", pos)

    def parse_attr(self) -> T.Attribute:
        t = self.tok
        ctx = self.ctx
        if t.kind == "ident":
            if t.text in ("true", "false"):
                self.advance()
                return ctx.intern_attr(T.IntegerAttr(int(t.text == "true"), T.i1))
            if t.text == "unit":
                self.advance()
                return ctx.intern_attr(T.UnitAttr())
            if t.text == "affine_map":
                return self.parse_affine_map_attr()
        if t.kind == "string":
            self.advance()
            return ctx.intern_attr(T.StringAttr(t.text))
        if t.kind == "sym":
            return ctx.intern_attr(T.SymbolRefAttr(self.parse_symbol_name()))
        if t.kind == "hash":
            self.advance()
            if t.text not in self.aliases:
                self.fail(f"undefined attribute alias {t.text}", t.pos)
            return self.aliases[t.text]
        if self.at("["):
            self.advance()
            elems = []
            if not self.at("]"):
                elems.append(self.parse_attr())
                while self.accept(","):
                    elems.append(self.parse_attr())
            self.expect("]")
            return ctx.intern_attr(T.ArrayAttr(tuple(elems)))
        if self.at("{"):
            d = self.parse_attr_dict()
            return ctx.intern_attr(T.DictAttr(tuple(d.items())))
        if self.at("-") or t.kind in ("int", "float", "hexint"):
            kind, value, pos = self.parse_number()
            if self.accept(":"):
                type = self.parse_type()
            elif kind == "float":
                type = T.f64
            else:
                type = T.i64
            return self.make_number_attr(kind, value, type, pos)
        if self.at_type():
            return ctx.intern_attr(T.TypeAttr(self.parse_type()))
        self.fail(f"expected attribute, found {self._describe()}")

    def parse_attr_dict(self) -> dict[str, T.Attribute]:
        self.expect("{")
        out: dict[str, T.Attribute] = {}
        if not self.at("}"):
            while True:
                t = self.tok
                if t.kind not in ("ident", "string"):
                    self.fail(f"expected attribute name, found {self._describe()}")
                self.advance()
                if t.text in out:
                    self.fail(f"duplicate attribute '{t.text}'", t.pos)
                if self.accept("="):
                    out[t.text] = self.parse_attr()
                else:
                    out[t.text] = self.ctx.intern_attr(T.UnitAttr())
                if not self.accept(","):
                    break
        self.expect("}")
        return out

    def parse_optional_attr_dict(self) -> dict[str, T.Attribute]:
        return self.parse_attr_dict() if self.at("{") else {}

    def parse_symbol_name(self) -> str:
        t = self.expect_kind("sym", "symbol name")
        return t.text[1:]

    # -- affine maps -----------------------------------------------------------

    def parse_affine_map_attr(self) -> T.AffineMapAttr:
        if self.tok.kind == "hash":
            a = self.parse_attr()
            if not isinstance(a, T.AffineMapAttr):
                self.fail("expected affine map alias")
            return a
        self.expect("affine_map")
        self.expect("<")
        m = self.parse_affine_map_body()
        self.expect(">")
        return self.ctx.intern_attr(T.AffineMapAttr(m))

    def parse_affine_map_body(self) -> AffineMap:
        start = self.tok.pos
        names: dict[str, AffineDim | AffineSym] = {}

        def id_list(close, make):
            n = 0
            if not self.at(close):
                while True:
                    t = self.expect_kind("ident", "identifier")
                    if t.text in names:
                        self.fail(f"duplicate affine identifier {t.text}", t.pos)
                    names[t.text] = make(n)
                    n += 1
                    if not self.accept(","):
                        break
            self.expect(close)
            return n

        self.expect("(")
        nd = id_list(")", AffineDim)
        ns = 0
        if self.accept("["):
            ns = id_list("]", AffineSym)
        self.expect("->")
        self.expect("(")
        exprs = []
        if not self.at(")"):
            exprs.append(self._affine_expr(names))
            while self.accept(","):
                exprs.append(self._affine_expr(names))
        self.expect(")")
        try:
            return AffineMap(nd, ns, tuple(exprs))
        except AffineError as e:
            self.fail(str(e), start)

    def _affine_expr(self, names):
        lhs = self._affine_term(names)
        while self.at("+") or self.at("-"):
            op = self.advance().text
            rhs = self._affine_term(names)
            if op == "-":
                if isinstance(rhs, AffineConst):
                    rhs = AffineConst(-rhs.value)
                else:
                    rhs = AffineBinary("mul", rhs, AffineConst(-1))
            lhs = AffineBinary("add", lhs, rhs)
        return lhs

    def _affine_term(self, names):
        lhs = self._affine_factor(names)
        while self.at("*") or self.at("mod") or self.at("floordiv") or self.at("ceildiv"):
            t = self.advance()
            kind = "mul" if t.text == "*" else t.text
            rhs = self._affine_factor(names)
            lhs_const = _is_const_tree(lhs)
            rhs_const = _is_const_tree(rhs)
            if kind == "mul":
                if not rhs_const and lhs_const:
                    lhs, rhs = rhs, lhs
                elif not rhs_const:
                    self.fail("non-affine expression: product of two non-constant terms", t.pos)
            elif not rhs_const:
                self.fail(f"non-affine expression: {kind} by a non-constant term", t.pos)
            lhs = AffineBinary(kind, lhs, rhs)
        return lhs

    def _affine_factor(self, names):
        t = self.tok
        if self.accept("-"):
            f = self._affine_factor(names)
            if isinstance(f, AffineConst):
                return AffineConst(-f.value)
            return AffineBinary("mul", f, AffineConst(-1))
        if self.accept("("):
            e = self._affine_expr(names)
            self.expect(")")
            return e
        if t.kind == "int":
            self.advance()
            return AffineConst(int(t.text))
        if t.kind == "ident" and t.text in names:
            self.advance()
            return names[t.text]
        self.fail(f"expected affine expression, found {self._describe()}")

    # -- locations -------------------------------------------------------------

    def parse_optional_location(self) -> T.Location | None:
        if not self.at("loc"):
            return None
        self.advance()
        self.expect("(")
        loc = self._loc_inner()
        self.expect(")")
        return loc

    def _loc_inner(self) -> T.Location:
        if self.accept("unknown"):
            return T.UNKNOWN_LOC
        t = self.expect_kind("string", "location")
        if self.accept(":"):
            line = int(self.expect_kind("int", "line number").text)
            self.expect(":")
            col = int(self.expect_kind("int", "column number").text)
            return T.FileLineColLoc(t.text, line, col)
        if self.accept("("):
            child = self._loc_inner()
            self.expect(")")
            return T.NameLoc(t.text, child)
        return T.NameLoc(t.text, T.UNKNOWN_LOC)

    # -- operations ------------------------------------------------------------

    def parse_value_ref(self) -> Ref:
        t = self.expect_kind("value", "SSA value")
        return Ref(t.text, t.pos)

    def parse_ref_list(self) -> list[Ref]:
        refs = []
        if self.tok.kind == "value":
            refs.append(self.parse_value_ref())
            while self.accept(","):
                refs.append(self.parse_value_ref())
        return refs

    def resolve_all(self, refs: list[Ref], types, pos: int | None = None) -> list[Value]:
        types = list(types)
        if len(refs) != len(types):
            self.fail(f"{len(refs)} values but {len(types)} types", pos)
        return [self.resolve(r, t) for r, t in zip(refs, types)]

    def parse_successor(self) -> tuple[Block, list[Value]]:
        t = self.expect_kind("block", "block label")
        block = self.block_ref(t.text, t.pos)
        args: list[Value] = []
        if self.accept("("):
            refs = self.parse_ref_list()
            self.expect(":")
            types = [self.parse_type()]
            while self.accept(","):
                types.append(self.parse_type())
            self.expect(")")
            args = self.resolve_all(refs, types, t.pos)
        return block, args

    def parse_region(self, entry_args=None, isolated: bool = False) -> Region:
        """Parse ``{ blocks }``. ``entry_args`` is a list of (Ref, type) for custom forms."""
        self.expect("{")
        saved = self.cur_block
        self.push_frame(isolated)
        region = Region()
        if entry_args is None and self.at("}"):
            self.advance()
            self.pop_frame()
            self.cur_block = saved
            return region
        if entry_args is None and self.tok.kind == "block":
            block = self.parse_block_label()
        else:
            block = Block(self.ctx)
            self.cur_block = block
            for ref, t in entry_args or ():
                self.define(ref, block.add_argument(t))
        region.append(block)
        self.parse_ops_into(block)
        while self.tok.kind == "block":
            block = self.parse_block_label()
            region.append(block)
            self.parse_ops_into(block)
        self.expect("}")
        self.pop_frame()
        self.cur_block = saved
        return region

    def parse_block_label(self) -> Block:
        t = self.advance()
        block = self.define_block(t.text, t.pos)
        self.cur_block = block
        if self.accept("("):
            if not self.at(")"):
                while True:
                    ref = self.parse_value_ref()
                    self.expect(":")
                    self.define(ref, block.add_argument(self.parse_type()))
                    if not self.accept(","):
                        break
            self.expect(")")
        self.expect(":")
        return block

    def parse_ops_into(self, block: Block) -> None:
        self.cur_block = block
        while not (self.at("}") or self.tok.kind in ("block", "eof")):
            block.append(self.parse_operation())
            self.cur_block = block

    def parse_operation(self) -> Operation:
        start = self.tok.pos
        results = []
        if self.tok.kind == "value":
            results = self.parse_ref_list()
            self.expect("=")
        if self.tok.kind == "string":
            op = self.parse_generic()
        elif self.tok.kind == "ident":
            op = self.parse_custom()
        else:
            self.fail(f"expected operation, found {self._describe()}")
        loc = self.parse_optional_location()
        if loc is not None:
            op.location = loc
        op._src_pos = self.file_pos(start)
        if len(results) != len(op.results):
            self.fail(
                f"operation defines {len(op.results)} results but {len(results)} names were given",
                start,
            )
        for ref, r in zip(results, op.results):
            self.define(ref, r)
        return op

    def check_opcode(self, name: str, pos: int) -> None:
        try:
            self.ctx.check_opcode(name)
        except UnregisteredOpError as e:
            self.fail(str(e), pos)

    def is_isolated(self, name: str) -> bool:
        d = self.ctx.get_op_def(name)
        return d is not None and Trait.ISOLATED_FROM_ABOVE in d.traits

    def parse_generic(self) -> Operation:
        t = self.advance()
        name = t.text
        self.check_opcode(name, t.pos)
        self.expect("(")
        refs = self.parse_ref_list()
        self.expect(")")
        succs = []
        if self.accept("["):
            succs.append(self.parse_successor())
            while self.accept(","):
                succs.append(self.parse_successor())
            self.expect("]")
        attrs = self.parse_optional_attr_dict()
        regions = []
        if self.accept("("):
            iso = self.is_isolated(name)
            regions.append(self.parse_region(isolated=iso))
            while self.accept(",") or self.at("{"):
                regions.append(self.parse_region(isolated=iso))
            self.expect(")")
        self.expect(":")
        type_pos = self.tok.pos
        ftype = self.parse_function_type()
        operands = self.resolve_all(refs, ftype.inputs, type_pos)
        return self.create(name, operands, ftype.results, attrs, regions, succs, pos=t.pos)

    def parse_custom(self) -> Operation:
        t = self.tok
        name = "builtin.module" if t.text == "module" else t.text
        opdef = self.ctx.get_op_def(name)
        if opdef is None or opdef.parse is None:
            if "." in name:
                self.check_opcode(name, t.pos)
            self.fail(f"unknown custom operation '{t.text}'", t.pos)
        self.advance()
        return opdef.parse(self, name, t.pos)

    def create(
        self, name, operands=(), result_types=(), attrs=None, regions=0, successors=(), pos=None
    ) -> Operation:
        try:
            return Operation(self.ctx, name, operands, result_types, attrs, regions, successors)
        except (UnregisteredOpError, IRError) as e:
            self.fail(str(e), pos)

    # -- top level -------------------------------------------------------------

    def parse_top(self) -> Operation:
        self.push_frame(True)
        holder = Block(self.ctx)
        self.cur_block = holder
        ops = []
        while self.tok.kind != "eof":
            if self.tok.kind == "hash":
                t = self.advance()
                self.expect("=")
                if t.text in self.aliases:
                    self.fail(f"redefinition of alias {t.text}", t.pos)
                self.aliases[t.text] = self.parse_attr()
                continue
            op = self.parse_operation()
            holder.append(op)
            ops.append(op)
            self.cur_block = holder
        self.pop_frame()
        if len(ops) == 1 and ops[0].name == "builtin.module":
            return ops[0].detach()
        module = Operation(self.ctx, "builtin.module", regions=1)
        body = module.regions[0].append(Block(self.ctx))
        for op in ops:
            body.append(op.detach())
        body.append(Operation(self.ctx, "builtin.module_end"))
        return module


def _scalar_type(text: str) -> T.Type:
    if text == "index":
        return T.index
    if text in ("f32", "f64"):
        return T.FloatType(text)
    return T.IntegerType(int(text[1:]))


def _is_const_tree(e) -> bool:
    if isinstance(e, AffineConst):
        return True
    if isinstance(e, AffineBinary):
        return _is_const_tree(e.lhs) and _is_const_tree(e.rhs)
    return False


def _diag(parser: Parser, message: str, pos: int) -> Diagnostic:
    return Diagnostic("error", message, T.FileLineColLoc(*parser.file_pos(pos)), "parse")


def parse_source(ctx: Context, text: str, filename: str = "<input>") -> Operation:
    """Parse a module. Raises ParseError (carrying diagnostics) on failure.

    In strict contexts the structural and SSA verifier phases run as well, so
    invalid IR is never returned silently.
    """
    p = Parser(ctx, text, filename)
    try:
        module = p.parse_top()
    except _Fail as e:
        raise ParseError([_diag(p, e.message, e.pos)]) from None
    except (T.ValidationError, AffineError, IRError, UnregisteredOpError) as e:
        raise ParseError([_diag(p, str(e), p.tok.pos)]) from None
    if ctx.strict:
        from miniir.verifier import verify

        diags = verify(module, phases=2)
        if diags:
            raise ParseError(diags)
    return module


def parse_affine_map(text: str, ctx: Context | None = None) -> AffineMap:
    """Parse ``affine_map<...>`` or a bare ``(d0)[s0] -> (...)`` map."""
    p = Parser(ctx or Context(), text, "<affine_map>")
    try:
        if p.at("affine_map"):
            m = p.parse_affine_map_attr().map
        else:
            m = p.parse_affine_map_body()
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p._describe()} after affine map")
        return m
    except _Fail as e:
        raise ParseError([_diag(p, e.message, e.pos)]) from None


def parse_type(ctx: Context, text: str) -> T.Type:
    p = Parser(ctx, text, "<type>")
    try:
        t = p.parse_type()
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p._describe()} after type")
        return t
    except _Fail as e:
        raise ParseError([_diag(p, e.message, e.pos)]) from None


def parse_attribute(ctx: Context, text: str) -> T.Attribute:
    p = Parser(ctx, text, "<attribute>")
    try:
        a = p.parse_attr()
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p._describe()} after attribute")
        return a
    except _Fail as e:
        raise ParseError([_diag(p, e.message, e.pos)]) from None
