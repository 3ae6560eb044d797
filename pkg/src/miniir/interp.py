"""Reference interpreter for func, arith, cf, memref, affine and ml.

Integers are Python ints kept in two's complement range for their width (i1 is
0/1), floats are doubles rounded to the static type after every operation, and
memrefs are :class:`Buffer` handles. Anything that would be undefined traps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from miniir.dialects.arith import compare_floats, compare_ints, div_trunc
from miniir.ir import types as T
from miniir.ir.affine import eval_affine_map
from miniir.ir.core import Operation, Region, Value
from miniir.ir.symbols import lookup_symbol
from miniir.textio.parser import ParseError, Parser, _diag, _Fail
from miniir.textio.printer import format_float, format_type

DEFAULT_MAX_STEPS = 10**7
MAX_CALL_DEPTH = 128


class Trap(Exception):
    """Execution stopped on a runtime error."""


@dataclass(eq=False)
class Buffer:
    shape: tuple[int, ...]
    elem: T.Type
    data: list
    freed: bool = False

    @classmethod
    def zeros(cls, t: T.MemRefType) -> "Buffer":
        zero = 0.0 if isinstance(t.elem, T.FloatType) else 0
        return cls(tuple(t.shape), t.elem, [zero] * t.num_elements)

    @classmethod
    def of(cls, t: T.MemRefType, values: Sequence) -> "Buffer":
        if len(values) != t.num_elements:
            raise ValueError(f"{t} holds {t.num_elements} elements, got {len(values)}")
        return cls(tuple(t.shape), t.elem, [coerce(v, t.elem) for v in values])

    def offset(self, indices: Sequence[int]) -> int:
        if self.freed:
            raise Trap("access to a deallocated buffer")
        if len(indices) != len(self.shape):
            raise Trap(f"expected {len(self.shape)} indices, got {len(indices)}")
        off = 0
        for i, n in zip(indices, self.shape):
            if not 0 <= i < n:
                raise Trap(f"index {list(indices)} out of bounds for shape {list(self.shape)}")
            off = off * n + i
        return off

    def __repr__(self):
        return f"Buffer({list(self.shape)}x{self.elem}, {self.data})"


def coerce(v, t: T.Type):
    """Normalize a Python value to the runtime representation of ``t``."""
    if isinstance(t, (T.IntegerType, T.IndexType)):
        if isinstance(v, bool):
            v = int(v)
        if not isinstance(v, int):
            raise Trap(f"expected an integer for {t}, got {v!r}")
        return T.wrap_int(v, T.int_width(t))
    if isinstance(t, T.FloatType):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise Trap(f"expected a float for {t}, got {v!r}")
        return T.round_float(float(v), t)
    if isinstance(t, T.MemRefType):
        if not isinstance(v, Buffer) or v.shape != tuple(t.shape) or v.elem != t.elem:
            raise Trap(f"expected a buffer of type {t}, got {v!r}")
        return v
    raise Trap(f"no runtime representation for {t}")


def _same_value(a, b) -> bool:
    """Bitwise equality for floats (so NaN == NaN and 0.0 != -0.0), plain otherwise."""
    if isinstance(a, float) and isinstance(b, float):
        return math.copysign(1.0, a) == math.copysign(1.0, b) and (a == b or (a != a and b != b))
    return a == b


def outputs_equal(xs: Sequence, ys: Sequence) -> bool:
    if len(xs) != len(ys):
        return False
    for a, b in zip(xs, ys):
        if isinstance(a, Buffer) and isinstance(b, Buffer):
            if a.shape != b.shape or a.elem != b.elem or not outputs_equal(a.data, b.data):
                return False
        elif not _same_value(a, b):
            return False
    return True


class _Return(Exception):
    def __init__(self, values):
        self.values = values


class Interpreter:
    def __init__(self, module: Operation, max_steps: int = DEFAULT_MAX_STEPS):
        self.module = module
        self.max_steps = max_steps
        self.steps = 0
        self.depth = 0
        self.allocated: list[Buffer] = []

    # -- entry -----------------------------------------------------------------

    def call(self, name: str, args: Sequence) -> list:
        fn = lookup_symbol(self.module, name)
        if fn is None or fn.name != "func.func":
            raise Trap(f"no function named @{name}")
        return self._call(fn, list(args))

    def leaked_buffers(self) -> list[Buffer]:
        return [b for b in self.allocated if not b.freed]

    def _call(self, fn: Operation, args: list) -> list:
        ft = fn.attributes["function_type"].type
        if len(args) != len(ft.inputs):
            raise Trap(f"@{fn.attributes['sym_name'].text} expects {len(ft.inputs)} arguments, got {len(args)}")
        body = fn.regions[0]
        if not body.blocks:
            raise Trap(f"cannot call external function @{fn.attributes['sym_name'].text}")
        args = [coerce(a, t) for a, t in zip(args, ft.inputs)]
        if self.depth >= MAX_CALL_DEPTH:
            raise Trap(f"call depth limit {MAX_CALL_DEPTH} exceeded")
        self.depth += 1
        try:
            self._run_cfg(body, args, {})
        except _Return as r:
            return r.values
        finally:
            self.depth -= 1
        raise Trap("function body ended without a return")

    # -- control flow ----------------------------------------------------------

    def _run_cfg(self, region: Region, args: list, env: dict) -> None:
        """Run blocks until a terminator leaves the region (return or yield)."""
        block = region.entry
        while True:
            for a, v in zip(block.args, args):
                env[a] = v
            nxt = None
            for op in block.ops:
                self.steps += 1
                if self.steps > self.max_steps:
                    raise Trap(f"step budget of {self.max_steps} exceeded")
                if op.name == "cf.br":
                    s = op.successors[0]
                    nxt, args = s.block, [env[v] for v in s.operands]
                elif op.name == "cf.cond_br":
                    s = op.successors[0 if env[op.operand(0)] else 1]
                    nxt, args = s.block, [env[v] for v in s.operands]
                elif op.name == "func.return":
                    raise _Return([env[v] for v in op.operands])
                elif op.name == "affine.yield":
                    return
                else:
                    self._exec(op, env)
            if nxt is None:
                raise Trap(f"block ended without a terminator in {region.parent.name}")
            block = nxt

    # -- ops -------------------------------------------------------------------

    def _exec(self, op: Operation, env: dict) -> None:
        h = _HANDLERS.get(op.name)
        if h is None or (op.opdef is not None and not op.opdef.executable):
            raise Trap(f"cannot execute {op.name}")
        ins = [env[v] for v in op.operands]
        outs = h(self, op, ins, env)
        for r, v in zip(op.results, outs):
            env[r] = v


def _int_binary(fn: Callable[[int, int, int], int]):
    def run(it, op, ins, env):
        t = op.results[0].type
        w = T.int_width(t)
        return [T.wrap_int(fn(ins[0], ins[1], w), w)]

    return run


def _signed_div(rem: bool):
    def fn(a, b, w):
        a, b = T.to_signed(a, w), T.to_signed(b, w)
        if b == 0:
            raise Trap("integer division by zero")
        q = div_trunc(a, b)
        return a - b * q if rem else q

    return fn


def _float_binary(fn):
    def run(it, op, ins, env):
        return [T.round_float(fn(ins[0], ins[1]), op.results[0].type)]

    return run


def _constant(it, op, ins, env):
    return [coerce(op.attributes["value"].value, op.results[0].type)]


def _cmpi(it, op, ins, env):
    w = T.int_width(op.operand(0).type)
    return [int(compare_ints(op.attributes["predicate"].text, ins[0], ins[1], w))]


def _cmpf(it, op, ins, env):
    return [int(compare_floats(op.attributes["predicate"].text, ins[0], ins[1]))]


def _select(it, op, ins, env):
    return [ins[1] if ins[0] else ins[2]]


def _call_op(it, op, ins, env):
    name = op.attributes["callee"].name
    fn = lookup_symbol(it.module, name)
    if fn is None or fn.name != "func.func":
        raise Trap(f"call to unknown function @{name}")
    return it._call(fn, ins)


def _alloc(it, op, ins, env):
    b = Buffer.zeros(op.results[0].type)
    it.allocated.append(b)
    return [b]


def _dealloc(it, op, ins, env):
    if ins[0].freed:
        raise Trap("double deallocation")
    ins[0].freed = True
    return []


def _load(it, op, ins, env):
    buf = ins[0]
    return [buf.data[buf.offset(ins[1:])]]


def _store(it, op, ins, env):
    buf = ins[1]
    buf.data[buf.offset(ins[2:])] = ins[0]
    return []


def _map_values(op, operands) -> list[int]:
    m = op.attributes["map"].map
    return eval_affine_map(m, operands[: m.num_dims], operands[m.num_dims:])


def _apply(it, op, ins, env):
    return [T.wrap_int(_map_values(op, ins)[0], 64)]


def _affine_load(it, op, ins, env):
    buf = ins[0]
    return [buf.data[buf.offset(_map_values(op, ins[1:]))]]


def _affine_store(it, op, ins, env):
    buf = ins[1]
    buf.data[buf.offset(_map_values(op, ins[2:]))] = ins[0]
    return []


def _affine_for(it, op, ins, env):
    a = op.attributes
    lbm, ubm, step = a["lower_bound"].map, a["upper_bound"].map, a["step"].value
    n = lbm.num_inputs
    lo, hi = ins[:n], ins[n:]
    lb = max(eval_affine_map(lbm, lo[: lbm.num_dims], lo[lbm.num_dims:]))
    ub = min(eval_affine_map(ubm, hi[: ubm.num_dims], hi[ubm.num_dims:]))
    body = op.regions[0]
    for iv in range(lb, ub, step):
        it._run_cfg(body, [iv], env)
    return []


def _leaky_relu(it, op, ins, env):
    x = ins[0]
    alpha = op.attributes["alpha"].value
    return [x if not x < 0 else T.round_float(alpha * x, op.results[0].type)]


_HANDLERS = {
    "arith.constant": _constant,
    "arith.addi": _int_binary(lambda a, b, w: a + b),
    "arith.subi": _int_binary(lambda a, b, w: a - b),
    "arith.muli": _int_binary(lambda a, b, w: a * b),
    "arith.divsi": _int_binary(_signed_div(False)),
    "arith.remsi": _int_binary(_signed_div(True)),
    "arith.cmpi": _cmpi,
    "arith.addf": _float_binary(lambda a, b: a + b),
    "arith.subf": _float_binary(lambda a, b: a - b),
    "arith.mulf": _float_binary(lambda a, b: a * b),
    "arith.cmpf": _cmpf,
    "arith.select": _select,
    "func.call": _call_op,
    "memref.alloc": _alloc,
    "memref.dealloc": _dealloc,
    "memref.load": _load,
    "memref.store": _store,
    "affine.apply": _apply,
    "affine.load": _affine_load,
    "affine.store": _affine_store,
    "affine.for": _affine_for,
    "ml.leaky_relu": _leaky_relu,
}


def run_function(module: Operation, name: str, args: Sequence, max_steps: int = DEFAULT_MAX_STEPS) -> list:
    """Execute ``@name`` with ``args``; raises :class:`Trap` on runtime errors."""
    return Interpreter(module, max_steps).call(name, args)


# -- runtime literals ----------------------------------------------------------
# 3:i32   2.5:f32   [1,2,3]:memref<3xi32>   [[1,2],[3,4]]:memref<2x2xi32>


def _flatten(p: Parser, out: list) -> None:
    if p.accept("["):
        if not p.at("]"):
            _flatten(p, out)
            while p.accept(","):
                _flatten(p, out)
        p.expect("]")
    else:
        out.append(p.parse_number())


def parse_runtime_value(ctx, text: str):
    """Parse one CLI argument literal into (value, type)."""
    p = Parser(ctx, text, "<argument>")
    try:
        if p.at("["):
            nums: list = []
            _flatten(p, nums)
            p.expect(":")
            t = p.parse_type()
            if not isinstance(t, T.MemRefType) or not t.has_static_shape:
                p.fail(f"a list literal needs a static memref type, got {t}")
            if len(nums) != t.num_elements:
                p.fail(f"{t} holds {t.num_elements} elements, got {len(nums)}")
            vals = [_number_value(p, n, t.elem) for n in nums]
            value = Buffer(tuple(t.shape), t.elem, vals)
        else:
            n = p.parse_number()
            p.expect(":")
            t = p.parse_type()
            value = _number_value(p, n, t)
        if p.tok.kind != "eof":
            p.fail(f"unexpected {p._describe()} after argument")
        return value, t
    except _Fail as e:
        raise ParseError([_diag(p, e.message, e.pos)]) from None


def _number_value(p: Parser, n, t: T.Type):
    kind, value, pos = n
    attr = p.make_number_attr(kind, value, t, pos)
    return coerce(attr.value, t)


def _format_scalar(v, t: T.Type) -> str:
    if isinstance(t, T.FloatType):
        return format_float(v, t)
    return str(v)


def format_runtime_value(v, t: T.Type) -> str:
    if isinstance(v, Buffer):
        def nest(data, shape):
            if not shape:
                return _format_scalar(data[0], v.elem)
            step = len(data) // shape[0] if shape[0] else 0
            parts = [nest(data[i * step:(i + 1) * step], shape[1:]) for i in range(shape[0])]
            return "[" + ",".join(parts) + "]"

        return f"{nest(v.data, list(v.shape))}:{format_type(t)}"
    return f"{_format_scalar(v, t)}:{format_type(t)}"
