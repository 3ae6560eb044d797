"""Affine expressions and maps.

Expressions are immutable trees over dims, symbols and integer constants,
combined with ``+``, ``*``, ``mod``, ``floordiv`` and ``ceildiv``.  The right
operand of every non-additive operator must be a constant subtree, and
``mod``/``floordiv``/``ceildiv`` divisors must be strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class AffineError(ValueError):
    pass


class AffineExpr:
    __slots__ = ()

    # Operator sugar for building expressions in Python code.
    def __add__(self, other):
        return AffineBinary("add", self, _lift(other))

    def __radd__(self, other):
        return AffineBinary("add", _lift(other), self)

    def __mul__(self, other):
        return AffineBinary("mul", self, _lift(other))

    def __rmul__(self, other):
        return AffineBinary("mul", self, _lift(other))

    def __sub__(self, other):
        other = _lift(other)
        if isinstance(other, AffineConst):
            return AffineBinary("add", self, AffineConst(-other.value))
        return AffineBinary("add", self, AffineBinary("mul", other, AffineConst(-1)))

    def __neg__(self):
        return AffineBinary("mul", self, AffineConst(-1))

    def __mod__(self, other):
        return AffineBinary("mod", self, _lift(other))

    def floordiv(self, other):
        return AffineBinary("floordiv", self, _lift(other))

    def ceildiv(self, other):
        return AffineBinary("ceildiv", self, _lift(other))

    def __str__(self):
        return print_expr(self)


def _lift(x) -> AffineExpr:
    if isinstance(x, AffineExpr):
        return x
    if isinstance(x, int):
        return AffineConst(x)
    raise TypeError(f"cannot use {x!r} in an affine expression")


@dataclass(frozen=True, slots=True)
class AffineConst(AffineExpr):
    value: int


@dataclass(frozen=True, slots=True)
class AffineDim(AffineExpr):
    position: int


@dataclass(frozen=True, slots=True)
class AffineSym(AffineExpr):
    position: int


BINARY_KINDS = ("add", "mul", "mod", "floordiv", "ceildiv")


@dataclass(frozen=True, slots=True)
class AffineBinary(AffineExpr):
    kind: str
    lhs: AffineExpr
    rhs: AffineExpr

    def __post_init__(self):
        if self.kind not in BINARY_KINDS:
            raise AffineError(f"unknown affine operator {self.kind!r}")


def is_constant_expr(e: AffineExpr) -> bool:
    if isinstance(e, AffineConst):
        return True
    if isinstance(e, AffineBinary):
        return is_constant_expr(e.lhs) and is_constant_expr(e.rhs)
    return False


def _floordiv(a: int, b: int) -> int:
    return a // b


def _ceildiv(a: int, b: int) -> int:
    return -((-a) // b)


def eval_expr(e: AffineExpr, dims: Sequence[int], syms: Sequence[int]) -> int:
    if isinstance(e, AffineConst):
        return e.value
    if isinstance(e, AffineDim):
        return dims[e.position]
    if isinstance(e, AffineSym):
        return syms[e.position]
    lhs = eval_expr(e.lhs, dims, syms)
    rhs = eval_expr(e.rhs, dims, syms)
    if e.kind == "add":
        return lhs + rhs
    if e.kind == "mul":
        return lhs * rhs
    if rhs <= 0:
        raise AffineError(f"non-positive divisor {rhs} in {e.kind}")
    if e.kind == "mod":
        return lhs % rhs
    if e.kind == "floordiv":
        return _floordiv(lhs, rhs)
    return _ceildiv(lhs, rhs)


def check_expr(e: AffineExpr, num_dims: int, num_syms: int) -> None:
    """Raise AffineError unless ``e`` is well formed for the given arity."""
    if isinstance(e, AffineConst):
        if not isinstance(e.value, int):
            raise AffineError(f"affine constant must be an integer, got {e.value!r}")
        return
    if isinstance(e, AffineDim):
        if not 0 <= e.position < num_dims:
            raise AffineError(f"dimension d{e.position} out of range (map has {num_dims})")
        return
    if isinstance(e, AffineSym):
        if not 0 <= e.position < num_syms:
            raise AffineError(f"symbol s{e.position} out of range (map has {num_syms})")
        return
    if not isinstance(e, AffineBinary):
        raise AffineError(f"not an affine expression: {e!r}")
    check_expr(e.lhs, num_dims, num_syms)
    check_expr(e.rhs, num_dims, num_syms)
    if e.kind == "add":
        return
    if not is_constant_expr(e.rhs):
        raise AffineError(f"non-affine expression: right operand of {e.kind} must be constant")
    if e.kind != "mul" and eval_expr(e.rhs, (), ()) <= 0:
        raise AffineError(f"{e.kind} divisor must be strictly positive")


def simplify_expr(e: AffineExpr) -> AffineExpr:
    """Fold constant subtrees and drop additive/multiplicative identities."""
    if not isinstance(e, AffineBinary):
        return e
    lhs = simplify_expr(e.lhs)
    rhs = simplify_expr(e.rhs)
    if isinstance(lhs, AffineConst) and isinstance(rhs, AffineConst):
        return AffineConst(eval_expr(AffineBinary(e.kind, lhs, rhs), (), ()))
    if e.kind == "add":
        if rhs == AffineConst(0):
            return lhs
        if lhs == AffineConst(0):
            return rhs
    elif e.kind == "mul":
        if rhs == AffineConst(1):
            return lhs
        if rhs == AffineConst(0):
            return AffineConst(0)
    elif rhs == AffineConst(1):
        return AffineConst(0) if e.kind == "mod" else lhs
    return AffineBinary(e.kind, lhs, rhs)


@dataclass(frozen=True, slots=True)
class AffineMap:
    num_dims: int
    num_syms: int
    exprs: tuple[AffineExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "exprs", tuple(self.exprs))
        if self.num_dims < 0 or self.num_syms < 0:
            raise AffineError("negative map arity")
        for e in self.exprs:
            check_expr(e, self.num_dims, self.num_syms)

    @classmethod
    def constant(cls, *values: int) -> "AffineMap":
        return cls(0, 0, tuple(AffineConst(v) for v in values))

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(n, 0, tuple(AffineDim(i) for i in range(n)))

    @classmethod
    def symbol_identity(cls) -> "AffineMap":
        return cls(0, 1, (AffineSym(0),))

    @property
    def num_inputs(self) -> int:
        return self.num_dims + self.num_syms

    @property
    def num_results(self) -> int:
        return len(self.exprs)

    def constant_value(self) -> int | None:
        if self.num_inputs == 0 and len(self.exprs) == 1 and isinstance(self.exprs[0], AffineConst):
            return self.exprs[0].value
        return None

    def __str__(self):
        return print_map(self)


def eval_affine_map(m: AffineMap, dims: Sequence[int], syms: Sequence[int] = ()) -> list[int]:
    if len(dims) != m.num_dims or len(syms) != m.num_syms:
        raise AffineError(
            f"map expects {m.num_dims} dims and {m.num_syms} symbols, "
            f"got {len(dims)} and {len(syms)}"
        )
    return [eval_expr(e, dims, syms) for e in m.exprs]


# -----------------------------------------------------------------------------
# Printing.  The form printed here is parsed back into the identical tree by
# the textio parser, so subtraction is only used for shapes the parser
# produces from ``-``.
# -----------------------------------------------------------------------------

_PREC = {"add": 1, "mul": 2, "mod": 2, "floordiv": 2, "ceildiv": 2}
_SYM = {"mul": "*", "mod": "mod", "floordiv": "floordiv", "ceildiv": "ceildiv"}


def _prec(e: AffineExpr) -> int:
    if isinstance(e, AffineBinary):
        return _PREC[e.kind]
    if isinstance(e, AffineConst) and e.value < 0:
        return 1
    return 3


def print_expr(e: AffineExpr) -> str:
    if isinstance(e, AffineConst):
        return str(e.value)
    if isinstance(e, AffineDim):
        return f"d{e.position}"
    if isinstance(e, AffineSym):
        return f"s{e.position}"
    assert isinstance(e, AffineBinary)
    lhs = print_expr(e.lhs)
    if _prec(e.lhs) < _PREC[e.kind]:
        lhs = f"({lhs})"
    if e.kind == "add":
        rhs = e.rhs
        if isinstance(rhs, AffineConst) and rhs.value < 0:
            return f"{lhs} - {-rhs.value}"
        if (
            isinstance(rhs, AffineBinary)
            and rhs.kind == "mul"
            and rhs.rhs == AffineConst(-1)
            and not isinstance(rhs.lhs, AffineConst)
        ):
            inner = print_expr(rhs.lhs)
            if _prec(rhs.lhs) <= 2:
                inner = f"({inner})"
            return f"{lhs} - {inner}"
        r = print_expr(rhs)
        if _prec(rhs) <= 1:
            r = f"({r})"
        return f"{lhs} + {r}"
    r = print_expr(e.rhs)
    if _prec(e.rhs) <= 2:
        r = f"({r})"
    return f"{lhs} {_SYM[e.kind]} {r}"


def print_map(m: AffineMap) -> str:
    dims = ", ".join(f"d{i}" for i in range(m.num_dims))
    syms = ", ".join(f"s{i}" for i in range(m.num_syms))
    head = f"({dims})" + (f"[{syms}]" if m.num_syms else "")
    return f"{head} -> ({', '.join(print_expr(e) for e in m.exprs)})"
