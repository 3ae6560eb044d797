"""Immutable type, attribute and location descriptors.

Descriptors are frozen dataclasses, so structural equality is plain ``==``.
A :class:`~miniir.ir.context.Context` interns them so that equal descriptors
share one canonical instance.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from miniir.ir.affine import AffineMap


class ValidationError(ValueError):
    """A malformed type or attribute descriptor."""


MAX_INT_WIDTH = 128


# -----------------------------------------------------------------------------
# Types
# -----------------------------------------------------------------------------


class Type:
    """Base class of all type descriptors."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class IntegerType(Type):
    width: int

    def __post_init__(self):
        if not isinstance(self.width, int) or not 1 <= self.width <= MAX_INT_WIDTH:
            raise ValidationError(
                f"integer width must be in 1..{MAX_INT_WIDTH}, got {self.width!r}"
            )

    def __str__(self) -> str:
        return f"i{self.width}"


@dataclass(frozen=True, slots=True)
class FloatType(Type):
    kind: str

    def __post_init__(self):
        if self.kind not in ("f32", "f64"):
            raise ValidationError(f"unknown float kind {self.kind!r}")

    @property
    def width(self) -> int:
        return 32 if self.kind == "f32" else 64

    def __str__(self) -> str:
        return self.kind


@dataclass(frozen=True, slots=True)
class IndexType(Type):
    def __str__(self) -> str:
        return "index"


@dataclass(frozen=True, slots=True)
class FunctionType(Type):
    inputs: tuple[Type, ...] = ()
    results: tuple[Type, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "results", tuple(self.results))
        for t in self.inputs + self.results:
            if not isinstance(t, Type):
                raise ValidationError(f"function type component {t!r} is not a type")

    def __str__(self) -> str:
        ins = ", ".join(map(str, self.inputs))
        if len(self.results) == 1 and not isinstance(self.results[0], FunctionType):
            return f"({ins}) -> {self.results[0]}"
        return f"({ins}) -> ({', '.join(map(str, self.results))})"


@dataclass(frozen=True, slots=True)
class OpaqueType(Type):
    """A dialect-defined type with no parameters, spelled ``!dialect.name``."""

    dialect: str
    name: str

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.dialect or "") or not re.fullmatch(
            r"[A-Za-z_][A-Za-z0-9_.]*", self.name or ""
        ):
            raise ValidationError(f"malformed dialect type !{self.dialect}.{self.name}")

    def __str__(self) -> str:
        return f"!{self.dialect}.{self.name}"


DYNAMIC = None  # marker for a dynamic dimension


def _check_shape(shape, elem):
    for d in shape:
        if d is DYNAMIC:
            continue
        if not isinstance(d, int) or isinstance(d, bool) or d < 0:
            raise ValidationError(f"invalid static dimension {d!r}")
    if not isinstance(elem, (IntegerType, FloatType, IndexType)):
        raise ValidationError(f"shaped element type must be scalar, got {elem}")


def _shape_str(shape, elem) -> str:
    dims = "".join(("?" if d is DYNAMIC else str(d)) + "x" for d in shape)
    return f"{dims}{elem}"


class ShapedType(Type):
    __slots__ = ()

    @property
    def rank(self) -> int:
        return len(self.shape)

    @property
    def has_static_shape(self) -> bool:
        return all(d is not DYNAMIC for d in self.shape)

    @property
    def num_elements(self) -> int:
        return math.prod(self.shape)


@dataclass(frozen=True, slots=True)
class TensorType(ShapedType):
    shape: tuple[int | None, ...]
    elem: Type

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(self.shape))
        _check_shape(self.shape, self.elem)

    def __str__(self) -> str:
        return f"tensor<{_shape_str(self.shape, self.elem)}>"


@dataclass(frozen=True, slots=True)
class MemRefType(ShapedType):
    shape: tuple[int | None, ...]
    elem: Type

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(self.shape))
        _check_shape(self.shape, self.elem)

    def __str__(self) -> str:
        return f"memref<{_shape_str(self.shape, self.elem)}>"


i1 = IntegerType(1)
i8 = IntegerType(8)
i32 = IntegerType(32)
i64 = IntegerType(64)
f32 = FloatType("f32")
f64 = FloatType("f64")
index = IndexType()

INDEX_WIDTH = 64


def int_width(t: Type) -> int:
    """Bit width used for two's complement arithmetic on integer-like types."""
    if isinstance(t, IntegerType):
        return t.width
    if isinstance(t, IndexType):
        return INDEX_WIDTH
    raise TypeError(f"{t} is not integer-like")


def wrap_int(value: int, width: int) -> int:
    """Truncate to ``width`` bits. i1 stays unsigned (0/1), wider types signed."""
    value &= (1 << width) - 1
    if width > 1 and value >> (width - 1):
        value -= 1 << width
    return value


def to_signed(value: int, width: int) -> int:
    value &= (1 << width) - 1
    if value >> (width - 1):
        value -= 1 << width
    return value


def round_f32(x: float) -> float:
    try:
        return struct.unpack("<f", struct.pack("<f", x))[0]
    except OverflowError:
        return math.copysign(math.inf, x)


def round_float(x: float, t: Type) -> float:
    x = float(x)
    return round_f32(x) if t == f32 else x


# -----------------------------------------------------------------------------
# Attributes
# -----------------------------------------------------------------------------


class Attribute:
    """Base class of all attribute descriptors."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class IntegerAttr(Attribute):
    value: int
    type: Type

    def __post_init__(self):
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            object.__setattr__(self, "value", int(self.value))
        if not isinstance(self.type, (IntegerType, IndexType)):
            raise ValidationError(f"integer attribute needs an integer-like type, got {self.type}")


@dataclass(frozen=True, slots=True, eq=False)
class FloatAttr(Attribute):
    value: float
    type: Type

    def __post_init__(self):
        if not isinstance(self.type, FloatType):
            raise ValidationError(f"float attribute needs a float type, got {self.type}")
        object.__setattr__(self, "value", round_float(self.value, self.type))

    @property
    def bits(self) -> int:
        return struct.unpack("<Q", struct.pack("<d", self.value))[0]

    # bitwise identity: distinguishes -0.0 from 0.0 and makes NaN equal to itself
    def __eq__(self, other):
        return (
            isinstance(other, FloatAttr)
            and self.type == other.type
            and self.bits == other.bits
        )

    def __hash__(self):
        return hash((FloatAttr, self.type, self.bits))


@dataclass(frozen=True, slots=True)
class StringAttr(Attribute):
    text: str


@dataclass(frozen=True, slots=True)
class TypeAttr(Attribute):
    type: Type


@dataclass(frozen=True, slots=True)
class AffineMapAttr(Attribute):
    map: AffineMap


@dataclass(frozen=True, slots=True)
class ArrayAttr(Attribute):
    elements: tuple[Attribute, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


@dataclass(frozen=True, slots=True)
class DictAttr(Attribute):
    """Dictionary attribute; entries are kept sorted by key."""

    entries: tuple[tuple[str, Attribute], ...] = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        keys = [k for k, _ in entries]
        if len(set(keys)) != len(keys):
            dup = next(k for k in keys if keys.count(k) > 1)
            raise ValidationError(f"duplicate dictionary key {dup!r}")
        object.__setattr__(self, "entries", tuple(sorted(entries, key=lambda kv: kv[0])))

    @classmethod
    def from_mapping(cls, m: Mapping[str, Attribute] | Iterable[tuple[str, Attribute]]):
        items = m.items() if isinstance(m, Mapping) else m
        return cls(tuple(items))

    def get(self, key, default=None):
        for k, v in self.entries:
            if k == key:
                return v
        return default

    def as_dict(self) -> dict[str, Attribute]:
        return dict(self.entries)


@dataclass(frozen=True, slots=True)
class SymbolRefAttr(Attribute):
    name: str


@dataclass(frozen=True, slots=True)
class UnitAttr(Attribute):
    pass


# -----------------------------------------------------------------------------
# Locations
# -----------------------------------------------------------------------------


class Location:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class UnknownLoc(Location):
    def __str__(self):
        return "<unknown>"


@dataclass(frozen=True, slots=True)
class FileLineColLoc(Location):
    file: str
    line: int
    col: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


@dataclass(frozen=True, slots=True)
class NameLoc(Location):
    tag: str
    child: Location = field(default_factory=UnknownLoc)

    def __str__(self):
        return str(self.child) if not isinstance(self.child, UnknownLoc) else self.tag


UNKNOWN_LOC = UnknownLoc()


def innermost_file_loc(loc: Location) -> FileLineColLoc | None:
    while isinstance(loc, NameLoc):
        loc = loc.child
    return loc if isinstance(loc, FileLineColLoc) else None
