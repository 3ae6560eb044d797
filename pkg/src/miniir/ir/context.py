"""Contexts, dialect descriptors and op definitions."""

from __future__ import annotations

import enum
import itertools
import re
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from miniir.ir import types as T


class Trait(str, enum.Enum):
    TERMINATOR = "Terminator"
    ISOLATED_FROM_ABOVE = "IsolatedFromAbove"
    NO_SIDE_EFFECT = "NoSideEffect"
    COMMUTATIVE = "Commutative"
    SAME_OPERANDS_AND_RESULT_TYPE = "SameOperandsAndResultType"
    SYMBOL_DEFINER = "SymbolDefiner"
    SYMBOL_TABLE_HOLDER = "SymbolTableHolder"
    SINGLE_REGION_SINGLE_BLOCK = "SingleRegionSingleBlock"

    def __str__(self):
        return self.value


class RegistrationError(Exception):
    pass


class UnregisteredOpError(Exception):
    pass


# -----------------------------------------------------------------------------
# Type constraints
# -----------------------------------------------------------------------------

_SIMPLE_CONSTRAINTS: dict[str, Callable[[T.Type], bool]] = {
    "any": lambda t: True,
    "int": lambda t: isinstance(t, T.IntegerType),
    "i1": lambda t: t == T.i1,
    "index": lambda t: isinstance(t, T.IndexType),
    "float": lambda t: isinstance(t, T.FloatType),
    "f32": lambda t: t == T.f32,
    "f64": lambda t: t == T.f64,
    "memref": lambda t: isinstance(t, T.MemRefType),
    "tensor": lambda t: isinstance(t, T.TensorType),
    "function": lambda t: isinstance(t, T.FunctionType),
    "tensor-of-f32": lambda t: isinstance(t, T.TensorType) and t.elem == T.f32,
}


@dataclass(frozen=True)
class TypeConstraint:
    """A disjunction such as ``int|index`` or a ``same:N`` reference to operand N."""

    text: str
    variadic: bool = False

    @classmethod
    def parse(cls, text: str) -> "TypeConstraint":
        variadic = text.endswith("*")
        body = text[:-1] if variadic else text
        for alt in body.split("|"):
            if alt not in _SIMPLE_CONSTRAINTS and not re.fullmatch(r"same:\d+|![A-Za-z_][\w.]*", alt):
                raise RegistrationError(f"unknown type constraint {alt!r}")
        return cls(body, variadic)

    def check(self, t: T.Type, operand_types: Sequence[T.Type]) -> bool:
        for alt in self.text.split("|"):
            if alt.startswith("!"):
                if str(t) == alt:
                    return True
            elif alt.startswith("same:"):
                k = int(alt[5:])
                if k < len(operand_types) and operand_types[k] == t:
                    return True
            elif _SIMPLE_CONSTRAINTS[alt](t):
                return True
        return False

    def describe(self) -> str:
        return self.text.replace("same:", "same-as-operand-")


ATTR_KINDS: dict[str, Callable[[T.Attribute], bool]] = {
    "any": lambda a: True,
    "int": lambda a: isinstance(a, T.IntegerAttr),
    "float": lambda a: isinstance(a, T.FloatAttr),
    "number": lambda a: isinstance(a, (T.IntegerAttr, T.FloatAttr)),
    "string": lambda a: isinstance(a, T.StringAttr),
    "type": lambda a: isinstance(a, T.TypeAttr),
    "function-type": lambda a: isinstance(a, T.TypeAttr) and isinstance(a.type, T.FunctionType),
    "affine-map": lambda a: isinstance(a, T.AffineMapAttr),
    "array": lambda a: isinstance(a, T.ArrayAttr),
    "dict": lambda a: isinstance(a, T.DictAttr),
    "symbol-ref": lambda a: isinstance(a, T.SymbolRefAttr),
    "unit": lambda a: isinstance(a, T.UnitAttr),
}


@dataclass(frozen=True)
class AttrConstraint:
    name: str
    kind: str
    required: bool = True

    def __post_init__(self):
        if self.kind not in ATTR_KINDS:
            raise RegistrationError(f"unknown attribute kind {self.kind!r}")

    def check(self, attr: T.Attribute) -> bool:
        return ATTR_KINDS[self.kind](attr)


@dataclass
class OpDefinition:
    name: str
    traits: frozenset[Trait] = frozenset()
    operands: tuple[TypeConstraint, ...] = ()
    results: tuple[TypeConstraint, ...] = ()
    attrs: tuple[AttrConstraint, ...] = ()
    num_regions: int = 0
    # num_regions is then a minimum
    variadic_regions: bool = False
    num_successors: int = 0
    summary: str = ""
    verify: Callable | None = None
    fold: Callable | None = None
    canonicalize: tuple[Callable, ...] = ()
    print: Callable | None = None
    parse: Callable | None = None
    executable: bool = True

    def __post_init__(self):
        self.traits = frozenset(Trait(t) for t in self.traits)
        if Trait.TERMINATOR in self.traits and self.results:
            raise RegistrationError(f"terminator {self.name} must have zero results")
        for group in (self.operands, self.results):
            for c in group[:-1]:
                if c.variadic:
                    raise RegistrationError(f"{self.name}: only the last constraint may be variadic")

    def has_trait(self, trait: Trait) -> bool:
        return trait in self.traits

    @property
    def dialect_name(self) -> str:
        return self.name.split(".", 1)[0]


@dataclass
class InlinerInterface:
    """Dialect hooks queried by the inliner."""

    is_legal_to_inline: Callable[[Any, Any], bool] = lambda op, dest_region: True
    # rewrite a callee terminator into a branch to the continuation block
    handle_terminator: Callable[[Any, Any], None] | None = None


@dataclass
class Dialect:
    namespace: str
    ops: dict[str, OpDefinition] = field(default_factory=dict)
    materialize_constant: Callable | None = None
    inliner: InlinerInterface | None = None
    verify_op_attribute: Callable | None = None

    def __post_init__(self):
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.namespace):
            raise RegistrationError(f"invalid dialect namespace {self.namespace!r}")

    def add_op(self, opdef: OpDefinition) -> None:
        ns, _, short = opdef.name.partition(".")
        if ns != self.namespace or not short:
            raise RegistrationError(f"op {opdef.name!r} does not belong to dialect {self.namespace!r}")
        if opdef.name in self.ops:
            raise RegistrationError(f"op {opdef.name!r} registered twice")
        self.ops[opdef.name] = opdef


class Context:
    """Owns interned types/attributes, the dialect registry and id allocators.

    Interning and registry lookups are guarded by a lock so a context can be
    shared by the pass manager's worker threads.
    """

    def __init__(self, *, allow_unregistered: bool = True):
        self.allow_unregistered = allow_unregistered
        self._types: dict[T.Type, T.Type] = {}
        self._attrs: dict[T.Attribute, T.Attribute] = {}
        self.dialects: dict[str, Dialect] = {}
        self.op_defs: dict[str, OpDefinition] = {}
        self._lock = threading.RLock()
        self._ids = itertools.count(1)

    @property
    def strict(self) -> bool:
        return not self.allow_unregistered

    def next_id(self) -> int:
        with self._lock:
            return next(self._ids)

    def intern_type(self, desc: T.Type) -> T.Type:
        if not isinstance(desc, T.Type):
            raise T.ValidationError(f"{desc!r} is not a type descriptor")
        if isinstance(desc, T.FunctionType):
            desc = T.FunctionType(
                tuple(self.intern_type(t) for t in desc.inputs),
                tuple(self.intern_type(t) for t in desc.results),
            )
        elif isinstance(desc, (T.MemRefType, T.TensorType)):
            desc = type(desc)(desc.shape, self.intern_type(desc.elem))
        with self._lock:
            return self._types.setdefault(desc, desc)

    def intern_attr(self, desc: T.Attribute) -> T.Attribute:
        if not isinstance(desc, T.Attribute):
            raise T.ValidationError(f"{desc!r} is not an attribute descriptor")
        if isinstance(desc, T.ArrayAttr):
            desc = T.ArrayAttr(tuple(self.intern_attr(a) for a in desc.elements))
        elif isinstance(desc, T.DictAttr):
            desc = T.DictAttr(tuple((k, self.intern_attr(v)) for k, v in desc.entries))
        elif isinstance(desc, (T.IntegerAttr, T.FloatAttr)):
            desc = type(desc)(desc.value, self.intern_type(desc.type))
        elif isinstance(desc, T.TypeAttr):
            desc = T.TypeAttr(self.intern_type(desc.type))
        with self._lock:
            return self._attrs.setdefault(desc, desc)

    def register_dialect(self, dialect: Dialect) -> None:
        with self._lock:
            if dialect.namespace in self.dialects:
                raise RegistrationError(f"dialect {dialect.namespace!r} registered twice")
            for name in dialect.ops:
                if name in self.op_defs:
                    raise RegistrationError(f"op {name!r} registered twice")
            self.dialects[dialect.namespace] = dialect
            self.op_defs.update(dialect.ops)

    def get_op_def(self, name: str) -> OpDefinition | None:
        return self.op_defs.get(name)

    def get_dialect(self, namespace: str) -> Dialect | None:
        return self.dialects.get(namespace)

    def check_opcode(self, name: str) -> None:
        """Raise UnregisteredOpError if ``name`` cannot be created in this context."""
        if "." not in name or name.startswith(".") or name.endswith("."):
            raise UnregisteredOpError(f"opcode {name!r} must have the form 'dialect.name'")
        if self.allow_unregistered:
            return
        ns = name.split(".", 1)[0]
        if ns not in self.dialects:
            raise UnregisteredOpError(f"unknown dialect namespace {ns!r} in opcode {name!r}")
        if name not in self.op_defs:
            raise UnregisteredOpError(f"unregistered operation {name!r}")
