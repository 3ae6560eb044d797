"""arith: integer and float arithmetic, comparisons, select and constants."""

from __future__ import annotations

import math

from miniir.dialects.table import load_dialect
from miniir.ir import types as T
from miniir.ir.context import InlinerInterface
from miniir.rewrite.pattern import CommutativeConstantsRight

TABLE = """
[arith.constant]
summary = materialize an integer or float constant
traits = NoSideEffect
results = int|index|float
attrs = value:number
verify = verify_constant
print = print_constant
parse = parse_constant

[arith.addi]
summary = wrapping integer addition
traits = NoSideEffect Commutative SameOperandsAndResultType
operands = int|index int|index
results = int|index
fold = fold_addi
canonicalize = commutative

[arith.subi]
summary = wrapping integer subtraction
traits = NoSideEffect SameOperandsAndResultType
operands = int|index int|index
results = int|index
fold = fold_subi

[arith.muli]
summary = wrapping integer multiplication
traits = NoSideEffect Commutative SameOperandsAndResultType
operands = int|index int|index
results = int|index
fold = fold_muli
canonicalize = commutative

[arith.divsi]
summary = signed division rounding toward zero; traps on a zero divisor
traits = NoSideEffect SameOperandsAndResultType
operands = int|index int|index
results = int|index
fold = fold_divsi

[arith.remsi]
summary = signed remainder with the sign of the dividend; traps on a zero divisor
traits = NoSideEffect SameOperandsAndResultType
operands = int|index int|index
results = int|index
fold = fold_remsi

[arith.cmpi]
summary = integer comparison
traits = NoSideEffect
operands = int|index same:0
results = i1
attrs = predicate:string
verify = verify_cmpi
fold = fold_cmpi

[arith.addf]
summary = float addition, rounded to the result type
traits = NoSideEffect Commutative SameOperandsAndResultType
operands = float float
results = float
fold = fold_addf
canonicalize = commutative

[arith.subf]
summary = float subtraction, rounded to the result type
traits = NoSideEffect SameOperandsAndResultType
operands = float float
results = float
fold = fold_subf

[arith.mulf]
summary = float multiplication, rounded to the result type
traits = NoSideEffect Commutative SameOperandsAndResultType
operands = float float
results = float
fold = fold_mulf
canonicalize = commutative

[arith.cmpf]
summary = float comparison (o* false on NaN, u* true on NaN)
traits = NoSideEffect
operands = float same:0
results = i1
attrs = predicate:string
verify = verify_cmpf
fold = fold_cmpf

[arith.select]
summary = choose between two values on an i1 condition
traits = NoSideEffect
operands = i1 any same:1
results = same:1
fold = fold_select
"""

CMPI_PREDICATES = ("eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge")
CMPF_PREDICATES = (
    "false", "oeq", "ogt", "oge", "olt", "ole", "one", "ord",
    "ueq", "ugt", "uge", "ult", "ule", "une", "uno", "true",
)


def compare_ints(pred: str, a: int, b: int, width: int) -> bool:
    if pred in ("eq", "ne"):
        return (a == b) == (pred == "eq")
    if pred[0] == "s":
        a, b = T.to_signed(a, width), T.to_signed(b, width)
    else:
        mask = (1 << width) - 1
        a, b = a & mask, b & mask
    return {"lt": a < b, "le": a <= b, "gt": a > b, "ge": a >= b}[pred[1:]]


def compare_floats(pred: str, a: float, b: float) -> bool:
    if pred in ("true", "false"):
        return pred == "true"
    unordered = math.isnan(a) or math.isnan(b)
    if pred == "ord":
        return not unordered
    if pred == "uno":
        return unordered
    if unordered:
        return pred[0] == "u"
    return {
        "eq": a == b, "gt": a > b, "ge": a >= b, "lt": a < b, "le": a <= b, "ne": a != b,
    }[pred[1:]]


def div_trunc(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


# -- verifiers -----------------------------------------------------------------


def verify_constant(op):
    v = op.attributes["value"]
    if op.results and v.type != op.results[0].type:
        yield "type-constraint", f"value type {v.type} does not match result type {op.results[0].type}"


def verify_cmpi(op):
    if op.attributes["predicate"].text not in CMPI_PREDICATES:
        yield "attribute-kind", f"unknown predicate '{op.attributes['predicate'].text}'"


def verify_cmpf(op):
    if op.attributes["predicate"].text not in CMPF_PREDICATES:
        yield "attribute-kind", f"unknown predicate '{op.attributes['predicate'].text}'"


# -- folds ---------------------------------------------------------------------
# A fold receives the constant attribute of each operand (or None) and returns
# one Value or Attribute per result, or None.


def _ints(consts):
    if all(isinstance(c, T.IntegerAttr) for c in consts):
        return [c.value for c in consts]
    return None


def _int_attr(op, value):
    t = op.results[0].type
    return T.IntegerAttr(T.wrap_int(value, T.int_width(t)), t)


def _is_int(c, value) -> bool:
    return isinstance(c, T.IntegerAttr) and c.value == value


def fold_addi(op, consts):
    v = _ints(consts)
    if v:
        return [_int_attr(op, v[0] + v[1])]
    if _is_int(consts[1], 0):
        return [op.operand(0)]
    if _is_int(consts[0], 0):
        return [op.operand(1)]
    return None


def fold_subi(op, consts):
    v = _ints(consts)
    if v:
        return [_int_attr(op, v[0] - v[1])]
    if op.operand(0) is op.operand(1):
        return [_int_attr(op, 0)]
    if _is_int(consts[1], 0):
        return [op.operand(0)]
    return None


def fold_muli(op, consts):
    v = _ints(consts)
    if v:
        return [_int_attr(op, v[0] * v[1])]
    for c, other in ((consts[1], 0), (consts[0], 1)):
        if _is_int(c, 1):
            return [op.operand(other)]
        if _is_int(c, 0):
            return [_int_attr(op, 0)]
    return None


def fold_divsi(op, consts):
    v = _ints(consts)
    if v and v[1] != 0:
        w = T.int_width(op.results[0].type)
        return [_int_attr(op, div_trunc(T.to_signed(v[0], w), T.to_signed(v[1], w)))]
    if _is_int(consts[1], 1):
        return [op.operand(0)]
    return None


def fold_remsi(op, consts):
    v = _ints(consts)
    if v and v[1] != 0:
        w = T.int_width(op.results[0].type)
        a, b = T.to_signed(v[0], w), T.to_signed(v[1], w)
        return [_int_attr(op, a - b * div_trunc(a, b))]
    return None


def fold_cmpi(op, consts):
    v = _ints(consts)
    if v is None:
        return None
    w = T.int_width(op.operand(0).type)
    return [T.IntegerAttr(int(compare_ints(op.attributes["predicate"].text, v[0], v[1], w)), T.i1)]


def _float_fold(fn):
    def fold(op, consts):
        if all(isinstance(c, T.FloatAttr) for c in consts):
            t = op.results[0].type
            return [T.FloatAttr(T.round_float(fn(consts[0].value, consts[1].value), t), t)]
        return None

    return fold


fold_addf = _float_fold(lambda a, b: a + b)
fold_subf = _float_fold(lambda a, b: a - b)
fold_mulf = _float_fold(lambda a, b: a * b)


def fold_cmpf(op, consts):
    if all(isinstance(c, T.FloatAttr) for c in consts):
        r = compare_floats(op.attributes["predicate"].text, consts[0].value, consts[1].value)
        return [T.IntegerAttr(int(r), T.i1)]
    return None


def fold_select(op, consts):
    cond, a, b = op.operands
    if isinstance(consts[0], T.IntegerAttr):
        return [a if consts[0].value else b]
    if a is b:
        return [a]
    return None


# -- custom syntax -------------------------------------------------------------


def print_constant(p, op):
    v = op.attributes.get("value")
    if len(op.attributes) != 1 or not isinstance(v, (T.IntegerAttr, T.FloatAttr)):
        return False
    if len(op.results) != 1 or op.results[0].type != v.type:
        return False
    p.w("arith.constant " + p.attr(v))


def parse_constant(parser, name, pos):
    vpos = parser.tok.pos
    v = parser.parse_attr()
    if not isinstance(v, (T.IntegerAttr, T.FloatAttr)):
        parser.fail("arith.constant expects an integer or float literal", vpos)
    return parser.create(name, (), [v.type], {"value": v}, pos=pos)


def materialize(builder, attr, type):
    if isinstance(attr, (T.IntegerAttr, T.FloatAttr)) and attr.type == type:
        return builder.create("arith.constant", (), [type], {"value": builder.context.intern_attr(attr)})
    return None


commutative = CommutativeConstantsRight


def make_dialect():
    return load_dialect(
        "arith",
        TABLE,
        globals(),
        materialize_constant=materialize,
        inliner=InlinerInterface(),
    )
