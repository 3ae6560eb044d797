"""The ``pat`` dialect: matcher programs as ordinary IR.

A ``pat.matcher`` region receives the op under test as its entry block
argument (``!pat.op``). Position ops derive handles from it:

* ``pat.descend %op {index = i}`` gives the op defining operand ``i``, or a
  null handle when the operand is a block argument, the defining op has more
  than one result, or ``i`` is out of range;
* ``pat.operand %op {index = i}`` gives operand ``i`` as a ``!pat.value``;
* ``pat.attr %op {name = "n"}`` gives an attribute as a ``!pat.attr``.

Position ops have no side effects, so generic CSE merges repeated ones.

Predicate ops (``pat.check_*``) carry one region that runs when the predicate
holds. A predicate that fails, or a region that fails, falls through to the
next op of the enclosing block. ``pat.switch_opcode`` runs the region of the
case matching the op's name (and arity, where one is given) or else its last
region, the default; afterwards it falls through like a failed predicate.
Every block ends in ``pat.emit``, which reports a match together with the
handles bound to the pattern's captures, or ``pat.fail``. Predicates on a
null handle are false.
"""

from __future__ import annotations

from miniir.dialects.table import load_dialect
from miniir.ir import types as T

OP = T.OpaqueType("pat", "op")
VALUE = T.OpaqueType("pat", "value")
ATTR = T.OpaqueType("pat", "attr")

PREDICATES = frozenset({
    "pat.check_opcode", "pat.check_arity", "pat.check_op_arity", "pat.check_attr",
    "pat.check_attrs", "pat.check_type", "pat.check_same",
})
POSITIONS = frozenset({"pat.descend", "pat.operand", "pat.attr"})
BRANCHING = PREDICATES | {"pat.switch_opcode"}

TABLE = """
[pat.matcher]
summary = a matcher program; the entry block argument is the op being matched
traits = IsolatedFromAbove SingleRegionSingleBlock
attrs = root:string?
regions = 1
verify = verify_matcher

[pat.descend]
summary = op defining an operand, or null
traits = NoSideEffect
operands = !pat.op
results = !pat.op
attrs = index:int
verify = verify_index

[pat.operand]
summary = an operand value
traits = NoSideEffect
operands = !pat.op
results = !pat.value
attrs = index:int
verify = verify_index

[pat.attr]
summary = an attribute of the op, or null
traits = NoSideEffect
operands = !pat.op
results = !pat.attr
attrs = name:string

[pat.check_opcode]
traits = SingleRegionSingleBlock
operands = !pat.op
attrs = opcode:string
regions = 1
verify = verify_predicate

[pat.check_arity]
summary = operand count equals n
traits = SingleRegionSingleBlock
operands = !pat.op
attrs = n:int
regions = 1
verify = verify_predicate

[pat.check_op_arity]
summary = opcode and operand count, fused
traits = SingleRegionSingleBlock
operands = !pat.op
attrs = opcode:string n:int
regions = 1
verify = verify_predicate

[pat.check_attr]
summary = attribute present, and equal to value when one is given
traits = SingleRegionSingleBlock
operands = !pat.op
attrs = name:string value?
regions = 1
verify = verify_predicate

[pat.check_attrs]
summary = several attribute checks on one op, fused
traits = SingleRegionSingleBlock
operands = !pat.op
attrs = expected:dict present:array
regions = 1
verify = verify_check_attrs

[pat.check_type]
traits = SingleRegionSingleBlock
operands = !pat.value
attrs = type:type
regions = 1
verify = verify_predicate

[pat.check_same]
summary = both handles denote the same SSA value
traits = SingleRegionSingleBlock
operands = !pat.value !pat.value
regions = 1
verify = verify_predicate

[pat.switch_opcode]
summary = multiway opcode dispatch; one region per case plus a default region
operands = !pat.op
attrs = cases:array arities:array
regions = 1+
verify = verify_switch

[pat.emit]
summary = report a match of the named pattern with its captured handles
traits = Terminator
operands = !pat.value|!pat.attr*
attrs = pattern:string benefit:int captures:array
verify = verify_emit

[pat.fail]
traits = Terminator
verify = verify_fail
"""


def _body_errors(op, region) -> list:
    out = []
    for b in region.blocks:
        last = b.last_op
        if last is None or last.name not in ("pat.emit", "pat.fail"):
            got = "an empty block" if last is None else last.name
            out.append(("matcher-terminator", f"every path must end in pat.emit or pat.fail, found {got}"))
        for inner in b.ops:
            if inner.dialect != "pat":
                out.append(("matcher-op", f"{inner.name} is not allowed inside a matcher"))
    return out


def verify_matcher(op):
    r = op.regions[0]
    out = []
    if r.blocks:
        entry = r.blocks[0]
        if entry.arg_types != (OP,):
            out.append(("matcher-signature", "entry block must take exactly one !pat.op argument"))
    return out + _body_errors(op, r)


def verify_index(op):
    if op.attributes["index"].value < 0:
        return ["index must be non-negative"]
    return []


def verify_predicate(op):
    out = _body_errors(op, op.regions[0])
    n = op.attributes.get("n")
    if n is not None and n.value < 0:
        out.append("n must be non-negative")
    return out


def verify_check_attrs(op):
    out = verify_predicate(op)
    present = op.attributes["present"]
    if any(not isinstance(a, T.StringAttr) for a in present):
        out.append("present must list attribute names")
    elif set(a.text for a in present) & set(op.attributes["expected"].as_dict()):
        out.append("an attribute is listed both as present and as expected")
    return out


def verify_switch(op):
    cases = op.attributes["cases"]
    arities = op.attributes["arities"]
    out = []
    if any(not isinstance(c, T.StringAttr) for c in cases):
        out.append("cases must be opcode strings")
    elif len({(c.text, a.value) for c, a in zip(cases, arities)}) != len(cases):
        out.append("duplicate switch case")
    if len(arities) != len(cases) or any(not isinstance(a, T.IntegerAttr) for a in arities):
        out.append("arities must hold one integer per case (-1 for any arity)")
    if len(op.regions) != len(cases) + 1:
        out.append(f"expected {len(cases) + 1} regions (one per case plus default), got {len(op.regions)}")
    for r in op.regions:
        if len(r.blocks) != 1:
            out.append(("single-block", "each switch region must have exactly one block"))
        out.extend(_body_errors(op, r))
    return out


def _inside_matcher(op) -> bool:
    p = op.parent_op
    return p is not None and p.dialect == "pat"


def verify_emit(op):
    out = []
    caps = op.attributes["captures"]
    if len(caps) != op.num_operands or any(not isinstance(c, T.StringAttr) for c in caps):
        out.append("captures must name each operand")
    elif len({c.text for c in caps}) != len(caps):
        out.append("capture names must be unique")
    if op.attributes["benefit"].value < 0:
        out.append("benefit must be non-negative")
    if not _inside_matcher(op):
        out.append("pat.emit must be nested in a matcher op")
    return out


def verify_fail(op):
    return [] if _inside_matcher(op) else ["pat.fail must be nested in a matcher op"]


def make_dialect():
    return load_dialect("pat", TABLE, globals())
