"""cf: unstructured branches carrying block arguments."""

from __future__ import annotations

from miniir.dialects.table import load_dialect
from miniir.ir import types as T
from miniir.ir.context import InlinerInterface
from miniir.rewrite.pattern import Pattern, constant_value

TABLE = """
[cf.br]
summary = unconditional branch
traits = Terminator
successors = 1
print = print_br
parse = parse_br

[cf.cond_br]
summary = two-way conditional branch
traits = Terminator
operands = i1
successors = 2
print = print_cond_br
parse = parse_cond_br
canonicalize = cond_br_constant
"""


def print_br(p, op):
    if op.attributes or op.operands:
        return False
    p.w("cf.br " + p.successor(op.successors[0]))


def parse_br(parser, name, pos):
    return parser.create(name, successors=[parser.parse_successor()], pos=pos)


def print_cond_br(p, op):
    if op.attributes or op.num_operands != 1 or len(op.successors) != 2:
        return False
    t, f = op.successors
    p.w(f"cf.cond_br {p.val(op.operand(0))}, {p.successor(t)}, {p.successor(f)}")


def parse_cond_br(parser, name, pos):
    ref = parser.parse_value_ref()
    cond = parser.resolve(ref, T.i1)
    parser.expect(",")
    t = parser.parse_successor()
    parser.expect(",")
    f = parser.parse_successor()
    return parser.create(name, [cond], (), {}, 0, [t, f], pos=pos)


class CondBrConstant(Pattern):
    """cond_br on a constant condition becomes an unconditional branch."""

    benefit = 1

    def __init__(self, opcode="cf.cond_br"):
        self.root = opcode
        self.name = "cf.cond_br.constant_condition"

    def match(self, op):
        c = constant_value(op.operand(0))
        return c if isinstance(c, T.IntegerAttr) else None

    def rewrite(self, op, c, rewriter):
        succ = op.successors[0 if c.value else 1]
        rewriter.create("cf.br", successors=[(succ.block, list(succ.operands))])
        rewriter.erase_op(op)


cond_br_constant = CondBrConstant


def make_dialect():
    return load_dialect("cf", TABLE, globals(), inliner=InlinerInterface())
