"""memref: statically shaped buffers with identity layout."""

from __future__ import annotations

from miniir.dialects.table import load_dialect
from miniir.ir import types as T
from miniir.ir.context import InlinerInterface

TABLE = """
[memref.alloc]
summary = allocate a zero-initialized buffer
results = memref
verify = verify_alloc

[memref.load]
summary = read one element
operands = memref index*
results = any
verify = verify_load

[memref.store]
summary = write one element
operands = any memref index*
verify = verify_store

[memref.dealloc]
summary = free a buffer
operands = memref
"""


def verify_alloc(op):
    t = op.results[0].type
    if not t.has_static_shape:
        yield "type-constraint", f"dynamic dimensions are not supported, got {t}"


def _check_access(op, memref, indices, value_type):
    t = memref.type
    if len(indices) != t.rank:
        yield "arity", f"expected {t.rank} indices for {t}, got {len(indices)}"
    if value_type != t.elem:
        yield "type-constraint", f"element type {value_type} does not match {t}"


def verify_load(op):
    yield from _check_access(op, op.operand(0), op.operands[1:], op.results[0].type)


def verify_store(op):
    yield from _check_access(op, op.operand(1), op.operands[2:], op.operand(0).type)


def make_dialect():
    return load_dialect("memref", TABLE, globals(), inliner=InlinerInterface())
