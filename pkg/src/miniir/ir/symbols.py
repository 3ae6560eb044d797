"""Symbol tables: named, non-SSA references between ops."""

from __future__ import annotations

from typing import Iterator

from miniir.ir import types as T
from miniir.ir.context import Trait
from miniir.ir.core import Operation


def symbol_name(op: Operation) -> str | None:
    attr = op.attributes.get("sym_name")
    return attr.text if isinstance(attr, T.StringAttr) else None


def is_symbol_table(op: Operation) -> bool:
    return op.has_trait(Trait.SYMBOL_TABLE_HOLDER)


def symbol_definers(scope: Operation) -> Iterator[Operation]:
    for region in scope.regions:
        for block in region.blocks:
            for op in block.ops:
                if symbol_name(op) is not None:
                    yield op


def lookup_symbol(scope: Operation, name: str) -> Operation | None:
    for op in symbol_definers(scope):
        if symbol_name(op) == name:
            return op
    return None


def nearest_symbol_table(op: Operation) -> Operation | None:
    for a in op.ancestors():
        if is_symbol_table(a):
            return a
    return None


def resolve_symbol(from_op: Operation, name: str) -> Operation | None:
    table = nearest_symbol_table(from_op)
    return lookup_symbol(table, name) if table is not None else None


def duplicate_symbols(scope: Operation) -> list[tuple[str, Operation]]:
    seen: set[str] = set()
    dups = []
    for op in symbol_definers(scope):
        name = symbol_name(op)
        if name in seen:
            dups.append((name, op))
        seen.add(name)
    return dups


def symbol_refs(attr: T.Attribute) -> Iterator[str]:
    if isinstance(attr, T.SymbolRefAttr):
        yield attr.name
    elif isinstance(attr, T.ArrayAttr):
        for a in attr:
            yield from symbol_refs(a)
    elif isinstance(attr, T.DictAttr):
        for _, a in attr.entries:
            yield from symbol_refs(a)


class SymbolTable:
    """Snapshot of one scope's symbols for repeated lookups."""

    def __init__(self, scope: Operation):
        self.scope = scope
        self.table: dict[str, Operation] = {}
        for op in symbol_definers(scope):
            self.table.setdefault(symbol_name(op), op)

    def lookup(self, name: str) -> Operation | None:
        return self.table.get(name)
