"""Loader for the declarative op-definition table format.

Each op is one INI section::

    [arith.addi]
    summary = integer addition
    traits = NoSideEffect Commutative SameOperandsAndResultType
    operands = int|index int|index
    results = same:0
    attrs = value:number predicate:string?
    regions = 1
    successors = 0
    verify = hook-name
    fold = hook-name
    canonicalize = hook-name hook-name
    print = hook-name
    parse = hook-name
    executable = no

A trailing ``*`` on the last operand/result constraint makes it variadic,
``regions = 2+`` means at least two regions, and a
trailing ``?`` on an attribute marks it optional. Hook names are resolved in
the ``hooks`` mapping handed to :func:`load_dialect`.
"""

from __future__ import annotations

import configparser
from typing import Callable, Mapping

from miniir.ir.context import AttrConstraint, Dialect, OpDefinition, RegistrationError, Trait, TypeConstraint

_KEYS = {
    "summary", "traits", "operands", "results", "attrs", "regions", "successors",
    "verify", "fold", "canonicalize", "print", "parse", "executable",
}


def load_dialect(namespace: str, table: str, hooks: Mapping[str, Callable], **dialect_hooks) -> Dialect:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(table)
    except configparser.Error as e:
        raise RegistrationError(f"malformed op table for dialect {namespace!r}: {e}") from None
    dialect = Dialect(namespace, **dialect_hooks)
    for name in cp.sections():
        sec = cp[name]
        unknown = set(sec) - _KEYS
        if unknown:
            raise RegistrationError(f"{name}: unknown table keys {sorted(unknown)}")

        def hook(key):
            ref = sec.get(key, "").strip()
            if not ref:
                return None
            if ref not in hooks:
                raise RegistrationError(f"{name}: unknown {key} hook {ref!r}")
            return hooks[ref]

        def constraints(key):
            return tuple(TypeConstraint.parse(c) for c in sec.get(key, "").split())

        attrs = []
        for a in sec.get("attrs", "").split():
            required = not a.endswith("?")
            attr_name, _, kind = a.rstrip("?").partition(":")
            attrs.append(AttrConstraint(attr_name, kind or "any", required))
        try:
            traits = frozenset(Trait(t) for t in sec.get("traits", "").split())
        except ValueError as e:
            raise RegistrationError(f"{name}: {e}") from None
        canon_refs = sec.get("canonicalize", "").split()
        for ref in canon_refs:
            if ref not in hooks:
                raise RegistrationError(f"{name}: unknown canonicalize hook {ref!r}")
        dialect.add_op(
            OpDefinition(
                name=name,
                traits=traits,
                operands=constraints("operands"),
                results=constraints("results"),
                attrs=tuple(attrs),
                num_regions=int(sec.get("regions", "0").rstrip("+")),
                variadic_regions=sec.get("regions", "").endswith("+"),
                num_successors=sec.getint("successors", 0),
                summary=sec.get("summary", ""),
                verify=hook("verify"),
                fold=hook("fold"),
                canonicalize=tuple(hooks[r] for r in canon_refs),
                print=hook("print"),
                parse=hook("parse"),
                executable=sec.getboolean("executable", True),
            )
        )
    return dialect
