"""IR verification in ordered phases.

1. structure: terminators, successor placement and arguments
2. SSA: single definition, dominance, isolation barriers
3. symbols: unique names per table, resolvable references
4. op-level: arity, type and attribute constraints, traits, custom hooks
5. dialect attributes on ops

A phase reports everything it finds; later phases are skipped once a phase
has reported an error. Every diagnostic carries a ``rule`` tag.
"""

from __future__ import annotations

from miniir.diagnostics import Diagnostic, error
from miniir.ir.context import Trait
from miniir.ir.core import BlockArgument, Operation, OpResult
from miniir.ir.dominance import DominanceInfo
from miniir.ir.symbols import duplicate_symbols, is_symbol_table, nearest_symbol_table, lookup_symbol, symbol_refs


def verify(root: Operation, phases: int = 5) -> list[Diagnostic]:
    ops = list(root.walk())
    checks = [_structure, _ssa, _symbols, _op_level, _dialect_attrs][:phases]
    for check in checks:
        diags: list[Diagnostic] = []
        check(root, ops, diags)
        if diags:
            return diags
    return []


def _structure(root, ops, diags) -> None:
    for op in ops:
        block = op.parent
        if op.is_terminator and block is not None and block.ops[-1] is not op:
            diags.append(error(f"terminator {op.name} must be the last operation in its block", op,
                               "terminator-mid-block"))
        if op.has_trait(Trait.TERMINATOR) and op.results:
            diags.append(error(f"terminator {op.name} must not have results", op, "terminator-results"))
        for region in op.regions:
            if region.parent is not op:
                diags.append(error("region parent link is inconsistent", op, "structure"))
            for b in region.blocks:
                if b.parent is not region:
                    diags.append(error("block parent link is inconsistent", op, "structure"))
                last = b.last_op
                if last is not None and last.is_registered and not last.is_terminator:
                    diags.append(error(f"block missing terminator (last op is {last.name})", last,
                                       "missing-terminator"))
                for inner in b.ops:
                    if inner.parent is not b:
                        diags.append(error("operation parent link is inconsistent", inner, "structure"))
        for k, succ in enumerate(op.successors):
            target = succ.block
            if target is None or target.parent is None:
                diags.append(error(f"successor #{k} of {op.name} is not in any region", op,
                                   "successor-region"))
                continue
            if block is None or target.parent is not block.parent:
                diags.append(error(f"successor #{k} of {op.name} is not in the same region", op,
                                   "successor-region"))
                continue
            if target.parent.blocks[0] is target:
                diags.append(error("entry block of a region cannot be a branch target", op,
                                   "entry-successor"))
            got = tuple(v.type for v in succ.operands)
            want = target.arg_types
            if len(got) != len(want):
                diags.append(error(
                    f"successor #{k} of {op.name} passes {len(got)} operands but the block takes {len(want)}",
                    op, "successor-args"))
            elif got != want:
                diags.append(error(
                    f"successor #{k} of {op.name} operand types ({', '.join(map(str, got))}) do not match "
                    f"block argument types ({', '.join(map(str, want))})",
                    op, "successor-args"))


def _ssa(root, ops, diags) -> None:
    seen: set[int] = set()
    for op in ops:
        for i, r in enumerate(op.results):
            if id(r) in seen or not isinstance(r, OpResult) or r.op is not op or r.index != i:
                diags.append(error(f"result #{i} of {op.name} is defined more than once", op, "double-define"))
            seen.add(id(r))
        for region in op.regions:
            for b in region.blocks:
                for i, a in enumerate(b.args):
                    if id(a) in seen or not isinstance(a, BlockArgument) or a.block is not b or a.index != i:
                        diags.append(error(f"block argument #{i} is defined more than once", op,
                                           "double-define"))
                    seen.add(id(a))
    dom = DominanceInfo()
    for op in ops:
        values = list(op.operands)
        for s in op.successors:
            values.extend(s.operands)
        for i, v in enumerate(values):
            why = dom.check_use(v, op)
            if why == "isolation":
                diags.append(error(
                    f"operand #{i} of {op.name}: use crosses isolation barrier "
                    f"(value defined above an isolated-from-above op)", op, "isolation"))
            elif why == "dominance":
                diags.append(error(
                    f"operand #{i} of {op.name} does not dominate this use", op, "dominance"))


def _symbols(root, ops, diags) -> None:
    for op in ops:
        if is_symbol_table(op):
            for name, dup in duplicate_symbols(op):
                diags.append(error(f"redefinition of symbol {name}", dup, "symbol-clash"))
    for op in ops:
        for key in sorted(op.attributes):
            for name in symbol_refs(op.attributes[key]):
                table = nearest_symbol_table(op)
                if table is None or lookup_symbol(table, name) is None:
                    diags.append(error(f"'{key}' refers to undefined symbol @{name}", op, "undefined-symbol"))


def _match_arity(constraints, n: int) -> bool:
    if constraints and constraints[-1].variadic:
        return n >= len(constraints) - 1
    return n == len(constraints)


def _constraint_for(constraints, i: int):
    if i < len(constraints):
        return constraints[i]
    return constraints[-1]


def _op_level(root, ops, diags) -> None:
    for op in ops:
        d = op.opdef
        if d is None:
            continue
        operand_types = op.operand_types
        ok = True
        if not _match_arity(d.operands, len(operand_types)):
            diags.append(error(f"{op.name} expects {_arity_text(d.operands)} operands, got {len(operand_types)}",
                               op, "arity"))
            ok = False
        if not _match_arity(d.results, len(op.results)):
            diags.append(error(f"{op.name} expects {_arity_text(d.results)} results, got {len(op.results)}",
                               op, "arity"))
            ok = False
        if len(op.regions) < d.num_regions or (len(op.regions) > d.num_regions and not d.variadic_regions):
            want = f"at least {d.num_regions}" if d.variadic_regions else str(d.num_regions)
            diags.append(error(f"{op.name} expects {want} regions, got {len(op.regions)}", op, "arity"))
            ok = False
        if len(op.successors) != d.num_successors:
            diags.append(error(f"{op.name} expects {d.num_successors} successors, got {len(op.successors)}",
                               op, "arity"))
            ok = False
        if ok:
            for i, t in enumerate(operand_types):
                c = _constraint_for(d.operands, i)
                if not c.check(t, operand_types):
                    diags.append(error(f"operand #{i} of {op.name} must be {c.describe()}, got {t}",
                                       op, "type-constraint"))
                    ok = False
            for i, t in enumerate(op.result_types):
                c = _constraint_for(d.results, i)
                if not c.check(t, operand_types):
                    diags.append(error(f"result #{i} of {op.name} must be {c.describe()}, got {t}",
                                       op, "type-constraint"))
                    ok = False
        for ac in d.attrs:
            a = op.attributes.get(ac.name)
            if a is None:
                if ac.required:
                    diags.append(error(f"{op.name} requires attribute '{ac.name}'", op, "missing-attribute"))
                    ok = False
            elif not ac.check(a):
                diags.append(error(f"attribute '{ac.name}' of {op.name} must be of kind {ac.kind}",
                                   op, "attribute-kind"))
                ok = False
        if d.has_trait(Trait.SAME_OPERANDS_AND_RESULT_TYPE):
            all_types = set(operand_types) | set(op.result_types)
            if len(all_types) > 1:
                diags.append(error(f"{op.name} requires all operands and results to have the same type",
                                   op, "type-constraint"))
                ok = False
        if d.has_trait(Trait.SINGLE_REGION_SINGLE_BLOCK):
            for r in op.regions:
                if len(r.blocks) != 1:
                    diags.append(error(f"{op.name} region must have exactly one block, has {len(r.blocks)}",
                                       op, "single-block"))
                    ok = False
        if ok and d.verify is not None:
            for item in d.verify(op) or ():
                rule, msg = item if isinstance(item, tuple) else ("op-verifier", item)
                diags.append(error(f"{op.name}: {msg}", op, rule))


def _arity_text(constraints) -> str:
    if constraints and constraints[-1].variadic:
        return f"at least {len(constraints) - 1}"
    return str(len(constraints))


def _dialect_attrs(root, ops, diags) -> None:
    ctx = root.context
    for op in ops:
        for key in sorted(op.attributes):
            if "." not in key:
                continue
            dialect = ctx.get_dialect(key.split(".", 1)[0])
            if dialect is None or dialect.verify_op_attribute is None:
                continue
            for msg in dialect.verify_op_attribute(op, key, op.attributes[key]) or ():
                diags.append(error(msg, op, "dialect-attribute"))


def verify_or_raise(root: Operation) -> None:
    diags = verify(root)
    if diags:
        raise VerificationError(diags)


class VerificationError(Exception):
    def __init__(self, diagnostics):
        super().__init__("\n".join(d.render() for d in diagnostics))
        self.diagnostics = diagnostics


__all__ = ["verify", "verify_or_raise", "VerificationError"]
