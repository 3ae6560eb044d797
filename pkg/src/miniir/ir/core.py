"""Operations, blocks, regions and SSA values."""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from miniir.ir import types as T
from miniir.ir.context import Context, OpDefinition, Trait


class IRError(Exception):
    """Misuse of the IR mutation API (type mismatch, live uses on erase, ...)."""


class Value:
    __slots__ = ("type", "uses", "id", "__weakref__")

    def __init__(self, type: T.Type, id: int):
        self.type = type
        self.uses: list[OpOperand] = []
        self.id = id

    @property
    def owner(self):
        raise NotImplementedError

    def defining_op(self) -> Operation | None:
        return None

    @property
    def parent_block(self) -> Block | None:
        raise NotImplementedError

    def has_uses(self) -> bool:
        return bool(self.uses)

    def users(self) -> list[Operation]:
        seen: dict[int, Operation] = {}
        for u in self.uses:
            seen.setdefault(id(u.owner), u.owner)
        return list(seen.values())

    def replace_all_uses_with(self, new: Value) -> int:
        """Point every use of ``self`` at ``new``; returns the number of uses rewritten."""
        if new.type != self.type:
            raise IRError(f"cannot replace value of type {self.type} with value of type {new.type}")
        if new is self:
            return len(self.uses)
        uses = list(self.uses)
        for u in uses:
            u.set(new)
        return len(uses)

    def replace_uses_if(self, new: Value, pred) -> int:
        if new.type != self.type:
            raise IRError(f"cannot replace value of type {self.type} with value of type {new.type}")
        n = 0
        for u in list(self.uses):
            if pred(u):
                u.set(new)
                n += 1
        return n


class OpResult(Value):
    __slots__ = ("op", "index")

    def __init__(self, type, id, op: Operation, index: int):
        super().__init__(type, id)
        self.op = op
        self.index = index

    @property
    def owner(self) -> Operation:
        return self.op

    def defining_op(self) -> Operation:
        return self.op

    @property
    def parent_block(self) -> Block | None:
        return self.op.parent

    def __repr__(self):
        return f"<OpResult #{self.index} of {self.op.name} : {self.type}>"


class BlockArgument(Value):
    __slots__ = ("block", "index")

    def __init__(self, type, id, block: Block, index: int):
        super().__init__(type, id)
        self.block = block
        self.index = index

    @property
    def owner(self) -> Block:
        return self.block

    @property
    def parent_block(self) -> Block:
        return self.block

    def __repr__(self):
        return f"<BlockArgument #{self.index} : {self.type}>"


class OpOperand:
    """One operand slot. ``successor`` is the successor index for successor operands."""

    __slots__ = ("owner", "value", "successor")

    def __init__(self, owner: Operation, value: Value, successor: int | None = None):
        self.owner = owner
        self.value = value
        self.successor = successor
        value.uses.append(self)

    def set(self, value: Value) -> None:
        if value is self.value:
            return
        self._unlink()
        self.value = value
        value.uses.append(self)

    def _unlink(self) -> None:
        uses = self.value.uses
        for i, u in enumerate(uses):
            if u is self:
                del uses[i]
                return

    @property
    def index(self) -> int:
        if self.successor is None:
            return next(i for i, o in enumerate(self.owner._operands) if o is self)
        slots = self.owner.successors[self.successor]._operands
        return next(i for i, o in enumerate(slots) if o is self)


class Successor:
    __slots__ = ("block", "_operands")

    def __init__(self, block: Block, operands: list[OpOperand]):
        self.block = block
        self._operands = operands

    @property
    def operands(self) -> tuple[Value, ...]:
        return tuple(o.value for o in self._operands)


class Operation:
    # (file, line, col) recorded by the parser; used for diagnostics only
    _src_pos: tuple[str, int, int] | None = None

    def __init__(
        self,
        context: Context,
        name: str,
        operands: Sequence[Value] = (),
        result_types: Sequence[T.Type] = (),
        attributes: dict[str, T.Attribute] | None = None,
        regions: int | Sequence[Region] = 0,
        successors: Sequence[tuple[Block, Sequence[Value]]] = (),
        location: T.Location = T.UNKNOWN_LOC,
    ):
        context.check_opcode(name)
        self.context = context
        self.name = name
        self.opdef: OpDefinition | None = context.get_op_def(name)
        self.id = context.next_id()
        self.parent: Block | None = None
        self.location = location
        self.attributes: dict[str, T.Attribute] = dict(attributes or {})
        self._erased = False
        for v in operands:
            if not isinstance(v, Value):
                raise IRError(f"operand {v!r} of {name} is not a value")
        self._operands = [OpOperand(self, v) for v in operands]
        self.results = [
            OpResult(t, context.next_id(), self, i) for i, t in enumerate(result_types)
        ]
        self.successors: list[Successor] = []
        for k, (block, args) in enumerate(successors):
            self.successors.append(Successor(block, [OpOperand(self, v, k) for v in args]))
        if isinstance(regions, int):
            regions = [Region() for _ in range(regions)]
        self.regions: list[Region] = []
        for r in regions:
            if r.parent is not None:
                raise IRError("region already attached to an operation")
            r.parent = self
            self.regions.append(r)

    # -- queries ---------------------------------------------------------------

    def __repr__(self):
        return f"<{self.name} #{self.id}>"

    @property
    def operands(self) -> tuple[Value, ...]:
        return tuple(o.value for o in self._operands)

    @property
    def operand_slots(self) -> list[OpOperand]:
        return self._operands

    @property
    def num_operands(self) -> int:
        return len(self._operands)

    def operand(self, i: int) -> Value:
        return self._operands[i].value

    def result(self, i: int = 0) -> OpResult:
        return self.results[i]

    @property
    def result_types(self) -> tuple[T.Type, ...]:
        return tuple(r.type for r in self.results)

    @property
    def operand_types(self) -> tuple[T.Type, ...]:
        return tuple(o.value.type for o in self._operands)

    @property
    def is_registered(self) -> bool:
        return self.opdef is not None

    @property
    def dialect(self) -> str:
        return self.name.split(".", 1)[0]

    def has_trait(self, trait: Trait) -> bool:
        return self.opdef is not None and trait in self.opdef.traits

    @property
    def is_terminator(self) -> bool:
        return self.has_trait(Trait.TERMINATOR)

    def get_attr(self, name: str, default=None):
        return self.attributes.get(name, default)

    def set_attr(self, name: str, attr: T.Attribute) -> None:
        self.attributes[name] = attr

    def region(self, i: int = 0) -> Region:
        return self.regions[i]

    @property
    def parent_region(self) -> Region | None:
        return self.parent.parent if self.parent is not None else None

    @property
    def parent_op(self) -> Operation | None:
        r = self.parent_region
        return r.parent if r is not None else None

    def ancestors(self) -> Iterator[Operation]:
        op = self.parent_op
        while op is not None:
            yield op
            op = op.parent_op

    def is_proper_ancestor(self, other: Operation) -> bool:
        return any(a is self for a in other.ancestors())

    def isolation_root(self) -> Operation:
        """Nearest IsolatedFromAbove ancestor (or the top of the tree)."""
        op = self.parent_op
        last = self
        while op is not None:
            if op.has_trait(Trait.ISOLATED_FROM_ABOVE):
                return op
            last = op
            op = op.parent_op
        return last

    def is_before_in_block(self, other: Operation) -> bool:
        assert self.parent is other.parent and self.parent is not None
        return self.parent.index_of(self) < self.parent.index_of(other)

    def successor_blocks(self) -> list[Block]:
        return [s.block for s in self.successors]

    # -- mutation --------------------------------------------------------------

    def set_operand(self, i: int, value: Value) -> None:
        self._operands[i].set(value)

    def set_operands(self, values: Sequence[Value]) -> None:
        for o in self._operands:
            o._unlink()
        self._operands = [OpOperand(self, v) for v in values]

    def set_successor(self, k: int, block: Block, args: Sequence[Value] | None = None) -> None:
        succ = self.successors[k]
        succ.block = block
        if args is not None:
            for o in succ._operands:
                o._unlink()
            succ._operands = [OpOperand(self, v, k) for v in args]

    def replace_all_uses_with(self, values: Sequence[Value]) -> int:
        if len(values) != len(self.results):
            raise IRError(
                f"{self.name} has {len(self.results)} results, replacement has {len(values)} values"
            )
        return sum(r.replace_all_uses_with(v) for r, v in zip(self.results, values))

    def drop_all_references(self) -> None:
        for o in self._operands:
            o._unlink()
        self._operands = []
        for s in self.successors:
            for o in s._operands:
                o._unlink()
        self.successors = []
        for r in self.regions:
            for b in r.blocks:
                for op in b.ops:
                    op.drop_all_references()

    def detach(self) -> Operation:
        if self.parent is not None:
            self.parent._remove(self)
        return self

    def erase(self) -> None:
        """Unlink and destroy this op. Its results must have no uses outside the op itself."""
        inside = {id(o) for o in self.walk()}
        blockers = []
        for r in self.results:
            for u in r.uses:
                if id(u.owner) not in inside:
                    blockers.append(u.owner)
        if blockers:
            names = ", ".join(sorted({b.name for b in blockers}))
            raise IRError(f"cannot erase {self.name}: results still used by {names}")
        for r in self.regions:
            for b in r.blocks:
                for a in b.args:
                    if any(id(u.owner) not in inside for u in a.uses):
                        raise IRError(f"cannot erase {self.name}: block argument used outside")
        self.drop_all_references()
        self.detach()
        for op in self.walk():
            op._erased = True

    def move_before(self, other: Operation) -> None:
        self.detach()
        other.parent.insert_before(other, self)

    def move_after(self, other: Operation) -> None:
        self.detach()
        other.parent.insert_after(other, self)

    # -- traversal -------------------------------------------------------------

    def walk(self, order: str = "pre") -> Iterator[Operation]:
        """Yield this op and all nested ops.

        Child lists are snapshotted, so in post-order the caller may erase the
        op it was just handed.
        """
        if order not in ("pre", "post"):
            raise ValueError(f"walk order must be 'pre' or 'post', got {order!r}")
        if order == "pre":
            yield self
        for r in list(self.regions):
            for b in list(r.blocks):
                for op in list(b.ops):
                    yield from op.walk(order)
        if order == "post":
            yield self

    def clone(self, mapping: dict | None = None) -> Operation:
        """Deep-copy this op. ``mapping`` maps old values/blocks to new ones and is updated."""
        mapping = {} if mapping is None else mapping
        operands = [mapping.get(v, v) for v in self.operands]
        successors = [
            (mapping.get(s.block, s.block), [mapping.get(v, v) for v in s.operands])
            for s in self.successors
        ]
        new = Operation(
            self.context,
            self.name,
            operands,
            self.result_types,
            dict(self.attributes),
            len(self.regions),
            successors,
            self.location,
        )
        for old_r, new_r in zip(self.results, new.results):
            mapping[old_r] = new_r
        for old_region, new_region in zip(self.regions, new.regions):
            old_region.clone_into(new_region, mapping)
        return new


class Block:
    def __init__(self, context: Context, arg_types: Sequence[T.Type] = ()):
        self.context = context
        self.id = context.next_id()
        self.args: list[BlockArgument] = []
        self.ops: list[Operation] = []
        self.parent: Region | None = None
        self._order: dict[int, int] | None = None
        for t in arg_types:
            self.add_argument(t)

    def __repr__(self):
        return f"<Block #{self.id} ({len(self.ops)} ops)>"

    @property
    def parent_op(self) -> Operation | None:
        return self.parent.parent if self.parent is not None else None

    @property
    def arg_types(self) -> tuple[T.Type, ...]:
        return tuple(a.type for a in self.args)

    def add_argument(self, type: T.Type) -> BlockArgument:
        arg = BlockArgument(type, self.context.next_id(), self, len(self.args))
        self.args.append(arg)
        return arg

    def erase_argument(self, i: int) -> None:
        if self.args[i].uses:
            raise IRError("cannot erase a block argument that still has uses")
        del self.args[i]
        for k, a in enumerate(self.args):
            a.index = k

    # -- op list ---------------------------------------------------------------

    def index_of(self, op: Operation) -> int:
        if self._order is None:
            self._order = {id(o): i for i, o in enumerate(self.ops)}
        return self._order[id(op)]

    def _attach(self, op: Operation) -> None:
        if op.parent is not None:
            raise IRError(f"{op.name} is already inside a block")
        op.parent = self
        self._order = None

    def append(self, op: Operation) -> Operation:
        self._attach(op)
        self.ops.append(op)
        return op

    def insert(self, index: int, op: Operation) -> Operation:
        self._attach(op)
        self.ops.insert(index, op)
        return op

    def insert_before(self, ref: Operation, op: Operation) -> Operation:
        return self.insert(self.index_of(ref), op)

    def insert_after(self, ref: Operation, op: Operation) -> Operation:
        return self.insert(self.index_of(ref) + 1, op)

    def _remove(self, op: Operation) -> None:
        del self.ops[self.index_of(op)]
        op.parent = None
        self._order = None

    @property
    def terminator(self) -> Operation | None:
        if self.ops and self.ops[-1].is_terminator:
            return self.ops[-1]
        return None

    @property
    def last_op(self) -> Operation | None:
        return self.ops[-1] if self.ops else None

    def successors(self) -> list[Block]:
        last = self.last_op
        return last.successor_blocks() if last is not None else []

    def predecessors(self) -> list[Block]:
        if self.parent is None:
            return []
        return [b for b in self.parent.blocks if any(s is self for s in b.successors())]

    def is_entry(self) -> bool:
        return self.parent is not None and self.parent.blocks and self.parent.blocks[0] is self

    def split_before(self, op: Operation) -> Block:
        """Move ``op`` and everything after it into a new block placed after this one."""
        idx = self.index_of(op)
        tail = self.ops[idx:]
        new = Block(self.context)
        self.parent.insert_block_after(self, new)
        del self.ops[idx:]
        self._order = None
        for o in tail:
            o.parent = None
            new.append(o)
        return new

    def detach(self) -> Block:
        """Remove from the parent region, keeping ops and uses intact."""
        if self.parent is not None:
            self.parent.blocks.remove(self)
            self.parent = None
        return self

    def erase(self) -> None:
        for op in self.ops:
            op.drop_all_references()
        for op in reversed(list(self.ops)):
            for r in op.results:
                for u in list(r.uses):
                    u._unlink()
            op.detach()
            for o in op.walk():
                o._erased = True
        for a in self.args:
            for u in list(a.uses):
                u._unlink()
        if self.parent is not None:
            self.parent.blocks.remove(self)
            self.parent = None


class Region:
    def __init__(self, blocks: Iterable[Block] = ()):
        self.blocks: list[Block] = []
        self.parent: Operation | None = None
        for b in blocks:
            self.append(b)

    def __repr__(self):
        return f"<Region ({len(self.blocks)} blocks)>"

    @property
    def entry(self) -> Block | None:
        return self.blocks[0] if self.blocks else None

    def append(self, block: Block) -> Block:
        if block.parent is not None:
            raise IRError("block already belongs to a region")
        block.parent = self
        self.blocks.append(block)
        return block

    def insert_block_after(self, ref: Block, block: Block) -> Block:
        if block.parent is not None:
            raise IRError("block already belongs to a region")
        block.parent = self
        self.blocks.insert(self.blocks.index(ref) + 1, block)
        return block

    def is_ancestor_of_op(self, op: Operation) -> bool:
        r = op.parent_region
        while r is not None:
            if r is self:
                return True
            parent = r.parent
            r = parent.parent_region if parent is not None else None
        return False

    def clone_into(self, dest: Region, mapping: dict) -> None:
        new_blocks = []
        for b in self.blocks:
            nb = Block(b.context)
            for a in b.args:
                mapping[a] = nb.add_argument(a.type)
            mapping[b] = nb
            new_blocks.append(nb)
        for b, nb in zip(self.blocks, new_blocks):
            for op in b.ops:
                nb.append(op.clone(mapping))
            dest.append(nb)
        # a block may use values of a dominating block that comes later in the list
        for nb in new_blocks:
            for op in nb.ops:
                for o in op.walk():
                    for slot in o.operand_slots:
                        if slot.value in mapping:
                            slot.set(mapping[slot.value])
                    for s in o.successors:
                        for slot in s._operands:
                            if slot.value in mapping:
                                slot.set(mapping[slot.value])


class Builder:
    """Creates ops at an insertion point that advances past each inserted op."""

    def __init__(self, context: Context, block: Block | None = None, index: int | None = None):
        self.context = context
        self.block = block
        self.index = index
        self.location: T.Location = T.UNKNOWN_LOC

    @classmethod
    def at_end(cls, block: Block) -> Builder:
        return cls(block.context, block, None)

    @classmethod
    def at_start(cls, block: Block) -> Builder:
        return cls(block.context, block, 0)

    @classmethod
    def before(cls, op: Operation) -> Builder:
        return cls(op.context, op.parent, op.parent.index_of(op))

    @classmethod
    def after(cls, op: Operation) -> Builder:
        return cls(op.context, op.parent, op.parent.index_of(op) + 1)

    def insert(self, op: Operation) -> Operation:
        if self.block is None:
            return op
        if self.index is None:
            self.block.append(op)
        else:
            self.block.insert(self.index, op)
            self.index += 1
        return op

    def create(
        self,
        name: str,
        operands: Sequence[Value] = (),
        result_types: Sequence[T.Type] = (),
        attributes: dict[str, T.Attribute] | None = None,
        regions: int | Sequence[Region] = 0,
        successors: Sequence[tuple[Block, Sequence[Value]]] = (),
        location: T.Location | None = None,
    ) -> Operation:
        op = Operation(
            self.context,
            name,
            operands,
            result_types,
            attributes,
            regions,
            successors,
            self.location if location is None else location,
        )
        return self.insert(op)


def iter_values(op: Operation) -> Iterator[Value]:
    """All values defined inside ``op`` (block arguments and results), pre-order."""
    for o in op.walk():
        for r in o.regions:
            for b in r.blocks:
                yield from b.args
        yield from o.results


def audit_use_lists(root: Operation) -> list[str]:
    """Return descriptions of inconsistencies between use lists and operand slots."""
    problems = []
    slots: dict[int, OpOperand] = {}
    values: dict[int, Value] = {}
    for op in root.walk():
        if op._erased:
            problems.append(f"erased op {op.name} still reachable")
        for s in op._operands:
            slots[id(s)] = s
        for succ in op.successors:
            for s in succ._operands:
                slots[id(s)] = s
        for r in op.regions:
            for b in r.blocks:
                for a in b.args:
                    values[id(a)] = a
        for r in op.results:
            values[id(r)] = r
    for s in slots.values():
        if not any(u is s for u in s.value.uses):
            problems.append(f"operand of {s.owner.name} missing from use list of its value")
    for v in values.values():
        for u in v.uses:
            if id(u) not in slots:
                problems.append(f"value {v!r} has a use in a detached or erased op {u.owner.name}")
    return problems
