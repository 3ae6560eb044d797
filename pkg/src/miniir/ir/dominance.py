"""Dominance over region CFGs and value visibility checks."""

from __future__ import annotations

from miniir.ir.context import Trait
from miniir.ir.core import Block, BlockArgument, Operation, OpResult, Region, Value


class DomTree:
    """Immediate dominators of the blocks of one region (entry is the root)."""

    def __init__(self, region: Region):
        self.region = region
        self.idom: dict[int, Block] = {}
        self.rpo: list[Block] = []
        self.children: dict[int, list[Block]] = {}
        if not region.blocks:
            return
        entry = region.blocks[0]
        succs = {id(b): [s for s in b.successors() if s.parent is region] for b in region.blocks}

        # iterative DFS postorder
        post: list[Block] = []
        seen = {id(entry)}
        stack = [(entry, iter(succs[id(entry)]))]
        while stack:
            b, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                post.append(b)
                stack.pop()
            elif id(nxt) not in seen:
                seen.add(id(nxt))
                stack.append((nxt, iter(succs[id(nxt)])))
        self.rpo = post[::-1]
        order = {id(b): i for i, b in enumerate(self.rpo)}
        preds: dict[int, list[Block]] = {id(b): [] for b in self.rpo}
        for b in self.rpo:
            for s in succs[id(b)]:
                preds[id(s)].append(b)

        idom = {id(entry): entry}

        def intersect(a: Block, b: Block) -> Block:
            while a is not b:
                while order[id(a)] > order[id(b)]:
                    a = idom[id(a)]
                while order[id(b)] > order[id(a)]:
                    b = idom[id(b)]
            return a

        changed = True
        while changed:
            changed = False
            for b in self.rpo[1:]:
                new = None
                for p in preds[id(b)]:
                    if id(p) in idom:
                        new = p if new is None else intersect(p, new)
                if new is not None and idom.get(id(b)) is not new:
                    idom[id(b)] = new
                    changed = True
        self.idom = idom
        for b in self.rpo:
            self.children[id(b)] = []
        for b in self.rpo[1:]:
            self.children[id(idom[id(b)])].append(b)

    def reachable(self, b: Block) -> bool:
        return id(b) in self.idom

    def dominates(self, a: Block, b: Block) -> bool:
        """Block ``a`` dominates block ``b`` (reflexive). Unreachable ``b`` is dominated by all."""
        if a is b:
            return True
        if not self.reachable(b):
            return True
        if not self.reachable(a):
            return False
        entry = self.region.blocks[0]
        while b is not entry:
            b = self.idom[id(b)]
            if b is a:
                return True
        return False

    def kids(self, b: Block) -> list[Block]:
        return self.children.get(id(b), [])


class DominanceInfo:
    """Caches one DomTree per region; rebuild after CFG edits."""

    def __init__(self):
        self._trees: dict[int, DomTree] = {}

    def tree(self, region: Region) -> DomTree:
        t = self._trees.get(id(region))
        if t is None or t.region is not region:
            t = self._trees[id(region)] = DomTree(region)
        return t

    def invalidate(self) -> None:
        self._trees.clear()

    def check_use(self, value: Value, user: Operation) -> str | None:
        """None if ``user`` may use ``value``; otherwise 'isolation' or 'dominance'."""
        def_block = value.parent_block
        if def_block is None or def_block.parent is None:
            return "dominance"
        def_region = def_block.parent
        cur = user
        crossed = False
        while cur.parent_region is not def_region:
            parent = cur.parent_op
            if parent is None:
                return "dominance"
            if parent.has_trait(Trait.ISOLATED_FROM_ABOVE):
                crossed = True
            cur = parent
        if crossed:
            return "isolation"
        use_block = cur.parent
        if isinstance(value, BlockArgument):
            if use_block is def_block:
                return None
            return None if self.tree(def_region).dominates(def_block, use_block) else "dominance"
        assert isinstance(value, OpResult)
        def_op = value.op
        if cur is def_op:
            return "dominance"
        if use_block is def_block:
            return None if def_block.index_of(def_op) < def_block.index_of(cur) else "dominance"
        return None if self.tree(def_region).dominates(def_block, use_block) else "dominance"

    def properly_dominates(self, value: Value, user: Operation) -> bool:
        return self.check_use(value, user) is None


def properly_dominates(value: Value, user: Operation) -> bool:
    return DominanceInfo().properly_dominates(value, user)
