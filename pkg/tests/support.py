"""Shared helpers for the test suite: corpus access and interpreter runs."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

from miniir.dialects import make_context
from miniir.interp import parse_runtime_value, run_function
from miniir.textio import parse_source

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"
PATTERNS = ROOT / "patterns"


@lru_cache(maxsize=None)
def manifest() -> dict[str, dict]:
    data = json.loads((CORPUS / "manifest.json").read_text())
    return {e["file"]: e for e in data["files"]}


def corpus_names() -> list[str]:
    return sorted(p.name for p in CORPUS.glob("*.mir"))


def executable_names() -> list[str]:
    return [n for n in corpus_names() if manifest()[n].get("runs")]


def source(name: str) -> str:
    return (CORPUS / name).read_text()


def load(name: str, ctx=None):
    ctx = ctx or make_context()
    return parse_source(ctx, source(name), str(CORPUS / name))


def parse(text: str, ctx=None):
    return parse_source(ctx or make_context(), text)


def run_manifest(module, name: str) -> list:
    """Outputs of every manifest run of ``name`` on ``module``, in order."""
    ctx = module.context
    out = []
    for r in manifest()[name].get("runs", []):
        args = [parse_runtime_value(ctx, a)[0] for a in r["args"]]
        out.append(run_function(module, r["entry"], args))
    return out


def same_outputs(a: list, b: list) -> bool:
    from miniir.interp import outputs_equal

    return len(a) == len(b) and all(outputs_equal(x, y) for x, y in zip(a, b))


# -- random programs -----------------------------------------------------------

INT_BINARY = ("arith.addi", "arith.subi", "arith.muli")
PREDICATES = ("eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge")


def build_random_function(draw, ctx=None, n_ops=None, name="f", n_args=3):
    """A module holding one i32 function of random arith ops, built with the Builder API.

    ``draw`` is a hypothesis draw function.  Constants are drawn from a small
    pool so the canonicalizer and matcher patterns have something to match.
    """
    from hypothesis import strategies as st

    from miniir.dialects.builtin import new_module
    from miniir.ir import Block, Builder, Operation, Region
    from miniir.ir import types as T

    ctx = ctx or make_context()
    i32 = T.i32
    module = new_module(ctx)
    entry = Block(ctx, [i32] * n_args)
    ftype = ctx.intern_attr(T.TypeAttr(T.FunctionType((i32,) * n_args, (i32,))))
    attrs = {"sym_name": ctx.intern_attr(T.StringAttr(name)), "function_type": ftype}
    fn = Operation(ctx, "func.func", [], [], attrs, [Region([entry])])
    Builder.before(module.regions[0].blocks[0].ops[-1]).insert(fn)
    b = Builder.at_end(entry)
    vals = list(entry.args)
    bools = []
    n = draw(st.integers(1, 14)) if n_ops is None else n_ops
    for _ in range(n):
        kind = draw(st.sampled_from(["bin", "bin", "bin", "const", "cmp", "select"]))
        pick = st.sampled_from(vals)
        if kind == "const":
            v = draw(st.sampled_from([0, 1, -1, 2, 3, 7]))
            op = b.create("arith.constant", [], [i32], {"value": ctx.intern_attr(T.IntegerAttr(v, i32))})
            vals.append(op.results[0])
        elif kind == "cmp":
            p = draw(st.sampled_from(PREDICATES))
            op = b.create("arith.cmpi", [draw(pick), draw(pick)], [T.i1],
                          {"predicate": ctx.intern_attr(T.StringAttr(p))})
            bools.append(op.results[0])
        elif kind == "select" and bools:
            op = b.create("arith.select", [draw(st.sampled_from(bools)), draw(pick), draw(pick)], [i32])
            vals.append(op.results[0])
        else:
            opcode = draw(st.sampled_from(INT_BINARY))
            op = b.create(opcode, [draw(pick), draw(pick)], [i32])
            vals.append(op.results[0])
    b.create("func.return", [vals[-1]])
    return module

