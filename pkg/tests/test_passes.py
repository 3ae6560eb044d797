import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from miniir.interp import outputs_equal, run_function
from miniir.ir import Builder, structural_equal
from miniir.passes import (
    PASSES,
    Pass,
    PipelineError,
    parse_pipeline,
    register_pass,
    run_cse,
    run_dce,
    run_inliner,
    run_pipeline,
)
from miniir.passes.pipeline import PassInvocation, PipelineSpec
from miniir.textio import print_op
from miniir.verifier import verify

from support import build_random_function, corpus_names, executable_names, load, parse, run_manifest, same_outputs


def ops_of(m, name):
    return [o for o in m.walk() if o.name == name]


def func(m, name):
    return next(o for o in m.walk() if o.name == "func.func" and o.attributes["sym_name"].text == name)


# -- pipeline text -------------------------------------------------------------


def test_parse_flat_pipeline():
    spec = parse_pipeline("builtin.module(cse)")
    assert spec.anchor == "builtin.module"
    assert spec.entries == [PassInvocation("cse")]


def test_parse_nested_pipeline():
    spec = parse_pipeline("builtin.module(cse,canonicalize,func.func(lower-affine,cse))")
    assert [type(e).__name__ for e in spec.entries] == ["PassInvocation", "PassInvocation", "PipelineSpec"]
    inner = spec.entries[2]
    assert inner.anchor == "func.func"
    assert [e.name for e in inner.entries] == ["lower-affine", "cse"]


def test_parse_pass_options():
    spec = parse_pipeline("builtin.module(inline{max-ops=4},canonicalize{max-iterations=3})")
    assert spec.entries[0].options == {"max-ops": "4"}
    assert spec.entries[1].options == {"max-iterations": "3"}


def test_pipeline_prints_back():
    text = "builtin.module(cse,func.func(canonicalize,cse))"
    assert str(parse_pipeline(text)) == text


@pytest.mark.parametrize("text,message", [
    ("builtin.module(nopass)", "unknown pass"),
    ("builtin.module(cse", "expected"),
    ("builtin.module(cse))", "unexpected"),
    ("(cse)", "anchor op name"),
])
def test_pipeline_errors(text, message):
    with pytest.raises(PipelineError, match=message):
        parse_pipeline(text)


def test_pass_anchored_on_wrong_op_rejected():
    m = load("inline_simple.mir")
    with pytest.raises(PipelineError):
        run_pipeline(m, parse_pipeline("builtin.module(func.func(inline))"))


def test_empty_pipeline_leaves_module_unchanged():
    m = load("fib.mir")
    text = print_op(m)
    report = run_pipeline(m, parse_pipeline("builtin.module()"))
    assert report.ok and report.passes_run == 0
    assert print_op(m) == text


def test_function_anchor_runs_once_per_function():
    m = load("eight_funcs.mir")
    report = run_pipeline(m, parse_pipeline("builtin.module(func.func(cse))"))
    assert [r.anchor for r in report.records] == [f"func.func @f{i}" for i in range(8)]
    assert "cse" in report.format_table()


# -- CSE -----------------------------------------------------------------------


def test_cse_merges_identical_ops_in_one_block():
    m = parse('func.func @f(%a: i32, %b: i32) -> i32 {\n  %0 = "arith.addi"(%a, %b) : (i32, i32) -> i32\n'
              '  %1 = "arith.addi"(%a, %b) : (i32, i32) -> i32\n  %2 = "arith.muli"(%0, %1) : (i32, i32) -> i32\n'
              "  func.return %2 : i32\n}")
    report = run_cse(m)
    assert report.ops_erased == 1
    [add] = ops_of(m, "arith.addi")
    [mul] = ops_of(m, "arith.muli")
    assert mul.operand(0) is mul.operand(1) is add.results[0]


def test_cse_respects_dominance_scopes():
    m = load("cse_scopes.mir")
    before = run_manifest(m, "cse_scopes.mir")
    run_cse(m)
    fn = func(m, "diamond")
    entry, left, right, join = fn.regions[0].blocks
    # both branch-local copies of addi(a, b) are dominated by the entry copy
    assert [o.name for o in left.ops] == ["arith.muli", "cf.br"]
    assert [o.name for o in right.ops] == ["arith.muli", "arith.subi", "cf.br"]
    # muli(%0, a) in ^r does not dominate the one in ^join
    assert [o.name for o in join.ops] == ["arith.muli", "arith.addi", "func.return"]
    assert same_outputs(before, run_manifest(m, "cse_scopes.mir"))


def test_cse_keeps_identical_ops_in_sibling_blocks():
    m = parse("""func.func @f(%a: i32, %p: i1) -> i32 {
  cf.cond_br %p, ^l, ^r
^l:
  %0 = "arith.addi"(%a, %a) : (i32, i32) -> i32
  func.return %0 : i32
^r:
  %1 = "arith.addi"(%a, %a) : (i32, i32) -> i32
  func.return %1 : i32
}""")
    assert run_cse(m).ops_erased == 0
    assert len(ops_of(m, "arith.addi")) == 2


def test_cse_keeps_side_effecting_ops():
    m = parse("""func.func @f(%m: memref<2xi32>, %v: i32) {
  %i = arith.constant 0 : index
  "memref.store"(%v, %m, %i) : (i32, memref<2xi32>, index) -> ()
  "memref.store"(%v, %m, %i) : (i32, memref<2xi32>, index) -> ()
  %a = "foo.op"(%v) : (i32) -> i32
  %b = "foo.op"(%v) : (i32) -> i32
  func.return
}""")
    assert run_cse(m).ops_erased == 0
    assert len(ops_of(m, "memref.store")) == 2 and len(ops_of(m, "foo.op")) == 2


def test_cse_distinguishes_attributes_and_types():
    m = parse("""func.func @f() -> i32 {
  %0 = arith.constant 1 : i32
  %1 = arith.constant 2 : i32
  %2 = arith.constant 1 : i64
  %3 = arith.constant 1 : i32
  %4 = "arith.addi"(%0, %1) : (i32, i32) -> i32
  %5 = "arith.addi"(%4, %3) : (i32, i32) -> i32
  func.return %5 : i32
}""")
    assert run_cse(m).ops_erased == 1
    assert len(ops_of(m, "arith.constant")) == 3


@pytest.mark.parametrize("name", corpus_names())
def test_cse_is_idempotent(name):
    m = load(name)
    run_cse(m)
    again = run_cse(m)
    assert again.ops_erased == 0 and again.rewrites_applied == 0


@pytest.mark.parametrize("name", executable_names())
def test_cse_and_dce_preserve_semantics(name):
    m = load(name)
    before = run_manifest(m, name)
    run_cse(m)
    run_dce(m)
    assert verify(m) == []
    assert same_outputs(before, run_manifest(m, name))


# -- DCE -----------------------------------------------------------------------


def test_dce_erases_unused_chain():
    m = parse("""func.func @f(%x: i32) -> i32 {
  %a = arith.constant 1 : i32
  %b = "arith.addi"(%a, %x) : (i32, i32) -> i32
  %c = "arith.muli"(%b, %b) : (i32, i32) -> i32
  func.return %x : i32
}""")
    report = run_dce(m)
    assert report.ops_erased == 3
    assert [o.name for o in func(m, "f").regions[0].blocks[0].ops] == ["func.return"]


def test_dce_removes_unreachable_block():
    m = load("dead_code.mir")
    before = run_manifest(m, "dead_code.mir")
    run_dce(m)
    fn = func(m, "live")
    assert len(fn.regions[0].blocks) == 2
    assert not ops_of(m, "arith.subi")
    assert verify(m) == []
    assert same_outputs(before, run_manifest(m, "dead_code.mir"))


def test_dce_keeps_side_effects():
    m = parse("""func.func @f(%v: i32) {
  %m = "memref.alloc"() : () -> memref<2xi32>
  %i = arith.constant 0 : index
  "memref.store"(%v, %m, %i) : (i32, memref<2xi32>, index) -> ()
  %u = "foo.op"(%v) : (i32) -> i32
  func.return
}""")
    run_dce(m)
    assert ops_of(m, "memref.store") and ops_of(m, "foo.op")


# -- inliner -------------------------------------------------------------------


def test_inline_single_block_callee():
    m = load("inline_simple.mir")
    before = run_manifest(m, "inline_simple.mir")
    report = run_inliner(m)
    assert report.inlined == 3 and not report.skipped
    assert not ops_of(func(m, "sum_squares"), "func.call")
    assert len(ops_of(func(m, "sum_squares"), "arith.muli")) == 2
    assert verify(m) == []
    assert same_outputs(before, run_manifest(m, "inline_simple.mir"))


def test_inline_skips_unregistered_callee():
    m = load("inline_unregistered.mir")
    report = run_inliner(m)
    assert report.skipped == {"illegal": 1}
    assert report.inlined == 1
    [call] = ops_of(func(m, "caller"), "func.call")
    assert call.attributes["callee"].name == "opaque"
    assert verify(m) == []


def test_inline_multi_block_callee_builds_continuation():
    m = load("inline_multiblock.mir")
    before = run_manifest(m, "inline_multiblock.mir")
    run_inliner(m)
    dist = func(m, "dist")
    assert not ops_of(dist, "func.call")
    conts = [b for b in dist.regions[0].blocks if b.args and any(o.name == "arith.muli" for o in b.ops)]
    assert len(conts) == 1 and len(conts[0].args) == 1
    preds = conts[0].predecessors()
    assert len(preds) == 2
    assert all(p.last_op.name == "cf.br" for p in preds)
    assert verify(m) == []
    assert same_outputs(before, run_manifest(m, "inline_multiblock.mir"))


def test_inline_never_inlines_recursion():
    m = load("inline_recursive.mir")
    before = run_manifest(m, "inline_recursive.mir")
    report = run_inliner(m)
    assert report.skipped == {"recursive": 2}
    assert report.inlined == 2
    calls = [c.attributes["callee"].name for c in ops_of(m, "func.call")]
    assert sorted(calls) == ["fact", "fact"]
    assert same_outputs(before, run_manifest(m, "inline_recursive.mir"))


def test_inline_size_threshold():
    m = load("inline_multiblock.mir")
    report = run_inliner(m, max_ops=3)
    assert report.skipped == {"too-large": 1}
    assert ops_of(func(m, "dist"), "func.call")


@pytest.mark.parametrize("name", executable_names())
def test_inliner_preserves_semantics(name):
    m = load(name)
    before = run_manifest(m, name)
    run_inliner(m)
    assert verify(m) == []
    assert same_outputs(before, run_manifest(m, name))


# -- pass manager --------------------------------------------------------------


@pytest.mark.parametrize("threads", [2, 4, 8])
def test_threads_do_not_change_output(threads):
    spec = parse_pipeline("builtin.module(func.func(cse,canonicalize))")
    ref = load("eight_funcs.mir")
    run_pipeline(ref, spec, threads=1)
    m = load("eight_funcs.mir")
    report = run_pipeline(m, spec, threads=threads)
    assert report.ok
    assert print_op(m) == print_op(ref)


@pytest.mark.parametrize("name", corpus_names())
def test_threads_deterministic_on_corpus(name):
    spec = parse_pipeline("builtin.module(func.func(canonicalize,cse,dce))")
    outs = []
    for threads in (1, 2, 4, 8):
        m = load(name)
        assert run_pipeline(m, spec, threads=threads).ok
        outs.append(print_op(m))
    assert len(set(outs)) == 1


@pytest.fixture
def corrupt_pass():
    def run(fn, options, env):
        from miniir.rewrite import ChangeReport

        fn.regions[0].blocks[0].last_op.erase()
        return ChangeReport(rewrites_applied=1, converged=True)

    p = register_pass(Pass("test-corrupt", run, anchor="func.func"))
    yield p
    del PASSES[p.name]


def test_verify_each_stops_after_corrupting_pass(corrupt_pass):
    m = load("eight_funcs.mir")
    report = run_pipeline(m, parse_pipeline("builtin.module(func.func(test-corrupt,cse))"))
    assert not report.ok
    assert [r.pass_name for r in report.records] == ["test-corrupt"]
    assert report.records[0].verified is False
    assert "verification failed after pass 'test-corrupt'" in report.diagnostics[0].message
    assert any(d.rule == "missing-terminator" for d in report.diagnostics)


def test_verify_each_off_runs_everything(corrupt_pass):
    m = load("eight_funcs.mir")
    report = run_pipeline(m, parse_pipeline("builtin.module(func.func(test-corrupt,cse))"), verify_each=False)
    assert report.ok and report.passes_run == 16


def test_registering_a_pass_twice_fails(corrupt_pass):
    with pytest.raises(ValueError, match="registered twice"):
        register_pass(corrupt_pass)


def test_function_pass_does_not_touch_siblings():
    m = load("canon_arith.mir")
    untouched = func(m, "fold_chain").clone()
    seen = []

    def spy(fn, options, env):
        from miniir.rewrite import ChangeReport

        seen.append(fn)
        if fn.attributes["sym_name"].text == "sub_self":
            Builder.before(fn.regions[0].blocks[0].last_op).create(
                "arith.addi", list(fn.regions[0].blocks[0].args) * 2, [fn.regions[0].blocks[0].args[0].type])
        return ChangeReport(converged=True)

    register_pass(Pass("test-spy", spy, anchor="func.func"))
    try:
        assert run_pipeline(m, PipelineSpec("builtin.module", [PipelineSpec("func.func", [PassInvocation("test-spy")])])).ok
    finally:
        del PASSES["test-spy"]
    assert len(seen) == 6
    assert structural_equal(func(m, "fold_chain"), untouched)


@settings(max_examples=30)
@given(st.data())
def test_random_functions_survive_full_pipeline(data):
    m = build_random_function(data.draw)
    inputs = [data.draw(st.integers(-(2 ** 31), 2 ** 31 - 1)) for _ in range(3)]
    before = run_function(m, "f", inputs)
    report = run_pipeline(m, parse_pipeline("builtin.module(canonicalize,cse,dce)"))
    assert report.ok
    assert outputs_equal(before, run_function(m, "f", inputs))
