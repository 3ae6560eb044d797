import pytest
from hypothesis import given
from hypothesis import strategies as st

from miniir.dialects import make_context
from miniir.ir import (
    AffineBinary, AffineConst, AffineDim, AffineError, AffineSym, Block, Builder, IRError,
    Operation, Region, audit_use_lists, eval_affine_map, lookup_symbol, properly_dominates,
    simplify_expr, structural_equal,
)
from miniir.ir import types as T
from miniir.ir.affine import AffineMap, eval_expr
from miniir.ir.context import UnregisteredOpError
from miniir.textio import Printer, parse_source, print_op
from miniir.textio.printer import format_type
from miniir.verifier import verify

from support import parse

# -- interning ------------------------------------------------------------------


def test_integer_type_interned_once(ctx):
    assert ctx.intern_type(T.IntegerType(32)) is ctx.intern_type(T.IntegerType(32))


def test_dynamic_memref_prints_with_question_mark(ctx):
    t = ctx.intern_type(T.MemRefType((3, T.DYNAMIC), T.f64))
    assert format_type(t) == "memref<3x?xf64>"


@pytest.mark.parametrize("bad", [lambda: T.IntegerType(0), lambda: T.MemRefType((-1,), T.i32),
                                 lambda: T.MemRefType((2,), T.MemRefType((2,), T.i32))])
def test_malformed_types_rejected(bad):
    with pytest.raises(T.ValidationError):
        bad()


def test_dictionary_order_normalized(ctx):
    u = T.UnitAttr()
    a = ctx.intern_attr(T.DictAttr((("b", u), ("a", u))))
    b = ctx.intern_attr(T.DictAttr((("a", u), ("b", u))))
    assert a is b
    with pytest.raises(T.ValidationError):
        T.DictAttr((("a", u), ("a", u)))


def test_attribute_printing(ctx):
    p = Printer()
    assert p.attr(ctx.intern_attr(T.IntegerAttr(1, T.index))) == "1 : index"
    assert p.attr(ctx.intern_attr(T.AffineMapAttr(AffineMap.constant(0)))) == "affine_map<() -> (0)>"


scalar_types = st.one_of(
    st.integers(1, 128).map(T.IntegerType), st.sampled_from([T.f32, T.f64, T.index])
)
dims = st.lists(st.one_of(st.none(), st.integers(0, 5)), max_size=3)
types = st.one_of(
    scalar_types,
    st.builds(T.MemRefType, dims, scalar_types),
    st.builds(T.TensorType, dims, scalar_types),
    st.builds(T.FunctionType, st.lists(scalar_types, max_size=3), st.lists(scalar_types, max_size=2)),
)


@given(types, types)
def test_interning_is_canonical(a, b):
    ctx = make_context()
    ha, hb = ctx.intern_type(a), ctx.intern_type(b)
    assert (ha is hb) == (format_type(a) == format_type(b))
    assert ctx.intern_type(a) is ha


# -- ops, uses and erasure --------------------------------------------------------


def _func_block(ctx, n_args=1, t=T.i32):
    return Block(ctx, [t] * n_args)


def test_create_registered_and_unregistered(ctx):
    blk = _func_block(ctx, 2)
    b = Builder.at_end(blk)
    add = b.create("arith.addi", blk.args, [T.i32])
    assert add.opdef is not None and add.result_types == (T.i32,)
    opaque = b.create("foo.opaque")
    assert opaque.opdef is None and not opaque.is_registered
    strict = make_context(strict=True)
    with pytest.raises(UnregisteredOpError):
        Operation(strict, "foo.opaque")


def test_terminator_mid_block_reported():
    m = parse("func.func @f(%a: i32) -> i32 {\n  func.return %a : i32\n}")
    fn = m.regions[0].blocks[0].ops[0]
    blk = fn.regions[0].blocks[0]
    Builder.at_end(blk).create("arith.addi", [blk.args[0], blk.args[0]], [T.i32])
    rules = {d.rule for d in verify(m)}
    assert "terminator-mid-block" in rules


def test_replace_all_uses(ctx):
    blk = _func_block(ctx, 2)
    a, c = blk.args
    b = Builder.at_end(blk)
    for _ in range(3):
        b.create("arith.muli", [a, c], [T.i32])
    assert a.replace_all_uses_with(c) == 3
    assert not a.uses and len(c.uses) == 6
    assert c.replace_all_uses_with(c) == 6
    wide = Block(ctx, [T.i64]).args[0]
    with pytest.raises(IRError):
        c.replace_all_uses_with(wide)


def test_erase_rules(ctx):
    blk = _func_block(ctx)
    b = Builder.at_end(blk)
    k = b.create("arith.constant", [], [T.i32], {"value": ctx.intern_attr(T.IntegerAttr(1, T.i32))})
    dead = b.create("arith.constant", [], [T.i32], {"value": ctx.intern_attr(T.IntegerAttr(2, T.i32))})
    b.create("arith.addi", [k.results[0], blk.args[0]], [T.i32])
    dead.erase()
    assert dead not in blk.ops
    with pytest.raises(IRError, match="arith.addi"):
        k.erase()


def test_erase_destroys_nested_regions():
    m = parse("func.func @f(%a: i32) -> i32 {\n  %0 = \"arith.addi\"(%a, %a) : (i32, i32) -> i32\n"
              "  func.return %0 : i32\n}")
    fn = m.regions[0].blocks[0].ops[0]
    inner = list(fn.walk())
    fn.erase()
    assert all(o._erased for o in inner)
    assert audit_use_lists(m) == []


@st.composite
def mutation_scripts(draw):
    return draw(st.lists(st.tuples(st.sampled_from("cre"), st.integers(0, 50), st.integers(0, 50)),
                         max_size=40))


@given(mutation_scripts())
def test_use_lists_stay_consistent(script):
    ctx = make_context()
    m = parse("func.func @f(%a: i32, %b: i32) {\n  func.return\n}", ctx)
    fn = m.regions[0].blocks[0].ops[0]
    blk = fn.regions[0].blocks[0]
    values = list(blk.args)
    for kind, x, y in script:
        ops = blk.ops[:-1]
        if kind == "c":
            op = Builder.before(blk.ops[-1]).create(
                "arith.addi", [values[x % len(values)], values[y % len(values)]], [T.i32])
            values.append(op.results[0])
        elif kind == "r" and len(values) > 1:
            old, new = values[x % len(values)], values[y % len(values)]
            old.replace_all_uses_with(new)
        elif kind == "e" and ops:
            op = ops[x % len(ops)]
            if not any(u.owner is not op for r in op.results for u in r.uses):
                op.erase()
                values = [v for v in values if v.defining_op() is not op]
    assert audit_use_lists(m) == []
    for v in values:
        expected = sum(1 for op in m.walk() for w in op.operands if w is v)
        assert len(v.uses) == expected


# -- traversal -------------------------------------------------------------------

SMALL = """func.func @f(%a: i32) -> i32 {
  %0 = "arith.addi"(%a, %a) : (i32, i32) -> i32
  func.return %0 : i32
}"""


def test_walk_orders():
    m = parse(SMALL)
    names = [o.name for o in m.walk()]
    assert names == ["builtin.module", "func.func", "arith.addi", "func.return", "builtin.module_end"]
    post = [o.name for o in m.walk("post")]
    assert post == ["arith.addi", "func.return", "func.func", "builtin.module_end", "builtin.module"]


def test_erase_during_post_order_matches_collect_then_erase():
    from support import load

    a, b = load("canon_arith.mir"), load("canon_arith.mir")

    def removable(op):
        return op.dialect == "arith" and all(not r.uses for r in op.results)

    # oracle: collect first, then erase to a fixpoint
    while True:
        dead = [o for o in a.walk() if removable(o)]
        if not dead:
            break
        for o in dead:
            o.erase()
    while True:
        n = 0
        for o in b.walk("post"):
            if removable(o):
                o.erase()
                n += 1
        if not n:
            break
    assert verify(b) == []
    assert print_op(a) == print_op(b)


# -- dominance -------------------------------------------------------------------


def test_dominance_examples():
    m = parse("""func.func @f(%n: index) -> i32 {
  %c = arith.constant 1 : i32
  %d = "arith.addi"(%c, %c) : (i32, i32) -> i32
  affine.for %i = 0 to 4 {
    %e = "arith.addi"(%d, %c) : (i32, i32) -> i32
  }
  func.return %d : i32
}""")
    fn = m.regions[0].blocks[0].ops[0]
    ops = fn.regions[0].blocks[0].ops
    c, d, loop, ret = ops
    assert properly_dominates(c.results[0], d)
    assert not properly_dominates(d.results[0], c)
    inner = loop.regions[0].blocks[0].ops[0]
    assert properly_dominates(d.results[0], inner)
    assert properly_dominates(fn.regions[0].blocks[0].args[0], inner)
    assert not properly_dominates(inner.results[0], ret)


def test_isolation_barrier():
    m = parse(SMALL)
    body = m.regions[0].blocks[0]
    fn = body.ops[0]
    outer = Builder.before(fn).create(
        "arith.constant", [], [T.i32], {"value": m.context.intern_attr(T.IntegerAttr(1, T.i32))})
    use = Builder.at_start(fn.regions[0].blocks[0]).create(
        "arith.addi", [outer.results[0], outer.results[0]], [T.i32])
    assert not properly_dominates(outer.results[0], use)
    diags = verify(m)
    assert [d.rule for d in diags] == ["isolation", "isolation"]
    assert "use crosses isolation barrier" in diags[0].message


@given(st.integers(1, 20), st.data())
def test_dominance_on_linear_block(n, data):
    ctx = make_context()
    blk = Block(ctx, [T.i32])
    Region([blk])
    b = Builder.at_end(blk)
    ops = [b.create("arith.addi", [blk.args[0], blk.args[0]], [T.i32]) for _ in range(n)]
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1))
    assert properly_dominates(ops[i].results[0], ops[j]) == (i < j)


# -- symbols and equality --------------------------------------------------------


def test_symbols_resolve_before_definition():
    m = parse("""func.func @f(%x: i32) -> i32 {
  %0 = "func.call"(%x) {callee = @g} : (i32) -> i32
  func.return %0 : i32
}
func.func @g(%x: i32) -> i32 {
  func.return %x : i32
}""")
    assert verify(m) == []
    assert lookup_symbol(m, "g").attributes["sym_name"].text == "g"
    assert lookup_symbol(m, "f") is m.regions[0].blocks[0].ops[0]
    assert lookup_symbol(m, "h") is None


def test_duplicate_symbol_rejected():
    m = parse("func.func @f() {\n  func.return\n}\nfunc.func @f() {\n  func.return\n}")
    diags = verify(m)
    assert diags and diags[0].rule == "symbol-clash" and "redefinition of symbol f" in diags[0].message


def test_structural_equality():
    a = parse(SMALL)
    renamed = parse(SMALL.replace("%a", "%zz").replace("%0", "%r"))
    changed = parse(SMALL.replace("addi", "muli"))
    assert structural_equal(a, a)
    assert structural_equal(a, renamed)
    assert not structural_equal(a, changed)
    attr = parse("func.func @f() -> i32 {\n  %0 = arith.constant 1 : i32\n  func.return %0 : i32\n}")
    attr2 = parse("func.func @f() -> i32 {\n  %0 = arith.constant 2 : i32\n  func.return %0 : i32\n}")
    assert not structural_equal(attr, attr2)


# -- affine algebra --------------------------------------------------------------

d0, d1, s0 = AffineDim(0), AffineDim(1), AffineSym(0)


def test_eval_affine_map_examples():
    assert eval_affine_map(AffineMap.constant(0), [], []) == [0]
    assert eval_affine_map(AffineMap(2, 0, (d0 + d1,)), [2, 3]) == [5]
    assert eval_affine_map(AffineMap(1, 0, (d0.floordiv(3), d0 % 3)), [-4]) == [-2, 2]
    with pytest.raises(AffineError):
        eval_affine_map(AffineMap(1, 0, (d0,)), [1, 2])


def test_floordiv_oracle_matches_definition():
    m = AffineMap(1, 0, (d0.floordiv(3), d0 % 3, d0.ceildiv(3)))
    for a in range(-10, 11):
        q, r, c = eval_affine_map(m, [a])
        assert a == 3 * q + r and 0 <= r < 3
        assert c == -((-a) // 3)


@given(st.integers(-50, 50), st.integers(1, 10))
def test_floor_identities(a, b):
    q, r = eval_affine_map(AffineMap(1, 0, (d0.floordiv(b), d0 % b)), [a])
    assert a == b * q + r and 0 <= r < b


def test_non_affine_rejected():
    with pytest.raises(AffineError):
        AffineMap(1, 0, (d0 * d0,))
    with pytest.raises(AffineError):
        AffineMap(1, 0, (d0 % 0,))
    with pytest.raises(AffineError):
        AffineMap(1, 0, (d1,))


def test_simplify_examples():
    assert simplify_expr(d0 + 0) == d0
    assert simplify_expr(AffineConst(2) * 3) == AffineConst(6)
    e = simplify_expr(d0 % 1)
    assert e == AffineConst(0)
    assert all(eval_expr(d0 % 1, [x], []) == 0 for x in range(-100, 101))


leaf = st.one_of(st.integers(-5, 5).map(AffineConst), st.sampled_from([d0, d1, s0]))
exprs = st.recursive(
    leaf,
    lambda sub: st.one_of(
        st.builds(lambda a, b: AffineBinary("add", a, b), sub, sub),
        st.builds(lambda a, c: AffineBinary("mul", a, AffineConst(c)), sub, st.integers(-3, 3)),
        st.builds(lambda a, k, c: AffineBinary(k, a, AffineConst(c)), sub,
                  st.sampled_from(["mod", "floordiv", "ceildiv"]), st.integers(1, 4)),
    ),
    max_leaves=8,
)


@given(exprs, st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_simplify_preserves_semantics(e, x, y, s):
    assert eval_expr(simplify_expr(e), [x, y], [s]) == eval_expr(e, [x, y], [s])


@given(exprs)
def test_affine_map_text_round_trips(e):
    ctx = make_context()
    m = AffineMap(2, 1, (e,))
    from miniir.textio import parse_affine_map

    assert parse_affine_map(f"affine_map<{m}>", ctx) == m
