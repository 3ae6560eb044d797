import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from miniir.dialects import make_context
from miniir.ir import structural_equal
from miniir.ir import types as T
from miniir.ir.affine import AffineConst, AffineDim, AffineMap
from miniir.textio import ParseError, format_float, parse_affine_map, parse_source, print_op
from miniir.verifier import verify

from support import build_random_function, corpus_names, load, parse, source


@pytest.mark.parametrize("name", corpus_names())
def test_corpus_round_trip(name):
    m = load(name)
    text = print_op(m)
    again = parse_source(m.context, text)
    assert structural_equal(m, again)
    assert print_op(again) == text
    generic = print_op(m, "generic")
    from_generic = parse_source(m.context, generic)
    assert structural_equal(m, from_generic)
    assert print_op(from_generic, "generic") == generic


def test_generic_form_of_addi():
    m = parse('func.func @f(%a: i32, %b: i32) -> i32 {\n'
              '  %0 = "arith.addi"(%a, %b) : (i32, i32) -> i32\n  func.return %0 : i32\n}')
    text = print_op(m, "generic")
    assert '%0 = "arith.addi"(%arg0, %arg1) : (i32, i32) -> i32' in text
    assert structural_equal(parse_source(m.context, text), m)


def test_affine_for_custom_form_prints_bounds_inline():
    text = print_op(load("polymul.mir"))
    assert "affine.for %arg2 = 0 to 3 step 1 {" in text
    m = parse("func.func @f() {\n  affine.for %i = 0 to 10 step 2 {\n  }\n  func.return\n}")
    assert "= 0 to 10 step 2 {" in print_op(m)


def test_printing_is_deterministic():
    m = load("matmul.mir")
    assert print_op(m) == print_op(m)


def test_polymul_parses_and_verifies():
    assert verify(load("polymul.mir")) == []


def test_use_before_definition_is_an_error():
    with pytest.raises(ParseError) as e:
        parse('func.func @f() -> i32 {\n  %0 = "arith.addi"(%x, %x) : (i32, i32) -> i32\n'
              '  %x = arith.constant 1 : i32\n  func.return %0 : i32\n}')
    d = e.value.diagnostics[0]
    assert "use of undefined value %x" in d.message
    assert d.render().startswith("<input>:2:")


def test_diagnostics_carry_locations():
    with pytest.raises(ParseError) as e:
        parse_source(make_context(), "func.func @f() {\n  func.return\n", "bad.mir")
    assert e.value.diagnostics[0].render().startswith("bad.mir:")


def test_type_mismatch_between_use_and_definition():
    with pytest.raises(ParseError, match="type mismatch for %a: used as i64 but defined as i32"):
        parse('func.func @f(%a: i32) -> i64 {\n  %0 = "arith.addi"(%a, %a) : (i64, i64) -> i64\n'
              '  func.return %0 : i64\n}')


def test_strict_mode_rejects_unknown_ops():
    strict = make_context(strict=True)
    with pytest.raises(ParseError, match="foo"):
        parse_source(strict, 'func.func @f() {\n  "foo.bar"() : () -> ()\n  func.return\n}')
    ok = parse('func.func @f() {\n  "foo.bar"() : () -> ()\n  func.return\n}')
    assert verify(ok) == []


def test_forward_block_references():
    m = load("cfg_loop.mir")
    assert verify(m) == []


def test_affine_map_parsing():
    m = parse_affine_map("affine_map<() -> (0)>")
    assert (m.num_dims, m.num_syms, m.exprs) == (0, 0, (AffineConst(0),))
    m = parse_affine_map("affine_map<(d0, d1) -> (d0 + d1)>")
    assert m.num_dims == 2 and m == AffineMap(2, 0, (AffineDim(0) + AffineDim(1),))
    with pytest.raises(ParseError, match="affine"):
        parse_affine_map("affine_map<(d0) -> (d0 * d0)>")


def test_repeated_maps_are_aliased():
    text = print_op(load("stencil.mir"))
    assert text.startswith("#map0 = affine_map<(d0) -> (d0)>")
    assert "{map = #map0}" in text


def test_comments_are_ignored():
    m = parse("// leading\nfunc.func @f() { // trailing\n  func.return\n}\n")
    assert verify(m) == []


@pytest.mark.parametrize("value", [0.1, -0.0, 1e300, 5e-324, math.inf, -math.inf, math.nan, 3.0])
def test_float_constants_round_trip_bit_exact(value):
    ctx = make_context()
    for t in (T.f64, T.f32):
        v = T.round_float(value, t)
        text = f"func.func @f() -> {t} {{\n  %0 = arith.constant {format_float(v, t)} : {t}\n  func.return %0 : {t}\n}}"
        m = parse_source(ctx, text)
        attr = next(o for o in m.walk() if o.name == "arith.constant").attributes["value"]
        assert attr == ctx.intern_attr(T.FloatAttr(v, t))
        assert print_op(parse_source(ctx, print_op(m))) == print_op(m)


def test_printer_survives_dangling_successor():
    m = load("cfg_loop.mir")
    fn = m.regions[0].blocks[0].ops[0]
    target = fn.regions[0].blocks[-1]
    target.detach()
    text = print_op(m)
    assert "cf.cond_br" in text and "^" in text


@given(st.data())
def test_random_modules_round_trip(data):
    m = build_random_function(data.draw)
    for mode in ("generic", "custom"):
        text = print_op(m, mode)
        back = parse_source(m.context, text)
        assert structural_equal(back, m)
        assert print_op(back, mode) == text


@given(st.data())
def test_custom_and_generic_agree(data):
    m = build_random_function(data.draw)
    a = parse_source(m.context, print_op(m, "custom"))
    b = parse_source(m.context, print_op(m, "generic"))
    assert structural_equal(a, b)


@pytest.mark.parametrize("name", corpus_names())
def test_second_print_fixpoint(name):
    ctx = make_context()
    once = print_op(parse_source(ctx, source(name)))
    twice = print_op(parse_source(ctx, once))
    assert once == twice
