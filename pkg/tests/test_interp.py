import math
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from miniir.interp import Buffer, Trap, format_runtime_value, outputs_equal, parse_runtime_value, run_function
from miniir.ir import types as T
from miniir.textio import ParseError

from support import load, parse

I32 = st.integers(-(2 ** 31), 2 ** 31 - 1)


def wrap32(x):
    return (x + 2 ** 31) % 2 ** 32 - 2 ** 31


def f32(x):
    return struct.unpack("f", struct.pack("f", x))[0]


def buf(ctx, text):
    return parse_runtime_value(ctx, text)[0]


# -- programs against independent oracles -------------------------------------


def convolve(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = wrap32(out[i + j] + x * y)
    return out


def test_polymul_example():
    m = load("polymul.mir")
    [c] = run_function(m, "polymul", [buf(m.context, "[1,2,3]:memref<3xi32>"), buf(m.context, "[4,5]:memref<2xi32>")])
    assert c.data == convolve([1, 2, 3], [4, 5]) == [4, 13, 22, 15]


@settings(max_examples=50)
@given(st.lists(I32, min_size=3, max_size=3), st.lists(I32, min_size=2, max_size=2))
def test_polymul_matches_convolution(a, b):
    m = load("polymul.mir")
    [c] = run_function(m, "polymul", [Buffer.of(T.MemRefType((3,), T.i32), a),
                                      Buffer.of(T.MemRefType((2,), T.i32), b)])
    assert c.data == convolve(a, b)


@settings(max_examples=25)
@given(st.lists(st.integers(-50, 50), min_size=6, max_size=6), st.lists(st.integers(-50, 50), min_size=6, max_size=6))
def test_matmul_matches_oracle(a, b):
    m = load("matmul.mir")
    A = Buffer.of(T.MemRefType((2, 3), T.i32), a)
    B = Buffer.of(T.MemRefType((3, 2), T.i32), b)
    C = Buffer.of(T.MemRefType((2, 2), T.i32), [0] * 4)
    [out] = run_function(m, "matmul", [A, B, C])
    expect = [sum(a[i * 3 + k] * b[k * 2 + j] for k in range(3)) for i in range(2) for j in range(2)]
    assert out.data == expect


@pytest.mark.parametrize("n", range(0, 15))
def test_fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    assert run_function(load("fib.mir"), "fib", [n]) == [a]


@given(st.integers(1, 10 ** 6), st.integers(1, 10 ** 6))
def test_gcd_of_positives(a, b):
    assert run_function(load("gcd.mir"), "gcd", [a, b]) == [math.gcd(a, b)]


def test_gcd_sign_follows_truncating_remainder():
    # remsi truncates toward zero, so the result keeps the sign the loop ends on
    assert run_function(load("gcd.mir"), "gcd", [-12, 18]) == [6]
    assert run_function(load("gcd.mir"), "gcd", [84, 36]) == [12]


@given(st.integers(0, 300))
def test_sum_loop(n):
    assert run_function(load("cfg_loop.mir"), "sum_to", [n]) == [n * (n - 1) // 2]


def test_reverse_uses_explicit_buffers():
    m = load("memref_ops.mir")
    [out] = run_function(m, "reverse", [buf(m.context, "[1,2,3,4,5]:memref<5xi32>")])
    assert out.data == [5, 4, 3, 2, 1]


# -- scalar semantics ----------------------------------------------------------


@pytest.mark.parametrize("x", [-2.0, 3.0, 0.0, -0.5, 1e-3])
def test_leaky_relu_values(x):
    expect = f32(x) if x >= 0 else f32(f32(0.1) * x)
    assert outputs_equal(run_function(load("leaky.mir"), "leaky", [x]), [expect])


def test_leaky_relu_example():
    assert run_function(load("leaky.mir"), "leaky", [-2.0]) == [f32(-0.2)]
    assert run_function(load("leaky.mir"), "leaky_sum", [-1.0, 0.5]) == [0.25]


def test_integer_wraparound():
    m = load("external_decl.mir")
    assert run_function(m, "widths", []) == [-128]
    assert run_function(m, "wide", []) == [-(2 ** 63)]


@given(I32, I32)
def test_i32_add_mul_wrap(a, b):
    m = parse('func.func @f(%a: i32, %b: i32) -> (i32, i32) {\n'
              '  %0 = "arith.addi"(%a, %b) : (i32, i32) -> i32\n  %1 = "arith.muli"(%a, %b) : (i32, i32) -> i32\n'
              "  func.return %0, %1 : i32, i32\n}")
    assert run_function(m, "f", [a, b]) == [wrap32(a + b), wrap32(a * b)]


@given(st.floats(width=32, allow_nan=False), st.floats(width=32, allow_nan=False))
def test_f32_arithmetic_rounds_each_step(a, b):
    m = parse('func.func @f(%a: f32, %b: f32) -> f32 {\n  %0 = "arith.mulf"(%a, %b) : (f32, f32) -> f32\n'
              '  %1 = "arith.addf"(%0, %a) : (f32, f32) -> f32\n  func.return %1 : f32\n}')
    try:
        prod = f32(a * b)
        expect = f32(prod + a)
    except OverflowError:
        return
    assert outputs_equal(run_function(m, "f", [a, b]), [expect])


def test_float_poly():
    x = f32(0.1)
    expect = f32(f32(f32(f32(x * x) * 1.5) + -0.25) - x)
    assert run_function(load("floats.mir"), "poly", [0.1]) == [expect]


@pytest.mark.parametrize("pred,expect", [("oeq", 0), ("olt", 0), ("one", 0), ("ueq", 1), ("ult", 1), ("une", 1),
                                         ("ord", 0), ("uno", 1)])
def test_cmpf_nan(pred, expect):
    m = parse(f'func.func @f(%a: f64) -> i1 {{\n  %c = "arith.cmpf"(%a, %a) {{predicate = "{pred}"}} : (f64, f64) -> i1\n'
              "  func.return %c : i1\n}")
    assert run_function(m, "f", [math.nan]) == [expect]


def test_unsigned_compare():
    assert run_function(load("select_cmp.mir"), "umax", [-1, 3]) == [-1]
    assert run_function(load("select_cmp.mir"), "clamp", [15, 0, 10]) == [10]
    assert run_function(load("select_cmp.mir"), "clamp", [-5, 0, 10]) == [0]


@given(st.integers(-1000, 1000), st.integers(-20, 20).filter(bool))
def test_divsi_and_remsi_truncate(a, b):
    m = parse('func.func @f(%a: i32, %b: i32) -> (i32, i32) {\n'
              '  %0 = "arith.divsi"(%a, %b) : (i32, i32) -> i32\n  %1 = "arith.remsi"(%a, %b) : (i32, i32) -> i32\n'
              "  func.return %0, %1 : i32, i32\n}")
    q = int(a / b)
    assert run_function(m, "f", [a, b]) == [q, a - q * b]


# -- traps ---------------------------------------------------------------------


def test_division_by_zero_traps():
    m = parse('func.func @f(%a: i32, %b: i32) -> i32 {\n  %0 = "arith.divsi"(%a, %b) : (i32, i32) -> i32\n'
              "  func.return %0 : i32\n}")
    with pytest.raises(Trap, match="division by zero"):
        run_function(m, "f", [1, 0])


def test_out_of_bounds_traps():
    m = parse('func.func @f(%m: memref<2xi32>, %i: index) -> i32 {\n'
              '  %0 = "memref.load"(%m, %i) : (memref<2xi32>, index) -> i32\n  func.return %0 : i32\n}')
    with pytest.raises(Trap, match="out of bounds"):
        run_function(m, "f", [buf(m.context, "[1,2]:memref<2xi32>"), 2])
    with pytest.raises(Trap, match="out of bounds"):
        run_function(m, "f", [buf(m.context, "[1,2]:memref<2xi32>"), -1])


def test_step_budget_traps():
    m = parse("func.func @f() {\n  cf.br ^spin\n^spin:\n  cf.br ^spin\n}")
    with pytest.raises(Trap, match="step budget"):
        run_function(m, "f", [], max_steps=1000)


def test_call_depth_traps():
    m = parse('func.func @f(%x: i32) -> i32 {\n  %0 = "func.call"(%x) {callee = @f} : (i32) -> i32\n'
              "  func.return %0 : i32\n}")
    with pytest.raises(Trap, match="depth"):
        run_function(m, "f", [1])


def test_external_function_traps():
    with pytest.raises(Trap, match="external"):
        run_function(load("external_decl.mir"), "ext", [1, 2.0])


def test_use_after_dealloc_traps():
    m = parse("""func.func @f() -> i32 {
  %m = "memref.alloc"() : () -> memref<1xi32>
  "memref.dealloc"(%m) : (memref<1xi32>) -> ()
  %i = arith.constant 0 : index
  %v = "memref.load"(%m, %i) : (memref<1xi32>, index) -> i32
  func.return %v : i32
}""")
    with pytest.raises(Trap, match="deallocated"):
        run_function(m, "f", [])


def test_wrong_argument_count_traps():
    with pytest.raises(Trap, match="expects 1 arguments"):
        run_function(load("fib.mir"), "fib", [])


# -- literals ------------------------------------------------------------------


@pytest.mark.parametrize("text", ["3:i32", "-128:i8", "2.5:f32", "-0.0:f64", "7:index", "1:i1",
                                  "[1,2,3]:memref<3xi32>", "[[1,2],[3,4]]:memref<2x2xi32>",
                                  "[0.5,-1.5]:memref<2xf64>"])
def test_literal_round_trip(ctx, text):
    v, t = parse_runtime_value(ctx, text)
    assert format_runtime_value(v, t) == text


def test_literal_wraps_to_width(ctx):
    assert parse_runtime_value(ctx, "200:i8")[0] == -56


@pytest.mark.parametrize("text,message", [
    ("[1,2]:memref<3xi32>", "holds 3 elements"),
    ("[1,2]:i32", "static memref"),
    ("3:i32 4", "unexpected"),
])
def test_bad_literals(ctx, text, message):
    with pytest.raises(ParseError, match=message):
        parse_runtime_value(ctx, text)
