import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscreduce.symbols import (PolySymbol, ReducedPoint, SymbolSyntaxError, average_circle, compose_polynomial,
                               eval_principal, parse_symbol, parse_test_function, poisson_bracket_ambient, render)
from oscreduce.verify import _fd_bracket_error

N = 3
index_st = st.tuples(*[st.integers(0, 2)] * N)
coeff_st = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False).filter(lambda c: abs(c) > 1e-3)
symbol_st = st.dictionaries(st.tuples(index_st, index_st, st.integers(0, 2)), coeff_st, min_size=1, max_size=5).map(
    lambda terms: PolySymbol(N, terms))


def test_parse_examples():
    f = parse_symbol("zb(1)*z(2)")
    assert f.terms == {((1, 0), (0, 1), 0): 1}
    assert parse_symbol("s(1)", 2).terms == {((1, 0), (1, 0), 0): 1}
    g = parse_symbol("2*kinv*s(1) + s(2)")
    assert g.terms == {((1, 0), (1, 0), 1): 2, ((0, 1), (0, 1), 0): 1}


def test_parse_coefficients_and_powers():
    f = parse_symbol("(1-2i)*z(1)^2 + 3i*zb(2) - 0.5", 2)
    assert f.terms[((0, 0), (2, 0), 0)] == 1 - 2j
    assert f.terms[((0, 1), (0, 0), 0)] == 3j
    assert f.terms[((0, 0), (0, 0), 0)] == -0.5
    assert parse_symbol("2+3i*s(1)", 1).terms == {((1,), (1,), 0): 2 + 3j}
    assert parse_symbol("s(1)*s(1)", 1) == parse_symbol("s(1)^2", 1)


@pytest.mark.parametrize("text,offset", [("z(1", 3), ("z()", 2), ("s(1)+", 5), ("s(1) s(2)", 5), ("", 0),
                                         ("2*w(1)", 2), ("(1+2i*z(1)", 0)])
def test_syntax_errors_report_byte_offsets(text, offset):
    with pytest.raises(SymbolSyntaxError) as info:
        parse_symbol(text)
    assert info.value.offset == offset


def test_index_out_of_range():
    with pytest.raises(SymbolSyntaxError) as info:
        parse_symbol("s(3)", 2)
    assert "out of range" in str(info.value)


def test_average_circle_examples():
    f = parse_symbol("zb(1)*z(2)", 2)
    assert average_circle(f, (1, 1)) == f
    assert not average_circle(parse_symbol("z(1)", 2), (1, 1)).terms
    assert not average_circle(f, (1, 2)).terms


def test_eval_principal_examples():
    w = (1, 2)
    assert eval_principal(parse_symbol("s(1)", 2), ReducedPoint.on_level_set((0.3, 0.35), w)) == pytest.approx(0.3)
    assert eval_principal(PolySymbol.constant(2), ReducedPoint.on_level_set((0.2, 0.4), w)) == 1
    assert eval_principal(parse_symbol("s(1)*s(2)", 2), ReducedPoint.on_level_set((0.5, 0.25), w)) == pytest.approx(0.125)
    with pytest.raises(ValueError):
        ReducedPoint.on_level_set((0.5, 0.5), w)


def test_poisson_sign_convention():
    # {s, z} = -i z, and the bracket agrees with the flow of a real generator
    s, z = parse_symbol("s(1)", 1), parse_symbol("z(1)", 1)
    assert poisson_bracket_ambient(s, z) == PolySymbol(1, {((0,), (1,), 0): -1j})
    g = parse_symbol("zb(1)^2*z(2) + zb(2)*z(1)^2", 2)
    f = parse_symbol("s(1)*s(2) + z(1)", 2)
    rng = np.random.default_rng(1)
    for _ in range(5):
        pt = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert _fd_bracket_error(f, g, poisson_bracket_ambient(f, g), pt) < 1e-6


def test_test_function_parser():
    assert list(parse_test_function("x").coef) == [0, 1]
    assert list(parse_test_function("2*x^2 - x + 3").coef) == [3, -1, 2]
    assert list(parse_test_function("1e-3*x").coef) == [0, 1e-3]
    assert list(parse_test_function("1").coef) == [1]
    with pytest.raises(SymbolSyntaxError):
        parse_test_function("x y")


def test_compose_polynomial():
    g = parse_symbol("s(1)", 1)
    h = compose_polynomial(parse_test_function("x^2 + 1"), g)
    assert h == parse_symbol("s(1)^2 + 1", 1)


@settings(max_examples=100, deadline=None)
@given(symbol_st)
def test_render_parse_roundtrip(f):
    assert parse_symbol(render(f), N) == f


@settings(max_examples=100, deadline=None)
@given(symbol_st, st.sampled_from([(1, 1, 1), (1, 2, 3), (2, 4, 3)]))
def test_average_is_projection_and_keeps_hermitian(f, p):
    avg = average_circle(f, p)
    assert average_circle(avg, p) == avg
    h = f + f.adjoint()
    assert average_circle(h, p).is_hermitian(1e-12)


@settings(max_examples=60, deadline=None)
@given(symbol_st, st.floats(0.01, 0.99))
def test_principal_of_action_function_is_real(f, u):
    p = (1, 2, 3)
    diag = (f + f.adjoint()).diagonal()
    s = (u, (1 - u) / 4, (1 - u) / 6)
    value = eval_principal(diag, ReducedPoint.on_level_set(s, p))
    assert abs(value.imag) <= 1e-12 * max(1.0, abs(value))


@settings(max_examples=60, deadline=None)
@given(symbol_st, symbol_st)
def test_bracket_antisymmetric(f, g):
    total = poisson_bracket_ambient(f, g) + poisson_bracket_ambient(g, f)
    assert all(abs(c) <= 1e-9 for c in total.terms.values())
