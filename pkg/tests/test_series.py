"""Exact series kernel: worked examples and algebraic properties."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concavex.series import (AlphaValue, NovikovSeries, RationalFunctionAlpha,
                             XPoly, residue_at)

F = Fraction


def ser(m, dmax, coeffs):
    return NovikovSeries(m, dmax, {tuple(k): F(v) for k, v in coeffs.items()})


def one_var(coeffs, dmax=4):
    return ser(1, (dmax,), {(i,): c for i, c in enumerate(coeffs) if c})


# -- multiplication ----------------------------------------------------------

def test_mul_difference_of_squares():
    a = one_var([1, 1], dmax=2)
    b = one_var([1, -1], dmax=2)
    assert a * b == one_var([1, 0, -1], dmax=2)


def test_mul_identity_element():
    a = one_var([3, F(1, 2), 0, -7], dmax=4)
    one = one_var([1], dmax=4)
    assert a * one == a
    assert one * a == a


def test_mul_geometric_square_coefficient():
    # brute-force convolution oracle: [q^3] (sum_d q^d)^2 = #{(r,s): r+s=3}
    dmax = 5
    g = one_var([1] * (dmax + 1), dmax=dmax)
    brute = sum(1 for r in range(4) for s in range(4) if r + s == 3)
    assert brute == 4
    assert (g * g).coeff((3,)) == 4


def test_mul_variable_count_mismatch():
    a = one_var([1, 1])
    b = ser(2, (2, 2), {(0, 0): 1})
    with pytest.raises(ValueError):
        a * b


# -- inversion ---------------------------------------------------------------

def test_invert_geometric_series():
    a = one_var([1, -1], dmax=5)
    inv = a.invert_unit()
    assert inv == one_var([1] * 6, dmax=5)


def test_invert_one():
    one = one_var([1], dmax=3)
    assert one.invert_unit() == one


def test_invert_triangular_oracle():
    # solve (1 + 120 q)(b0 + b1 q + b2 q^2) = 1 by hand:
    # b0 = 1; b1 = -120; b2 = -120*b1 = 14400
    a = one_var([1, 120], dmax=2)
    assert a.invert_unit() == one_var([1, -120, 14400], dmax=2)


def test_invert_requires_unit():
    with pytest.raises(ValueError):
        one_var([0, 1]).invert_unit()


# -- exp / log ---------------------------------------------------------------

def test_log_of_one_is_zero():
    assert not one_var([1], dmax=3).log()


def test_exp_factorial_coefficient():
    e = one_var([0, 1], dmax=3).exp()
    assert e.coeff((3,)) == F(1, 6)


def test_log_oracle_quadratic_term():
    # [q^2] log(1 + 120 q + 113400 q^2) = 113400 - 120^2/2 = 106200
    a = one_var([1, 120, 113400], dmax=2)
    assert a.log().coeff((2,)) == 106200


def test_exp_requires_nilpotent_constant():
    with pytest.raises(ValueError):
        one_var([2, 1]).exp()


def test_log_requires_constant_one():
    with pytest.raises(ValueError):
        one_var([2, 1]).log()


# -- substitution ------------------------------------------------------------

def test_substitute_identity():
    a = one_var([5, 1, 7, -2], dmax=3)
    q = NovikovSeries.variable(1, (3,), 0)
    assert a.substitute([q]) == a


def test_substitute_q_exp_q():
    # q e^q = q + q^2 + ...; [q^2] (1 + q e^q) = 1
    a = one_var([1, 1], dmax=2)
    img = NovikovSeries.variable(1, (2,), 0) * one_var([0, 1], dmax=2).exp()
    assert a.substitute([img]).coeff((2,)) == 1


def test_substitute_q_times_one_minus_q():
    a = one_var([0, 1], dmax=3)
    img = NovikovSeries.variable(1, (3,), 0) * one_var([1, -1], dmax=3)
    assert a.substitute([img]) == one_var([0, 1, -1], dmax=3)


def test_substitute_rejects_bad_image():
    a = one_var([0, 1], dmax=2)
    with pytest.raises(ValueError):
        a.substitute([one_var([1, 1], dmax=2)])


# -- residues ----------------------------------------------------------------

def test_residue_partial_fractions_oracle():
    # 1/((1-alpha)(-alpha)) = 1/(alpha^2 - alpha);
    # partial fractions: -1/alpha + 1/(alpha-1), so residue at 1 is 1
    f = RationalFunctionAlpha([1], [0, -1, 1])
    assert residue_at(f, 1) == 1
    assert residue_at(f, 0) == -1


def test_residue_regular_point():
    f = RationalFunctionAlpha([1, 0, 1], [0, 1])  # (alpha^2+1)/alpha
    assert residue_at(f, 3) == 0


def test_residue_at_zero():
    f = RationalFunctionAlpha([1], [0, 1])
    assert residue_at(f, 0) == 1


def test_residue_rejects_double_pole():
    f = RationalFunctionAlpha([1], [0, 0, 1])  # 1/alpha^2
    with pytest.raises(ValueError):
        residue_at(f, 0)


def test_expand_at_infinity():
    # 2/(alpha(alpha^2 - mu^2)) = 2 alpha^-3 + 2 mu^2 alpha^-5 + ...
    mu = F(3)
    f = RationalFunctionAlpha([2], [0, -mu ** 2, 0, 1])
    exp = f.expand_at_infinity(-5)
    assert exp == {-3: F(2), -5: F(18)}


# -- property-based checks ---------------------------------------------------

small_fracs = st.fractions(min_value=-4, max_value=4, max_denominator=6)


def series_strategy(dmax=3, unit=False, log_ready=False):
    def build(values):
        coeffs = {(i,): v for i, v in enumerate(values)}
        if unit:
            coeffs[(0,)] = F(1) if log_ready else (coeffs[(0,)] or F(1))
        return NovikovSeries(1, (dmax,), coeffs)
    return st.lists(small_fracs, min_size=dmax + 1, max_size=dmax + 1).map(build)


@settings(max_examples=40, deadline=None)
@given(series_strategy(), series_strategy(), series_strategy())
def test_mul_associative_commutative(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a


@settings(max_examples=40, deadline=None)
@given(series_strategy(unit=True))
def test_invert_is_two_sided(a):
    one = NovikovSeries.constant(1, a.dmax, F(1))
    inv = a.invert_unit()
    assert a * inv == one
    assert inv * a == one


@settings(max_examples=40, deadline=None)
@given(series_strategy(unit=True, log_ready=True))
def test_exp_log_roundtrip(a):
    assert a.log().exp() == a


@settings(max_examples=30, deadline=None)
@given(st.lists(small_fracs, min_size=3, max_size=3),
       st.lists(small_fracs, min_size=3, max_size=3),
       st.fractions(min_value=-3, max_value=3, max_denominator=3))
def test_residue_additivity(num1, num2, a0):
    den = [F(1), F(2), F(1, 3), F(1)]
    f = RationalFunctionAlpha(num1, den)
    g = RationalFunctionAlpha(num2, den)
    try:
        rf, rg = f.residue_at(a0), g.residue_at(a0)
    except ValueError:
        return
    assert (f + g).residue_at(a0) == rf + rg


# -- alpha values ------------------------------------------------------------

def test_alpha_value_conj_involution():
    av = AlphaValue({-2: F(3), 1: F(5), 0: F(-1)})
    assert av.conj().conj() == av


def test_alpha_value_conj_product_rule():
    a = AlphaValue({-1: F(2), 1: F(1)})
    b = AlphaValue({0: F(3), -2: F(7)})
    assert (a * b).conj() == a.conj() * b.conj()


def test_alpha_value_degree_window():
    av = AlphaValue({-3: F(1), -2: F(4)})
    assert av.alpha_degree() == -2
    assert av.alpha_min() == -3
    assert av.shift(1).alpha_degree() == -1


def test_xpoly_basics():
    x = XPoly.variable()
    p = (x + 3) * (x - 3)
    assert p == XPoly((-9, 0, 1))
    assert p.coeff(1) == 0
    assert (p - p) == 0
    assert not (p - p)
