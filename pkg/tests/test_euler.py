"""Hypergeometric coefficients, the two defining identities, and residues."""

import random
from fractions import Fraction

import pytest

from concavex.euler import (BundleSpec, EngineError, FactoredForm, LinForm,
                            assemble_B, coeff_O_toric, coeff_one_product,
                            euler_data_check, euler_series_check,
                            hyper_factor, omega_form, one_series, o_series,
                            residue_closed_form, residue_direct)
from concavex.geometry import (build_geometry, projective_product,
                               projective_space, toric_p1xp1, toric_p2)
from concavex.reconstruct import _balloon_deltas, oriented_balloons
from concavex.series import AlphaValue, iter_box

F = Fraction


def quintic_setup(dmax=2, seed=1, equivariant=False):
    g = build_geometry(projective_space(4), weight_seed=seed, horizon=max(dmax, 2))
    v = BundleSpec(convex=((5,),))
    B = assemble_B(g, v, "euler", (dmax,), equivariant=equivariant)
    return g, v, B


# -- toric coefficients --------------------------------------------------------

def test_coeff_O_d0_is_one():
    g = build_geometry(toric_p2(), weight_seed=1)
    ff = coeff_O_toric(g, (0,))
    assert not ff.factors and ff.pref == 1


def test_coeff_O_p2_degree2_matches_closed_form():
    g = build_geometry(toric_p2(), weight_seed=1)
    ff = coeff_O_toric(g, (2,))
    # all three divisors have degree 1, so O_2 = 1 / prod_{k=1,2} (D - k a)^3
    ref = FactoredForm(F(1), [
        (LinForm(g.divisors[0].gens, F(0), F(-k)), -3) for k in (1, 2)])
    assert ff.expand(g) == ref.expand(g)


def test_coeff_O_p1_degree1():
    g1 = build_geometry(
        projective_space(1), weight_seed=1)
    ff = coeff_O_toric(g1, (1,))
    # two degree-1 divisors: 1/(H - a)^2 in the weight-free limit
    av = ff.expand(g1)
    H = g1.gen_class(0)
    # (H - a)^-2 = a^-2 + 2 H a^-3
    assert av == AlphaValue({-2: g1.scalar_class(F(1)), -3: F(2) * H})


def test_coeff_one_product_examples():
    g = build_geometry(projective_space(4), weight_seed=1)
    ff = coeff_one_product(g, (1,), equivariant=False)
    # 1/(H - a)^5
    assert ff.factors[0][1] == -5
    g2 = build_geometry(projective_product(1, 1), weight_seed=1)
    ff2 = coeff_one_product(g2, (1, 0), equivariant=False)
    assert len(ff2.factors) == 1 and ff2.factors[0][1] == -2
    ff0 = coeff_one_product(g2, (0, 0))
    assert not ff0.factors


def test_equivariant_one_restriction_matches_weights():
    g = build_geometry(projective_space(1), weight_seed=1, weights=((1, 0),))
    ff = coeff_one_product(g, (1,), equivariant=True)
    p0 = g.fixed_points[0]
    rf = ff.restrict(g, p0)
    # 1/((1-1-a)(1-0-a)) = 1/((-a)(1-a))
    assert rf.residue_at(F(1)) == 1


# -- bundle factors ------------------------------------------------------------

def test_hyper_factor_quintic_line():
    g = build_geometry(projective_space(4), weight_seed=1)
    v = BundleSpec(convex=((5,),))
    ff = hyper_factor(v, "euler", (1,), g)
    # prod_{k=0..5} (5H - k a): six factors
    assert sum(e for _, e in ff.factors) == 6


def test_hyper_factor_concave_examples():
    g = build_geometry(projective_space(1), weight_seed=1)
    v = BundleSpec(concave=((-1,), (-1,)))
    ff2 = hyper_factor(v, "euler", (2,), g)
    # (-H + a)^2
    assert len(ff2.factors) == 1 and ff2.factors[0][1] == 2
    assert ff2.factors[0][0].gens == (F(-1),)
    ff1 = hyper_factor(v, "euler", (1,), g)
    assert not ff1.factors  # empty concave product at degree 1


def test_empty_product_conventions():
    g = build_geometry(projective_product(1, 1), weight_seed=1)
    v = BundleSpec(convex=((1, 0),))
    # pairing 0 against (0,1): the single k=0 factor survives
    ff = hyper_factor(v, "euler", (0, 1), g)
    assert len(ff.factors) == 1
    assert ff.factors[0][0].alpha == 0


def test_omega_form_examples():
    g = build_geometry(projective_space(4), weight_seed=1)
    v = BundleSpec(convex=((5,),))
    assert omega_form(v, "euler", g).expand(g) == AlphaValue(
        {0: F(5) * g.gen_class(0)})
    assert not omega_form(BundleSpec(), "euler", g).factors


def test_assemble_B_quintic_alpha0_h1_coefficient():
    # hand expansion: B_1 = 5H(5H-a)...(5H-5a)/(H-a)^5 has
    # alpha^0 layer equal to 600 H + O(H^2), and 600 = 5 * 120
    g, v, B = quintic_setup(dmax=1)
    av = B.expand_coeff((1,))
    layer0 = av.coeff(0)
    H = g.gen_class(0)
    assert layer0.coeff((1,)) == 600


def test_assemble_B_d0_is_omega():
    g, v, B = quintic_setup(dmax=1)
    assert B.coeff_form((0,)).equals(omega_form(v, "euler", g))


def test_assemble_B_trivial_class_is_base():
    g = build_geometry(projective_space(1), weight_seed=1)
    B = assemble_B(g, BundleSpec(), "one", (2,), equivariant=False)
    base = one_series(g, (2,), equivariant=False)
    for d in ((1,), (2,)):
        assert B.expand_coeff(d) == base.expand_coeff(d)


# -- the gluing identity --------------------------------------------------------

def test_euler_data_check_quintic():
    g = build_geometry(projective_space(4), weight_seed=1)
    v = BundleSpec(convex=((5,),))
    assert euler_data_check(v, "euler", (2,), g).passed


def test_euler_data_check_trivial():
    g = build_geometry(projective_space(2), weight_seed=1)
    assert euler_data_check(BundleSpec(), "one", (2,), g).passed


def test_euler_data_check_concave_and_chern():
    g = build_geometry(projective_space(1), weight_seed=1)
    v = BundleSpec(concave=((-1,), (-1,)))
    assert euler_data_check(v, "euler", (3,), g).passed
    assert euler_data_check(v, "chern_poly", (3,), g).passed
    g2 = build_geometry(projective_product(1, 2), weight_seed=1)
    v2 = BundleSpec(convex=((1, 1), (0, 2)), concave=((-1, -1),))
    assert euler_data_check(v2, "euler", (2, 2), g2).passed
    assert euler_data_check(v2, "chern_poly", (2, 2), g2).passed


def test_euler_data_check_fault_injection():
    from concavex.euler import euler_data_coeff
    g = build_geometry(projective_space(4), weight_seed=1)
    v = BundleSpec(convex=((5,),))
    good = euler_data_coeff(v, "euler", (1,), g)
    # drop one linear factor from the degree-1 datum
    lf, e = good.factors[0]
    perturbed = FactoredForm(good.pref,
                             ((lf, e - 1),) + tuple(good.factors[1:]))
    rep = euler_data_check(v, "euler", (2,), g, override={(1,): perturbed})
    assert not rep.passed
    assert rep.counterexample == "d=(1,), r=(1,)"


def test_euler_data_check_random_splittings():
    rng = random.Random(11)
    g = build_geometry(projective_space(2), weight_seed=2)
    for _ in range(5):
        convex = tuple((rng.randrange(0, 4),) for _ in range(rng.randrange(0, 3)))
        concave = tuple((-rng.randrange(1, 4),) for _ in range(rng.randrange(0, 2)))
        v = BundleSpec(convex=convex, concave=concave)
        for b in ("euler", "chern_poly"):
            assert euler_data_check(v, b, (2,), g).passed, (convex, concave, b)


# -- the quadratic pairing condition ---------------------------------------------

def test_series_check_O_on_p2():
    g = build_geometry(toric_p2(), weight_seed=1, horizon=2)
    rep = euler_series_check(o_series(g, (2,)), (2,), zeta_order=3)
    assert rep.passed


def test_series_check_one_on_p1():
    g = build_geometry(projective_space(1), weight_seed=1, horizon=2)
    rep = euler_series_check(one_series(g, (2,)), (2,), zeta_order=3)
    assert rep.passed


def test_series_check_fault_injection():
    g = build_geometry(projective_space(1), weight_seed=1, horizon=2)
    bad = one_series(g, (2,)).with_scaled_coeff((1,), -1)
    rep = euler_series_check(bad, (2,), zeta_order=3)
    assert not rep.passed


def test_series_check_quintic_B():
    g, v, B = quintic_setup(dmax=1, equivariant=True)
    rep = euler_series_check(B, (1,), zeta_order=2)
    assert rep.passed


def test_series_check_needs_invertible_omega():
    g = build_geometry(projective_space(1), weight_seed=1, weights=((1, 0),))
    v = BundleSpec(convex=((1,),))
    B = assemble_B(g, v, "euler", (1,), equivariant=True)
    with pytest.raises(EngineError):
        euler_series_check(B, (1,), zeta_order=1)


# -- residues ---------------------------------------------------------------------

def test_residue_direct_one_p1_explicit():
    g = build_geometry(projective_space(1), weight_seed=1, weights=((1, 0),))
    S = one_series(g, (2,))
    p0 = g.fixed_points[0]
    assert residue_direct(S, (1,), p0, F(1)) == 1


def test_residue_direct_off_pole_is_zero():
    g, v, B = quintic_setup(dmax=2, equivariant=True)
    p = g.fixed_points[0]
    assert residue_direct(B, (1,), p, F(10 ** 7)) == 0
    # the d = 0 coefficient is alpha-free
    assert residue_direct(B, (0,), p, F(3)) == 0


def test_residue_closed_form_p1_trivial_class():
    g = build_geometry(projective_space(1), weight_seed=1, weights=((1, 0),))
    bal = next(b for b in g.balloons
               if g.fixed_points[b.p].gen_values[0] == 1)
    val = residue_closed_form(g, bal, 1, None, "one", (2,))
    assert val == 1


@pytest.mark.parametrize("spec,vdata,b", [
    (projective_space(2), {"convex": ((3,),)}, "euler"),
    (projective_space(2), {"convex": ((2,),)}, "chern_poly"),
    (projective_product(1, 1), {"convex": ((1, 1),)}, "euler"),
    (projective_space(4), {"convex": ((5,),)}, "euler"),
    (projective_space(1), {"concave": ((-1,), (-1,))}, "euler"),
])
def test_linking_identity_dual_computation(spec, vdata, b):
    g = build_geometry(spec, weight_seed=3, horizon=2)
    v = BundleSpec(**{k: tuple(map(tuple, vv)) for k, vv in vdata.items()})
    dmax = tuple([2] * g.m)
    B = assemble_B(g, v, b, dmax, equivariant=True)
    seen = 0
    for bal in oriented_balloons(g):
        p = g.fixed_points[bal.p]
        for delta in _balloon_deltas(bal, dmax):
            d = tuple(delta * e for e in bal.degree)
            direct = residue_direct(B, d, p, bal.weight / delta)
            closed = residue_closed_form(g, bal, delta, v, b, dmax)
            assert direct == closed, (bal, delta)
            seen += 1
    assert seen > 0


def test_linking_identity_on_toric():
    g = build_geometry(toric_p1xp1(), weight_seed=2, horizon=2)
    v = BundleSpec(convex=((1, 1),))
    dmax = (2, 2)
    B = assemble_B(g, v, "euler", dmax, equivariant=True)
    for bal in oriented_balloons(g):
        p = g.fixed_points[bal.p]
        for delta in _balloon_deltas(bal, dmax):
            d = tuple(delta * e for e in bal.degree)
            direct = residue_direct(B, d, p, bal.weight / delta)
            closed = residue_closed_form(g, bal, delta, v, "euler", dmax)
            assert direct == closed


def test_conjugation_is_involution_and_multiplicative():
    g = build_geometry(projective_space(2), weight_seed=1)
    v = BundleSpec(convex=((3,),))
    f1 = hyper_factor(v, "euler", (1,), g)
    f2 = coeff_one_product(g, (1,), equivariant=True)
    assert f1.conj().conj().equals(f1)
    assert (f1 * f2).conj().equals(f1.conj() * f2.conj())


def test_degree_bound_weight_free_one_series():
    for n in (1, 2, 3, 4):
        g = build_geometry(projective_space(n), weight_seed=1)
        S = one_series(g, (4,), equivariant=False)
        for d in range(1, 5):
            av = S.expand_coeff((d,))
            bound = min(-2, -(n + 1) * d)
            assert av.alpha_degree() <= bound, (n, d)
