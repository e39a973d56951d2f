"""Hypergeometric side of the computation.

Builds the factored coefficient data (the toric series O_d, the closed form
for products of projective spaces, and the bundle factors), verifies the two
defining algebraic identities (the gluing identity for coefficient data on
the linear sigma models, and the quadratic pairing condition for series),
and computes linking residues two independent ways.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import Balloon, CohClass, FixedPoint, Geometry, ProductGeometry
from .series import (AlphaValue, XPoly, iter_box, poly_divmod, poly_mul,
                     poly_trim, x_coefficient)

ZERO = Fraction(0)
ONE = Fraction(1)


class EngineError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Bundle and class specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BundleSpec:
    """Splitting type of a concavex bundle, as first-Chern vectors over the
    H-basis.  Convex entries pair nonnegatively with every balloon class,
    concave entries pair negatively."""

    convex: Tuple[Tuple[int, ...], ...] = ()
    concave: Tuple[Tuple[int, ...], ...] = ()

    def validate(self, geom: Geometry):
        for c in self.convex + self.concave:
            if len(c) != geom.m:
                raise EngineError("bundle vector length must match the number "
                                  "of curve-class basis elements")
        for bal in geom.balloons:
            for c in self.convex:
                if sum(ci * di for ci, di in zip(c, bal.degree)) < 0:
                    raise EngineError("convex entry pairs negatively with a "
                                      "balloon class")
            for c in self.concave:
                if sum(ci * di for ci, di in zip(c, bal.degree)) >= 0:
                    raise EngineError("concave entry pairs nonnegatively with "
                                      "a balloon class")

    def rank(self) -> int:
        return len(self.convex) + len(self.concave)

    def rank_induced(self, d: Sequence[int]) -> int:
        """Rank of the induced bundle on the degree-d moduli."""
        r = 0
        for c in self.convex:
            r += sum(ci * di for ci, di in zip(c, d)) + 1
        for c in self.concave:
            r += -sum(ci * di for ci, di in zip(c, d)) - 1
        return r


MULT_CLASSES = ("one", "euler", "chern_poly")


def check_mult_class(kind: str):
    if kind not in MULT_CLASSES:
        raise EngineError(f"unknown multiplicative class {kind!r}")


# ---------------------------------------------------------------------------
# Factored forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinForm:
    """Linear form  x_coef*x + sum_i gens[i]*generator_i + const + alpha_coef*alpha."""

    gens: Tuple[Fraction, ...]
    const: Fraction = ZERO
    alpha: Fraction = ZERO
    xc: Fraction = ZERO

    def key(self) -> Tuple:
        """Primitive representative and the scale carrying it to self."""
        entries = list(self.gens) + [self.const, self.alpha, self.xc]
        scale = None
        for v in entries:
            if v:
                scale = v
                break
        if scale is None:
            raise EngineError("zero linear factor")
        prim = tuple(v / scale for v in entries)
        return prim, scale

    def with_alpha(self, da: Fraction) -> "LinForm":
        return LinForm(self.gens, self.const, self.alpha + da, self.xc)

    def conj(self) -> "LinForm":
        return LinForm(self.gens, self.const, -self.alpha, self.xc)


class FactoredForm:
    """Product of linear factors with integer exponents and a rational
    prefactor; the exact representation of the hypergeometric coefficients."""

    __slots__ = ("pref", "factors")

    def __init__(self, pref: Fraction = ONE, factors: Sequence[Tuple[LinForm, int]] = ()):
        self.pref = Fraction(pref)
        merged: Dict[LinForm, int] = {}
        order: List[LinForm] = []
        for lf, e in factors:
            if e == 0:
                continue
            if lf not in merged:
                order.append(lf)
            merged[lf] = merged.get(lf, 0) + e
        self.factors = tuple((lf, merged[lf]) for lf in order if merged[lf])

    @classmethod
    def one(cls) -> "FactoredForm":
        return cls()

    def __mul__(self, other):
        if isinstance(other, FactoredForm):
            return FactoredForm(self.pref * other.pref,
                                self.factors + other.factors)
        return FactoredForm(self.pref * Fraction(other), self.factors)

    __rmul__ = __mul__

    def inverse(self) -> "FactoredForm":
        if not self.pref:
            raise ZeroDivisionError("inverse of zero form")
        return FactoredForm(ONE / self.pref,
                            tuple((lf, -e) for lf, e in self.factors))

    def conj(self) -> "FactoredForm":
        """alpha -> -alpha on every factor."""
        return FactoredForm(self.pref,
                            tuple((lf.conj(), e) for lf, e in self.factors))

    def shift_lifts(self, geom: Geometry, r: Sequence[int]) -> "FactoredForm":
        """Substitution rule of the canonical lifts: every linear class c is
        replaced by c + <c, r> alpha."""
        out = []
        for lf, e in self.factors:
            pairing = geom.pairing_of_vector(lf.gens, r)
            out.append((lf.with_alpha(Fraction(pairing)), e))
        return FactoredForm(self.pref, out)

    def scaled_by_alpha(self, k: int, ngens: int) -> "FactoredForm":
        alpha = LinForm(tuple([ZERO] * ngens), alpha=ONE)
        return FactoredForm(self.pref, self.factors + ((alpha, k),))

    def normal_key(self):
        pref = self.pref
        items = {}
        for lf, e in self.factors:
            prim, scale = lf.key()
            pref *= scale ** e
            items[prim] = items.get(prim, 0) + e
        return pref, {k: v for k, v in items.items() if v}

    def equals(self, other: "FactoredForm") -> bool:
        p1, i1 = self.normal_key()
        p2, i2 = other.normal_key()
        return p1 == p2 and i1 == i2

    # -- materialization ---------------------------------------------------

    def restrict(self, geom: Geometry, p: FixedPoint) -> "RestrictedFactors":
        vals = []
        for lf, e in self.factors:
            base = geom.linform_value(lf.gens, lf.const, p)
            v = XPoly((base, lf.xc)) if lf.xc else base
            vals.append((v, lf.alpha, e))
        return RestrictedFactors(self.pref, tuple(vals))

    def expand(self, geom: Geometry) -> AlphaValue:
        """Expansion of the weight-free limit as a finite alpha-Laurent
        value with cohomology-class coefficients.

        Equivariant constant shifts are set to zero here (that is the
        weight-free limit); factors appearing with negative exponent must
        carry alpha, so the geometric series in the nilpotent class part
        terminates."""
        acc = AlphaValue.scalar(geom.scalar_class(self.pref))
        for lf, e in self.factors:
            cls = geom.linear_class(lf.gens)
            if lf.xc:
                cls = cls + geom.scalar_class(XPoly((ZERO, lf.xc)))
            if e > 0:
                unit = AlphaValue({0: cls})
                if lf.alpha:
                    unit = unit + AlphaValue({1: geom.scalar_class(lf.alpha)})
                for _ in range(e):
                    acc = acc * unit
            else:
                inv = _invert_linear_alpha(geom, cls, lf.alpha)
                for _ in range(-e):
                    acc = acc * inv
        return acc


def _invert_linear_alpha(geom: Geometry, cls: CohClass, a: Fraction) -> AlphaValue:
    """Inverse of (cls + a*alpha) when the class part of cls is nilpotent up
    to an invertible scalar and a is nonzero, or when cls is invertible."""
    scalar = cls.scalar()
    nil = cls - geom.scalar_class(scalar)
    if a:
        # (s + n + a*alpha) = a*alpha * (1 + (s+n)/(a*alpha))
        inv_a = ONE / a
        out = AlphaValue({-1: geom.scalar_class(inv_a)})
        term = AlphaValue({-1: geom.scalar_class(inv_a)})
        base = AlphaValue({-1: (cls * inv_a)})
        for _ in range(geom.dim + 64):
            term = term * base * Fraction(-1)
            if not term:
                break
            out = out + term
        else:
            raise EngineError("factor with nonzero scalar part cannot be "
                              "expanded against alpha")
        return out
    if not scalar or (isinstance(scalar, XPoly) and not scalar.is_constant()):
        if isinstance(scalar, XPoly):
            raise EngineError("x-leading factor inversion is not materializable")
        raise EngineError("alpha-free factor with nilpotent class part is not "
                          "invertible")
    inv_s = ONE / scalar if isinstance(scalar, Fraction) else scalar
    out = AlphaValue.scalar(geom.scalar_class(inv_s))
    term = out
    base = nil * inv_s
    for _ in range(geom.dim + 1):
        term = term * AlphaValue({0: base}) * Fraction(-1)
        if not term:
            break
        out = out + term
    return out


# ---------------------------------------------------------------------------
# Restricted factored values (exact rational functions of alpha)
# ---------------------------------------------------------------------------

class RestrictedFactors:
    """A fixed-point restriction: prefactor times a product of
    (value + slope*alpha)^exponent with exact scalar values."""

    __slots__ = ("pref", "vals")

    def __init__(self, pref, vals: Sequence[Tuple[object, Fraction, int]]):
        self.pref = pref
        self.vals = tuple((v, a, e) for v, a, e in vals if e)

    def __mul__(self, other):
        if isinstance(other, RestrictedFactors):
            return RestrictedFactors(self.pref * other.pref, self.vals + other.vals)
        return RestrictedFactors(self.pref * other, self.vals)

    __rmul__ = __mul__

    def inverse(self) -> "RestrictedFactors":
        return RestrictedFactors(ONE / self.pref,
                                 tuple((v, a, -e) for v, a, e in self.vals))

    def conj(self) -> "RestrictedFactors":
        return RestrictedFactors(self.pref,
                                 tuple((v, -a, e) for v, a, e in self.vals))

    def zero_order_at(self, a0: Fraction) -> int:
        """Vanishing order at alpha=a0 (negative for a pole)."""
        order = 0
        for v, a, e in self.vals:
            val = v + a * a0
            if not val:
                order += e
        return order

    def leading_at(self, a0: Fraction):
        """Limit of (alpha-a0)^(-zero_order) * value at a0."""
        acc = self.pref
        for v, a, e in self.vals:
            val = v + a * a0
            if not val:
                # factor = a*(alpha - a0); contributes slope^e
                acc = acc * (Fraction(a) ** e if e > 0 else ONE / (Fraction(a) ** (-e)))
            else:
                if e > 0:
                    acc = acc * val ** e
                else:
                    acc = acc / (val ** (-e)) if isinstance(val, Fraction) \
                        else acc * _xpoly_inv_power_error(val, -e)
        return acc

    def residue_at(self, a0: Fraction):
        """Residue at alpha=a0; zero at a regular point, error for pole
        order two or more."""
        order = self.zero_order_at(a0)
        if order >= 0:
            return ZERO
        if order < -1:
            raise EngineError(f"pole of order {-order} >= 2 at alpha={a0}")
        return self.leading_at(a0)

    def eval_at(self, a0: Fraction):
        if self.zero_order_at(a0) < 0:
            raise ZeroDivisionError(f"pole at alpha={a0}")
        if self.zero_order_at(a0) > 0:
            return ZERO
        return self.leading_at(a0)

    def num_den(self):
        """(numerator poly, denominator poly, x-carrying alpha-free
        denominator factors).  Numerator coefficients may carry x; the
        denominator polynomial is x-free."""
        num = [self.pref]
        den = [ONE]
        xden: List[Tuple[XPoly, int]] = []
        for v, a, e in self.vals:
            if e > 0:
                f = [v, a] if a else [v]
                for _ in range(e):
                    num = poly_mul(num, f)
            else:
                if isinstance(v, XPoly) and not v.is_constant():
                    if a:
                        raise EngineError("x-carrying factor with alpha in a "
                                          "denominator")
                    xden.append((v, -e))
                    continue
                f = [Fraction(v), Fraction(a)] if a else [Fraction(v)]
                for _ in range(-e):
                    den = poly_mul(den, f)
        return poly_trim(num), poly_trim(den), xden

    def pole_roots(self) -> Dict[Fraction, int]:
        """Roots of the alpha-denominator with multiplicities."""
        roots: Dict[Fraction, int] = {}
        for v, a, e in self.vals:
            if e < 0 and a:
                if isinstance(v, XPoly):
                    raise EngineError("x-carrying factor with alpha in a "
                                      "denominator")
                root = -Fraction(v) / Fraction(a)
                roots[root] = roots.get(root, 0) - e
        return roots

    def alpha_degree(self) -> int:
        deg = 0
        for v, a, e in self.vals:
            if a:
                deg += e
        return deg

    def expand_at_infinity(self, down_to: int) -> Dict[int, object]:
        """Laurent coefficients at alpha = infinity down to the given
        exponent; exact, via series division of the reversed polynomials."""
        num, den, xden = self.num_den()
        if xden:
            raise EngineError("cannot expand with x-carrying denominators")
        if not num:
            return {}
        n = len(num) - 1
        m = len(den) - 1
        top = n - m
        count = top - down_to + 1
        if count <= 0:
            return {}
        nrev = list(reversed(num))
        drev = [Fraction(v) for v in reversed(den)]
        inv0 = ONE / drev[0]
        series = []
        for t in range(count):
            acc = nrev[t] if t < len(nrev) else ZERO
            for j in range(1, t + 1):
                if j < len(drev):
                    acc = acc - drev[j] * series[t - j]
            series.append(acc * inv0)
        return {top - t: series[t] for t in range(count) if series[t]}


def _xpoly_inv_power_error(val, e):
    raise EngineError("division by an x-carrying value is not exact")


# ---------------------------------------------------------------------------
# Coefficient factories
# ---------------------------------------------------------------------------

def _divisor_linform(geom: Geometry, a: int) -> LinForm:
    dv = geom.divisors[a]
    return LinForm(dv.gens, dv.const)


def _alpha_linform(geom: Geometry, coef: Fraction) -> LinForm:
    return LinForm(tuple([ZERO] * geom.ngens), alpha=coef)


def divisor_pairing(geom: Geometry, a: int, d: Sequence[int]) -> int:
    return sum(dd * pp for dd, pp in zip(d, geom.divisor_degrees[a]))


def coeff_O_toric(geom: Geometry, d: Sequence[int]) -> FactoredForm:
    """Toric hypergeometric coefficient in factored form."""
    factors = []
    for a in range(len(geom.divisors)):
        P = divisor_pairing(geom, a, d)
        lf = _divisor_linform(geom, a)
        if P < 0:
            for k in range(0, -P):
                factors.append((lf.with_alpha(Fraction(k)), 1))
        else:
            for k in range(1, P + 1):
                factors.append((lf.with_alpha(Fraction(-k)), -1))
    return FactoredForm(ONE, factors)


def coeff_one_product(geom: Geometry, d: Sequence[int],
                      equivariant: bool = True) -> FactoredForm:
    """Closed form of the b=1 series coefficient on a product of projective
    spaces; with equivariant=False all torus weights are set to zero."""
    if not isinstance(geom, ProductGeometry):
        raise EngineError("closed form available only on products of "
                          "projective spaces")
    factors = []
    for a in range(geom.m):
        gens = tuple(ONE if b == a else ZERO for b in range(geom.m))
        for i in range(geom.dims[a] + 1):
            const = -geom.weights[a][i] if equivariant else ZERO
            for k in range(1, d[a] + 1):
                factors.append((LinForm(gens, const, Fraction(-k)), -1))
    return FactoredForm(ONE, factors)


def hyper_factor(v: BundleSpec, b: str, d: Sequence[int],
                 geom: Geometry) -> FactoredForm:
    """Product of bundle factors for one degree.

    Convex lines contribute (c - k alpha) for k = 0..<c,d>, concave lines
    (c + k alpha) for k = 1..-<c,d>-1; the Chern-polynomial class adds x to
    every factor.
    """
    check_mult_class(b)
    if b == "one":
        raise EngineError("the trivial class has no bundle factor; use the "
                          "constant 1")
    xc = ONE if b == "chern_poly" else ZERO
    factors = []
    for c in v.convex:
        gens = geom.h_vector(c)
        P = sum(ci * di for ci, di in zip(c, d))
        if P < 0:
            raise EngineError("convex entry pairs negatively with the degree")
        for k in range(0, P + 1):
            factors.append((LinForm(gens, ZERO, Fraction(-k), xc), 1))
    for c in v.concave:
        gens = geom.h_vector(c)
        P = sum(ci * di for ci, di in zip(c, d))
        if P >= 0 and any(d):
            raise EngineError("concave entry pairs nonnegatively with the degree")
        for k in range(1, -P):
            factors.append((LinForm(gens, ZERO, Fraction(k), xc), 1))
    return FactoredForm(ONE, factors)


def omega_form(v: BundleSpec, b: str, geom: Geometry) -> FactoredForm:
    """The unit class of the series: b(V+)/b(V-) in factored form."""
    check_mult_class(b)
    if b == "one":
        return FactoredForm.one()
    xc = ONE if b == "chern_poly" else ZERO
    factors = []
    for c in v.convex:
        factors.append((LinForm(geom.h_vector(c), ZERO, ZERO, xc), 1))
    for c in v.concave:
        factors.append((LinForm(geom.h_vector(c), ZERO, ZERO, xc), -1))
    return FactoredForm(ONE, factors)


# ---------------------------------------------------------------------------
# Euler series container
# ---------------------------------------------------------------------------

class EulerSeries:
    """Truncated coefficient table of a series e^{-H t/alpha} sum B_d e^{d t}.

    Coefficients are kept in factored form whenever available; expansions of
    the nonequivariant limit are materialized lazily.  The coefficient at
    d = 0 is the unit class Omega by convention.
    """

    def __init__(self, geom: Geometry, omega: FactoredForm, dmax: Sequence[int],
                 coeffs: Dict[tuple, FactoredForm], equivariant: bool,
                 bundle: Optional[BundleSpec] = None, multclass: str = "one"):
        self.geom = geom
        self.omega = omega
        self.dmax = tuple(dmax)
        self.coeffs = dict(coeffs)
        self.equivariant = equivariant
        self.bundle = bundle
        self.multclass = multclass
        self._expanded: Dict[tuple, AlphaValue] = {}
        zero = tuple([0] * geom.m)
        self.coeffs.setdefault(zero, omega)

    def degrees(self):
        return sorted(self.coeffs, key=lambda d: (sum(d), d))

    def coeff_form(self, d) -> FactoredForm:
        return self.coeffs[tuple(d)]

    def expand_coeff(self, d) -> AlphaValue:
        d = tuple(d)
        if d not in self._expanded:
            self._expanded[d] = self.coeffs[d].expand(self.geom)
        return self._expanded[d]

    def restrict_coeff(self, d, p: FixedPoint) -> RestrictedFactors:
        return self.coeffs[tuple(d)].restrict(self.geom, p)

    def with_scaled_coeff(self, d, alpha_power: int) -> "EulerSeries":
        """Copy with one coefficient multiplied by alpha^k (fault injection
        for the series check)."""
        coeffs = dict(self.coeffs)
        coeffs[tuple(d)] = coeffs[tuple(d)].scaled_by_alpha(alpha_power,
                                                            self.geom.ngens)
        return EulerSeries(self.geom, self.omega, self.dmax, coeffs,
                           self.equivariant, self.bundle, self.multclass)


def one_series(geom: Geometry, dmax: Sequence[int],
               equivariant: bool = True) -> EulerSeries:
    coeffs = {}
    for d in iter_box(dmax):
        if any(d):
            coeffs[d] = coeff_one_product(geom, d, equivariant)
    return EulerSeries(geom, FactoredForm.one(), dmax, coeffs, equivariant)


def o_series(geom: Geometry, dmax: Sequence[int]) -> EulerSeries:
    coeffs = {}
    for d in iter_box(dmax):
        if any(d):
            coeffs[d] = coeff_O_toric(geom, d)
    return EulerSeries(geom, FactoredForm.one(), dmax, coeffs, equivariant=True)


def assemble_B(geom: Geometry, v: BundleSpec, b: str, dmax: Sequence[int],
               equivariant: bool = False) -> EulerSeries:
    """Hypergeometric series of a bundle: bundle factors times the base
    coefficients (the closed form on products, the toric form otherwise)."""
    check_mult_class(b)
    v.validate(geom)
    omega = omega_form(v, b, geom)
    coeffs = {}
    for d in iter_box(dmax):
        if not any(d):
            continue
        if isinstance(geom, ProductGeometry):
            base = coeff_one_product(geom, d, equivariant)
        else:
            base = coeff_O_toric(geom, d)
        if b == "one":
            coeffs[d] = base
        else:
            coeffs[d] = hyper_factor(v, b, d, geom) * base
    return EulerSeries(geom, omega, dmax, coeffs, equivariant, v, b)


# ---------------------------------------------------------------------------
# Check reports
# ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    passed: bool
    counterexample: Optional[str] = None
    details: List[str] = field(default_factory=list)

    def as_dict(self):
        out = {"check": self.name, "status": "pass" if self.passed else "fail"}
        if self.counterexample:
            out["first_counterexample"] = self.counterexample
        if self.details:
            out["details"] = self.details
        return out


# ---------------------------------------------------------------------------
# The gluing identity for hypergeometric coefficient data
# ---------------------------------------------------------------------------

def euler_data_coeff(v: BundleSpec, b: str, d: Sequence[int],
                     geom: Geometry) -> FactoredForm:
    """Degree-d coefficient datum on the linear sigma model, via canonical
    lifts; the d = 0 datum is the lifted unit class."""
    if not any(d):
        return omega_form(v, b, geom)
    return hyper_factor(v, b, d, geom)


def euler_data_check(v: BundleSpec, b: str, dmax: Sequence[int],
                     geom: Geometry,
                     override: Optional[Dict[tuple, FactoredForm]] = None) -> CheckReport:
    """Verify the gluing identity

        Lambda * j_r(P_d) = conj(j_0(P_r)) * j_0(P_{d-r})

    for all 0 <= r <= d <= dmax, where j_r substitutes each canonical lift
    c -> c + <c, r> alpha and conj flips the sign of alpha."""
    check_mult_class(b)
    lam = omega_form(v, b, geom)

    def P(d):
        if override and tuple(d) in override:
            return override[tuple(d)]
        return euler_data_coeff(v, b, d, geom)

    checked = 0
    for d in iter_box(dmax):
        for r in itertools.product(*(range(e + 1) for e in d)):
            lhs = lam * P(d).shift_lifts(geom, r)
            dr = tuple(a - b_ for a, b_ in zip(d, r))
            rhs = P(r).shift_lifts(geom, tuple([0] * geom.m)).conj() * \
                P(dr).shift_lifts(geom, tuple([0] * geom.m))
            checked += 1
            if not lhs.equals(rhs):
                return CheckReport(
                    "euler-data-gluing", False,
                    counterexample=f"d={tuple(d)}, r={tuple(r)}")
    return CheckReport("euler-data-gluing", True,
                       details=[f"{checked} (d, r) pairs checked"])


# ---------------------------------------------------------------------------
# The quadratic series condition
# ---------------------------------------------------------------------------

def _term_combine(terms):
    """Sum exact rational functions given as (num poly, root multiset,
    scalar, xden list); returns (num poly, root multiset, xden multiset)."""
    all_roots: Dict[Fraction, int] = {}
    all_xden: Dict[Tuple, int] = {}
    xden_polys: Dict[Tuple, XPoly] = {}
    for num, roots, scalar, xden in terms:
        for root, mult in roots.items():
            all_roots[root] = max(all_roots.get(root, 0), mult)
        counts: Dict[Tuple, int] = {}
        for xp, mult in xden:
            counts[xp.c] = counts.get(xp.c, 0) + mult
            xden_polys[xp.c] = xp
        for k, mult in counts.items():
            all_xden[k] = max(all_xden.get(k, 0), mult)
    total = []
    for num, roots, scalar, xden in terms:
        part = [v / scalar for v in num]
        for root, mult in all_roots.items():
            extra = mult - roots.get(root, 0)
            for _ in range(extra):
                part = poly_mul(part, [-root, ONE])
        counts: Dict[Tuple, int] = {}
        for xp, mult in xden:
            counts[xp.c] = counts.get(xp.c, 0) + mult
        for k, mult in all_xden.items():
            extra = mult - counts.get(k, 0)
            for _ in range(extra):
                part = [c * xden_polys[k] for c in part]
        total = poly_trim([a + b for a, b in itertools.zip_longest(
            total, part, fillvalue=ZERO)]) if total or part else []
    return total, all_roots, all_xden


def _den_poly(roots: Dict[Fraction, int]):
    den = [ONE]
    for root, mult in roots.items():
        for _ in range(mult):
            den = poly_mul(den, [-root, ONE])
    return den


def euler_series_check(series: EulerSeries, dmax: Sequence[int],
                       zeta_order: int) -> CheckReport:
    """Verify that the quadratic self-pairing against the inverse unit class
    has no negative powers of alpha (localized integration, exact).

    For each degree d and each zeta-monomial up to the requested order the
    sum over r <= d and over fixed points of

        Omega^{-1} * conj(B_r) * B_{d-r} * prod_a (H_a + r_a alpha)^{z_a}/z_a!

    divided by the tangent Euler class must be a polynomial in alpha."""
    geom = series.geom
    if not series.equivariant:
        raise EngineError("the series check needs equivariant restriction data")
    for p in geom.fixed_points:
        rf = series.omega.restrict(geom, p)
        for v, a, e in rf.vals:
            if a:
                raise EngineError("the unit class must be alpha-free")
            if not v:
                raise EngineError("omega-not-invertible: unit class vanishes "
                                  "at a fixed point under the chosen weights "
                                  "(re-seed required)")

    hvals = [[geom.linform_value(geom.h_reps[j], ZERO, p) for j in range(geom.m)]
             for p in geom.fixed_points]
    details = []
    for d in iter_box(dmax):
        # leading alpha order of the coefficient restrictions (reported, not
        # assumed)
        if any(d):
            degs = [series.restrict_coeff(d, p).alpha_degree()
                    for p in geom.fixed_points]
            details.append(f"d={tuple(d)}: max restricted alpha-degree {max(degs)}")
        for z in itertools.product(*([range(zeta_order + 1)] * geom.m)):
            if sum(z) > zeta_order:
                continue
            terms = []
            for r in itertools.product(*(range(e + 1) for e in d)):
                dr = tuple(a - b_ for a, b_ in zip(d, r))
                for p in geom.fixed_points:
                    rf = (series.omega.restrict(geom, p).inverse()
                          * series.restrict_coeff(r, p).conj()
                          * series.restrict_coeff(dr, p))
                    num, den_poly_, xden = rf.num_den()
                    if not num:
                        continue
                    roots = rf.pole_roots()
                    # (H + r alpha)^z / z! weight and tangent Euler class
                    weight = [ONE]
                    scale = p.euler
                    for a in range(geom.m):
                        for _ in range(z[a]):
                            weight = poly_mul(weight, [hvals[p.index][a],
                                                       Fraction(r[a])])
                        scale *= factorial(z[a])
                    num = poly_mul(num, weight)
                    # den = lead * prod (alpha - root); fold lead into scale
                    den_scalar = den_poly_[-1] if den_poly_ else ONE
                    terms.append((num, roots, scale * den_scalar, xden))
            if not terms:
                continue
            num, roots, xden = _term_combine(terms)
            den = _den_poly(roots)
            if num:
                _, rem = poly_divmod(num, den)
                if poly_trim(rem):
                    return CheckReport(
                        "euler-series-pairing", False,
                        counterexample=f"d={tuple(d)}, zeta-monomial={z}",
                        details=details)
    return CheckReport("euler-series-pairing", True, details=details)


# ---------------------------------------------------------------------------
# Linking residues, two ways
# ---------------------------------------------------------------------------

def residue_direct(series: EulerSeries, d: Sequence[int], p: FixedPoint,
                   a0: Fraction):
    """Residue of the restricted coefficient at alpha = a0, straight from the
    factored form."""
    rf = series.restrict_coeff(d, p)
    return rf.residue_at(Fraction(a0))


def hyper_value_at(v: BundleSpec, b: str, geom: Geometry, p: FixedPoint,
                   d: Sequence[int], a0: Fraction):
    """Restriction of the bundle factors at a fixed point with alpha = a0."""
    if b == "one":
        return ONE
    ff = hyper_factor(v, b, d, geom)
    rf = ff.restrict(geom, p)
    return rf.eval_at(Fraction(a0))


def residue_closed_form(geom: Geometry, balloon: Balloon, delta: int,
                        v: Optional[BundleSpec], b: str, dmax: Sequence[int]):
    """Prescribed residue at alpha = weight/delta of the degree delta*[pq]
    coefficient, from the tangent-weight product formula times the bundle
    restriction value."""
    d = tuple(delta * e for e in balloon.degree)
    if any(a > b_ for a, b_ in zip(d, dmax)):
        raise EngineError("delta multiple of the balloon class exceeds the "
                          "truncation order")
    p = geom.fixed_points[balloon.p]
    lam = balloon.weight
    a0 = lam / delta
    bidx = balloon.bdiv_p

    num = ONE
    den = ONE
    dropped_num = dropped_den = 0
    for a in range(len(geom.divisors)):
        P = divisor_pairing(geom, a, d)
        Dp = p.divisor_values[a]
        if P < 0:
            for k in range(0, -P):
                val = Dp + k * a0
                if not val:
                    dropped_num += 1
                    continue
                num *= val
        elif a != bidx:
            for k in range(1, P + 1):
                val = Dp - k * a0
                if not val:
                    dropped_den += 1
                    continue
                den *= val
    for k in range(1, delta):
        val = p.divisor_values[bidx] - k * a0
        if not val:
            dropped_den += 1
            continue
        den *= val
    if dropped_num != dropped_den:
        raise EngineError("zero tangent-weight factors did not cancel "
                          "symmetrically (weights not generic)")
    base = Fraction(-1, delta) * num / den
    if v is None or b == "one":
        return base
    return base * hyper_value_at(v, b, geom, p, d, a0)
