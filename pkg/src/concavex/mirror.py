"""Normalization of a hypergeometric series and extraction of invariants.

The pipeline reads the top two alpha-layers of the series coefficients
divided by the unit class, builds the normalizing pair (f, g) with

    f = -alpha log C - C'/C,      g = -C''/C,

applies the change of variables Q_a = q_a exp(g_a) together with the factor
exp(f/alpha), and matches the integrated result against
alpha^{-3} (2 - d.T) K_d to read off the intersection numbers K_d.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .euler import (BundleSpec, EngineError, EulerSeries, FactoredForm,
                    check_mult_class)
from .geometry import CohClass, Geometry, GeometryError
from .series import (AlphaValue, NovikovSeries, XPoly, iter_box, poly_add,
                     poly_mul, poly_trim, x_coefficient)

ZERO = Fraction(0)
ONE = Fraction(1)


class MirrorError(ValueError):
    """A named mathematical condition failed; ``condition`` is the catalog
    name surfaced by the command-line reports."""

    def __init__(self, condition: str, message: str):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


@dataclass
class MirrorData:
    """The scalar series C, C', the vector series C'', and the derived
    normalization (f, g).

    f is stored in two parts: ``f_alpha`` is the coefficient of alpha
    (so f = alpha*f_alpha + f_scalar), and both f and g have zero constant
    term by construction."""

    C: NovikovSeries
    C_prime: NovikovSeries
    C_dblprime: Tuple[NovikovSeries, ...]
    f_alpha: Optional[NovikovSeries] = None
    f_scalar: Optional[NovikovSeries] = None
    g: Optional[Tuple[NovikovSeries, ...]] = None

    def is_trivial(self) -> bool:
        return (not self.C_prime and not any(self.C_dblprime)
                and self.C == NovikovSeries.constant(self.C.m, self.C.dmax, ONE))


@dataclass
class InvariantTable:
    """Extracted intersection numbers with their consistency residuals and
    the generating function in the transformed variables."""

    K: Dict[tuple, object]
    residuals: Dict[tuple, object]
    phi: NovikovSeries
    shift: Optional[int] = None
    skipped: Optional[str] = None


# ---------------------------------------------------------------------------
# The unit class
# ---------------------------------------------------------------------------

def omega_class(v: BundleSpec, b: str, geom: Geometry):
    """The unit class b(V+)/b(V-).

    Returns a CohClass when the factored form materializes exactly in the
    ring; otherwise returns the factored form itself (the concave Euler-class
    case, where only the factored role is ever used)."""
    from .euler import omega_form
    check_mult_class(b)
    form = omega_form(v, b, geom)
    cls = materialize_omega(form, geom)
    return cls if cls is not None else form


def materialize_omega(form: FactoredForm, geom: Geometry) -> Optional[CohClass]:
    """Exact ring element of a factored unit, when one exists."""
    # cancel proportional factors exactly (scale goes to the prefactor)
    pref, items = form.normal_key()
    leftovers = []
    for prim, e in items.items():
        if e < 0:
            return None
        leftovers.append((prim, e))
    acc = geom.scalar_class(pref)
    for prim, e in leftovers:
        gens = prim[:geom.ngens]
        const, alpha, xc = prim[geom.ngens:]
        if alpha or const:
            return None
        cls = geom.linear_class(gens)
        if xc:
            cls = cls + geom.scalar_class(XPoly((ZERO, xc)))
        for _ in range(e):
            acc = acc * cls
    return acc


# ---------------------------------------------------------------------------
# Asymptotics: reading C, C', C''
# ---------------------------------------------------------------------------

def omega_cofactor_form(B: EulerSeries, d) -> FactoredForm:
    """B_d divided by the unit class, as exact factor cancellation."""
    return B.coeff_form(d) * B.omega.inverse()


def asymptotics(B: EulerSeries) -> MirrorData:
    """Read C, C', C'' from the alpha^0 and alpha^-1 layers of the unit
    cofactors of the coefficients (nonequivariant expansion)."""
    geom = B.geom
    m = geom.m
    dmax = B.dmax
    C = {tuple([0] * m): ONE}
    Cp = {}
    Cpp = [dict() for _ in range(m)]
    for d in iter_box(dmax):
        if not any(d):
            continue
        cof = omega_cofactor_form(B, d).expand(geom)
        deg = cof.alpha_degree()
        if deg is not None and deg > 0:
            raise MirrorError(
                "first-chern-bound",
                "a coefficient divided by the unit class has positive "
                "alpha-degree; the first-Chern-class bound "
                "c1(V+) - c1(V-) <= c1(X) fails")
        a0 = cof.coeff(0)
        if a0:
            if not a0.is_scalar():
                raise MirrorError(
                    "asymptotic-shape",
                    "the alpha^0 layer of a unit cofactor is not scalar")
            C[d] = a0.scalar()
        am1 = cof.coeff(-1)
        if am1:
            try:
                coords = geom.degree1_coords(am1)
            except GeometryError as exc:
                raise MirrorError(
                    "asymptotic-shape",
                    f"the alpha^-1 layer of a unit cofactor has components "
                    f"outside span{{1, H}}: {exc}")
            if coords[0]:
                Cp[d] = coords[0]
            for j in range(m):
                if coords[1 + j]:
                    Cpp[j][d] = coords[1 + j]
    return MirrorData(
        C=NovikovSeries(m, dmax, C),
        C_prime=NovikovSeries(m, dmax, Cp),
        C_dblprime=tuple(NovikovSeries(m, dmax, cj) for cj in Cpp))


def asymptotics_equivariant(B: EulerSeries) -> MirrorData:
    """Same layers, read from fixed-point restrictions (exact expansion of
    the restricted rational functions at alpha = infinity)."""
    geom = B.geom
    m = geom.m
    dmax = B.dmax
    hvals = [[geom.linform_value(geom.h_reps[j], ZERO, p) for j in range(m)]
             for p in geom.fixed_points]
    C = {tuple([0] * m): ONE}
    Cp = {}
    Cpp = [dict() for _ in range(m)]
    for d in iter_box(dmax):
        if not any(d):
            continue
        tops = []
        subs = []
        for p in geom.fixed_points:
            rf = omega_cofactor_form(B, d).restrict(geom, p)
            exp = rf.expand_at_infinity(-1)
            if any(k > 0 for k in exp):
                raise MirrorError(
                    "first-chern-bound",
                    "a restricted unit cofactor grows at alpha = infinity")
            tops.append(exp.get(0, ZERO))
            subs.append(exp.get(-1, ZERO))
        if any(t != tops[0] for t in tops):
            raise MirrorError(
                "asymptotic-shape",
                "the alpha^0 layer of a unit cofactor is not scalar")
        if tops[0]:
            C[d] = tops[0]
        coords = _solve_scalar_plus_h(geom, hvals, subs)
        if coords is None:
            raise MirrorError(
                "asymptotic-shape",
                "the alpha^-1 layer of a unit cofactor has components "
                "outside span{1, H}")
        if coords[0]:
            Cp[d] = coords[0]
        for j in range(m):
            if coords[1 + j]:
                Cpp[j][d] = coords[1 + j]
    return MirrorData(
        C=NovikovSeries(m, dmax, C),
        C_prime=NovikovSeries(m, dmax, Cp),
        C_dblprime=tuple(NovikovSeries(m, dmax, cj) for cj in Cpp))


def _solve_scalar_plus_h(geom, hvals, values):
    """Solve value_p = a' + sum_j a''_j H_j(p) exactly; x-graded."""
    from . import linalg
    m = geom.m
    rows = [[ONE] + hvals[p.index] for p in geom.fixed_points]
    xdeg = 0
    for v in values:
        if isinstance(v, XPoly):
            xdeg = max(xdeg, v.degree())
    parts = []
    for j in range(xdeg + 1):
        rhs = [x_coefficient(v, j) for v in values]
        sol = linalg.solve_affine(rows, rhs)
        if sol is None:
            return None
        part, null = sol
        if null:
            raise MirrorError("asymptotic-shape",
                              "H-basis restriction rows are degenerate")
        parts.append(part)
    if xdeg == 0:
        return tuple(parts[0])
    out = []
    for i in range(1 + m):
        out.append(XPoly([parts[j][i] for j in range(xdeg + 1)]))
    return tuple(out)


# ---------------------------------------------------------------------------
# The normalization (f, g)
# ---------------------------------------------------------------------------

def mirror_fg(md: MirrorData) -> MirrorData:
    """Complete the mirror data with f = -alpha log C - C'/C and g = -C''/C."""
    C = md.C
    zero_d = tuple([0] * C.m)
    if C.coeff(zero_d) != 1:
        raise MirrorError("asymptotic-shape", "C must have constant term 1")
    Cinv = C.invert_unit()
    f_alpha = -(C.log())
    f_scalar = -(md.C_prime * Cinv)
    g = tuple(-(cj * Cinv) for cj in md.C_dblprime)
    for ser in (f_alpha, f_scalar) + g:
        if ser.coeff(zero_d):
            raise MirrorError("asymptotic-shape",
                              "f and g must have zero constant terms")
    return MirrorData(md.C, md.C_prime, md.C_dblprime, f_alpha, f_scalar, g)


def mirror_map_inverse(md: MirrorData) -> List[NovikovSeries]:
    """The inverse q = q(Q) of Q_a = q_a exp(g_a(q)), by fixed-point
    iteration; converges in the Novikov filtration."""
    m = md.C.m
    dmax = md.C.dmax
    images = [NovikovSeries.variable(m, dmax, a) for a in range(m)]
    steps = sum(dmax) + 1
    for _ in range(steps):
        new = []
        for a in range(m):
            gq = md.g[a].substitute(images)
            new.append(NovikovSeries.variable(m, dmax, a) * (-gq).exp())
        images = new
    return images


# ---------------------------------------------------------------------------
# Applying the transformation
# ---------------------------------------------------------------------------

class TransformedSeries:
    """Coefficient table of the normalized series in the transformed
    variables; coefficients for d > 0 are materialized alpha-Laurent values
    and the d = 0 coefficient is the unit class."""

    def __init__(self, geom: Geometry, omega: FactoredForm, dmax,
                 coeffs: Dict[tuple, AlphaValue]):
        self.geom = geom
        self.omega = omega
        self.dmax = tuple(dmax)
        self.coeffs = coeffs

    def coeff(self, d) -> AlphaValue:
        return self.coeffs.get(tuple(d), AlphaValue())

    def degrees(self):
        return sorted(self.coeffs, key=lambda t: (sum(t), t))


def _wrap_alpha(geom: Geometry, c) -> AlphaValue:
    if isinstance(c, AlphaValue):
        return c
    if isinstance(c, CohClass):
        return AlphaValue({0: c})
    return AlphaValue({0: geom.scalar_class(c)})


def transform_apply(B: EulerSeries, md: MirrorData) -> TransformedSeries:
    """Compute the normalized series: multiply by exp(f/alpha), then invert
    the mirror map.  The result's coefficients satisfy deg_alpha <= -2 for
    every d > 0."""
    geom = B.geom
    m = geom.m
    dmax = B.dmax
    if md.g is None:
        md = mirror_fg(md)
    omega_cls = materialize_omega(B.omega, geom)

    # exp((f + H.g)/alpha) with alpha-Laurent class coefficients;
    # exp of the alpha-linear part of f is exactly 1/C.
    Cinv = md.C.invert_unit()
    arg = NovikovSeries(m, dmax)
    for j in range(m):
        hj = AlphaValue({-1: geom.h_class(j)})
        arg = arg + md.g[j].map_coefficients(lambda v, hj=hj: hj * v)
    arg = arg + md.f_scalar.map_coefficients(
        lambda v: AlphaValue({-1: geom.scalar_class(v)}))
    expfactor = arg.exp().map_coefficients(lambda c: _wrap_alpha(geom, c))
    expfactor = expfactor * Cinv

    body = NovikovSeries(m, dmax)
    for d in iter_box(dmax):
        if any(d):
            av = B.expand_coeff(d)
            if av:
                body = body + NovikovSeries(m, dmax, {tuple(d): av})
    U = expfactor * body

    if omega_cls is not None:
        head = expfactor.map_coefficients(lambda av: av * omega_cls)
        U = U + head
    else:
        # the unit class is not a ring element; the normalization must then
        # be trivial so that no symbolic unit multiples survive
        for d in iter_box(dmax):
            if any(d) and expfactor.coeff(d):
                raise MirrorError(
                    "unit-not-materializable",
                    "the unit class is not a ring element and the "
                    "normalization is nontrivial")

    images = mirror_map_inverse(md)
    A = U.substitute(images)

    coeffs = {}
    for d in iter_box(dmax):
        if not any(d):
            continue
        av = A.coeff(d)
        if not isinstance(av, AlphaValue):
            av = AlphaValue() if not av else AlphaValue.scalar(geom.scalar_class(av))
        if av:
            deg = av.alpha_degree()
            if deg is not None and deg > -2:
                raise MirrorError(
                    "alpha-degree-bound",
                    f"transformed coefficient at d={tuple(d)} has "
                    f"alpha-degree {deg} > -2 (inconsistent inputs)")
        coeffs[tuple(d)] = av
    return TransformedSeries(geom, B.omega, dmax, coeffs)


# ---------------------------------------------------------------------------
# The same transformation at the level of fixed-point restrictions
# ---------------------------------------------------------------------------

class RatVal:
    """num(alpha)/den(alpha) with duck-typed numerator coefficients and
    rational denominator; reduced only in the all-rational case."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num = poly_trim(list(num))
        self.den = poly_trim([Fraction(v) for v in (den if den else [ONE])])
        if not self.den:
            raise ZeroDivisionError("zero denominator")
        self._reduce()

    def _reduce(self):
        from .series import RationalFunctionAlpha
        if self.num and all(isinstance(v, (int, Fraction)) for v in self.num):
            rf = RationalFunctionAlpha(self.num, self.den)
            self.num = list(rf.num)
            self.den = list(rf.den)
        elif not self.num:
            self.den = [ONE]

    @classmethod
    def const(cls, v) -> "RatVal":
        return cls([v])

    def _coerce(self, other):
        if isinstance(other, RatVal):
            return other
        if isinstance(other, (int, Fraction, XPoly)):
            return RatVal([other])
        if isinstance(other, AlphaValue):
            return ratval_from_alphavalue(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        num = poly_add(poly_mul(self.num, o.den), poly_mul(o.num, self.den))
        return RatVal(num, poly_mul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return RatVal([-v for v in self.num], self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RatVal(poly_mul(self.num, o.num), poly_mul(self.den, o.den))

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        lhs = poly_mul(self.num, o.den)
        rhs = poly_mul(o.num, self.den)
        return poly_trim(poly_add(lhs, [-v for v in rhs])) == []

    def expand_at_infinity(self, down_to: int):
        from .reconstruct import rat_expand_at_infinity
        return rat_expand_at_infinity(self.num, self.den, down_to)

    def alpha_degree(self):
        if not self.num:
            return None
        return (len(self.num) - 1) - (len(self.den) - 1)


def ratval_from_alphavalue(av: AlphaValue) -> RatVal:
    if not av.c:
        return RatVal([])
    emin = min(av.c)
    shift = max(0, -emin)
    num = [ZERO] * (max(av.c) + shift + 1)
    for e, v in av.c.items():
        num[e + shift] = v
    den = [ZERO] * shift + [ONE]
    return RatVal(num, den)


def transform_apply_restricted(B: EulerSeries, md: MirrorData) -> Dict[int, Dict[tuple, RatVal]]:
    """Apply the normalization at every fixed point: returns, per fixed
    point index, the table d -> restricted transformed coefficient as an
    exact rational function of alpha.

    This is the equivariant route: the unit class enters only through its
    restriction values, so nothing needs to be inverted in the ring."""
    geom = B.geom
    m = geom.m
    dmax = B.dmax
    if not B.equivariant:
        raise MirrorError("equivariance", "restricted transform needs "
                                          "equivariant coefficient data")
    if md.g is None:
        md = mirror_fg(md)
    Cinv = md.C.invert_unit()
    images = mirror_map_inverse(md)
    out: Dict[int, Dict[tuple, RatVal]] = {}
    for p in geom.fixed_points:
        hp = [geom.linform_value(geom.h_reps[j], ZERO, p) for j in range(m)]
        arg = NovikovSeries(m, dmax)
        for j in range(m):
            arg = arg + md.g[j].map_coefficients(
                lambda v, h=hp[j]: AlphaValue({-1: h * v}))
        arg = arg + md.f_scalar.map_coefficients(
            lambda v: AlphaValue({-1: v}))
        expf = arg.exp().map_coefficients(
            lambda c: ratval_from_alphavalue(c) if isinstance(c, AlphaValue)
            else RatVal.const(c))
        expf = expf * Cinv
        body_coeffs = {}
        for d in iter_box(dmax):
            rf = B.restrict_coeff(d, p)
            num, den, xden = rf.num_den()
            if xden:
                raise MirrorError("equivariance",
                                  "x-carrying restricted denominators")
            if num:
                body_coeffs[tuple(d)] = RatVal(num, den)
        body = NovikovSeries(m, dmax, body_coeffs)
        A_p = (expf * body).substitute(images)
        table = {}
        for d in iter_box(dmax):
            if not any(d):
                continue
            val = A_p.coeff(d)
            if not isinstance(val, RatVal):
                val = RatVal.const(val) if val else RatVal([])
            deg = val.alpha_degree()
            if deg is not None and deg > -2:
                raise MirrorError(
                    "alpha-degree-bound",
                    f"restricted transformed coefficient at d={tuple(d)} has "
                    f"alpha-degree {deg} > -2")
            table[tuple(d)] = val
        out[p.index] = table
    return out


# ---------------------------------------------------------------------------
# Extraction of invariants
# ---------------------------------------------------------------------------

def induced_rank(v: BundleSpec, d) -> int:
    return v.rank_induced(d)


def expected_dim(geom: Geometry, v: BundleSpec, d) -> int:
    c1 = geom.pairing_of_vector(geom.c1_vector(), d)
    return int(c1) + geom.dim - 3


def dimension_balanced(geom: Geometry, v: BundleSpec, dmax) -> bool:
    for d in iter_box(dmax):
        if any(d) and induced_rank(v, d) != expected_dim(geom, v, d):
            return False
    return True


def shift_constant(geom: Geometry, v: BundleSpec, dmax) -> int:
    """The constant s = rk V_d - expected dim, verified constant and >= 0."""
    values = set()
    for d in iter_box(dmax):
        if any(d):
            values.add(induced_rank(v, d) - expected_dim(geom, v, d))
    if len(values) != 1:
        raise MirrorError("shift-nonconstant",
                          f"the rank excess varies with the degree: {sorted(values)}")
    s = values.pop()
    if s < 0:
        raise MirrorError("shift-nonconstant", f"negative rank excess {s}")
    return s


def _integral_layers(geom: Geometry, av: AlphaValue) -> Dict[int, object]:
    out = {}
    for e, cls in av.c.items():
        val = geom.integrate(cls)
        if val:
            out[e] = val
    return out


def _xpart(value, s: Optional[int]):
    if s is None:
        if isinstance(value, XPoly):
            raise MirrorError("dimension-balance",
                              "x-dependent integral in an unshifted extraction")
        return value
    return x_coefficient(value, s)


def extract_invariants(A: TransformedSeries, v: BundleSpec, b: str,
                       s: Optional[int] = None) -> InvariantTable:
    """Match the integrated transformed series against
    alpha^{-3} (2 - d.T) K_d, per monomial q^d T^K.

    With ``s`` set this is the shifted variant: the x^s coefficient of the
    integrated series is matched instead (Chern-polynomial classes)."""
    geom = A.geom
    m = geom.m
    K: Dict[tuple, object] = {}
    residuals: Dict[tuple, object] = {}
    for d in A.degrees():
        if not any(d):
            continue
        av = A.coeff(d)
        bad = ZERO
        # T-free layer: integral must be exactly 2 K_d alpha^{-3}
        layers0 = _integral_layers(geom, av)
        kd = _xpart(layers0.get(-3, ZERO), s) / Fraction(2)
        for e, val in layers0.items():
            vv = _xpart(val, s)
            if e != -3 and vv:
                bad = bad + vv * vv
        # T-monomials of higher order
        for knd in itertools.product(*([range(geom.dim + 1)] * m)):
            total = sum(knd)
            if total == 0 or total > geom.dim:
                continue
            hk = geom.scalar_class(ONE)
            for j in range(m):
                for _ in range(knd[j]):
                    hk = hk * geom.h_class(j)
            layers = _integral_layers(geom, av.map_coefficients(lambda c: hk * c))
            if total == 1:
                j = knd.index(1)
                expected = kd * d[j]
                for e, val in layers.items():
                    vv = _xpart(val, s)
                    if e == -2:
                        diff = vv - expected
                        if diff:
                            bad = bad + diff * diff
                    elif vv:
                        bad = bad + vv * vv
            else:
                for e, val in layers.items():
                    vv = _xpart(val, s)
                    if vv:
                        bad = bad + vv * vv
        K[tuple(d)] = kd
        residuals[tuple(d)] = bad
        if bad:
            raise MirrorError(
                "extraction-residual",
                f"nonzero consistency residual at d={tuple(d)}")
    phi = NovikovSeries(m, A.dmax, {d: k for d, k in K.items() if k})
    return InvariantTable(K, residuals, phi, shift=s)


def extract_invariants_pipeline(geom: Geometry, v: BundleSpec, b: str,
                                A: TransformedSeries,
                                dmax) -> InvariantTable:
    """Dispatch between the balanced and the shifted extraction, per the
    multiplicative class."""
    if b == "chern_poly":
        s = shift_constant(geom, v, dmax)
        return extract_invariants(A, v, b, s=s)
    if not dimension_balanced(geom, v, dmax):
        return InvariantTable({}, {}, NovikovSeries(geom.m, dmax),
                              skipped="dimension balance not met at every "
                                      "degree; no invariants extracted")
    return extract_invariants(A, v, b)
