"""Exact series kernel.

All arithmetic in this module is exact: scalars are ``fractions.Fraction``
(or polynomials in the Chern variable over Fraction); no floating point is
used anywhere.  The module provides

* ``XPoly`` -- dense polynomials in the Chern-polynomial variable ``x``;
* ``NovikovSeries`` -- multivariate formal series in the Novikov variables
  ``q_a = exp(t_a)``, truncated componentwise (box truncation);
* ``AlphaValue`` -- finite Laurent values in the equivariance parameter
  ``alpha``, with coefficients in any commutative coefficient ring
  (Fraction, XPoly, or a cohomology class);
* ``RationalFunctionAlpha`` -- reduced rational functions in ``alpha`` over
  the rationals, with exact residue extraction.

Coefficient rings are duck typed: a coefficient must support ``+``, ``-``,
``*``, equality, and must be falsy exactly when it is zero.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

__all__ = [
    "XPoly",
    "NovikovSeries",
    "AlphaValue",
    "RationalFunctionAlpha",
    "residue_at",
    "iter_box",
    "x_coefficient",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def _as_fraction(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"expected a rational scalar, got {type(v).__name__}")


# ---------------------------------------------------------------------------
# Polynomials in the Chern variable x
# ---------------------------------------------------------------------------

class XPoly:
    """Dense polynomial in the Chern-polynomial variable over Fraction."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable = ()):
        c = [_as_fraction(v) for v in coeffs]
        while c and not c[-1]:
            c.pop()
        self.c = tuple(c)

    @staticmethod
    def variable() -> "XPoly":
        return XPoly((0, 1))

    @staticmethod
    def const(v) -> "XPoly":
        return XPoly((v,))

    def degree(self) -> int:
        """Degree, with the convention that the zero polynomial has degree -1."""
        return len(self.c) - 1

    def coeff(self, j: int) -> Fraction:
        return self.c[j] if 0 <= j < len(self.c) else ZERO

    def is_constant(self) -> bool:
        return len(self.c) <= 1

    def constant(self) -> Fraction:
        return self.coeff(0)

    def _coerce(self, other):
        if isinstance(other, XPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return XPoly((other,))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = max(len(self.c), len(o.c))
        return XPoly(tuple(self.coeff(j) + o.coeff(j) for j in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return XPoly(tuple(-v for v in self.c))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not self.c or not o.c:
            return XPoly()
        out = [ZERO] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if not a:
                continue
            for j, b in enumerate(o.c):
                out[i + j] += a * b
        return XPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _as_fraction(other)
            return XPoly(tuple(v / q for v in self.c))
        if isinstance(other, XPoly) and other.is_constant() and other.c:
            return self / other.c[0]
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = XPoly((1,))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __hash__(self):
        return hash(self.c)

    def __bool__(self):
        return bool(self.c)

    def __repr__(self):
        if not self.c:
            return "XPoly(0)"
        terms = []
        for j, v in enumerate(self.c):
            if not v:
                continue
            if j == 0:
                terms.append(str(v))
            elif j == 1:
                terms.append(f"{v}*x")
            else:
                terms.append(f"{v}*x^{j}")
        return "XPoly(" + " + ".join(terms) + ")"


def x_coefficient(value, j: int) -> Fraction:
    """Coefficient of x^j of a scalar that may or may not carry x."""
    if isinstance(value, XPoly):
        return value.coeff(j)
    v = _as_fraction(value)
    return v if j == 0 else ZERO


# ---------------------------------------------------------------------------
# Truncated multivariate Novikov series
# ---------------------------------------------------------------------------

def iter_box(dmax: Sequence[int]) -> Iterator[tuple]:
    """All exponent vectors 0 <= d <= dmax componentwise, in graded order."""
    all_degrees = list(itertools.product(*(range(b + 1) for b in dmax)))
    all_degrees.sort(key=lambda d: (sum(d), d))
    return iter(all_degrees)


def _leq(r, d):
    return all(a <= b for a, b in zip(r, d))


def _sub(d, r):
    return tuple(a - b for a, b in zip(d, r))


class NovikovSeries:
    """Multivariate series in q_a = exp(t_a), truncated at dmax per variable.

    Coefficients live in a duck-typed commutative ring; absent entries mean
    zero.  Instances are treated as immutable.
    """

    __slots__ = ("m", "dmax", "c")

    def __init__(self, m: int, dmax: Sequence[int], coeffs=None):
        self.m = m
        self.dmax = tuple(int(b) for b in dmax)
        if len(self.dmax) != m:
            raise ValueError("dmax must have one bound per variable")
        data = {}
        if coeffs:
            for d, v in coeffs.items():
                d = tuple(d)
                if len(d) != m or any(e < 0 for e in d):
                    raise ValueError(f"bad exponent vector {d}")
                if any(e > b for e, b in zip(d, self.dmax)):
                    continue
                if v:
                    data[d] = v
        self.c = data

    @classmethod
    def constant(cls, m: int, dmax: Sequence[int], value) -> "NovikovSeries":
        return cls(m, dmax, {tuple([0] * m): value})

    @classmethod
    def variable(cls, m: int, dmax: Sequence[int], a: int) -> "NovikovSeries":
        e = [0] * m
        e[a] = 1
        return cls(m, dmax, {tuple(e): ONE})

    def coeff(self, d):
        return self.c.get(tuple(d), ZERO)

    def degrees(self):
        return sorted(self.c, key=lambda d: (sum(d), d))

    def map_coefficients(self, fn) -> "NovikovSeries":
        return NovikovSeries(self.m, self.dmax, {d: fn(v) for d, v in self.c.items()})

    def _check_compatible(self, other):
        if self.m != other.m:
            raise ValueError("variable-count mismatch")

    def __add__(self, other):
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        self._check_compatible(other)
        dmax = tuple(min(a, b) for a, b in zip(self.dmax, other.dmax))
        out = dict(self.c)
        for d, v in other.c.items():
            out[d] = out[d] + v if d in out else v
        return NovikovSeries(self.m, dmax, out)

    def __neg__(self):
        return self.map_coefficients(lambda v: -v)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, NovikovSeries):
            self._check_compatible(other)
            dmax = tuple(min(a, b) for a, b in zip(self.dmax, other.dmax))
            out = {}
            for r, u in self.c.items():
                for s, v in other.c.items():
                    d = tuple(a + b for a, b in zip(r, s))
                    if any(e > b for e, b in zip(d, dmax)):
                        continue
                    w = u * v
                    out[d] = out[d] + w if d in out else w
            return NovikovSeries(self.m, dmax, out)
        return self.map_coefficients(lambda v: v * other)

    def __rmul__(self, other):
        return self.map_coefficients(lambda v: other * v)

    def __eq__(self, other):
        if not isinstance(other, NovikovSeries):
            return NotImplemented
        return self.m == other.m and self.dmax == other.dmax and self.c == other.c

    def __bool__(self):
        return bool(self.c)

    def __repr__(self):
        return f"NovikovSeries(m={self.m}, dmax={self.dmax}, {len(self.c)} terms)"

    # -- ring operations ----------------------------------------------------

    def invert_unit(self) -> "NovikovSeries":
        """Multiplicative inverse, valid when the constant term is invertible."""
        zero_d = tuple([0] * self.m)
        c0 = self.c.get(zero_d)
        inv0 = _invert_coefficient(c0)
        out = {zero_d: inv0}
        for d in iter_box(self.dmax):
            if d == zero_d:
                continue
            acc = None
            for r, v in self.c.items():
                if r == zero_d or not _leq(r, d):
                    continue
                s = _sub(d, r)
                if s in out:
                    term = v * out[s]
                    acc = term if acc is None else acc + term
            if acc is not None and acc:
                out[d] = -(inv0 * acc)
        return NovikovSeries(self.m, self.dmax, out)

    def exp(self) -> "NovikovSeries":
        """exp of a series whose constant term is zero or nilpotent."""
        zero_d = tuple([0] * self.m)
        c0 = self.c.get(zero_d)
        head = None
        if c0 is not None and c0:
            head = _exp_nilpotent(c0)
        body = NovikovSeries(self.m, self.dmax,
                             {d: v for d, v in self.c.items() if d != zero_d})
        total = sum(self.dmax)
        result = NovikovSeries.constant(self.m, self.dmax, ONE)
        power = result
        fact = 1
        for k in range(1, total + 1):
            power = power * body
            if not power:
                break
            fact *= k
            result = result + power * Fraction(1, fact)
        if head is not None:
            result = result.map_coefficients(lambda v: head * v)
        return result

    def log(self) -> "NovikovSeries":
        """log of a series with constant term 1."""
        zero_d = tuple([0] * self.m)
        c0 = self.c.get(zero_d)
        if c0 is None or c0 != 1:
            raise ValueError("log requires constant term 1")
        u = NovikovSeries(self.m, self.dmax,
                          {d: -v for d, v in self.c.items() if d != zero_d})
        # log(1 - u) = -sum u^k / k with u the negated tail
        total = sum(self.dmax)
        result = NovikovSeries(self.m, self.dmax)
        power = NovikovSeries.constant(self.m, self.dmax, ONE)
        for k in range(1, total + 1):
            power = power * u
            if not power:
                break
            result = result - power * Fraction(1, k)
        return result

    def substitute(self, images: Sequence["NovikovSeries"]) -> "NovikovSeries":
        """Formal composition q_a -> images[a].

        Each image must be of the form q_a * (unit + higher order), which
        guarantees that the composition is well defined under truncation.
        """
        if len(images) != self.m:
            raise ValueError("need one image per variable")
        for a, img in enumerate(images):
            self._check_compatible(img)
            unit = tuple(1 if i == a else 0 for i in range(self.m))
            lead = img.c.get(unit)
            if lead is None or not lead:
                raise ValueError(f"image {a} is not of unit-times-q form")
            for d in img.c:
                if not _leq(unit, d):
                    raise ValueError(f"image {a} is not of unit-times-q form")
        dmax = self.dmax
        for img in images:
            dmax = tuple(min(a, b) for a, b in zip(dmax, img.dmax))
        powers = [{0: NovikovSeries.constant(self.m, dmax, ONE)} for _ in range(self.m)]

        def img_power(a, k):
            cache = powers[a]
            if k not in cache:
                cache[k] = img_power(a, k - 1) * images[a]
            return cache[k]

        result = NovikovSeries(self.m, dmax)
        for d, v in self.c.items():
            if any(e > b for e, b in zip(d, dmax)):
                continue
            term = NovikovSeries.constant(self.m, dmax, v)
            for a, e in enumerate(d):
                if e:
                    term = term * img_power(a, e)
            result = result + term
        return result


def _invert_coefficient(c0):
    if c0 is None or not c0:
        raise ValueError("non-invertible constant term")
    if isinstance(c0, (int, Fraction)):
        return ONE / _as_fraction(c0)
    if isinstance(c0, XPoly):
        if c0.is_constant():
            return XPoly((ONE / c0.constant(),))
        raise ValueError("non-invertible constant term (x-dependent)")
    inv = getattr(c0, "invert_unit", None)
    if inv is not None:
        return inv()
    raise ValueError("non-invertible constant term")


def _exp_nilpotent(c0, cap: int = 64):
    one = ONE
    acc = one
    power = c0
    fact = 1
    for k in range(1, cap + 1):
        fact *= k
        acc = acc + power * Fraction(1, fact)
        power = power * c0
        if not power:
            return acc
    raise ValueError("exp requires a zero or nilpotent constant term")


# ---------------------------------------------------------------------------
# Finite Laurent values in alpha
# ---------------------------------------------------------------------------

class AlphaValue:
    """Finite Laurent polynomial in alpha with duck-typed coefficients.

    Well defined in the cohomological setting because the ring generators are
    nilpotent, so geometric-series expansions of linear factors terminate.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        data = {}
        if coeffs:
            for k, v in coeffs.items():
                if v:
                    data[int(k)] = v
        self.c = data

    @classmethod
    def scalar(cls, value) -> "AlphaValue":
        return cls({0: value})

    def coeff(self, k: int):
        return self.c.get(k, ZERO)

    def alpha_degree(self):
        """Largest alpha exponent with nonzero coefficient; None when zero."""
        return max(self.c) if self.c else None

    def alpha_min(self):
        return min(self.c) if self.c else None

    def shift(self, k: int) -> "AlphaValue":
        return AlphaValue({e + k: v for e, v in self.c.items()})

    def conj(self) -> "AlphaValue":
        """The involution alpha -> -alpha."""
        return AlphaValue({e: (v if e % 2 == 0 else -v) for e, v in self.c.items()})

    def map_coefficients(self, fn) -> "AlphaValue":
        return AlphaValue({e: fn(v) for e, v in self.c.items()})

    def _coerce(self, other):
        if isinstance(other, AlphaValue):
            return other
        if isinstance(other, (int, Fraction)):
            return AlphaValue({0: _as_fraction(other)})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            o = AlphaValue({0: other})
        out = dict(self.c)
        for e, v in o.c.items():
            out[e] = out[e] + v if e in out else v
        return AlphaValue(out)

    __radd__ = __add__

    def __neg__(self):
        return AlphaValue({e: -v for e, v in self.c.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            o = AlphaValue({0: other})
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, AlphaValue):
            out = {}
            for e1, v1 in self.c.items():
                for e2, v2 in other.c.items():
                    e = e1 + e2
                    w = v1 * v2
                    if e in out:
                        out[e] = out[e] + w
                    else:
                        out[e] = w
            return AlphaValue(out)
        return AlphaValue({e: v * other for e, v in self.c.items()})

    def __rmul__(self, other):
        return AlphaValue({e: other * v for e, v in self.c.items()})

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __bool__(self):
        return bool(self.c)

    def __repr__(self):
        if not self.c:
            return "AlphaValue(0)"
        parts = [f"alpha^{e}: {v!r}" for e, v in sorted(self.c.items())]
        return "AlphaValue({" + ", ".join(parts) + "})"


# ---------------------------------------------------------------------------
# Dense polynomial helpers in alpha (plain lists, index = degree)
# ---------------------------------------------------------------------------

def poly_trim(p):
    while p and not p[-1]:
        p.pop()
    return p


def poly_add(p, q):
    n = max(len(p), len(q))
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else ZERO
        b = q[i] if i < len(q) else ZERO
        out.append(a + b)
    return poly_trim(out)


def poly_neg(p):
    return [-v for v in p]


def poly_scale(p, s):
    return poly_trim([v * s for v in p])


def poly_mul(p, q):
    if not p or not q:
        return []
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_eval(p, a0):
    acc = ZERO
    for v in reversed(p):
        acc = acc * a0 + v
    return acc


def poly_conj(p):
    """alpha -> -alpha on a dense polynomial."""
    return poly_trim([(v if i % 2 == 0 else -v) for i, v in enumerate(p)])


def poly_divmod(p, q):
    """Long division; the divisor's leading coefficient must be a nonzero
    rational (the dividend's coefficients may live in a larger ring)."""
    q = poly_trim(list(q))
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    lead = q[-1]
    if not isinstance(lead, (int, Fraction)):
        raise TypeError("divisor must have rational leading coefficient")
    inv = ONE / _as_fraction(lead)
    rem = list(p)
    deg_q = len(q) - 1
    quot = [ZERO] * max(0, len(rem) - deg_q)
    while len(poly_trim(rem)) - 1 >= deg_q:
        rem = poly_trim(rem)
        k = len(rem) - 1 - deg_q
        c = rem[-1] * inv
        quot[k] = c
        for i, b in enumerate(q):
            rem[k + i] = rem[k + i] - c * b
        rem.pop()
    return poly_trim(quot), poly_trim(rem)


def poly_gcd(p, q):
    """Monic gcd over the rationals."""
    a, b = poly_trim(list(p)), poly_trim(list(q))
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    if a:
        a = poly_scale(a, ONE / a[-1])
    return a


# ---------------------------------------------------------------------------
# Rational functions in alpha over the rationals
# ---------------------------------------------------------------------------

class RationalFunctionAlpha:
    """num/den in alpha with Fraction coefficients, stored reduced with a
    monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(ONE,)):
        num = poly_trim([_as_fraction(v) for v in num])
        den = poly_trim([_as_fraction(v) for v in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        if num:
            g = poly_gcd(num, den)
            if len(g) > 1:
                num, _ = poly_divmod(num, g)
                den, _ = poly_divmod(den, g)
        else:
            den = [ONE]
        lead = den[-1]
        if lead != 1:
            num = poly_scale(num, ONE / lead)
            den = poly_scale(den, ONE / lead)
        self.num = tuple(num)
        self.den = tuple(den)

    @classmethod
    def from_fraction(cls, v) -> "RationalFunctionAlpha":
        return cls([_as_fraction(v)])

    @classmethod
    def alpha(cls) -> "RationalFunctionAlpha":
        return cls([ZERO, ONE])

    def _coerce(self, other):
        if isinstance(other, RationalFunctionAlpha):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalFunctionAlpha([_as_fraction(other)])
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        num = poly_add(poly_mul(list(self.num), list(o.den)),
                       poly_mul(list(o.num), list(self.den)))
        return RationalFunctionAlpha(num, poly_mul(list(self.den), list(o.den)))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunctionAlpha(poly_neg(list(self.num)), list(self.den))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunctionAlpha(poly_mul(list(self.num), list(o.num)),
                                     poly_mul(list(self.den), list(o.den)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if not o.num:
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunctionAlpha(poly_mul(list(self.num), list(o.den)),
                                     poly_mul(list(self.den), list(o.num)))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __bool__(self):
        return bool(self.num)

    def __repr__(self):
        return f"RationalFunctionAlpha(num={list(self.num)}, den={list(self.den)})"

    def conj(self) -> "RationalFunctionAlpha":
        return RationalFunctionAlpha(poly_conj(list(self.num)),
                                     poly_conj(list(self.den)))

    def alpha_degree(self):
        """Degree at infinity (deg num - deg den); None for the zero function."""
        if not self.num:
            return None
        return (len(self.num) - 1) - (len(self.den) - 1)

    def is_polynomial(self) -> bool:
        return len(self.den) == 1

    def eval(self, a0) -> Fraction:
        a0 = _as_fraction(a0)
        d = poly_eval(list(self.den), a0)
        if not d:
            raise ZeroDivisionError(f"pole at alpha={a0}")
        return poly_eval(list(self.num), a0) / d

    def pole_order(self, a0) -> int:
        a0 = _as_fraction(a0)
        order = 0
        den = list(self.den)
        while poly_eval(den, a0) == 0:
            den, rem = poly_divmod(den, [-a0, ONE])
            assert not rem
            order += 1
        return order

    def residue_at(self, a0) -> Fraction:
        """Residue at a simple pole; 0 at a regular point; error if the pole
        order is two or more."""
        a0 = _as_fraction(a0)
        order = self.pole_order(a0)
        if order == 0:
            return ZERO
        if order > 1:
            raise ValueError(f"pole of order {order} >= 2 at alpha={a0}")
        g, rem = poly_divmod(list(self.den), [-a0, ONE])
        assert not rem
        return poly_eval(list(self.num), a0) / poly_eval(g, a0)

    def expand_at_infinity(self, down_to: int) -> dict:
        """Laurent coefficients at alpha = infinity for exponents >= down_to.

        Returns a dict exponent -> Fraction.  The expansion of num/den in
        descending powers of alpha is computed by exact series division in
        u = 1/alpha.
        """
        if not self.num:
            return {}
        n = len(self.num) - 1
        m = len(self.den) - 1
        top = n - m
        count = top - down_to + 1
        if count <= 0:
            return {}
        # reversed coefficient sequences: f = alpha^(n-m) * N~(u)/D~(u)
        nrev = list(reversed(self.num))
        drev = list(reversed(self.den))
        inv0 = ONE / drev[0]
        series = []
        for t in range(count):
            acc = nrev[t] if t < len(nrev) else ZERO
            for j in range(1, t + 1):
                if j < len(drev):
                    acc -= drev[j] * series[t - j]
            series.append(acc * inv0)
        return {top - t: series[t] for t in range(count) if series[t]}


def residue_at(f: RationalFunctionAlpha, a0) -> Fraction:
    """Residue of ``f`` at ``alpha = a0``; the pole order must be at most 1."""
    return f.residue_at(a0)
