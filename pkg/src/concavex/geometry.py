"""Target-space geometry.

Two families of targets are supported: products of projective spaces and
smooth complete toric manifolds.  A built ``Geometry`` carries

* a presentation of the rational cohomology ring in monomial normal form,
* the full torus-fixed-point list with generic rational restriction data,
* the list of invariant 2-spheres (balloons) with weights and curve degrees,
* combinatorial and localized integration.

Torus weights are specialized to generic rational values drawn
deterministically from a seed, so that every restriction is an exact
rational number and all pole locations stay pairwise distinct.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg

ZERO = Fraction(0)
ONE = Fraction(1)


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class GeometrySpec:
    """Declarative description of a target space."""

    kind: str  # "projective_product" | "toric"
    dims: Tuple[int, ...] = ()
    rays: Tuple[Tuple[int, ...], ...] = ()
    cones: Tuple[Tuple[int, ...], ...] = ()

    def validate(self):
        if self.kind == "projective_product":
            if not self.dims or any(n < 1 for n in self.dims):
                raise GeometryError("projective_product needs positive dimensions")
        elif self.kind == "toric":
            if not self.rays or not self.cones:
                raise GeometryError("toric geometry needs rays and maximal cones")
            n = len(self.rays[0])
            if any(len(v) != n for v in self.rays):
                raise GeometryError("rays must have a common ambient dimension")
            for c in self.cones:
                if len(set(c)) != n:
                    raise GeometryError("maximal cones must have dim-X many distinct rays")
                if any(a < 0 or a >= len(self.rays) for a in c):
                    raise GeometryError("cone refers to a missing ray")
        else:
            raise GeometryError(f"unknown geometry kind {self.kind!r}")


@dataclass(frozen=True)
class Divisor:
    """Invariant divisor as a raw linear expression in the ring generators
    plus an equivariant constant shift."""

    gens: Tuple[Fraction, ...]
    const: Fraction


@dataclass(frozen=True)
class FixedPoint:
    index: int
    label: str
    gen_values: Tuple[Fraction, ...]
    divisor_values: Tuple[Fraction, ...]
    tangent_weights: Tuple[Fraction, ...]
    euler: Fraction


@dataclass(frozen=True)
class Balloon:
    """Invariant 2-sphere joining fixed points p and q.

    ``weight`` is the tangent weight at p along the sphere; the weight at q is
    its negation.  ``degree`` is the curve class in the chosen basis of
    1-cycles, and ``bdiv_p`` / ``bdiv_q`` are the divisor indices whose
    restriction at p (resp. q) equals the tangent weight there.
    """

    p: int
    q: int
    weight: Fraction
    degree: Tuple[int, ...]
    bdiv_p: int
    bdiv_q: int

    def reversed(self) -> "Balloon":
        return Balloon(self.q, self.p, -self.weight, self.degree,
                       self.bdiv_q, self.bdiv_p)


class CohClass:
    """Element of the rational cohomology ring, stored in monomial normal
    form over the geometry's generator basis."""

    __slots__ = ("geom", "c")

    def __init__(self, geom: "Geometry", data: Dict[tuple, object], reduced=False):
        self.geom = geom
        self.c = data if reduced else geom.reduce_data(data)

    def coeff(self, mono):
        return self.c.get(tuple(mono), ZERO)

    def degree_part(self, k: int) -> "CohClass":
        return CohClass(self.geom, {m: v for m, v in self.c.items() if sum(m) == k},
                        reduced=True)

    def max_degree(self) -> int:
        return max((sum(m) for m in self.c), default=0)

    def is_scalar(self) -> bool:
        return all(sum(m) == 0 for m in self.c)

    def scalar(self):
        return self.c.get(tuple([0] * self.geom.ngens), ZERO)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.c)
        for m, v in o.c.items():
            w = out.get(m)
            w = v if w is None else w + v
            if w:
                out[m] = w
            else:
                out.pop(m, None)
        return CohClass(self.geom, out, reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return CohClass(self.geom, {m: -v for m, v in self.c.items()}, reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def _coerce(self, other):
        if isinstance(other, CohClass):
            if other.geom is not self.geom:
                raise GeometryError("classes on different geometries")
            return other
        if isinstance(other, (int, Fraction)) or hasattr(other, "coeff"):
            return self.geom.scalar_class(other)
        return None

    def __mul__(self, other):
        if isinstance(other, CohClass):
            if other.geom is not self.geom:
                raise GeometryError("classes on different geometries")
            raw = {}
            for m1, v1 in self.c.items():
                for m2, v2 in other.c.items():
                    m = tuple(a + b for a, b in zip(m1, m2))
                    w = v1 * v2
                    raw[m] = raw[m] + w if m in raw else w
            return CohClass(self.geom, raw)
        return CohClass(self.geom, {m: v * other for m, v in self.c.items()})

    def __rmul__(self, other):
        return CohClass(self.geom, {m: other * v for m, v in self.c.items()})

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __bool__(self):
        return bool(self.c)

    def __repr__(self):
        if not self.c:
            return "CohClass(0)"
        names = self.geom.gen_names
        terms = []
        for m, v in sorted(self.c.items()):
            mono = "*".join(f"{names[i]}^{e}" if e > 1 else names[i]
                            for i, e in enumerate(m) if e)
            terms.append(f"{v}*{mono}" if mono else str(v))
        return "CohClass(" + " + ".join(terms) + ")"


class Geometry:
    """Shared behaviour of built geometries; see ProductGeometry and
    ToricGeometry for the constructors."""

    kind: str
    m: int
    dim: int
    ngens: int
    gen_names: Tuple[str, ...]
    gen_pairings: Tuple[Tuple[int, ...], ...]
    divisors: Tuple[Divisor, ...]
    divisor_degrees: Tuple[Tuple[int, ...], ...]
    h_reps: Tuple[Tuple[Fraction, ...], ...]
    fixed_points: Tuple[FixedPoint, ...]
    balloons: Tuple[Balloon, ...]
    weight_seed: Optional[int]
    horizon: int

    # -- class constructors ---------------------------------------------

    def zero_class(self) -> CohClass:
        return CohClass(self, {}, reduced=True)

    def scalar_class(self, v) -> CohClass:
        if not v:
            return self.zero_class()
        return CohClass(self, {tuple([0] * self.ngens): v}, reduced=True)

    def gen_class(self, i: int) -> CohClass:
        e = [0] * self.ngens
        e[i] = 1
        return CohClass(self, {tuple(e): ONE})

    def linear_class(self, gens: Sequence) -> CohClass:
        raw = {}
        for i, v in enumerate(gens):
            if v:
                e = [0] * self.ngens
                e[i] = 1
                raw[tuple(e)] = Fraction(v)
        return CohClass(self, raw)

    def h_class(self, j: int) -> CohClass:
        return self.linear_class(self.h_reps[j])

    def h_vector(self, coeffs: Sequence) -> Tuple[Fraction, ...]:
        """Raw generator vector of sum_j coeffs[j] * H_j."""
        out = [ZERO] * self.ngens
        for j, cj in enumerate(coeffs):
            if cj:
                for i, v in enumerate(self.h_reps[j]):
                    out[i] += Fraction(cj) * v
        return tuple(out)

    def c1_vector(self) -> Tuple[Fraction, ...]:
        out = [ZERO] * self.ngens
        for dv in self.divisors:
            for i, v in enumerate(dv.gens):
                out[i] += v
        return tuple(out)

    def c1(self) -> CohClass:
        return self.linear_class(self.c1_vector())

    # -- pairings ---------------------------------------------------------

    def pairing_vector(self, gens: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        """Pairings of a degree-1 raw class with the curve-class basis."""
        out = []
        for j in range(self.m):
            acc = ZERO
            for i, v in enumerate(gens):
                if v:
                    acc += v * self.gen_pairings[i][j]
            out.append(acc)
        return tuple(out)

    def pairing(self, c: CohClass, d: Sequence[int]) -> Fraction:
        """Integer pairing of a degree-1 class against a curve class."""
        for mono in c.c:
            if sum(mono) != 1:
                raise GeometryError("pairing requires a class of pure degree 1")
        gens = [ZERO] * self.ngens
        for mono, v in c.c.items():
            gens[mono.index(1)] += v
        pv = self.pairing_vector(gens)
        return sum(p * dd for p, dd in zip(pv, d))

    def pairing_of_vector(self, gens: Sequence, d: Sequence[int]) -> Fraction:
        pv = self.pairing_vector([Fraction(v) for v in gens])
        return sum(p * dd for p, dd in zip(pv, d))

    # -- restriction -------------------------------------------------------

    def restrict_raw(self, data: Dict[tuple, object], p: FixedPoint):
        acc = ZERO
        for mono, v in data.items():
            val = ONE
            for i, e in enumerate(mono):
                if e:
                    val *= p.gen_values[i] ** e
            acc = acc + v * val
        return acc

    def restrict(self, c: CohClass, p: FixedPoint):
        """Restriction of the stored normal-form representative at p."""
        return self.restrict_raw(c.c, p)

    def linform_value(self, gens: Sequence[Fraction], const: Fraction,
                      p: FixedPoint) -> Fraction:
        acc = const
        for i, v in enumerate(gens):
            if v:
                acc += v * p.gen_values[i]
        return acc

    # -- integration -------------------------------------------------------

    def integrate(self, c: CohClass):
        raise NotImplementedError

    def localized_integrate(self, c: CohClass):
        """Fixed-point sum of restrictions over tangent Euler classes."""
        acc = ZERO
        for p in self.fixed_points:
            if not p.euler:
                raise GeometryError("zero tangent weight under the chosen weights")
            acc = acc + self.restrict(c, p) / p.euler
        return acc

    # -- normal form --------------------------------------------------------

    def reduce_data(self, data: Dict[tuple, object]) -> Dict[tuple, object]:
        raise NotImplementedError

    def monomial_basis(self, k: int) -> List[tuple]:
        raise NotImplementedError

    def all_basis_monomials(self) -> List[tuple]:
        out = []
        for k in range(self.dim + 1):
            out.extend(self.monomial_basis(k))
        return out

    def degree1_coords(self, c: CohClass) -> Tuple[Fraction, ...]:
        """Coordinates of a degree <= 1 class as scalar + H-basis combination.

        Returns (scalar, h_1, ..., h_m); raises when the class has components
        outside span{1, H_1..H_m}.
        """
        rows = []
        rhs = []
        basis0 = self.monomial_basis(0)
        basis1 = self.monomial_basis(1)
        hclasses = [self.h_class(j) for j in range(self.m)]
        for mono in basis0 + basis1:
            row = [ONE if mono in basis0 else ZERO]
            row += [h.coeff(mono) for h in hclasses]
            rows.append(row)
            rhs.append(c.coeff(mono))
        for mono in c.c:
            if sum(mono) > 1:
                raise GeometryError("class has components of degree two or more")
        sol = linalg.solve_affine(rows, rhs)
        if sol is None:
            raise GeometryError("degree-1 class outside the H-basis span")
        part, null = sol
        if null:
            raise GeometryError("H-basis does not span the degree-1 classes")
        return tuple(part)


# ---------------------------------------------------------------------------
# Products of projective spaces
# ---------------------------------------------------------------------------

class ProductGeometry(Geometry):
    kind = "projective_product"

    def __init__(self, dims: Sequence[int], weights: Sequence[Sequence[Fraction]],
                 weight_seed=None, horizon: int = 2):
        self.dims = tuple(int(n) for n in dims)
        self.m = len(self.dims)
        self.dim = sum(self.dims)
        self.ngens = self.m
        self.gen_names = tuple(f"H{a + 1}" for a in range(self.m))
        self.weights = tuple(tuple(Fraction(w) for w in ws) for ws in weights)
        self.weight_seed = weight_seed
        self.horizon = horizon
        self.gen_pairings = tuple(
            tuple(1 if b == a else 0 for b in range(self.m)) for a in range(self.m))
        self.h_reps = tuple(
            tuple(ONE if b == a else ZERO for b in range(self.m)) for a in range(self.m))

        divisors = []
        self._div_index = {}
        for a, n in enumerate(self.dims):
            for i in range(n + 1):
                self._div_index[(a, i)] = len(divisors)
                gens = tuple(ONE if b == a else ZERO for b in range(self.m))
                divisors.append(Divisor(gens, -self.weights[a][i]))
        self.divisors = tuple(divisors)
        self.divisor_degrees = tuple(
            tuple(1 if self.divisors[x].gens[b] else 0 for b in range(self.m))
            for x in range(len(divisors)))

        pts = []
        self._pt_index = {}
        for idx, coords in enumerate(itertools.product(*(range(n + 1) for n in self.dims))):
            gen_values = tuple(self.weights[a][coords[a]] for a in range(self.m))
            div_values = tuple(self.weights[a][coords[a]] - self.weights[a][i]
                               for a in range(self.m) for i in range(self.dims[a] + 1))
            tangent = tuple(self.weights[a][coords[a]] - self.weights[a][i]
                            for a in range(self.m)
                            for i in range(self.dims[a] + 1) if i != coords[a])
            euler = ONE
            for w in tangent:
                euler *= w
            label = "p" + "".join(str(i) for i in coords)
            self._pt_index[coords] = idx
            pts.append(FixedPoint(idx, label, gen_values, div_values, tangent, euler))
        self.fixed_points = tuple(pts)
        self._coords = list(itertools.product(*(range(n + 1) for n in self.dims)))

        balloons = []
        for idx, coords in enumerate(self._coords):
            for a in range(self.m):
                for j in range(coords[a] + 1, self.dims[a] + 1):
                    other = list(coords)
                    other[a] = j
                    qidx = self._pt_index[tuple(other)]
                    weight = self.weights[a][coords[a]] - self.weights[a][j]
                    degree = tuple(1 if b == a else 0 for b in range(self.m))
                    balloons.append(Balloon(
                        idx, qidx, weight, degree,
                        self._div_index[(a, j)], self._div_index[(a, coords[a])]))
        self.balloons = tuple(balloons)

    def point_by_coords(self, coords) -> FixedPoint:
        return self.fixed_points[self._pt_index[tuple(coords)]]

    def reduce_data(self, data):
        out = {}
        for mono, v in data.items():
            if not v:
                continue
            if any(e > n for e, n in zip(mono, self.dims)):
                continue
            out[mono] = out[mono] + v if mono in out else v
        return {m: v for m, v in out.items() if v}

    def monomial_basis(self, k):
        out = []
        for mono in itertools.product(*(range(n + 1) for n in self.dims)):
            if sum(mono) == k:
                out.append(mono)
        return out

    def integrate(self, c: CohClass):
        return c.coeff(self.dims)


# ---------------------------------------------------------------------------
# Smooth complete toric manifolds
# ---------------------------------------------------------------------------

class ToricGeometry(Geometry):
    kind = "toric"

    def __init__(self, rays, cones, xi: Sequence[Fraction],
                 weight_seed=None, horizon: int = 2):
        self.rays = tuple(tuple(int(v) for v in r) for r in rays)
        self.cones = tuple(tuple(sorted(c)) for c in cones)
        self.nrays = len(self.rays)
        self.dim = len(self.rays[0])
        self.ngens = self.nrays
        self.gen_names = tuple(f"D{a + 1}" for a in range(self.nrays))
        self.xi = tuple(Fraction(v) for v in xi)
        self.weight_seed = weight_seed
        self.horizon = horizon

        self._validate_fan()
        walls = self._walls()
        self._build_curve_basis(walls)

        self.divisors = tuple(
            Divisor(tuple(ONE if b == a else ZERO for b in range(self.nrays)), ZERO)
            for a in range(self.nrays))
        self.divisor_degrees = tuple(
            tuple(self.curve_basis[j][a] for j in range(self.m))
            for a in range(self.nrays))
        self.gen_pairings = self.divisor_degrees

        pts = []
        for idx, cone in enumerate(self.cones):
            mat = [[Fraction(self.rays[a][i]) for a in cone] for i in range(self.dim)]
            inv = linalg.mat_inverse(mat)
            duals = {a: tuple(inv[k][i] for i in range(self.dim))
                     for k, a in enumerate(cone)}
            div_values = []
            for a in range(self.nrays):
                if a in duals:
                    div_values.append(sum(duals[a][i] * self.xi[i]
                                          for i in range(self.dim)))
                else:
                    div_values.append(ZERO)
            tangent = tuple(div_values[a] for a in cone)
            euler = ONE
            for w in tangent:
                euler *= w
            label = "p" + "_".join(str(a + 1) for a in cone)
            pts.append(FixedPoint(idx, label, tuple(div_values), tuple(div_values),
                                  tangent, euler))
        self.fixed_points = tuple(pts)

        balloons = []
        for (ci, cj, wall) in walls:
            b_p = next(a for a in self.cones[ci] if a not in wall)
            b_q = next(a for a in self.cones[cj] if a not in wall)
            deg_vec = self._wall_degree_vector(wall, b_p, b_q)
            degree = self._in_curve_basis(deg_vec)
            p = self.fixed_points[ci]
            balloons.append(Balloon(ci, cj, p.divisor_values[b_p], degree, b_p, b_q))
        self.balloons = tuple(balloons)

        self._faces = self._face_monomials()
        self._basis = {}
        self._basis_solvers = {}
        self._mono_cache = {}
        self._build_normal_form()

    # -- fan combinatorics ---------------------------------------------------

    def _validate_fan(self):
        used = set()
        for cone in self.cones:
            mat = [[self.rays[a][i] for i in range(self.dim)] for a in cone]
            d = linalg.det([[Fraction(v) for v in row] for row in mat])
            if abs(d) != 1:
                raise GeometryError("fan is not smooth: cone rays are not a lattice basis")
            used.update(cone)
        if used != set(range(self.nrays)):
            raise GeometryError("every ray must appear in a maximal cone")
        wall_count = {}
        for cone in self.cones:
            for drop in cone:
                wall = tuple(sorted(set(cone) - {drop}))
                wall_count[wall] = wall_count.get(wall, 0) + 1
        if any(v != 2 for v in wall_count.values()):
            raise GeometryError("fan is not complete: a wall is not shared by two cones")

    def _walls(self):
        seen = {}
        out = []
        for idx, cone in enumerate(self.cones):
            for drop in cone:
                wall = tuple(sorted(set(cone) - {drop}))
                if wall in seen:
                    out.append((seen[wall], idx, wall))
                else:
                    seen[wall] = idx
        return out

    def _wall_degree_vector(self, wall, b_p, b_q):
        # v_{b_p} + v_{b_q} = sum_{a in wall} gamma_a v_a  determines the
        # intersection degrees of the wall curve with every divisor.
        rhs = [Fraction(self.rays[b_p][i] + self.rays[b_q][i]) for i in range(self.dim)]
        rows = [[Fraction(self.rays[a][i]) for a in wall] for i in range(self.dim)]
        sol = linalg.solve_affine(rows, rhs)
        if sol is None:
            raise GeometryError("degenerate wall relation")
        gamma, _ = sol
        deg = [ZERO] * self.nrays
        deg[b_p] = ONE
        deg[b_q] = ONE
        for k, a in enumerate(wall):
            deg[a] = -gamma[k]
        return tuple(deg)

    def _build_curve_basis(self, walls):
        ray_matrix = [[self.rays[a][i] for a in range(self.nrays)]
                      for i in range(self.dim)]
        kernel = linalg.int_kernel_basis([[Fraction(v) for v in row]
                                          for row in ray_matrix])
        self.m = len(kernel)
        if self.m != self.nrays - self.dim:
            raise GeometryError("rays do not span the ambient lattice")
        wall_vecs = []
        for (ci, cj, wall) in walls:
            b_p = next(a for a in self.cones[ci] if a not in wall)
            b_q = next(a for a in self.cones[cj] if a not in wall)
            vec = self._wall_degree_vector(wall, b_p, b_q)
            if any(v.denominator != 1 for v in vec):
                raise GeometryError("wall curve class is not integral")
            wall_vecs.append(tuple(int(v) for v in vec))
        uniq = sorted(set(wall_vecs))
        for combo in itertools.combinations(uniq, self.m):
            if self._is_good_basis(combo, uniq, kernel):
                self.curve_basis = tuple(combo)
                return
        raise GeometryError("no curve-class basis with nonnegative balloon degrees")

    def _is_good_basis(self, combo, walls, kernel):
        rows = [[Fraction(v) for v in w] for w in combo]
        if linalg.rank(rows) != self.m:
            return False
        # every wall must be a nonnegative integer combination
        for w in walls:
            sol = linalg.solve_affine(
                [[Fraction(combo[j][a]) for j in range(self.m)]
                 for a in range(self.nrays)],
                [Fraction(v) for v in w])
            if sol is None:
                return False
            coords, _ = sol
            if any(c.denominator != 1 or c < 0 for c in coords):
                return False
        # the combo must generate the same lattice as the primitive kernel
        for k in kernel:
            sol = linalg.solve_affine(
                [[Fraction(combo[j][a]) for j in range(self.m)]
                 for a in range(self.nrays)],
                [Fraction(v) for v in k])
            if sol is None or any(c.denominator != 1 for c in sol[0]):
                return False
        return True

    def _in_curve_basis(self, deg_vec):
        sol = linalg.solve_affine(
            [[Fraction(self.curve_basis[j][a]) for j in range(self.m)]
             for a in range(self.nrays)],
            [Fraction(v) for v in deg_vec])
        if sol is None:
            raise GeometryError("curve class outside the chosen basis lattice")
        coords, _ = sol
        if any(c.denominator != 1 for c in coords):
            raise GeometryError("curve class is not integral in the chosen basis")
        return tuple(int(c) for c in coords)

    # -- normal form ---------------------------------------------------------

    def _face_monomials(self):
        faces = [set() for _ in range(self.dim + 1)]
        for cone in self.cones:
            for k in range(self.dim + 1):
                for sub in itertools.combinations(cone, k):
                    faces[k].add(sub)
        out = []
        for k in range(self.dim + 1):
            monos = []
            for sub in sorted(faces[k]):
                e = [0] * self.nrays
                for a in sub:
                    e[a] = 1
                monos.append(tuple(e))
            out.append(monos)
        return out

    def _loc_integral_mono(self, mono):
        acc = ZERO
        for p in self.fixed_points:
            val = ONE
            for a, e in enumerate(mono):
                if e:
                    v = p.divisor_values[a]
                    if not v:
                        val = ZERO
                        break
                    val *= v ** e
            if val:
                acc += val / p.euler
        return acc

    def _build_normal_form(self):
        total = 0
        for k in range(self.dim + 1):
            duals = self._faces[self.dim - k]
            cands = self._faces[k]
            pair_rows = []
            for mono in cands:
                pair_rows.append([self._loc_integral_mono(
                    tuple(a + b for a, b in zip(mono, dual))) for dual in duals])
            chosen = []
            chosen_rows = []
            for mono, row in zip(cands, pair_rows):
                if linalg.rank(chosen_rows + [row]) > len(chosen):
                    chosen.append(mono)
                    chosen_rows.append(row)
            self._basis[k] = chosen
            self._basis_solvers[k] = chosen_rows
            total += len(chosen)
        if total != len(self.cones):
            raise GeometryError("normal-form basis does not match the fan's "
                                "fixed-point count")

    def monomial_basis(self, k):
        if 0 <= k <= self.dim:
            return list(self._basis[k])
        return []

    def _reduce_monomial(self, mono):
        """Coordinates of a raw divisor monomial over the degree basis."""
        mono = tuple(mono)
        if mono in self._mono_cache:
            return self._mono_cache[mono]
        k = sum(mono)
        if k > self.dim:
            self._mono_cache[mono] = {}
            return {}
        if mono in self._basis[k]:
            out = {mono: ONE}
            self._mono_cache[mono] = out
            return out
        duals = self._faces[self.dim - k]
        rhs = [self._loc_integral_mono(tuple(a + b for a, b in zip(mono, dual)))
               for dual in duals]
        rows = [[self._basis_solvers[k][i][j] for i in range(len(self._basis[k]))]
                for j in range(len(duals))]
        sol = linalg.solve_affine(rows, rhs)
        if sol is None:
            raise GeometryError("monomial reduction failed (weights not generic?)")
        coords, null = sol
        if null:
            raise GeometryError("monomial reduction is underdetermined")
        out = {b: c for b, c in zip(self._basis[k], coords) if c}
        self._mono_cache[mono] = out
        return out

    def reduce_data(self, data):
        out = {}
        for mono, v in data.items():
            if not v:
                continue
            for b, c in self._reduce_monomial(mono).items():
                w = v * c
                if b in out:
                    out[b] = out[b] + w
                else:
                    out[b] = w
        return {m: v for m, v in out.items() if v}

    def integrate(self, c: CohClass):
        acc = ZERO
        for mono, v in c.c.items():
            if sum(mono) == self.dim:
                acc = acc + v * self._loc_integral_mono(mono)
        return acc


# ---------------------------------------------------------------------------
# Generic weight drawing
# ---------------------------------------------------------------------------

def _generic_ok(points: Sequence[FixedPoint], horizon: int) -> bool:
    for p in points:
        ws = p.tangent_weights
        if any(not w for w in ws):
            return False
        if len(set(ws)) != len(ws):
            return False
        ratios = {w / d for w in ws for d in range(1, horizon + 1)}
        if len(ratios) != len(ws) * horizon:
            return False
    return True


def build_geometry(spec: GeometrySpec, weight_seed: int, horizon: int = 2,
                   weights=None, retries: int = 64) -> Geometry:
    """Build a geometry with a generic rational weight assignment.

    The assignment is drawn deterministically from ``weight_seed`` and
    re-drawn until the genericity predicate holds (all tangent weights
    nonzero and pairwise distinct at every fixed point, and all ratios
    weight/delta for delta <= horizon pairwise distinct); a bounded number
    of retries is attempted before giving up.
    """
    spec.validate()
    rng = random.Random(weight_seed)

    def draw_product():
        return tuple(tuple(Fraction(v) for v in rng.sample(range(1, 40 * (n + 1)),
                                                           n + 1))
                     for n in spec.dims)

    def draw_toric(n):
        return tuple(Fraction(rng.randrange(1, 200) * rng.choice((1, -1)))
                     for _ in range(n))

    if spec.kind == "projective_product":
        for attempt in range(retries):
            ws = tuple(tuple(Fraction(w) for w in f) for f in weights) \
                if weights is not None else draw_product()
            g = ProductGeometry(spec.dims, ws, weight_seed, horizon)
            if _generic_ok(g.fixed_points, horizon):
                return g
            if weights is not None:
                raise GeometryError("supplied weights fail the genericity check")
        raise GeometryError("genericity check failed after bounded retries")
    else:
        n = len(spec.rays[0])
        for attempt in range(retries):
            xi = tuple(Fraction(v) for v in weights) if weights is not None \
                else draw_toric(n)
            try:
                g = ToricGeometry(spec.rays, spec.cones, xi, weight_seed, horizon)
            except GeometryError as exc:
                if "genericity" in str(exc) or "generic" in str(exc):
                    continue
                raise
            if _generic_ok(g.fixed_points, horizon):
                return g
            if weights is not None:
                raise GeometryError("supplied weights fail the genericity check")
        raise GeometryError("genericity check failed after bounded retries")


# Convenience specs ----------------------------------------------------------

def projective_space(n: int) -> GeometrySpec:
    return GeometrySpec(kind="projective_product", dims=(n,))


def projective_product(*dims: int) -> GeometrySpec:
    return GeometrySpec(kind="projective_product", dims=tuple(dims))


def toric_p2() -> GeometrySpec:
    return GeometrySpec(kind="toric",
                        rays=((1, 0), (0, 1), (-1, -1)),
                        cones=((0, 1), (1, 2), (0, 2)))


def toric_p1xp1() -> GeometrySpec:
    return GeometrySpec(kind="toric",
                        rays=((1, 0), (0, 1), (-1, 0), (0, -1)),
                        cones=((0, 1), (1, 2), (2, 3), (0, 3)))
