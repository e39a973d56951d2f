"""Dense exact linear algebra over the rationals.

Small matrices only; everything is Fraction-based Gaussian elimination.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

ZERO = Fraction(0)
ONE = Fraction(1)


def rref(rows: Sequence[Sequence[Fraction]]) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form; returns (matrix, pivot column indices)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(m)):
            if m[i][c]:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = ONE / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def solve_affine(rows: Sequence[Sequence[Fraction]],
                 rhs: Sequence[Fraction]):
    """Solve A x = b exactly.

    Returns (particular_solution, nullspace_basis) or None when the system is
    inconsistent.  The particular solution is the reduced-echelon
    representative (free variables set to zero).
    """
    if not rows:
        return [], []
    ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    m, pivots = rref(aug)
    for row in m:
        if not any(row[:ncols]) and row[ncols]:
            return None
    sol = [ZERO] * ncols
    real_pivots = [c for c in pivots if c < ncols]
    for i, c in enumerate(real_pivots):
        sol[c] = m[i][ncols]
    free = [c for c in range(ncols) if c not in real_pivots]
    null = []
    for fc in free:
        vec = [ZERO] * ncols
        vec[fc] = ONE
        for i, c in enumerate(real_pivots):
            vec[c] = -m[i][fc]
        null.append(vec)
    return sol, null


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    _, pivots = rref(rows)
    return len(pivots)


def mat_inverse(rows: Sequence[Sequence[Fraction]]) -> Optional[List[List[Fraction]]]:
    n = len(rows)
    aug = [list(map(Fraction, rows[i])) + [ONE if j == i else ZERO for j in range(n)]
           for i in range(n)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        return None
    return [row[n:] for row in m[:n]]


def det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(map(Fraction, r)) for r in rows]
    n = len(m)
    result = ONE
    for c in range(n):
        pr = None
        for i in range(c, n):
            if m[i][c]:
                pr = i
                break
        if pr is None:
            return ZERO
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            result = -result
        result *= m[c][c]
        inv = ONE / m[c][c]
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return result


def int_kernel_basis(rows: Sequence[Sequence[int]]) -> List[List[int]]:
    """Basis of the rational kernel of an integer matrix, scaled to primitive
    integer vectors."""
    from math import gcd

    m, pivots = rref(rows)
    ncols = len(rows[0]) if rows else 0
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [ZERO] * ncols
        vec[fc] = ONE
        for i, c in enumerate(pivots):
            vec[c] = -m[i][fc]
        denom = 1
        for v in vec:
            denom = denom * v.denominator // gcd(denom, v.denominator)
        ints = [int(v * denom) for v in vec]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        if g > 1:
            ints = [v // g for v in ints]
        basis.append(ints)
    return basis
