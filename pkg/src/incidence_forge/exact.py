"""Exact integer geometry in Z^4.

Scalar routines work on plain tuples of Python ints.  The ``*_many`` kernels
are numpy versions used by the bulk passes; they check magnitudes before
multiplying and switch to object arrays (Python ints) when int64 could
overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

IntVec4 = Tuple[int, int, int, int]

# products below this stay exact in int64
_INT64_SAFE = 2**62


class GeometryError(ValueError):
    """Raised on degenerate or contract-violating geometric input."""


@dataclass(frozen=True, order=True)
class CanonicalLine:
    base: tuple
    dir: tuple

    def point(self, t: int) -> tuple:
        return tuple(b + t * d for b, d in zip(self.base, self.dir))

    def as_row(self) -> tuple:
        return tuple(self.base) + tuple(self.dir)


@dataclass(frozen=True, order=True)
class TwoFlatKey:
    """Reduced echelon direction pair plus the pivot-zeroed base point.

    The base point is ``base_num / base_den`` with ``base_den > 0`` and the
    fraction fully reduced.
    """

    dirbasis: tuple
    base_num: tuple
    base_den: int


@dataclass(frozen=True, order=True)
class HyperplaneKey:
    normal: tuple
    offset: int


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def sub(u: Sequence[int], v: Sequence[int]) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def primitive_normalize(v: Sequence[int]) -> tuple:
    """Divide by the content and make the first nonzero entry positive."""
    g = math.gcd(*v)
    if g == 0:
        raise GeometryError("degenerate direction")
    lead = next(x for x in v if x != 0)
    if lead < 0:
        g = -g
    return tuple(x // g for x in v)


def _det3(m) -> int:
    (a, b, c), (d, e, f), (g, h, i) = m
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def cross4(u: Sequence[int], v: Sequence[int], w: Sequence[int]) -> tuple:
    """Signed cofactor vector c with c . x = det[u; v; w; x]."""
    out = []
    for i in range(4):
        cols = [j for j in range(4) if j != i]
        minor = [[r[j] for j in cols] for r in (u, v, w)]
        sign = 1 if (i + 3) % 2 == 0 else -1
        out.append(sign * _det3(minor))
    return tuple(out)


def rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    r = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == nrows:
            break
    return r


def affine_rank3(a: Sequence[int], b: Sequence[int], c: Sequence[int]) -> int:
    return rank([a, b, c])


def canonicalize_line(base: Sequence[int], dir: Sequence[int]) -> CanonicalLine:
    d = primitive_normalize(dir)
    j = next(i for i, x in enumerate(d) if x != 0)
    t = base[j] // d[j]
    return CanonicalLine(tuple(b - t * x for b, x in zip(base, d)), d)


def coplanar(l1: CanonicalLine, l2: CanonicalLine) -> bool:
    if l1 == l2:
        raise GeometryError("duplicate line")
    return affine_rank3(l1.dir, l2.dir, sub(l2.base, l1.base)) <= 2


def _rref(rows):
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    m = [[Fraction(x) for x in r] for r in rows]
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _clear_fractions(row) -> tuple:
    den = math.lcm(*(x.denominator for x in row))
    ints = [int(x * den) for x in row]
    return primitive_normalize(ints)


def two_flat_key(l1: CanonicalLine, l2: CanonicalLine) -> TwoFlatKey:
    if not coplanar(l1, l2):
        raise GeometryError("lines are not coplanar")
    rows, pivots = _rref([l1.dir, l2.dir, sub(l2.base, l1.base)])
    # zero the pivot coordinates of the base point using the unit-pivot rows
    p = [Fraction(x) for x in l1.base]
    for row, c in zip(rows, pivots):
        f = p[c]
        p = [a - f * b for a, b in zip(p, row)]
    den = math.lcm(*(x.denominator for x in p))
    num = [int(x * den) for x in p]
    g = math.gcd(den, *num)
    return TwoFlatKey(
        tuple(_clear_fractions(r) for r in rows),
        tuple(x // g for x in num),
        den // g,
    )


def hyperplane_span_key(l1: CanonicalLine, l2: CanonicalLine) -> HyperplaneKey | None:
    if l1 == l2:
        raise GeometryError("duplicate line")
    c = cross4(l1.dir, l2.dir, sub(l2.base, l1.base))
    if not any(c):
        return None
    normal = primitive_normalize(c)
    return HyperplaneKey(normal, dot(normal, l1.base))


def line_in_hyperplane(line: CanonicalLine, h: HyperplaneKey) -> bool:
    return dot(h.normal, line.dir) == 0 and dot(h.normal, line.base) == h.offset


# --- exact power thresholds -------------------------------------------------

def iroot(n: int, q: int) -> int:
    """Largest integer r >= 0 with r**q <= n."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if q == 1 or n < 2:
        return n
    if q == 2:
        return math.isqrt(n)
    r = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        s = ((q - 1) * r + n // r ** (q - 1)) // q
        if s >= r:
            break
        r = s
    while r**q > n:
        r -= 1
    while (r + 1) ** q <= n:
        r += 1
    return r


def iroot_ceil(n: int, q: int) -> int:
    """Smallest integer r >= 0 with r**q >= n."""
    r = iroot(n, q)
    return r if r**q == n else r + 1


def pow_bound_check(x: int, c: int, u: int, w: int, k: int, p: int, q: int, sense: str) -> bool:
    """Decide |x| <= c*k**(u + w*p/q) (or >=) without leaving the integers."""
    lhs = abs(x) ** q
    rhs = c**q * k ** (u * q + w * p)
    if sense == "<=":
        return lhs <= rhs
    if sense == ">=":
        return lhs >= rhs
    raise ValueError(f"unknown comparison {sense!r}")


def floor_bound(c: int, u: int, w: int, k: int, p: int, q: int) -> int:
    """Largest integer a with a <= c*k**(u + w*p/q)."""
    return iroot(c**q * k ** (u * q + w * p), q)


def ceil_bound(c: int, u: int, w: int, k: int, p: int, q: int) -> int:
    """Smallest integer a with a >= c*k**(u + w*p/q)."""
    return iroot_ceil(c**q * k ** (u * q + w * p), q)


# --- numpy kernels ----------------------------------------------------------

def _maxabs(*arrays) -> int:
    m = 0
    for a in arrays:
        if a.size:
            m = max(m, int(np.max(np.abs(a.astype(object) if a.dtype == object else a))))
    return m


def as_exact(a: np.ndarray) -> np.ndarray:
    return a.astype(object)


def cross4_many(U: np.ndarray, V: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Row-wise cross4 for (N, 4) arrays (broadcasting allowed)."""
    U, V, W = np.broadcast_arrays(U, V, W)
    if U.dtype != object and 6 * _maxabs(U) * _maxabs(V) * _maxabs(W) >= _INT64_SAFE:
        U, V, W = as_exact(U), as_exact(V), as_exact(W)

    def m2(i, j):
        # 2x2 minors of rows V, W on columns i, j
        return V[:, i] * W[:, j] - V[:, j] * W[:, i]

    m01, m02, m03 = m2(0, 1), m2(0, 2), m2(0, 3)
    m12, m13, m23 = m2(1, 2), m2(1, 3), m2(2, 3)
    c0 = -(U[:, 1] * m23 - U[:, 2] * m13 + U[:, 3] * m12)
    c1 = U[:, 0] * m23 - U[:, 2] * m03 + U[:, 3] * m02
    c2 = -(U[:, 0] * m13 - U[:, 1] * m03 + U[:, 3] * m01)
    c3 = U[:, 0] * m12 - U[:, 1] * m02 + U[:, 2] * m01
    return np.stack([c0, c1, c2, c3], axis=1)


def cross3_many(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    U, V = np.broadcast_arrays(U, V)
    if U.dtype != object and 2 * _maxabs(U) * _maxabs(V) >= _INT64_SAFE:
        U, V = as_exact(U), as_exact(V)
    return np.stack(
        [
            U[:, 1] * V[:, 2] - U[:, 2] * V[:, 1],
            U[:, 2] * V[:, 0] - U[:, 0] * V[:, 2],
            U[:, 0] * V[:, 1] - U[:, 1] * V[:, 0],
        ],
        axis=1,
    )


_gcd_obj = np.frompyfunc(math.gcd, 2, 1)


def row_gcd(A: np.ndarray) -> np.ndarray:
    if A.dtype == object:
        g = A[:, 0]
        for j in range(1, A.shape[1]):
            g = _gcd_obj(g, A[:, j])
        return g
    return np.gcd.reduce(A, axis=1)


def normalize_rows(A: np.ndarray) -> np.ndarray:
    """Primitive, first-nonzero-positive version of each nonzero row.

    Zero rows are returned unchanged.
    """
    if len(A) == 0:
        return A.copy()
    g = row_gcd(A)
    nz = A != 0
    first = np.argmax(nz, axis=1)
    lead = A[np.arange(len(A)), first]
    sign = np.where(lead < 0, -1, 1)
    g = np.where(g == 0, 1, g) * sign
    return A // g[:, None]


def canonicalize_many(base: np.ndarray, dir: np.ndarray) -> np.ndarray:
    """Row-wise canonicalize_line; returns (N, 2*dim) rows ``base | dir``."""
    d = normalize_rows(dir)
    if len(d) and not np.all(np.any(d != 0, axis=1)):
        raise GeometryError("degenerate direction")
    j = np.argmax(d != 0, axis=1)
    idx = np.arange(len(d))
    t = base[idx, j] // d[idx, j]
    return np.concatenate([base - t[:, None] * d, d], axis=1)


def unique_rows(A: np.ndarray, return_counts: bool = False):
    """Lexicographically sorted unique rows of a 2-D integer array."""
    if A.dtype == object:
        rows = sorted(set(map(tuple, A.tolist())))
        if return_counts:
            from collections import Counter

            cnt = Counter(map(tuple, A.tolist()))
            return np.array(rows, dtype=object).reshape(-1, A.shape[1]), np.array([cnt[r] for r in rows])
        return np.array(rows, dtype=object).reshape(-1, A.shape[1])
    if len(A) == 0:
        out = A.reshape(0, A.shape[1])
        return (out, np.zeros(0, dtype=np.int64)) if return_counts else out
    order = np.lexsort(A.T[::-1])
    S = A[order]
    keep = np.ones(len(S), dtype=bool)
    keep[1:] = np.any(S[1:] != S[:-1], axis=1)
    U = S[keep]
    if return_counts:
        starts = np.flatnonzero(keep)
        counts = np.diff(np.append(starts, len(S)))
        return U, counts
    return U


def group_ids(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer group id per row of A (ids follow sorted unique-row order).

    Returns (ids, unique_rows).
    """
    if len(A) == 0:
        return np.zeros(0, dtype=np.int64), A.reshape(0, A.shape[1])
    if A.dtype == object:
        rows = sorted(set(map(tuple, A.tolist())))
        pos = {r: i for i, r in enumerate(rows)}
        ids = np.array([pos[tuple(r)] for r in A.tolist()], dtype=np.int64)
        return ids, np.array(rows, dtype=object)
    order = np.lexsort(A.T[::-1])
    S = A[order]
    new = np.ones(len(S), dtype=bool)
    new[1:] = np.any(S[1:] != S[:-1], axis=1)
    gid_sorted = np.cumsum(new) - 1
    ids = np.empty(len(A), dtype=np.int64)
    ids[order] = gid_sorted
    return ids, S[new]
