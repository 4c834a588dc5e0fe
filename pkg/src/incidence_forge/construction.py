"""The point set P and line set L on the quadric x1 = x2^2 + x3^2 - x4^2."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exact import canonicalize_many, ceil_bound, floor_bound, pow_bound_check, unique_rows
from .lineset import LineSet, line_header
from .pythagoras import PythTriple, enumerate_triples

# |t| <= 8k must keep x + t v inside P: legs reach 9k^(1+a), x4 reaches
# (1 + 8*sqrt 2) k^(1+a) < 13 k^(1+a), and x1 + t v1 reaches 65 k^(2+2a).
MIN_C_SMALL = 13
MIN_C_BIG = 65

DEFAULT_PAIR_CAP = 2_000_000_000


@dataclass(frozen=True)
class Profile:
    c_small: int
    c_big: int
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.c_small < 1 or self.c_big < 1:
            raise ValueError("profile coefficients must be positive")
        if self.strict and (self.c_small < MIN_C_SMALL or self.c_big < MIN_C_BIG):
            raise ValueError(
                f"profile ({self.c_small}, {self.c_big}) is below the minimum ({MIN_C_SMALL}, {MIN_C_BIG})"
            )

    @classmethod
    def parse(cls, text: str) -> "Profile":
        if text == "paper":
            return PAPER_PROFILE
        if text == "reduced":
            return REDUCED_PROFILE
        try:
            cs, cb = (int(x) for x in text.split(","))
        except ValueError:
            raise ValueError(f"profile must be 'paper', 'reduced' or 'cs,cb', got {text!r}") from None
        return cls(cs, cb)

    def __str__(self) -> str:
        return f"{self.c_small},{self.c_big}"


PAPER_PROFILE = Profile(100, 200)
REDUCED_PROFILE = Profile(13, 65)


def parse_alpha(text: str) -> tuple[int, int]:
    try:
        p, q = (int(x) for x in text.split("/"))
    except ValueError:
        raise ValueError(f"alpha must look like p/q, got {text!r}") from None
    if q == 0:
        raise ValueError("alpha denominator must be nonzero")
    if p <= 0 or q < 0:
        raise ValueError("alpha must be positive")
    g = math.gcd(p, q)
    return p // g, q // g


@dataclass(frozen=True)
class ConstructionParams:
    k: int
    p: int
    q: int
    profile: Profile = REDUCED_PROFILE
    pair_cap: int = DEFAULT_PAIR_CAP

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.p < 1 or self.q < 1:
            raise ValueError("alpha = p/q must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"alpha {self.p}/{self.q} is not in lowest terms")
        if self.pair_cap < 1:
            raise ValueError("pair cap must be positive")

    @property
    def alpha(self) -> float:
        return self.p / self.q

    def _floor(self, c, u, w):
        return floor_bound(c, u, w, self.k, self.p, self.q)

    def _ceil(self, c, u, w):
        return ceil_bound(c, u, w, self.k, self.p, self.q)

    # box of P
    @cached_property
    def point_x1_max(self) -> int:
        return self._floor(self.profile.c_big, 2, 2)

    @cached_property
    def point_xi_max(self) -> int:
        return self._floor(self.profile.c_small, 1, 1)

    # box for base points of L
    @cached_property
    def base_x1_max(self) -> int:
        return self._floor(1, 2, 2)

    @cached_property
    def base_xi_max(self) -> int:
        return self._floor(1, 1, 1)

    # direction constraints of L
    @cached_property
    def leg_max(self) -> int:
        return self._floor(1, 0, 1)

    @cached_property
    def hyp_min_doubled(self) -> int:
        return self._ceil(1, 0, 1)

    @cached_property
    def v1_min(self) -> int:
        # 4|v1| >= k^(1+2a)
        return -(-self._ceil(1, 1, 2) // 4)

    @cached_property
    def v1_max(self) -> int:
        return self._floor(8, 1, 2)

    @cached_property
    def point_bounds(self) -> tuple:
        return (self.point_x1_max,) + (self.point_xi_max,) * 3

    def header(self) -> str:
        return line_header(self.k, self.p, self.q, self.profile.c_small, self.profile.c_big)


def on_surface(x) -> bool:
    return x[0] == x[1] ** 2 + x[2] ** 2 - x[3] ** 2


def point_in_P(x, params: ConstructionParams) -> bool:
    k, p, q = params.k, params.p, params.q
    prof = params.profile
    return (
        on_surface(x)
        and pow_bound_check(x[0], prof.c_big, 2, 2, k, p, q, "<=")
        and all(pow_bound_check(xi, prof.c_small, 1, 1, k, p, q, "<=") for xi in x[1:])
    )


def _isqrt_array(n: np.ndarray) -> np.ndarray:
    """Exact floor square root of a non-negative int64 array below 2**52."""
    r = np.floor(np.sqrt(n.astype(np.float64))).astype(np.int64)
    r = np.where(r * r > n, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= n, r + 1, r)
    return r


def count_points(params: ConstructionParams, free_axis: int = 2) -> int:
    """|P| by interval counting along one leg coordinate.

    For fixed values of the other two small coordinates, the admissible
    values of the free leg form at most two symmetric integer intervals.
    ``free_axis`` picks which leg (2 or 3) is solved for; S is symmetric
    in the legs, so both give the same count.
    """
    if free_axis not in (2, 3):
        raise ValueError("free_axis must be 2 or 3")
    A, B = params.point_xi_max, params.point_x1_max
    if B + 2 * A * A >= 2**52:
        return _count_points_exact(A, B)
    a = np.arange(A + 1, dtype=np.int64)
    sq = a * a
    weight = np.where(a == 0, 1, 2)
    total = 0
    # the free leg's partner leg runs over rows, x4 over columns
    for i in range(A + 1):
        c = sq[i] - sq  # partner^2 - x4^2
        hi = B - c
        lo = -B - c
        top = np.minimum(A, _isqrt_array(np.maximum(hi, 0)))
        bottom = np.where(lo > 0, _isqrt_array(np.maximum(lo - 1, 0)) + 1, 0)
        cnt = np.where(hi < 0, 0, np.where(bottom > top, 0, np.where(bottom == 0, 2 * top + 1, 2 * (top - bottom + 1))))
        total += int(weight[i]) * int(np.dot(weight, cnt))
    return total


def _count_points_exact(A: int, B: int) -> int:
    total = 0
    for u in range(A + 1):
        for w in range(A + 1):
            c = u * u - w * w
            hi, lo = B - c, -B - c
            if hi < 0:
                continue
            top = min(A, math.isqrt(hi))
            bottom = math.isqrt(lo - 1) + 1 if lo > 0 else 0
            if bottom > top:
                continue
            cnt = 2 * top + 1 if bottom == 0 else 2 * (top - bottom + 1)
            total += (1 if u == 0 else 2) * (1 if w == 0 else 2) * cnt
    return total


def line_constraints_check(x, v, params: ConstructionParams) -> bool:
    """Membership test for a (base point, direction) pair generating a line of L."""
    k, p, q = params.k, params.p, params.q
    x1, x2, x3, x4 = x
    v1, v2, v3, v4 = v
    return (
        on_surface(x)
        and pow_bound_check(x1, 1, 2, 2, k, p, q, "<=")
        and all(pow_bound_check(c, 1, 1, 1, k, p, q, "<=") for c in (x2, x3, x4))
        and v4 * v4 == v2 * v2 + v3 * v3
        and v1 == 2 * x2 * v2 + 2 * x3 * v3 - 2 * x4 * v4
        and math.gcd(v2, v3, v4) == 1
        and pow_bound_check(2 * v4, 1, 0, 1, k, p, q, ">=")
        and pow_bound_check(v2, 1, 0, 1, k, p, q, "<=")
        and pow_bound_check(v3, 1, 0, 1, k, p, q, "<=")
        and pow_bound_check(4 * v1, 1, 1, 2, k, p, q, ">=")
        and pow_bound_check(v1, 8, 1, 2, k, p, q, "<=")
    )


def _base_grid(params: ConstructionParams) -> np.ndarray:
    K, X1 = params.base_xi_max, params.base_x1_max
    r = np.arange(-K, K + 1, dtype=np.int64)
    rows = []
    for x4 in r:
        x2, x3 = np.meshgrid(r, r, indexing="ij")
        x2, x3 = x2.ravel(), x3.ravel()
        x1 = x2 * x2 + x3 * x3 - x4 * x4
        keep = np.abs(x1) <= X1
        rows.append(np.stack([x1[keep], x2[keep], x3[keep], np.full(int(keep.sum()), x4)], axis=1))
    return np.concatenate(rows) if rows else np.zeros((0, 4), dtype=np.int64)


def _lines_for_triple(params: ConstructionParams, t: PythTriple, grid: np.ndarray | None = None) -> np.ndarray:
    if grid is None:
        grid = _base_grid(params)
    a, b, c = t
    v1 = 2 * (grid[:, 1] * a + grid[:, 2] * b - grid[:, 3] * c)
    av = np.abs(v1)
    keep = (av >= params.v1_min) & (av <= params.v1_max)
    X = grid[keep]
    V = np.empty_like(X)
    V[:, 0] = v1[keep]
    V[:, 1:] = (a, b, c)
    return unique_rows(canonicalize_many(X, V))


def _check_magnitudes(params: ConstructionParams):
    K = params.base_xi_max
    if 3 * K * K + params.v1_max * (params.base_x1_max // max(params.v1_min, 1) + 2) >= 2**62:
        raise OverflowError("parameters exceed the int64 generation path")


def enumerate_lines(params: ConstructionParams, workers: int = 1) -> LineSet:
    """The deduplicated, sorted line set L.

    A triple t and its negation -t generate the same lines, so only triples
    with v4 > 0 are expanded.  Lines from different such triples have
    different (v2, v3, v4) directions and cannot collide.
    """
    _check_magnitudes(params)
    triples = [t for t in enumerate_triples(params.leg_max, params.hyp_min_doubled) if t.v4 > 0]
    if not triples:
        return LineSet(np.zeros((0, 8), dtype=np.int64), _trusted=True)
    if workers > 1 and len(triples) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_lines_for_triple, [params] * len(triples), triples))
    else:
        grid = _base_grid(params)
        parts = [_lines_for_triple(params, t, grid) for t in triples]
    return LineSet(unique_rows(np.concatenate(parts)), _trusted=True)


def surface_line_mask(rows: np.ndarray) -> np.ndarray:
    """True for rows ``base | dir`` whose whole line lies on S."""
    b, d = rows[:, :4], rows[:, 4:]
    return (
        (b[:, 0] == b[:, 1] ** 2 + b[:, 2] ** 2 - b[:, 3] ** 2)
        & (d[:, 3] ** 2 == d[:, 1] ** 2 + d[:, 2] ** 2)
        & (d[:, 0] == 2 * (b[:, 1] * d[:, 1] + b[:, 2] * d[:, 2] - b[:, 3] * d[:, 3]))
    )
