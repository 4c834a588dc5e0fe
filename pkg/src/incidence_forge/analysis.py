"""Incidence counts between P and L, and the assembled run statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .construction import ConstructionParams, count_points, point_in_P
from .exact import CanonicalLine
from .lineset import LineSet

EMPTY_INTERVAL = (1, 0)
ORACLE_BUDGET = 10**7


class OracleBudgetError(RuntimeError):
    pass


def _floordiv(a: int, b: int) -> int:
    return a // b


def _ceildiv(a: int, b: int) -> int:
    return -((-a) // b)


def per_line_t_interval(line: CanonicalLine, params: ConstructionParams) -> tuple[int, int]:
    """Integers t with base + t*dir in P, as a closed interval.

    The line is assumed to lie on S, so only the box bounds matter.
    """
    lo, hi = None, None
    for b, d, bound in zip(line.base, line.dir, params.point_bounds):
        if d == 0:
            if abs(b) > bound:
                return EMPTY_INTERVAL
            continue
        if d < 0:
            b, d = -b, -d
        a, c = _ceildiv(-bound - b, d), _floordiv(bound - b, d)
        lo = a if lo is None else max(lo, a)
        hi = c if hi is None else min(hi, c)
    if lo is None or lo > hi:
        # a line with zero direction cannot occur; every direction has d != 0 somewhere
        return EMPTY_INTERVAL
    return lo, hi


def t_intervals(lines: LineSet, params: ConstructionParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized per_line_t_interval; empty intervals come back as (1, 0)."""
    n = len(lines)
    lo = np.full(n, np.iinfo(np.int64).min // 4, dtype=np.int64)
    hi = np.full(n, np.iinfo(np.int64).max // 4, dtype=np.int64)
    empty = np.zeros(n, dtype=bool)
    B, D = lines.base, lines.dir
    for i, bound in enumerate(params.point_bounds):
        b, d = B[:, i], D[:, i]
        zero = d == 0
        empty |= zero & (np.abs(b) > bound)
        sgn = np.where(d < 0, -1, 1)
        bb, dd = b * sgn, np.where(zero, 1, d * sgn)
        a = -((bound + bb) // dd)
        c = (bound - bb) // dd
        lo = np.where(zero, lo, np.maximum(lo, a))
        hi = np.where(zero, hi, np.minimum(hi, c))
    empty |= lo > hi
    lo = np.where(empty, 1, lo)
    hi = np.where(empty, 0, hi)
    return lo, hi


def incidences_fast(lines: LineSet, params: ConstructionParams) -> tuple[int, np.ndarray]:
    if len(lines) == 0:
        return 0, np.zeros(0, dtype=np.int64)
    lo, hi = t_intervals(lines, params)
    counts = hi - lo + 1
    return int(counts.sum()), counts


def oracle_t_range(params: ConstructionParams) -> int:
    return 4 * (params.profile.c_big + 1) * params.k + 8 * params.k


def incidences_oracle(lines: LineSet, params: ConstructionParams, *, per_line: bool = False):
    """Brute force: walk every t in a superset range and test membership pointwise.

    Membership uses on-surface and box tests on the actual lattice points;
    nothing is solved for t.  The box limits are the same exact integer
    thresholds that point_in_P decides.
    """
    n = len(lines)
    if n * params.k > ORACLE_BUDGET:
        raise OracleBudgetError(f"oracle budget: n*k = {n * params.k} exceeds {ORACLE_BUDGET}")
    T = oracle_t_range(params)
    ts = np.arange(-T, T + 1, dtype=np.int64)
    X1, Xi = params.point_x1_max, params.point_xi_max
    counts = np.zeros(n, dtype=np.int64)
    chunk = max(1, 2_000_000 // len(ts))
    for s in range(0, n, chunk):
        B = lines.base[s : s + chunk, None, :]
        D = lines.dir[s : s + chunk, None, :]
        pts = B + ts[None, :, None] * D
        x1, x2, x3, x4 = pts[..., 0], pts[..., 1], pts[..., 2], pts[..., 3]
        inside = (
            (x1 == x2 * x2 + x3 * x3 - x4 * x4)
            & (np.abs(x1) <= X1)
            & (np.abs(x2) <= Xi)
            & (np.abs(x3) <= Xi)
            & (np.abs(x4) <= Xi)
        )
        counts[s : s + chunk] = inside.sum(axis=1)
    total = int(counts.sum())
    return (total, counts) if per_line else total


def incidences_scalar(lines, params: ConstructionParams) -> int:
    """Slowest reference: per-point point_in_P over the oracle t range."""
    T = oracle_t_range(params)
    return sum(point_in_P(l.point(t), params) for l in lines for t in range(-T, T + 1))


def incidence_band(params: ConstructionParams) -> tuple[int, int]:
    k = params.k
    return 16 * k + 1, 8 * (params.profile.c_big + 1) * k + 8 * k + 1


def _ratio(value, k: int, num: int, den: int):
    if value is None:
        return None
    x = value / k ** (num / den)
    return float(f"{x:.6g}")


@dataclass
class RunStats:
    k: int
    p: int
    q: int
    profile: str
    m: int
    n: int
    I: int
    s: int | None
    q_rich: int | None
    oracle_checked: bool = False
    ratios: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "alphaNum": self.p,
            "alphaDen": self.q,
            "profile": self.profile,
            "m": self.m,
            "n": self.n,
            "I": self.I,
            "s": self.s,
            "q": self.q_rich,
            "ratios": dict(self.ratios),
            "oracleChecked": self.oracle_checked,
        }

    @classmethod
    def from_json(cls, d: dict) -> "RunStats":
        return cls(
            k=d["k"], p=d["alphaNum"], q=d["alphaDen"], profile=d["profile"],
            m=d["m"], n=d["n"], I=d["I"], s=d["s"], q_rich=d["q"],
            oracle_checked=d["oracleChecked"], ratios=dict(d["ratios"]),
        )


def stats_ratios(k: int, p: int, q: int, m, n, I, q_rich) -> dict:
    return {
        "m": _ratio(m, k, 3 * q + 3 * p, q),
        "n": _ratio(n, k, 2 * q + 4 * p, q),
        "I": _ratio(I, k, 3 * q + 4 * p, q),
        "q": _ratio(q_rich, k, q + 3 * p, q),
    }


def compute_stats(params: ConstructionParams, lines: LineSet, *, oracle: bool = False, richness: bool = True) -> RunStats:
    """m, n, I, s, q and the normalized ratios for one run.

    With ``oracle=True`` the incidence count is recomputed by brute force
    and a mismatch raises.  Richness fields are None when skipped or when
    the exact computation does not fit the pair budget.
    """
    from .richness import hyperplane_richness_auto, two_flat_richness_auto

    m = count_points(params)
    n = len(lines)
    I, _ = incidences_fast(lines, params)
    if oracle:
        I_or = incidences_oracle(lines, params)
        if I_or != I:
            raise AssertionError(f"incidence mismatch: fast {I} vs oracle {I_or}")
    s = q_rich = None
    if richness:
        flat = two_flat_richness_auto(lines, params.pair_cap)
        s = flat.s if flat is not None else None
        hyp = hyperplane_richness_auto(lines, params.pair_cap)
        q_rich = hyp.q if hyp is not None else None
    return RunStats(
        k=params.k, p=params.p, q=params.q, profile=str(params.profile),
        m=m, n=n, I=I, s=s, q_rich=q_rich, oracle_checked=oracle,
        ratios=stats_ratios(params.k, params.p, params.q, m, n, I, q_rich),
    )

