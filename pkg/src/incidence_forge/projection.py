"""Generic linear projection of a 4D configuration to R^3, with verification.

A map is a random integer 3x4 matrix.  It is accepted only after checking
that the projected configuration keeps the line count, the incidence count
(per line) and the maximum number of lines in a common plane.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import t_intervals
from .construction import ConstructionParams
from .exact import GeometryError, as_exact, canonicalize_many, cross3_many, group_ids, normalize_rows, rank, unique_rows
from .lineset import LineSet, format_lines
from .richness import FlatRichness, PairBudgetError, _flats_from_pairs, _histogram, pair_count, two_flat_richness

COEFF_MAX = 10**6
SAMPLE_ATTEMPTS = 100
MAX_MAPS = 20


class ProjectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProjectionMap:
    rows: tuple
    seed: int = 0
    attempt: int = 0

    def __post_init__(self):
        if len(self.rows) != 3 or any(len(r) != 4 for r in self.rows):
            raise ValueError("a projection map has three rows of length 4")
        if rank(self.rows) != 3:
            raise GeometryError("projection rows are linearly dependent")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64)


def sample_projection(seed: int, attempt: int = 0) -> ProjectionMap:
    """Random map with entries uniform in [-10^6, 10^6].

    The generator is numpy's PCG64 seeded from (seed, attempt), so a given
    pair always yields the same map.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, attempt])))
    for _ in range(SAMPLE_ATTEMPTS):
        M = rng.integers(-COEFF_MAX, COEFF_MAX, size=(3, 4), endpoint=True)
        rows = tuple(tuple(int(x) for x in r) for r in M)
        if rank(rows) == 3:
            return ProjectionMap(rows, seed, attempt)
    raise ProjectionError("could not sample independent rows")


def _apply(M: np.ndarray, X: np.ndarray) -> np.ndarray:
    if X.dtype == object or int(np.abs(M).max()) * 4 * max(int(np.abs(X).max()) if X.size else 0, 1) >= 2**62:
        return as_exact(X) @ as_exact(M).T
    return X @ M.T


def project_lines(lines: LineSet, pmap: ProjectionMap) -> np.ndarray:
    """Canonical 3D rows ``base | dir``, in input order."""
    if len(lines) == 0:
        return np.zeros((0, 6), dtype=np.int64)
    M = pmap.matrix
    D = _apply(M, lines.dir)
    if np.any(np.all(D == 0, axis=1)):
        raise GeometryError("degenerate projection")
    return canonicalize_many(_apply(M, lines.base), D)


# --- 3D measurements ----------------------------------------------------------


def _rows_in(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Mask of rows of A that occur in B."""
    if len(A) == 0:
        return np.zeros(0, dtype=bool)
    if len(B) == 0:
        return np.zeros(len(A), dtype=bool)
    both = np.concatenate([unique_rows(B), A]) if A.dtype == B.dtype else np.concatenate([as_exact(unique_rows(B)), as_exact(A)])
    gid, _ = group_ids(both)
    nb = len(unique_rows(B))
    present = np.zeros(gid.max() + 1, dtype=bool)
    present[gid[:nb]] = True
    return present[gid[nb:]]


def incident_points(lines: LineSet, params: ConstructionParams):
    """Incident lattice points of each line, as (line index, point) arrays."""
    lo, hi = t_intervals(lines, params)
    cnt = np.maximum(hi - lo + 1, 0)
    owner = np.repeat(np.arange(len(lines)), cnt)
    offs = np.arange(int(cnt.sum())) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    t = lo[owner] + offs
    pts = lines.base[owner] + t[:, None] * lines.dir[owner]
    return owner, pts


def incidences_3d(lines3: np.ndarray, points3: np.ndarray) -> np.ndarray:
    """Number of the given distinct points on each canonical 3D line."""
    out = np.zeros(len(lines3), dtype=np.int64)
    if len(lines3) == 0 or len(points3) == 0:
        return out
    dgid, dirs = group_ids(lines3[:, 3:])
    for g in range(len(dirs)):
        idx = np.flatnonzero(dgid == g)
        d = np.broadcast_to(dirs[g], points3.shape)
        through = canonicalize_many(points3, d)[:, :3]
        hits = through[_rows_in(through, lines3[idx, :3])]
        keys, c = unique_rows(hits, return_counts=True)
        if len(keys):
            pos = {tuple(r): i for r, i in zip(lines3[idx, :3].tolist(), idx)}
            for r, x in zip(keys.tolist(), c.tolist()):
                out[pos[tuple(r)]] = x
    return out


def plane_richness_3d(lines3: np.ndarray, pair_cap: int = 2_000_000_000) -> FlatRichness:
    """Maximum number of 3D lines in one plane, from all coplanar pairs."""
    n = len(lines3)
    if pair_count(n) > pair_cap:
        raise PairBudgetError(f"pair budget exceeded: n={n} needs {pair_count(n)} pairs, cap {pair_cap}")
    B, D = as_exact(lines3[:, :3]), as_exact(lines3[:, 3:])
    I, J, K = [], [], []
    for i in range(n - 1):
        d2, w = D[i + 1 :], B[i + 1 :] - B[i]
        c = cross3_many(np.broadcast_to(D[i], d2.shape), d2)
        det = (c * w).sum(axis=1)
        hit = np.flatnonzero(det == 0)
        if not len(hit):
            continue
        par = np.all(c[hit] == 0, axis=1)
        alt = cross3_many(np.broadcast_to(D[i], (len(hit), 3)), w[hit])
        N = normalize_rows(np.where(par[:, None], alt, c[hit]))
        off = (N * B[i]).sum(axis=1)
        K.append(np.concatenate([N, off[:, None]], axis=1))
        I.append(np.full(len(hit), i))
        J.append(hit + i + 1)
    if not K:
        return FlatRichness(min(n, 1), {}, [], "pairs3", pair_count(n))
    I, J, keys = np.concatenate(I), np.concatenate(J), np.concatenate(K)
    _, r = _flats_from_pairs(I, J, keys)
    return FlatRichness(int(r.max()), _histogram(r), [], "pairs3", pair_count(n))


# --- verification ----------------------------------------------------------------


@dataclass
class ProjectionReport:
    ok: bool
    seed: int
    attempt: int
    rows: tuple
    n: int
    n3: int
    I: int
    I3: int
    points: int
    points3: int
    s: int
    s3: int | None
    counts_match: bool
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "seed": self.seed,
            "attempt": self.attempt,
            "map": [list(r) for r in self.rows],
            "n": self.n,
            "n3": self.n3,
            "I": self.I,
            "I3": self.I3,
            "points": self.points,
            "points3": self.points3,
            "s": self.s,
            "s3": self.s3,
            "perLineCountsMatch": self.counts_match,
            "failedAttempts": self.failures,
        }


def verify_projection(lines: LineSet, params: ConstructionParams, pmap: ProjectionMap, s4: int | None = None) -> ProjectionReport:
    """Check one map: n, I, per-line counts, point distinctness and s are preserved."""
    n = len(lines)
    if s4 is None:
        s4 = two_flat_richness(lines, pair_cap=params.pair_cap).s if n else 0
    base = dict(seed=pmap.seed, attempt=pmap.attempt, rows=pmap.rows, n=n, s=s4)
    try:
        L3 = project_lines(lines, pmap)
    except GeometryError as e:
        return ProjectionReport(False, n3=0, I=0, I3=0, points=0, points3=0, s3=None, counts_match=False, failures=[str(e)], **base)
    n3 = len(unique_rows(L3)) if n else 0
    owner, pts = incident_points(lines, params)
    I = len(owner)
    P4 = unique_rows(pts) if len(pts) else pts
    P3 = unique_rows(_apply(pmap.matrix, P4)) if len(P4) else np.zeros((0, 3), dtype=np.int64)
    per4 = np.bincount(owner, minlength=n)
    per3 = incidences_3d(L3, P3) if n3 == n else np.zeros(n, dtype=np.int64)
    I3 = int(per3.sum())
    counts_match = bool(np.array_equal(per3, per4))
    s3 = plane_richness_3d(L3, params.pair_cap).s if n3 == n else None
    fails = []
    if n3 != n:
        fails.append("lines merged")
    if len(P3) != len(P4):
        fails.append("points merged")
    if not counts_match:
        fails.append("incidences changed")
    if s3 is not None and s3 != s4:
        fails.append("plane multiplicity changed")
    return ProjectionReport(not fails, n3=n3, I=I, I3=I3, points=len(P4), points3=len(P3), s3=s3, counts_match=counts_match, failures=fails, **base)


def find_generic_projection(lines: LineSet, params: ConstructionParams, seed: int) -> tuple[ProjectionReport, np.ndarray]:
    """Try attempts 0..19 for the seed; return the first verified report and 3D rows."""
    s4 = two_flat_richness(lines, pair_cap=params.pair_cap).s if len(lines) else 0
    failed = []
    for attempt in range(MAX_MAPS):
        pmap = sample_projection(seed, attempt)
        rep = verify_projection(lines, params, pmap, s4)
        if rep.ok:
            rep.failures = failed
            return rep, project_lines(lines, pmap)
        failed.append({"attempt": attempt, "reasons": rep.failures})
    raise ProjectionError(f"no generic map found after {MAX_MAPS} attempts")


def l3_header(seed: int, attempt: int) -> str:
    return f"#incidence-forge L3 seed={seed} attempt={attempt}"


def write_witness(path, rows3: np.ndarray, report: ProjectionReport) -> None:
    ls = LineSet(rows3, dim=3)
    path = Path(path)
    try:
        path.write_text(format_lines(ls, l3_header(report.seed, report.attempt)))
    except OSError as e:
        raise OSError(f"cannot write witness to {path}: {e}") from e


def report_text(report: ProjectionReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"


def per_line_multiset(counts) -> dict:
    return dict(sorted(Counter(int(c) for c in counts).items()))
