"""Maximum number of lines on a common 2-flat (s) and hyperplane (q).

Two routes are provided for each quantity.

``pairs``
    Examines every unordered pair of lines.  Works for any line set.
``structured``
    Only for lines lying on S.  Uses these facts about S:

    * A line on S is determined by its projection to (x2, x3, x4), since
      x1 is a function of the other coordinates on S.
    * The projected direction (v2, v3, v4) lies on the cone
      v2^2 + v3^2 = v4^2.  A plane through the origin meets the cone in at
      most two generators, so a vertical hyperplane (normal with zero first
      entry) holds lines from at most two projected-direction classes.
    * Two lines with parallel projections are coplanar only if they are
      parallel in R^4.  Two lines whose non-parallel projections span a
      common plane always meet: both pass through the point of S above the
      crossing of their projections.
    * A non-vertical hyperplane H cuts S in a cone or hyperboloid over the
      (x2, x3, x4) coordinates, which carries at most two lines in any
      direction, so H holds at most twice the number of direction classes.

    * Lines sharing a 4D direction lie in one vertical hyperplane, where S
      is a parabolic cylinder, so no three parallel lines share a 2-flat.

    With these, every 2-flat holds at most two lines and s comes from
    counting, and q is exact over vertical hyperplanes, which settles q
    whenever that maximum reaches the non-vertical bound.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .construction import surface_line_mask
from .exact import (
    GeometryError,
    _maxabs,
    as_exact,
    cross3_many,
    cross4,
    cross4_many,
    group_ids,
    normalize_rows,
    primitive_normalize,
    sub,
    two_flat_key,
    unique_rows,
)
from .lineset import LineSet


class PairBudgetError(RuntimeError):
    pass


@dataclass
class FlatRichness:
    s: int
    histogram: dict
    violations: list
    method: str
    pairs_examined: int


@dataclass
class HyperplaneRichness:
    q: int | None
    histogram: dict | None
    method: str
    pairs_examined: int
    q_vertical: int | None = None
    nonvertical_bound: int | None = None
    exact: bool = True
    extra: dict = field(default_factory=dict)


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def _pairs_from_count(j: int) -> int:
    """Invert j = r(r-1)/2 exactly."""
    r = (1 + math.isqrt(1 + 8 * j)) // 2
    if r * (r - 1) // 2 != j:
        raise AssertionError(f"pair count {j} is not triangular")
    return r


_PAIRS2 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_TRIPLES3 = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]


def flat_keys(P: np.ndarray, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact row key of the 2-flat P + span(A, B) for each row.

    The key is the primitive sign-normalized bivector A^B followed by P^(A^B);
    two rows give equal keys iff they describe the same 2-flat.
    """
    if A.dtype != object and 2 * _maxabs(A) * _maxabs(B) * max(_maxabs(P), 1) * 3 >= 2**62:
        P, A, B = as_exact(P), as_exact(A), as_exact(B)
    w = np.stack([A[:, p] * B[:, q] - A[:, q] * B[:, p] for p, q in _PAIRS2], axis=1)
    w = normalize_rows(w)
    col = {pq: i for i, pq in enumerate(_PAIRS2)}
    pw = np.stack(
        [P[:, p] * w[:, col[(q, r)]] - P[:, q] * w[:, col[(p, r)]] + P[:, r] * w[:, col[(p, q)]] for p, q, r in _TRIPLES3],
        axis=1,
    )
    return np.concatenate([w, pw], axis=1)


def _histogram(values) -> dict:
    return dict(sorted(Counter(int(v) for v in values).items()))


# --- 2-flats: pair route ----------------------------------------------------


def _coplanar_pairs(lines: LineSet, pair_cap: int):
    """All coplanar pairs (i < j) with their 2-flat keys."""
    n = len(lines)
    if pair_count(n) > pair_cap:
        raise PairBudgetError(f"pair budget exceeded: n={n} needs {pair_count(n)} pairs, cap {pair_cap}")
    B, D = lines.base, lines.dir
    I, J, K = [], [], []
    for i in range(n - 1):
        d2, w = D[i + 1 :], B[i + 1 :] - B[i]
        c = cross4_many(D[i : i + 1], d2, w)
        hit = np.flatnonzero(np.all(c == 0, axis=1))
        if not len(hit):
            continue
        d1 = np.broadcast_to(D[i], (len(hit), 4))
        par = np.all(d2[hit] == d1, axis=1)
        second = np.where(par[:, None], w[hit], d2[hit])
        K.append(flat_keys(np.broadcast_to(B[i], (len(hit), 4)), d1, second))
        I.append(np.full(len(hit), i))
        J.append(hit + i + 1)
    if not K:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros((0, 10), dtype=np.int64)
    return np.concatenate(I), np.concatenate(J), np.concatenate(K)


def _flats_from_pairs(I, J, keys):
    """Group coplanar pairs by flat; returns (flat ids, line counts per flat)."""
    if len(keys) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    gid, uniq = group_ids(keys)
    j = np.bincount(gid, minlength=len(uniq))
    r = np.array([_pairs_from_count(int(x)) for x in j], dtype=np.int64)
    # membership count must agree with the pair count inversion
    memb = unique_rows(np.stack([np.concatenate([gid, gid]), np.concatenate([I, J])], axis=1))
    r_union = np.bincount(memb[:, 0], minlength=len(uniq))
    if not np.array_equal(r, r_union):
        raise AssertionError("2-flat membership is inconsistent with pair counts")
    return gid, r


def two_flat_richness_pairs(lines: LineSet, pair_cap: int = 2_000_000_000) -> FlatRichness:
    I, J, keys = _coplanar_pairs(lines, pair_cap)
    gid, r = _flats_from_pairs(I, J, keys)
    violations = []
    for f in np.flatnonzero(r >= 3):
        k = int(np.flatnonzero(gid == f)[0])
        violations.append(two_flat_key(lines[int(I[k])], lines[int(J[k])]))
    return FlatRichness(
        s=int(r.max()) if len(r) else min(len(lines), 1),
        histogram=_histogram(r),
        violations=sorted(violations),
        method="pairs",
        pairs_examined=pair_count(len(lines)),
    )


# --- structured helpers -------------------------------------------------------


def _classes3(lines: LineSet):
    """Projected-direction class id per line (sign ignored) and the class vectors."""
    d3 = normalize_rows(lines.dir[:, 1:].copy())
    return group_ids(d3)


def _parallel_groups(lines: LineSet):
    """Index arrays of lines sharing a 4D direction, for groups of size >= 2."""
    gid, _ = group_ids(lines.dir)
    order = np.argsort(gid, kind="stable")
    bounds = np.flatnonzero(np.diff(gid[order])) + 1
    return [g for g in np.split(order, bounds) if len(g) >= 2]


def _check_surface(lines: LineSet):
    if len(lines) and not bool(np.all(surface_line_mask(lines.rows))):
        raise GeometryError("structured route needs every line to lie on S")


def _class_pair_buckets(lines: LineSet, cls, reps):
    """For each pair of direction classes, the plane offsets of their lines.

    Yields (a, b, idx_a, c_a, idx_b, c_b) where c are offsets N . (x2, x3, x4)
    with N the normalized cross product of the two class directions.
    """
    b3 = lines.base[:, 1:]
    members = [np.flatnonzero(cls == c) for c in range(len(reps))]
    for a, b in itertools.combinations(range(len(reps)), 2):
        N = normalize_rows(cross3_many(reps[a : a + 1], reps[b : b + 1]))[0]
        ia, ib = members[a], members[b]
        yield a, b, ia, b3[ia] @ N, ib, b3[ib] @ N


# --- 2-flats: structured route ------------------------------------------------


def two_flat_richness_structured(lines: LineSet, pair_cap: int = 2_000_000_000) -> FlatRichness:
    _check_surface(lines)
    n = len(lines)
    groups = _parallel_groups(lines)
    examined = sum(pair_count(len(g)) for g in groups)
    if examined > pair_cap:
        raise PairBudgetError(f"pair budget exceeded: {examined} parallel pairs, cap {pair_cap}")
    hist: Counter = Counter()
    violations = []
    best = min(n, 1)
    # Lines sharing a direction d lie in one vertical hyperplane, where S is a
    # parabolic cylinder; modulo d their base points lie on a parabola, so no
    # three of them share a 2-flat and each parallel pair spans its own flat.
    if examined:
        hist[2] += examined
        best = max(best, 2)

    # flats spanned by a crossing pair: one per (direction group in A, direction group in B)
    cls, reps = _classes3(lines)
    dgid, _ = group_ids(lines.dir)
    for _, _, ia, ca, ib, cb in _class_pair_buckets(lines, cls, reps):
        if not len(ia) or not len(ib):
            continue
        ga = _bucket_group_sizes(ca, dgid[ia])
        gb = _bucket_group_sizes(cb, dgid[ib])
        for (c, sizes_a) in ga.items():
            sizes_b = gb.get(c)
            if sizes_b is None:
                continue
            for sa, na in sizes_a.items():
                for sb, nb in sizes_b.items():
                    hist[sa + sb] += na * nb
                    best = max(best, sa + sb)
            if max(sizes_a) + max(sizes_b) >= 3:
                violations.extend(_cross_violations(lines, ia, ca, ib, cb, dgid, c))
    return FlatRichness(
        s=best,
        histogram=dict(sorted(hist.items())),
        violations=sorted(set(violations)),
        method="structured",
        pairs_examined=examined,
    )


def _bucket_group_sizes(c: np.ndarray, dg: np.ndarray) -> dict:
    """offset -> {group size: number of direction groups of that size}."""
    rows, counts = unique_rows(np.stack([c, dg], axis=1), return_counts=True)
    out: dict = defaultdict(Counter)
    if len(rows) and counts.max() == 1:
        offs, per = np.unique(rows[:, 0], return_counts=True)
        return {int(o): Counter({1: int(x)}) for o, x in zip(offs, per)}
    for (off, _), cnt in zip(rows.tolist(), counts.tolist()):
        out[int(off)][int(cnt)] += 1
    return out


def _cross_violations(lines, ia, ca, ib, cb, dgid, c):
    a_idx, b_idx = ia[ca == c], ib[cb == c]
    out = []
    for x in a_idx:
        for y in b_idx:
            both = np.concatenate([a_idx[dgid[a_idx] == dgid[x]], b_idx[dgid[b_idx] == dgid[y]]])
            if len(both) >= 3:
                out.append(two_flat_key(lines[int(x)], lines[int(y)]))
    return out


def two_flat_richness(lines: LineSet, method: str = "auto", pair_cap: int = 2_000_000_000) -> FlatRichness:
    if method == "auto":
        on_s = len(lines) == 0 or bool(np.all(surface_line_mask(lines.rows)))
        method = "structured" if on_s else "pairs"
    if method == "pairs":
        return two_flat_richness_pairs(lines, pair_cap)
    if method == "structured":
        return two_flat_richness_structured(lines, pair_cap)
    raise ValueError(f"unknown method {method!r}")


def two_flat_richness_auto(lines: LineSet, pair_cap: int) -> FlatRichness | None:
    try:
        return two_flat_richness(lines, "auto", pair_cap)
    except PairBudgetError:
        return None


# --- hyperplanes: pair route ------------------------------------------------------


def _span_normal(vectors) -> tuple | None:
    for u, v, w in itertools.combinations(vectors, 3):
        c = cross4(u, v, w)
        if any(c):
            return primitive_normalize(c)
    return None


def _count_in_hyperplanes(lines: LineSet, keys: np.ndarray) -> np.ndarray:
    """Exact number of lines in each hyperplane key row (normal | offset)."""
    if len(keys) == 0:
        return np.zeros(0, dtype=np.int64)
    B, D = lines.base, lines.dir
    exact = keys.dtype == object or _maxabs(keys[:, :4]) * max(_maxabs(B), _maxabs(D), 1) * 4 >= 2**62
    if exact:
        keys, B, D = as_exact(keys), as_exact(B), as_exact(D)
    out = np.zeros(len(keys), dtype=np.int64)
    chunk = max(1, 4_000_000 // max(len(lines), 1))
    for s in range(0, len(keys), chunk):
        Nn = keys[s : s + chunk, :4]
        off = keys[s : s + chunk, 4]
        hit = ((Nn @ D.T) == 0) & ((Nn @ B.T) == off[:, None])
        out[s : s + chunk] = hit.sum(axis=1)
    return out


def hyperplane_richness_pairs(lines: LineSet, pair_cap: int = 2_000_000_000, flat_s: int | None = None) -> HyperplaneRichness:
    """Exact q for an arbitrary line set.

    Candidate hyperplanes are the spans of skew pairs and the spans of
    triples of pairwise coplanar lines not lying in one 2-flat.  Every
    hyperplane with three or more lines not confined to a single 2-flat is
    among them; hyperplanes whose lines sit in one 2-flat hold at most s.
    Each candidate is then counted exactly against all lines.
    """
    n = len(lines)
    if pair_count(n) > pair_cap:
        raise PairBudgetError(f"pair budget exceeded: n={n} needs {pair_count(n)} pairs, cap {pair_cap}")
    B, D = lines.base, lines.dir
    keys = []
    adj = defaultdict(set)
    for i in range(n - 1):
        c = cross4_many(D[i : i + 1], D[i + 1 :], B[i + 1 :] - B[i])
        zero = np.all(c == 0, axis=1)
        for j in np.flatnonzero(zero):
            adj[i].add(int(j) + i + 1)
            adj[int(j) + i + 1].add(i)
        nz = c[~zero]
        if len(nz):
            N = normalize_rows(nz)
            off = N @ B[i] if N.dtype != object else (N * as_exact(B[i : i + 1])).sum(axis=1)
            keys.append(np.concatenate([N, off[:, None]], axis=1))
    tri_keys = set()
    for a in sorted(adj):
        for b in sorted(x for x in adj[a] if x > a):
            for c in sorted(x for x in adj[a] & adj[b] if x > b):
                la, lb, lc = lines[a], lines[b], lines[c]
                vecs = [la.dir, lb.dir, lc.dir, sub(lb.base, la.base), sub(lc.base, la.base)]
                normal = _span_normal(vecs)
                if normal is not None:
                    tri_keys.add(normal + (sum(x * y for x, y in zip(normal, la.base)),))
    if tri_keys:
        keys.append(np.array(sorted(tri_keys), dtype=object if any(abs(v) >= 2**62 for t in tri_keys for v in t) else np.int64))
    if keys:
        allk = np.concatenate([k.astype(object) for k in keys]) if any(k.dtype == object for k in keys) else np.concatenate(keys)
        allk = unique_rows(allk)
    else:
        allk = np.zeros((0, 5), dtype=np.int64)
    counts = _count_in_hyperplanes(lines, allk)
    if flat_s is None:
        flat_s = two_flat_richness_pairs(lines, pair_cap).s if n >= 2 else n
    q = max([min(n, 2), flat_s] + ([int(counts.max())] if len(counts) else []))
    vertical = allk[:, 0] == 0 if len(allk) else np.zeros(0, dtype=bool)
    return HyperplaneRichness(
        q=q,
        histogram=_histogram(counts),
        method="pairs",
        pairs_examined=pair_count(n),
        q_vertical=int(counts[vertical].max()) if vertical.any() else None,
        extra={"q_nonvertical": int(counts[~vertical].max()) if (~vertical).any() else None},
    )


# --- hyperplanes: structured route ------------------------------------------------


def _quotient_map(D: np.ndarray) -> np.ndarray:
    """Integer 2x3 matrix whose kernel is span(D)."""
    rows = [np.cross(D, e) for e in np.eye(3, dtype=np.int64)]
    for r1, r2 in itertools.combinations(rows, 2):
        if np.any(np.cross(r1, r2) != 0):
            return np.stack([r1, r2])
    raise GeometryError("degenerate direction")


def max_collinear(points: np.ndarray) -> int:
    """Largest number of the given distinct integer points of Z^2 on one line."""
    N = len(points)
    if N <= 2:
        return N
    pts = points.astype(np.int64)
    if N <= 2500:
        return _max_collinear_quadratic(pts)
    best = 2
    w = int(pts[:, 0].max() - pts[:, 0].min())
    h = int(pts[:, 1].max() - pts[:, 1].min())
    diam2 = w * w + h * h

    def count_dir(g1, g2):
        key = g2 * pts[:, 0] - g1 * pts[:, 1]
        _, c = np.unique(key, return_counts=True)
        return int(c.max())

    best = max(best, count_dir(1, 0), count_dir(0, 1))
    # a line with primitive direction g holds at most floor(diam/|g|) + 1
    # points, so directions with |g|^2 * best^2 > diam^2 cannot improve best
    radius2 = diam2 // (best * best)
    ndirs = _n_directions(radius2)
    if ndirs > N:
        return _max_collinear_quadratic(pts)
    for g1, g2 in _primitive_directions(radius2):
        if (g1 * g1 + g2 * g2) * best * best > diam2:
            break
        best = max(best, count_dir(g1, g2))
    return best


def _n_directions(r2: int) -> int:
    return int(math.pi * (r2 + 4))


def _primitive_directions(r2: int):
    """Primitive (g1, g2) with g1 > 0 or g = (0, 1), by increasing norm, norm^2 <= r2."""
    R = math.isqrt(r2)
    out = []
    for g1 in range(0, R + 1):
        for g2 in range(-R, R + 1):
            if g1 == 0 and g2 <= 0:
                continue
            if g1 * g1 + g2 * g2 <= r2 and math.gcd(g1, g2) == 1:
                out.append((g1 * g1 + g2 * g2, g1, g2))
    out.sort()
    return [(a, b) for _, a, b in out]


def _max_collinear_quadratic(pts: np.ndarray) -> int:
    best = 2
    N = len(pts)
    for i in range(N - best):
        d = pts[i + 1 :] - pts[i]
        d = normalize_rows(d)
        _, c = np.unique(d[:, 0] * (1 << 31) + d[:, 1], return_counts=True) if _maxabs(d) < 2**30 else (None, unique_rows(d, return_counts=True)[1])
        best = max(best, int(c.max()) + 1)
    return best


def hyperplane_richness_structured(lines: LineSet) -> HyperplaneRichness:
    _check_surface(lines)
    n = len(lines)
    if n <= 2:
        return HyperplaneRichness(q=n, histogram=None, method="structured", pairs_examined=0, q_vertical=n, nonvertical_bound=2 * n)
    cls, reps = _classes3(lines)
    b3 = lines.base[:, 1:]
    q_vert = 1
    per_class = []
    for c in range(len(reps)):
        idx = np.flatnonzero(cls == c)
        M = _quotient_map(reps[c])
        pts = b3[idx] @ M.T
        mc = max_collinear(pts)
        per_class.append(mc)
        q_vert = max(q_vert, mc)
    pair_best = 0
    for _, _, ia, ca, ib, cb in _class_pair_buckets(lines, cls, reps):
        _, cnt = np.unique(np.concatenate([ca, cb]), return_counts=True)
        if len(cnt):
            pair_best = max(pair_best, int(cnt.max()))
    q_vert = max(q_vert, pair_best)
    bound = 2 * len(reps)
    exact = q_vert >= bound
    return HyperplaneRichness(
        q=q_vert if exact else None,
        histogram=None,
        method="structured",
        pairs_examined=0,
        q_vertical=q_vert,
        nonvertical_bound=bound,
        exact=exact,
        extra={"single_class_max": per_class, "class_pair_max": pair_best},
    )


def hyperplane_richness(lines: LineSet, pair_cap: int = 2_000_000_000, method: str = "auto") -> HyperplaneRichness:
    if method == "pairs":
        return hyperplane_richness_pairs(lines, pair_cap)
    if method not in ("auto", "structured"):
        raise ValueError(f"unknown method {method!r}")
    on_s = len(lines) == 0 or bool(np.all(surface_line_mask(lines.rows)))
    if method == "structured" or on_s:
        res = hyperplane_richness_structured(lines)
        if res.exact or method == "structured":
            return res
    return hyperplane_richness_pairs(lines, pair_cap)


def hyperplane_richness_auto(lines: LineSet, pair_cap: int) -> HyperplaneRichness | None:
    try:
        return hyperplane_richness(lines, pair_cap)
    except PairBudgetError:
        return None
