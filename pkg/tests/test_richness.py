import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import built
from incidence_forge.exact import GeometryError, canonicalize_line, cross4, line_in_hyperplane, primitive_normalize, rank, sub, HyperplaneKey, dot
from incidence_forge.lineset import LineSet
from incidence_forge.richness import (
    PairBudgetError,
    hyperplane_richness,
    hyperplane_richness_auto,
    hyperplane_richness_pairs,
    hyperplane_richness_structured,
    max_collinear,
    two_flat_richness,
    two_flat_richness_auto,
)

E1, E2, E3, E4 = (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)
O = (0, 0, 0, 0)


def LS(*pairs):
    return LineSet.from_lines([canonicalize_line(b, d) for b, d in pairs])


# --- hand-built configurations ----------------------------------------------


def test_concurrent_coplanar_triple_detected():
    ls = LS((O, E1), (O, E2), (O, (1, 1, 0, 0)))
    r = two_flat_richness(ls)
    assert r.s == 3 and len(r.violations) == 1
    assert r.histogram == {3: 1}


def test_two_parallel_lines():
    assert two_flat_richness(LS((O, E1), (E2, E1))).s == 2


def test_four_lines_in_coordinate_hyperplane():
    # pairwise skew lines inside x3 = 0
    ls = LS(((0, 1, 0, 1), (2, 0, 0, 1)), ((0, 2, 0, -1), (1, -1, 0, 2)), ((0, 2, 0, 1), (1, 2, 0, 3)), ((0, 1, 0, 0), (1, 1, 0, 1)))
    assert two_flat_richness(ls).histogram == {}
    assert hyperplane_richness(ls).q == 4


def test_two_coplanar_lines_only():
    ls = LS((O, E1), (O, E2))
    r = hyperplane_richness(ls)
    assert r.q == 2 and r.histogram == {}


def test_pencil_without_skew_pairs():
    # five concurrent lines spanning x4 = 0; every pair is coplanar, so no
    # skew pair spans the hyperplane, yet it holds all five lines
    dirs = [E1, E2, E3, (1, 1, 1, 0), (1, 2, 3, 0)]
    ls = LS(*[(O, d) for d in dirs])
    assert two_flat_richness(ls).s == brute_s(ls) == 2
    r = hyperplane_richness(ls)
    assert r.q == 5


def test_parallel_family_in_hyperplane():
    # parallel lines through non-collinear points of x4 = 0
    ls = LS(*[((a, b, c, 0), E1) for a, b, c in [(0, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1), (0, 2, 5)]])
    assert hyperplane_richness(ls).q == 5
    assert two_flat_richness(ls).s == 2


def test_parallel_lines_in_one_flat():
    ls = LS((O, E1), (E4, E1), ((0, 0, 0, -1), E1))
    assert two_flat_richness(ls).s == 3
    assert hyperplane_richness(ls).q == 3


def test_empty_and_single():
    assert two_flat_richness(LS()).s == 0
    assert hyperplane_richness(LS()).q == 0
    assert two_flat_richness(LS((O, E1))).s == 1
    assert hyperplane_richness(LS((O, E1))).q == 1


def test_pair_budget():
    ls = LS((O, E1), (E4, E2), (E3, E2))
    with pytest.raises(PairBudgetError, match="pair budget"):
        two_flat_richness(ls, "pairs", pair_cap=2)
    with pytest.raises(PairBudgetError):
        hyperplane_richness(ls, pair_cap=2)
    assert two_flat_richness_auto(ls, 2) is None
    assert hyperplane_richness_auto(ls, 2) is None
    assert two_flat_richness_auto(ls, 3).s == 2


def test_structured_needs_surface_lines():
    with pytest.raises(GeometryError):
        hyperplane_richness_structured(LS((O, E1), (E4, E2), (E3, E3)))
    with pytest.raises(ValueError):
        two_flat_richness(LS((O, E1)), "nope")


# --- brute-force oracle on small random sets -------------------------------


def brute_q(lines):
    """Max lines in a hyperplane, from the span of every triple and pair."""
    ls = list(lines)
    n = len(ls)
    # any 2-flat lies in some hyperplane, so a rich flat is a lower bound
    best = max(min(n, 2), brute_s(ls))
    cands = set()
    for combo in itertools.chain(itertools.combinations(ls, 2), itertools.combinations(ls, 3)):
        a = combo[0]
        vecs = [l.dir for l in combo] + [sub(l.base, a.base) for l in combo[1:]]
        if rank(vecs) != 3:
            continue
        for u, v, w in itertools.combinations(vecs, 3):
            c = cross4(u, v, w)
            if any(c):
                nrm = primitive_normalize(c)
                cands.add(HyperplaneKey(nrm, dot(nrm, a.base)))
                break
    for h in cands:
        best = max(best, sum(line_in_hyperplane(l, h) for l in ls))
    return best


def brute_s(lines):
    ls = list(lines)
    best = min(len(ls), 1)
    for r in range(2, len(ls) + 1):
        for combo in itertools.combinations(ls, r):
            a = combo[0]
            vecs = [l.dir for l in combo] + [sub(l.base, a.base) for l in combo[1:]]
            if rank(vecs) <= 2:
                best = max(best, r)
    return best


structured_lines = st.lists(
    st.tuples(
        st.sampled_from([(0, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (1, 1, 1, 0), (0, 0, 0, 1), (2, 0, 1, 1)]),
        st.sampled_from([E1, E2, E3, (1, 1, 0, 0), (0, 1, 1, 0), (1, 0, 0, 2), (0, 1, 0, 1)]),
        st.integers(-2, 2),
    ),
    min_size=1,
    max_size=7,
)


@settings(max_examples=150, deadline=None)
@given(structured_lines)
def test_pair_routes_match_bruteforce(raw):
    lines = {canonicalize_line(tuple(b + t * x for b, x in zip(base, (0, 0, 0, 1))), d) for base, d, t in raw}
    ls = LineSet.from_lines(lines)
    assert two_flat_richness(ls, "pairs").s == brute_s(ls)
    assert hyperplane_richness(ls, method="pairs").q == brute_q(ls)


def test_histogram_mass_conservation():
    ls = LS((O, E1), (O, E2), (O, (1, 1, 0, 0)), (E3, E1), (E4, E2))
    r = two_flat_richness(ls, "pairs")
    pairs = sum(c * v * (v - 1) // 2 for v, c in r.histogram.items())
    coplanar = sum(
        1 for a, b in itertools.combinations(list(ls), 2) if rank([a.dir, b.dir, sub(b.base, a.base)]) <= 2
    )
    assert pairs == coplanar
    assert sum(v * c for v, c in r.histogram.items()) <= len(ls) * (len(ls) - 1)


# --- construction output -------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_construction_s_at_most_two(k):
    _, L = built(k)
    r = two_flat_richness(L)
    assert r.s <= 2 and r.violations == []


@pytest.mark.parametrize("k", [1, 2])
def test_routes_agree_on_full_sets(k):
    _, L = built(k)
    a, b = two_flat_richness(L, "pairs"), two_flat_richness(L, "structured")
    assert (a.s, a.histogram) == (b.s, b.histogram)
    hp, hs = hyperplane_richness_pairs(L), hyperplane_richness_structured(L)
    assert hs.exact and hp.q == hs.q == {1: 8, 2: 32}[k]
    assert hp.q_vertical == hs.q_vertical


@pytest.mark.parametrize("k, p, q, size, seed", [(4, 1, 1, 500, 0), (5, 1, 1, 500, 1), (4, 1, 2, 600, 2), (2, 2, 1, 500, 3), (2, 1, 2, 160, 4)])
def test_routes_agree_on_subsets(k, p, q, size, seed):
    _, L = built(k, p, q)
    rng = np.random.default_rng(seed)
    sub_ = L.subset(rng.choice(len(L), min(size, len(L)), replace=False))
    a, b = two_flat_richness(sub_, "pairs"), two_flat_richness(sub_, "structured")
    assert (a.s, a.histogram) == (b.s, b.histogram)
    hp, hs = hyperplane_richness_pairs(sub_), hyperplane_richness_structured(sub_)
    if max(hp.q_vertical or 0, hs.q_vertical) >= 3:
        assert hp.q_vertical == hs.q_vertical
    nv = hp.extra["q_nonvertical"]
    assert nv is None or nv <= hs.nonvertical_bound
    if hs.exact:
        assert hs.q == hp.q


FROZEN_Q = {1: 8, 2: 32, 4: 140, 5: 210}


@pytest.mark.parametrize("k", sorted(FROZEN_Q))
def test_frozen_q(k):
    _, L = built(k)
    r = hyperplane_richness(L)
    assert r.exact and r.q == FROZEN_Q[k]


# --- collinear search ---------------------------------------------------------------


def brute_collinear(pts):
    pts = [tuple(p) for p in pts]
    best = min(len(pts), 2)
    for a, b in itertools.combinations(pts, 2):
        c = sum(1 for p in pts if (b[0] - a[0]) * (p[1] - a[1]) == (b[1] - a[1]) * (p[0] - a[0]))
        best = max(best, c)
    return best


@settings(max_examples=100, deadline=None)
@given(st.sets(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), max_size=25))
def test_max_collinear_small(pts):
    arr = np.array(sorted(pts), dtype=np.int64).reshape(-1, 2)
    assert max_collinear(arr) == brute_collinear(arr)


@pytest.mark.parametrize("seed", [0, 1])
def test_max_collinear_large_planted(seed):
    rng = np.random.default_rng(seed)
    pts = {tuple(p) for p in rng.integers(-150, 150, size=(3000, 2)).tolist()}
    planted = {(3 + t, -5 + 2 * t) for t in range(-60, 60)}
    assert len(pts | planted) > 2500  # large enough for the pruned direction search
    arr = np.array(sorted(pts | planted), dtype=np.int64)
    got = max_collinear(arr)
    assert got >= len(planted)
    # compare with the quadratic route on the same data
    from incidence_forge.richness import _max_collinear_quadratic

    assert got == _max_collinear_quadratic(arr)
