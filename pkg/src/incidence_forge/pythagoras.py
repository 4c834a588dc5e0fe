"""Primitive solutions of v4^2 = v2^2 + v3^2 inside a leg box."""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple


class PythTriple(NamedTuple):
    v2: int
    v3: int
    v4: int


def enumerate_triples(leg_bound: int, hyp_min_doubled: int) -> list[PythTriple]:
    """All primitive signed triples with |v2|, |v3| <= leg_bound and 2|v4| >= hyp_min_doubled.

    Every sign pattern and both leg orders are kept as separate triples.
    Plain grid scan with an exact square test; the result is sorted.
    """
    out = []
    for a in range(-leg_bound, leg_bound + 1):
        for b in range(-leg_bound, leg_bound + 1):
            s = a * a + b * b
            r = math.isqrt(s)
            if r == 0 or r * r != s or 2 * r < hyp_min_doubled:
                continue
            if math.gcd(a, b, r) != 1:
                continue
            out.append(PythTriple(a, b, r))
            out.append(PythTriple(a, b, -r))
    out.sort()
    return out


def triple_census(leg_bounds: Iterable[int], hyp_ratio_num: int, hyp_ratio_den: int) -> list[tuple[int, int]]:
    """Count triples at each leg bound B with 2|v4| >= 2*B*num/den."""
    bounds = list(leg_bounds)
    if any(b < 1 for b in bounds) or any(x >= y for x, y in zip(bounds, bounds[1:])):
        raise ValueError("leg bounds must be strictly increasing and >= 1")
    if hyp_ratio_den <= 0:
        raise ValueError("ratio denominator must be positive")
    out = []
    for b in bounds:
        # 2|v4| is an integer, so comparing against the ceiling is exact
        threshold = -(-2 * b * hyp_ratio_num // hyp_ratio_den)
        out.append((b, len(enumerate_triples(b, threshold))))
    return out
