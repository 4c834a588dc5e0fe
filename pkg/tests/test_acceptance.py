"""Acceptance criteria 1-10.  Each test records a PASS/FAIL line printed in the run summary."""

import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import built, record_criterion
from incidence_forge.analysis import compute_stats, incidence_band, incidences_fast, incidences_oracle
from incidence_forge.cli import main
from incidence_forge.construction import line_constraints_check
from incidence_forge.projection import find_generic_projection
from incidence_forge.pythagoras import triple_census
from incidence_forge.reporting import exponent_table, fit_slope, scaling_regression
from incidence_forge.richness import two_flat_richness

CRIT1_RUNS = [(k, "reduced") for k in (1, 2, 3, 4)]
CRIT2_RUNS = CRIT1_RUNS + [(1, "paper"), (2, "paper")]
SWEEP_KS = range(2, 9)


def check(num, ok, detail):
    record_criterion(num, ok, detail)
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def sweep():
    return [compute_stats(*built(k)) for k in SWEEP_KS]


def generating_base(line, params):
    """A base point of the line inside the box that generates lines of L."""
    K, X1 = params.base_xi_max, params.base_x1_max
    lo, hi = -(10**18), 10**18
    for b, d, bound in zip(line.base, line.dir, (X1, K, K, K)):
        if d == 0:
            if abs(b) > bound:
                return None
            continue
        if d < 0:
            b, d = -b, -d
        lo = max(lo, -((bound + b) // d))
        hi = min(hi, (bound - b) // d)
    return line.point(lo) if lo <= hi else None


def test_criterion_1_construction_validity():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    bad = 0
    total = 0
    for k, prof in CRIT1_RUNS:
        params, lines = built(k, profile=prof)
        rows = lines.rows
        ts = rng.integers(-10**9, 10**9, size=(len(rows), 5))
        pts = rows[:, None, :4].astype(object) + ts[:, :, None].astype(object) * rows[:, None, 4:].astype(object)
        on_s = pts[..., 0] == pts[..., 1] ** 2 + pts[..., 2] ** 2 - pts[..., 3] ** 2
        bad += int((~on_s.all(axis=1)).sum())
        for line in lines:
            x = generating_base(line, params)
            if x is None or not line_constraints_check(x, line.dir, params):
                bad += 1
        total += len(lines)
    elapsed = time.perf_counter() - start
    check(1, bad == 0 and elapsed < 60, f"{total} lines, {bad} failures, {elapsed:.1f}s")


def test_criterion_2_oracle_equality():
    results = []
    for k, prof in CRIT2_RUNS:
        params, lines = built(k, profile=prof)
        results.append((k, prof, incidences_fast(lines, params)[0], incidences_oracle(lines, params)))
    ok = all(a == b for *_, a, b in results)
    check(2, ok, "; ".join(f"k={k} {p}: {a}={b}" for k, p, a, b in results))


def test_criterion_3_per_line_band():
    worst = []
    ok = True
    for k, prof in CRIT2_RUNS:
        params, lines = built(k, profile=prof)
        lo, hi = incidence_band(params)
        _, counts = incidences_fast(lines, params)
        if len(counts):
            ok &= bool(counts.min() >= lo and counts.max() <= hi)
            worst.append(f"k={k} {prof}: [{counts.min()},{counts.max()}] in [{lo},{hi}]")
    check(3, ok, "; ".join(worst))


def test_criterion_4_two_flat_richness(sweep):
    res = []
    for k in sorted({k for k, _ in CRIT2_RUNS} | set(SWEEP_KS)):
        for prof in ("reduced", "paper") if k <= 2 else ("reduced",):
            _, lines = built(k, profile=prof)
            r = two_flat_richness(lines)
            res.append((k, prof, r.s, len(r.violations)))
    ok = all(s <= 2 and v == 0 for *_, s, v in res)
    check(4, ok, f"max s = {max(s for *_, s, _ in res)}, violations = {sum(v for *_, v in res)} over {len(res)} runs")


def test_criterion_5_hyperplane_slope(sweep):
    f = fit_slope([s.k for s in sweep], [s.q_rich for s in sweep])
    qs = {s.k: s.q_rich for s in sweep}
    ok = abs(f["slope"] - 4) <= 0.5
    check(5, ok, f"slope(q) = {f['slope']:.3f}, target 4 +- 0.5, q by k = {qs}")


def test_criterion_6_scaling_slopes(sweep):
    fits = scaling_regression(sweep)["1/1 profile=13,65"]
    m, n, I = (fits[x]["slope"] for x in ("m", "n", "I"))
    ok = abs(m - 6) <= 0.2 and abs(n - 6) <= 0.5 and abs(I - 7) <= 0.5
    check(6, ok, f"slope(m) = {m:.3f} (6 +- 0.2), slope(n) = {n:.3f} (6 +- 0.5), slope(I) = {I:.3f} (7 +- 0.5)")


def test_criterion_7_triple_census():
    c = triple_census([10, 20, 40, 80, 160], 1, 2)
    slope = fit_slope([b for b, _ in c], [x for _, x in c])["slope"]
    check(7, abs(slope - 1) <= 0.3, f"slope = {slope:.3f}, counts = {c}")


def test_criterion_8_exponent_verdicts():
    ok = True
    for a in (Fraction(1, 10), Fraction(1, 5), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5), Fraction(9, 20)):
        ok &= [r["verdict"] for r in exponent_table(a.numerator, a.denominator)["rows"]] == ["less"] * 3
    ok &= exponent_table(1, 2)["rows"][0]["verdict"] == "equal"
    check(8, ok, "all strict-less below 1/2, first comparison equal at 1/2" if ok else "verdict mismatch")


def test_criterion_9_projection_preservation():
    res = []
    for k in (1, 2, 3):
        params, lines = built(k)
        for seed in (0, 1, 2):
            rep, _ = find_generic_projection(lines, params, seed)
            res.append(rep.ok and rep.n3 == rep.n and rep.I3 == rep.I and rep.s3 == rep.s)
    check(9, all(res), f"{sum(res)}/{len(res)} projections preserved n, I, s")


def _cli_outputs(d):
    assert main(["construct", "--k", "2", "--out", str(d)]) == 0
    assert main(["project", "--input", str(d / "lines_k2_a1-1_p13-65.txt"), "--seed", "3", "--out", str(d)]) == 0
    assert main(["sweep", "--k", "1..4", "--out", str(d)]) == 0
    assert main(["report", "--input", str(d / "sweep_a1-1_p13-65.json"), "--out", str(d)]) == 0
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_criterion_10_determinism(tmp_path, capsys):
    a = _cli_outputs(tmp_path / "a")
    b = _cli_outputs(tmp_path / "b")
    check(10, a == b and len(a) >= 6, f"{len(a)} files compared byte for byte")
