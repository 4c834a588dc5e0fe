"""Bound-formula evaluation, exponent comparisons, (m, n) <-> (k, alpha), sweep regressions."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import RunStats

O_STAR_DISCLAIMER = (
    "Constants A and c and the O* factor 2^(c sqrt(log m)) are taken as 1; "
    "term values show growth only and are not bounds."
)

SCHEMA = "incidence-forge/sweep"
SCHEMA_VERSION = 1
CSV_COLUMNS = ["k", "p", "q", "cs", "cb", "m", "n", "I", "s", "q_rich", "t1", "t2", "t3", "lower", "flags"]


def _verdict(a: Fraction, b: Fraction) -> str:
    return "less" if a < b else "equal" if a == b else "greater"


def exponent_table(p: int, q: int) -> dict:
    """Exact exponents of the three bound terms on the construction, against 3 + 4a."""
    if p <= 0 or q <= 0:
        raise ValueError("alpha must be positive")
    a = Fraction(p, q)
    target = 3 + 4 * a
    rows = []
    for name, e in (
        ("m^(2/5) n^(4/5)", (14 + 22 * a) / 5),
        ("m^(1/2) n^(1/2) q^(1/4)", (11 + 17 * a) / 4),
        ("m^(2/3) n^(1/3) s^(1/3)", (8 + 10 * a) / 3),
    ):
        rows.append({"term": name, "exponent": str(e), "target": str(target), "verdict": _verdict(e, target)})
    return {"alpha": str(a), "rows": rows}


@dataclass(frozen=True)
class BoundTerms:
    t1: float
    t2: float
    t3: float
    tM: float
    tN: float
    lower: float
    disclaimer: str = O_STAR_DISCLAIMER

    def to_json(self) -> dict:
        return {"t1": self.t1, "t2": self.t2, "t3": self.t3, "tM": self.tM, "tN": self.tN,
                "lower": self.lower, "oStarDisclaimer": self.disclaimer}


def _pow(*pairs) -> float:
    return math.exp(sum(float(e) * math.log(x) for x, e in pairs))


def bound_terms(m: int, n: int, q: int, s: int) -> BoundTerms:
    if min(m, n, q, s) < 1:
        raise ValueError("bound terms need m, n, q, s >= 1")
    F = Fraction
    return BoundTerms(
        t1=_pow((m, F(2, 5)), (n, F(4, 5))),
        t2=_pow((m, F(1, 2)), (n, F(1, 2)), (q, F(1, 4))),
        t3=_pow((m, F(2, 3)), (n, F(1, 3)), (s, F(1, 3))),
        tM=float(m),
        tN=float(n),
        lower=_pow((m, F(2, 3)), (n, F(1, 2))),
    )


def in_regime(m: int, n: int) -> bool:
    """n^(9/8) < m < n^(3/2), decided on integers."""
    return m**8 > n**9 and m**2 < n**3


def solve_k_alpha(m: int, n: int) -> dict:
    """k, alpha with m = k^(3+3a), n = k^(2+4a)."""
    if m < 2 or n < 2:
        raise ValueError("m and n must be at least 2")
    lm, ln = math.log(m), math.log(n)
    lk = (4 * lm - 3 * ln) / 6
    if lk <= 0:
        raise ValueError("degenerate: log k <= 0")
    alpha = lm / (3 * lk) - 1
    regime = in_regime(m, n)
    return {"k": math.exp(lk), "alpha": alpha, "regime": "IN" if regime else "OUT"}


PREDICTED = {
    "m": lambda a: 3 + 3 * a,
    "n": lambda a: 2 + 4 * a,
    "I": lambda a: 3 + 4 * a,
    "q": lambda a: 1 + 3 * a,
}


def fit_slope(ks, values) -> dict:
    """Least-squares slope of log(value) against log(k).

    Points with a missing or zero value are left out; at least three
    distinct k must remain.
    """
    pts = sorted((k, v) for k, v in zip(ks, values) if v is not None and v > 0)
    if len({k for k, _ in pts}) < 3:
        raise ValueError("regression needs at least 3 points at distinct k")
    x = np.log([k for k, _ in pts])
    y = np.log([v for _, v in pts])
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return {"slope": float(coef[0]), "intercept": float(coef[1]),
            "residuals": [float(r) for r in resid], "ks": [k for k, _ in pts]}


def scaling_regression(records) -> dict:
    """Per alpha (and profile), slopes of m, n, I, q against log k."""
    groups: dict = {}
    for r in records:
        st = r.stats if isinstance(r, SweepRecord) else r
        groups.setdefault((st.p, st.q, st.profile), []).append(st)
    out = {}
    for (p, q, prof), sts in sorted(groups.items()):
        a = p / q
        ks = [s.k for s in sts]
        fits = {}
        for name, get in (("m", lambda s: s.m), ("n", lambda s: s.n), ("I", lambda s: s.I), ("q", lambda s: s.q_rich)):
            try:
                f = fit_slope(ks, [get(s) for s in sts])
            except ValueError as e:
                fits[name] = {"error": str(e), "predicted": PREDICTED[name](a)}
                continue
            f["predicted"] = PREDICTED[name](a)
            f["deviation"] = f["slope"] - f["predicted"]
            fits[name] = f
        out[f"{p}/{q} profile={prof}"] = fits
    return out


@dataclass
class SweepRecord:
    stats: RunStats
    terms: BoundTerms | None
    flags: list

    @classmethod
    def build(cls, stats: RunStats) -> "SweepRecord":
        flags = []
        terms = None
        if stats.n >= 1 and stats.m >= 1 and stats.q_rich and stats.s:
            terms = bound_terms(stats.m, stats.n, stats.q_rich, stats.s)
        if stats.n == 0:
            flags.append("empty")
        if stats.s is None or stats.q_rich is None:
            flags.append("richness-skipped")
        if stats.oracle_checked:
            flags.append("oracle")
        if stats.m >= 2 and stats.n >= 2 and in_regime(stats.m, stats.n):
            flags.append("regime-in")
        return cls(stats, terms, flags)

    def to_json(self) -> dict:
        return {"stats": self.stats.to_json(), "terms": self.terms.to_json() if self.terms else None, "flags": list(self.flags)}

    @classmethod
    def from_json(cls, d: dict) -> "SweepRecord":
        t = d["terms"]
        terms = None
        if t is not None:
            terms = BoundTerms(t["t1"], t["t2"], t["t3"], t["tM"], t["tN"], t["lower"], t["oStarDisclaimer"])
        return cls(RunStats.from_json(d["stats"]), terms, list(d["flags"]))

    def csv_row(self) -> list:
        st = self.stats
        cs, cb = st.profile.split(",")
        t = self.terms
        fmt = lambda x: "" if x is None else repr(x)
        return [st.k, st.p, st.q, cs, cb, st.m, st.n, st.I, fmt(st.s), fmt(st.q_rich),
                fmt(t and t.t1), fmt(t and t.t2), fmt(t and t.t3), fmt(t and t.lower), ";".join(self.flags)]


def records_json(records) -> str:
    doc = {"schema": SCHEMA, "version": SCHEMA_VERSION, "disclaimer": O_STAR_DISCLAIMER,
           "records": [r.to_json() for r in records]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def load_records(path) -> list:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise OSError(f"cannot read records from {path}: {e}") from e
    if doc.get("schema") != SCHEMA or doc.get("version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: not a version {SCHEMA_VERSION} sweep file")
    return [SweepRecord.from_json(r) for r in doc["records"]]


def emit(records, fmt: str, path) -> None:
    if fmt == "json":
        text = records_json(records)
    elif fmt == "csv":
        text = records_csv(records)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as e:
        raise OSError(f"cannot write {fmt} report to {path}: {e}") from e


def build_report(records) -> dict:
    alphas = sorted({(r.stats.p, r.stats.q) for r in records})
    return {
        "schema": "incidence-forge/report",
        "version": SCHEMA_VERSION,
        "disclaimer": O_STAR_DISCLAIMER,
        "exponents": [exponent_table(p, q) for p, q in alphas],
        "regressions": scaling_regression(records) if records else {},
    }
