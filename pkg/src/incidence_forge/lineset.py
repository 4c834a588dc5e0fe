"""Deduplicated line collections and the plain-text line-set format."""

from __future__ import annotations

import re
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .exact import CanonicalLine, canonicalize_many, unique_rows


class DuplicateLineError(ValueError):
    pass


class LineFormatError(ValueError):
    pass


class LineSet:
    """Sorted, duplicate-free canonical lines stored as an (n, 2*dim) array.

    Rows are ``base | dir``.  Iteration yields :class:`CanonicalLine`.
    """

    def __init__(self, rows: np.ndarray, dim: int = 4, *, _trusted: bool = False):
        rows = np.asarray(rows)
        if rows.size == 0:
            rows = np.zeros((0, 2 * dim), dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != 2 * dim:
            raise ValueError(f"expected rows of width {2 * dim}, got shape {rows.shape}")
        if not _trusted:
            sorted_rows, counts = unique_rows(rows, return_counts=True)
            if len(counts) and counts.max() > 1:
                dup = sorted_rows[int(np.argmax(counts > 1))]
                raise DuplicateLineError(f"duplicate line {tuple(int(x) for x in dup)}")
            rows = sorted_rows
        self.rows = rows
        self.dim = dim

    @classmethod
    def from_lines(cls, lines: Iterable[CanonicalLine], dim: int = 4) -> "LineSet":
        rows = [tuple(l.base) + tuple(l.dir) for l in lines]
        arr = np.array(rows, dtype=np.int64) if rows else np.zeros((0, 2 * dim), dtype=np.int64)
        return cls(arr, dim)

    @classmethod
    def from_raw(cls, base: np.ndarray, dir: np.ndarray) -> "LineSet":
        """Canonicalize arbitrary (base, dir) rows; duplicates are an error."""
        dim = base.shape[1]
        return cls(canonicalize_many(base, dir), dim)

    @property
    def base(self) -> np.ndarray:
        return self.rows[:, : self.dim]

    @property
    def dir(self) -> np.ndarray:
        return self.rows[:, self.dim :]

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, i: int) -> CanonicalLine:
        r = self.rows[i]
        return CanonicalLine(tuple(int(x) for x in r[: self.dim]), tuple(int(x) for x in r[self.dim :]))

    def __iter__(self) -> Iterator[CanonicalLine]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LineSet):
            return NotImplemented
        return self.dim == other.dim and self.rows.shape == other.rows.shape and bool(np.all(self.rows == other.rows))

    def subset(self, idx) -> "LineSet":
        return LineSet(self.rows[np.sort(np.asarray(idx))], self.dim, _trusted=True)


_HEADER_RE = re.compile(r"^#incidence-forge L k=(\d+) alpha=(\d+)/(\d+) profile=(\d+),(\d+)$")


def format_lines(lines: LineSet, header: str) -> str:
    dim = lines.dim
    out = [header]
    for r in lines.rows.tolist():
        out.append("B " + " ".join(map(str, r[:dim])) + " D " + " ".join(map(str, r[dim:])))
    return "\n".join(out) + "\n"


def line_header(k: int, p: int, q: int, c_small: int, c_big: int) -> str:
    return f"#incidence-forge L k={k} alpha={p}/{q} profile={c_small},{c_big}"


def write_lines(path: str | Path, lines: LineSet, header: str) -> None:
    path = Path(path)
    try:
        path.write_text(format_lines(lines, header))
    except OSError as e:
        raise OSError(f"cannot write line set to {path}: {e}") from e


def parse_header(line: str) -> dict:
    m = _HEADER_RE.match(line.strip())
    if not m:
        raise LineFormatError(f"unrecognized header: {line.strip()!r}")
    k, p, q, cs, cb = map(int, m.groups())
    return {"k": k, "p": p, "q": q, "c_small": cs, "c_big": cb}


def read_lines(path: str | Path, dim: int = 4) -> tuple[str, LineSet]:
    """Read a line-set file.  Records are re-canonicalized; duplicates raise."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise OSError(f"cannot read line set {path}: {e}") from e
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise LineFormatError(f"{path}: missing header line")
    header = lines[0]
    rows = []
    for lineno, rec in enumerate(lines[1:], start=2):
        if not rec.strip():
            continue
        parts = rec.split()
        if len(parts) != 2 * dim + 2 or parts[0] != "B" or parts[dim + 1] != "D":
            raise LineFormatError(f"{path}:{lineno}: malformed record {rec!r}")
        try:
            rows.append([int(x) for x in parts[1 : dim + 1] + parts[dim + 2 :]])
        except ValueError:
            raise LineFormatError(f"{path}:{lineno}: non-integer field in {rec!r}") from None
    if not rows:
        return header, LineSet(np.zeros((0, 2 * dim), dtype=np.int64), dim)
    arr = np.array(rows, dtype=object)
    try:
        arr = arr.astype(np.int64)
    except OverflowError:
        pass
    canon = canonicalize_many(arr[:, :dim], arr[:, dim:])
    return header, LineSet(canon, dim)
