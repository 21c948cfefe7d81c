"""The MAPDA array type, its C1-C4 verifier and scheme metrics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .errors import InvalidArrayError, UnknownSymbolError

STAR = 0
_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


@dataclass
class Mapda:
    """F x K array; 0 encodes a star and 1..S the integer symbols.

    ``source`` optionally keeps the filled base array the entries were
    replicated from, which allows compact serialization and verification.
    """

    entries: np.ndarray
    antennas: int
    num_symbols: int
    row_labels: list[str] | None = None
    col_labels: list[str] | None = None
    source: Any = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.entries = np.asarray(self.entries, dtype=np.int64)
        if self.entries.ndim != 2:
            raise InvalidArrayError("entries must be a 2-D grid")
        if (self.entries < 0).any():
            raise InvalidArrayError("entries must be 0 (star) or positive symbols")
        F, K = self.entries.shape
        if self.row_labels is None:
            self.row_labels = [str(i + 1) for i in range(F)]
        if self.col_labels is None:
            self.col_labels = [str(k + 1) for k in range(K)]
        if len(self.row_labels) != F or len(self.col_labels) != K:
            raise InvalidArrayError("label lists do not match the entry grid")

    @property
    def L(self) -> int:
        return self.antennas

    @property
    def F(self) -> int:
        return self.entries.shape[0]

    @property
    def K(self) -> int:
        return self.entries.shape[1]

    @property
    def S(self) -> int:
        return self.num_symbols

    def star_counts(self) -> np.ndarray:
        return (self.entries == STAR).sum(axis=0)

    @property
    def Z(self) -> int:
        counts = self.star_counts()
        if counts.size == 0 or (counts != counts[0]).any():
            raise InvalidArrayError("star count differs between columns (C1)")
        return int(counts[0])

    @classmethod
    def from_grid(cls, grid: list[list[Any]], antennas: int, **kw: Any) -> "Mapda":
        """Build from nested lists where '*' or None marks a star."""
        arr = np.array([[0 if c in ("*", None) else int(c) for c in row] for row in grid], dtype=np.int64)
        nz = arr[arr > 0]
        return cls(arr, antennas, int(nz.max()) if nz.size else 0, **kw)

    def to_grid(self) -> list[list[Any]]:
        return [["*" if v == STAR else int(v) for v in row] for row in self.entries.tolist()]


@dataclass
class SchemeMetrics:
    L: int
    K: int
    F: int
    Z: int
    S: int
    sum_dof: Fraction
    per_symbol_counts: list[int] = field(default_factory=list)

    @property
    def g(self) -> Fraction:
        return self.sum_dof

    @property
    def memory_ratio(self) -> Fraction:
        return Fraction(self.Z, self.F)

    def key(self) -> tuple:
        return (self.L, self.K, self.F, self.Z, self.S, self.sum_dof)

    def to_json(self) -> dict:
        dof = self.sum_dof
        return {
            "L": self.L,
            "K": self.K,
            "F": self.F,
            "Z": self.Z,
            "S": self.S,
            "g": int(dof) if dof.denominator == 1 else str(dof),
            "memory_ratio": str(self.memory_ratio),
        }


@dataclass
class VerificationReport:
    c1_ok: bool
    Z: int | None
    c1_deviating_columns: list[int]
    c2_ok: bool
    c2_missing: list[int]
    c2_out_of_range: list[int]
    c3_violations: list[tuple[int, int]]  # (symbol, column)
    c4_violations: list[tuple[int, int, int]]  # (symbol, row, integer count)

    @property
    def c3_ok(self) -> bool:
        return not self.c3_violations

    @property
    def c4_ok(self) -> bool:
        return not self.c4_violations

    @property
    def valid(self) -> bool:
        return self.c1_ok and self.c2_ok and self.c3_ok and self.c4_ok

    def failed(self) -> list[str]:
        checks = {"C1": self.c1_ok, "C2": self.c2_ok, "C3": self.c3_ok, "C4": self.c4_ok}
        return [name for name, ok in checks.items() if not ok]

    def to_json(self, limit: int = 50) -> dict:
        return {
            "valid": self.valid,
            "C1": {"ok": self.c1_ok, "Z": self.Z, "deviating_columns": self.c1_deviating_columns[:limit]},
            "C2": {"ok": self.c2_ok, "missing": self.c2_missing[:limit],
                   "out_of_range": self.c2_out_of_range[:limit]},
            "C3": {"ok": self.c3_ok, "violations": [list(v) for v in self.c3_violations[:limit]],
                   "count": len(self.c3_violations)},
            "C4": {"ok": self.c4_ok, "violations": [list(v) for v in self.c4_violations[:limit]],
                   "count": len(self.c4_violations)},
        }


def _column_star_check(star_counts: np.ndarray) -> tuple[bool, int | None, list[int]]:
    if star_counts.size == 0:
        return True, 0, []
    modal = Counter(star_counts.tolist()).most_common(1)[0][0]
    bad = np.flatnonzero(star_counts != modal).tolist()
    return not bad, int(modal), bad


def _symbol_checks(
    nz: np.ndarray,
    rows: np.ndarray,
    cols: np.ndarray,
    syms: np.ndarray,
    num_symbols: int,
    L: int,
) -> tuple[list[int], list[int], list[tuple[int, int]], list[tuple[int, int, int]]]:
    """C2-C4 from the (row, col, symbol) occurrences of integers.

    ``nz`` (boolean) marks every integer cell of the row space the occurrences live
    in.  C4 counts, for each occurrence row and its symbol s, the integers of
    that row lying in the columns that contain s.
    """
    present = np.zeros(num_symbols + 1, dtype=bool)
    in_range = (syms >= 1) & (syms <= num_symbols)
    present[syms[in_range]] = True
    missing = (np.flatnonzero(~present[1:]) + 1).tolist()
    out_of_range = sorted(set(syms[~in_range].tolist()))

    rows, cols, syms = rows[in_range], cols[in_range], syms[in_range]
    if syms.size == 0:
        return missing, out_of_range, [], []

    # C3: each (column, symbol) pair at most once
    K = nz.shape[1]
    pair = syms.astype(np.int64) * K + cols
    uniq, counts = np.unique(pair, return_counts=True)
    dup = uniq[counts > 1]
    c3 = [(int(p // K), int(p % K)) for p in dup]

    # C4: popcount of (integer cells of row f) AND (columns holding s)
    row_bits = np.packbits(nz, axis=1)
    col_has = np.zeros((num_symbols + 1, K), dtype=bool)
    col_has[syms, cols] = True
    sym_bits = np.packbits(col_has, axis=1)
    occ = np.unique(rows.astype(np.int64) * (num_symbols + 1) + syms)
    orow, osym = occ // (num_symbols + 1), occ % (num_symbols + 1)
    counts = _POPCOUNT[row_bits[orow] & sym_bits[osym]].sum(axis=1)
    bad = np.flatnonzero(counts > L)
    c4 = [(int(osym[i]), int(orow[i]), int(counts[i])) for i in bad]
    return missing, out_of_range, c3, c4


def verify(m: Mapda) -> VerificationReport:
    """Check Definition-1 conditions C1-C4 on the expanded array."""
    e = m.entries
    ok1, Z, bad_cols = _column_star_check((e == STAR).sum(axis=0))
    rows, cols = np.nonzero(e)
    syms = e[rows, cols]
    missing, oor, c3, c4 = _symbol_checks(e != STAR, rows, cols, syms, m.S, m.L)
    return VerificationReport(ok1, Z, bad_cols, not missing and not oor, missing, oor, c3, c4)


def verify_compact(filled: Any, antennas: int | None = None) -> VerificationReport:
    """Check C1-C4 on a filled base array without expanding the copies.

    Copy c of row T carries integers exactly at the Null cells of T, so the
    C4 count for an occurrence in any copy equals the Null count of T over
    the symbol's columns.  Column multiplicities are unchanged by spreading
    vectors over copies, so C3 is read off the base too.
    """
    L = antennas if antennas is not None else filled.antennas
    null = ~filled.base.cells
    counts = np.bincount(filled.rows * null.shape[1] + filled.cols, minlength=null.size).reshape(null.shape)
    uniform = counts[null]
    pi = int(uniform[0]) if uniform.size else 0
    c1_cells_ok = bool((uniform == pi).all()) and not counts[~null].any()
    star_cols = (~null).sum(axis=0) * pi
    ok1, Z, bad_cols = _column_star_check(star_cols)
    if not c1_cells_ok:
        # a Null cell with a vector count other than π leaves that column's
        # star count off in some copy
        ok1 = False
        wrong = np.where(null, counts != pi, counts != 0)
        bad_cols = sorted(set(bad_cols) | set(np.flatnonzero(wrong.any(axis=0)).tolist()))
    syms = filled.symbol_ids()
    missing, oor, c3, c4 = _symbol_checks(null, filled.rows, filled.cols, syms, filled.num_symbols, L)
    return VerificationReport(ok1, Z, bad_cols, not missing and not oor, missing, oor, c3, c4)


def symbol_subarray(m: Mapda, s: int) -> Mapda:
    """The fragment P^(s): rows and columns of ``m`` that contain s."""
    hit = m.entries == s
    if not hit.any():
        raise UnknownSymbolError(s)
    r = np.flatnonzero(hit.any(axis=1))
    c = np.flatnonzero(hit.any(axis=0))
    sub = m.entries[np.ix_(r, c)]
    return Mapda(
        sub,
        m.L,
        m.S,
        [m.row_labels[i] for i in r],
        [m.col_labels[j] for j in c],
    )


def metrics(m: Mapda) -> SchemeMetrics:
    counts = m.star_counts()
    if counts.size and (counts != counts[0]).any():
        raise InvalidArrayError("C1 fails: star count differs between columns")
    r_s = np.bincount(m.entries.ravel(), minlength=m.S + 1)[1 : m.S + 1]
    if m.S == 0:
        raise InvalidArrayError("C2 fails: array has no integer entries")
    return SchemeMetrics(m.L, m.K, m.F, m.Z, m.S, Fraction(int(r_s.sum()), m.S), r_s.tolist())


def dof_upper_bound(m: Mapda) -> Fraction:
    """min{K·Z/F + L, K}."""
    return min(Fraction(m.K * m.Z, m.F) + m.L, Fraction(m.K))


# ---------------------------------------------------------------- JSON


def to_json(m: Mapda, compact: bool = False) -> dict:
    head = {"L": m.L, "K": m.K, "F": m.F, "Z": m.Z, "S": m.S}
    if compact:
        if m.source is None:
            raise InvalidArrayError("compact form needs the filled base array")
        return {**head, **m.source.to_compact_json()}
    return {**head, "rows": list(m.row_labels), "cols": list(m.col_labels), "entries": m.to_grid()}


def from_json(data: dict) -> Mapda:
    if "vectors" in data:
        from .assembly import FilledArray, replicate

        filled = FilledArray.from_compact_json(data)
        return replicate(filled)
    arr = np.array(
        [[0 if c in ("*", None) else int(c) for c in row] for row in data["entries"]], dtype=np.int64
    ).reshape(len(data["entries"]), -1 if data["entries"] else 0)
    return Mapda(arr, int(data["L"]), int(data["S"]), list(data["rows"]), list(data["cols"]))
