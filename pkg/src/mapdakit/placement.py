"""MN node placement, the user-retrieve array and its column partition."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .combinatorics import (
    Subset,
    binom,
    enumerate_subsets,
    format_subset,
    ground_set,
    parse_subset,
)
from .errors import InvalidParameterError


@dataclass(frozen=True)
class SystemParams:
    """Parameters (Λ, r, t, L, b, N) of a combinatorial-topology MISO system.

    ``num_files`` only feeds the memory size M = N·t/Λ; it never changes a
    construction.  When omitted it defaults to K.
    """

    num_nodes: int
    access_degree: int
    placement_t: int
    antennas: int = 1
    shift_b: int = 0
    num_files: int | None = None

    def __post_init__(self) -> None:
        lam, r, t = self.num_nodes, self.access_degree, self.placement_t
        if not 1 <= r < lam:
            raise InvalidParameterError(f"need 1 <= r < Λ, got r={r}, Λ={lam}")
        if not 1 <= t <= lam - r:
            raise InvalidParameterError(f"need 1 <= t <= Λ - r, got t={t}, Λ={lam}, r={r}")
        if self.antennas < 1:
            raise InvalidParameterError(f"need L >= 1, got L={self.antennas}")
        if not 0 <= self.shift_b <= r - 1:
            raise InvalidParameterError(f"need b in [0, r-1], got b={self.shift_b}, r={r}")
        if self.num_files is not None and self.num_files < 1:
            raise InvalidParameterError(f"need N >= 1, got N={self.num_files}")

    # short names used throughout the formulas
    @property
    def lam(self) -> int:
        return self.num_nodes

    @property
    def r(self) -> int:
        return self.access_degree

    @property
    def t(self) -> int:
        return self.placement_t

    @property
    def L(self) -> int:
        return self.antennas

    @property
    def b(self) -> int:
        return self.shift_b

    @property
    def K(self) -> int:
        return binom(self.lam, self.r)

    @property
    def N(self) -> int:
        return self.num_files if self.num_files is not None else self.K

    @property
    def anchor_size(self) -> int:
        """|A| = t + r - b."""
        return self.t + self.r - self.b

    @property
    def outside_size(self) -> int:
        """|[Λ] \\ A| = Λ - t - r + b."""
        return self.lam - self.anchor_size

    @property
    def node_memory_ratio(self) -> Fraction:
        return Fraction(self.t, self.lam)

    @property
    def retrieval_ratio(self) -> Fraction:
        """Fraction of every file a user can retrieve from its r nodes."""
        return 1 - Fraction(binom(self.lam - self.r, self.t), binom(self.lam, self.t))

    def with_(self, **changes: Any) -> "SystemParams":
        fields = dict(
            num_nodes=self.num_nodes,
            access_degree=self.access_degree,
            placement_t=self.placement_t,
            antennas=self.antennas,
            shift_b=self.shift_b,
            num_files=self.num_files,
        )
        fields.update(changes)
        return SystemParams(**fields)


def level_bounds(p: SystemParams) -> tuple[int, int]:
    """Range [max(b-t, 0), min(r, Λ-t-r+b)] of possible |D \\ A|."""
    return max(p.b - p.t, 0), min(p.r, p.outside_size)


def knapsack_levels(p: SystemParams) -> range:
    """Levels b..min(r, Λ-t-r+b): the ones whose subarrays contain Null cells."""
    return range(p.b, level_bounds(p)[1] + 1)


@dataclass
class StarArray:
    """Star/Null grid with subset labels.  ``cells[i, j]`` is True for a star."""

    row_labels: list[Subset]
    col_labels: list[Subset]
    cells: np.ndarray
    ground: int

    def __post_init__(self) -> None:
        self.cells = np.asarray(self.cells, dtype=bool)
        if self.cells.shape != (len(self.row_labels), len(self.col_labels)):
            raise InvalidParameterError(
                f"cells shape {self.cells.shape} does not match labels "
                f"({len(self.row_labels)}, {len(self.col_labels)})"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def is_star(self, row: Subset, col: Subset) -> bool:
        return bool(self.cells[self.row_labels.index(row), self.col_labels.index(col)])

    def to_json(self) -> dict:
        fmt = lambda s: format_subset(s, self.ground)  # noqa: E731
        return {
            "ground": self.ground,
            "rows": [fmt(s) for s in self.row_labels],
            "cols": [fmt(s) for s in self.col_labels],
            "cells": [["*" if c else None for c in row] for row in self.cells.tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "StarArray":
        n = data["ground"]
        return cls(
            row_labels=[parse_subset(s, n) for s in data["rows"]],
            col_labels=[parse_subset(s, n) for s in data["cols"]],
            cells=np.array([[c == "*" for c in row] for row in data["cells"]], dtype=bool).reshape(
                len(data["rows"]), len(data["cols"])
            ),
            ground=n,
        )


def node_placement_array(lam: "int | SystemParams", t: int | None = None) -> StarArray:
    """C(Λ,t) x Λ array; node λ stores the packets whose t-subset contains λ.

    Accepts either a :class:`SystemParams` or plain ``(lam, t)``; the plain
    form also admits t = Λ, which SystemParams rules out.
    """
    if isinstance(lam, SystemParams):
        lam, t = lam.lam, lam.t
    if not 1 <= t <= lam:
        raise InvalidParameterError(f"need 1 <= t <= Λ, got t={t}, Λ={lam}")
    rows = enumerate_subsets(ground_set(lam), t)
    cols = [(x,) for x in ground_set(lam)]
    cells = np.zeros((len(rows), lam), dtype=bool)
    for i, T in enumerate(rows):
        for x in T:
            cells[i, x - 1] = True
    return StarArray(rows, cols, cells, lam)


def user_retrieve_array(
    lam: "int | SystemParams", t: int | None = None, r: int | None = None
) -> StarArray:
    """C(Λ,t) x C(Λ,r) array; star exactly where the row and column subsets meet.

    Accepts a :class:`SystemParams` or plain ``(lam, t, r)`` (which allows r = Λ).
    """
    if isinstance(lam, SystemParams):
        lam, t, r = lam.lam, lam.t, lam.r
    if not 1 <= t <= lam or not 1 <= r <= lam:
        raise InvalidParameterError(f"need 1 <= t, r <= Λ, got t={t}, r={r}, Λ={lam}")
    rows = enumerate_subsets(ground_set(lam), t)
    cols = enumerate_subsets(ground_set(lam), r)
    row_masks = np.array([sum(1 << (x - 1) for x in T) for T in rows], dtype=np.int64)
    col_masks = np.array([sum(1 << (x - 1) for x in R) for R in cols], dtype=np.int64)
    cells = (row_masks[:, None] & col_masks[None, :]) != 0
    return StarArray(rows, cols, cells, lam)


def _check_anchor(p: SystemParams, A: Sequence[int]) -> Subset:
    A = tuple(sorted(A))
    if len(A) != p.anchor_size or len(set(A)) != len(A):
        raise InvalidParameterError(
            f"anchor must be a ({p.anchor_size})-subset (t+r-b), got {A}"
        )
    if A and not (1 <= A[0] and A[-1] <= p.lam):
        raise InvalidParameterError(f"anchor {A} not inside [1, {p.lam}]")
    return A


def group_columns(p: SystemParams, A: Subset, G: Subset) -> list[Subset]:
    """B_G: the r-subsets D with D \\ A = G, in lexicographic order."""
    inside = enumerate_subsets(A, p.r - len(G))
    return sorted(tuple(sorted(G + D)) for D in inside)


def partition_columns(p: SystemParams, A: Sequence[int]) -> dict[Subset, list[Subset]]:
    """Split C([Λ], r) into the blocks B_G keyed by G ⊆ [Λ] \\ A.

    Keys are ordered by level |G| and then lexicographically.
    """
    A = _check_anchor(p, A)
    outside = tuple(x for x in ground_set(p.lam) if x not in A)
    lo, hi = level_bounds(p)
    blocks: dict[Subset, list[Subset]] = {}
    for i in range(lo, hi + 1):
        for G in enumerate_subsets(outside, i):
            blocks[G] = group_columns(p, A, G)
    return blocks


@dataclass(frozen=True)
class GroupStats:
    group: Subset
    level: int
    cols: int
    nulls_per_row: int
    nulls_per_col: int


def group_stats(p: SystemParams, A: Sequence[int], G: Sequence[int]) -> GroupStats:
    """Column count v, Null entries per row z and per column u of U(C(A,t), B_G)."""
    A = _check_anchor(p, A)
    G = tuple(sorted(G))
    if set(G) & set(A):
        raise InvalidParameterError(f"group {G} intersects anchor {A}")
    i = len(G)
    return GroupStats(
        group=G,
        level=i,
        cols=binom(p.anchor_size, p.r - i),
        nulls_per_row=binom(p.r - p.b, p.r - i),
        nulls_per_col=binom(p.t + i - p.b, p.t),
    )
