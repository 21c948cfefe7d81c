"""Fill the user-retrieve array with multicast vectors and replicate it into a MAPDA.

Every anchor (the subset A, or H for the single-subarray variant) gets the
same fill pattern up to an order-preserving relabelling of [Λ].  The pattern
is therefore built once on the canonical anchor {1, ..., m} and mapped to all
other anchors with numpy gathers.

Vector identifiers are integers ordered as (anchor lex rank, rotation,
sub-index); that order is also the order in which a cell's vectors are dealt
to the π copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .combinatorics import (
    Subset,
    binom,
    complement,
    enumerate_subsets,
    format_subset,
    ground_set,
    lcm_list,
    parse_subset,
)
from .errors import ConsistencyError, ConstraintError, InvalidParameterError, UnevenFillError
from .knapsack import (
    KnapsackInstance,
    KnapsackSolution,
    SolutionFamily,
    build_instance,
    canonical_anchor,
    check_theorem3,
    greedy_params,
    greedy_solution,
    rotate_family,
    solve_dp,
    theorem3_solution,
    theorem3_threshold,
)
from .mapda import Mapda, SchemeMetrics
from .placement import StarArray, SystemParams, group_columns, user_retrieve_array

MAX_GROUND = 24  # rank lookup tables have 2^Λ entries


@dataclass(frozen=True)
class FillVector:
    sub_index: int
    anchor: Subset
    rotation_index: int  # 1-based


@dataclass
class FilledArray:
    """U with vector lists on its Null cells, stored as parallel arrays.

    Placement j puts vector ``vec[j]`` into cell (``rows[j]``, ``cols[j]``)
    of ``base``.  A vector id decodes as ``(a * ell + h) * mu + (sub - 1)``
    with ``anchors[a]`` its anchor.
    """

    base: StarArray
    rows: np.ndarray
    cols: np.ndarray
    vec: np.ndarray
    anchors: list[Subset]
    ell: int
    mu: int
    antennas: int
    info: dict = field(default_factory=dict)
    _copy: np.ndarray | None = field(default=None, repr=False)
    _symbols: np.ndarray | None = field(default=None, repr=False)

    @property
    def ground(self) -> int:
        return self.base.ground

    def decode(self, vid: int) -> FillVector:
        a, rest = divmod(int(vid), self.ell * self.mu)
        h, sub = divmod(rest, self.mu)
        return FillVector(sub + 1, self.anchors[a], h + 1)

    def encode(self, v: FillVector) -> int:
        a = self.anchors.index(v.anchor)
        return (a * self.ell + v.rotation_index - 1) * self.mu + v.sub_index - 1

    @property
    def pi(self) -> int:
        """Vectors per Null cell; raises if the count is not uniform."""
        return self._lemma5()

    def _lemma5(self) -> int:
        null = ~self.base.cells
        counts = np.bincount(self.rows * null.shape[1] + self.cols, minlength=null.size).reshape(null.shape)
        if counts[~null].any():
            raise UnevenFillError("a star cell received vectors")
        per_null = counts[null]
        if per_null.size == 0:
            return 0
        pi = int(per_null[0])
        if (per_null != pi).any():
            raise UnevenFillError(
                f"Null cells hold between {per_null.min()} and {per_null.max()} vectors"
            )
        return pi

    def copy_index(self) -> np.ndarray:
        """0-based copy receiving each placement: its rank within the cell in vector-id order."""
        if self._copy is None:
            K = self.base.shape[1]
            cell = self.rows.astype(np.int64) * K + self.cols
            order = np.lexsort((self.vec, cell))
            sorted_cell = cell[order]
            starts = np.r_[0, np.flatnonzero(np.diff(sorted_cell)) + 1]
            run_start = np.repeat(starts, np.diff(np.r_[starts, sorted_cell.size]))
            copy = np.empty_like(order)
            copy[order] = np.arange(order.size) - run_start
            self._copy = copy
        return self._copy

    def symbol_ids(self) -> np.ndarray:
        """Symbol s in [S] of each placement, numbered by first appearance in row-major Q."""
        if self._symbols is None:
            nrows, K = self.base.shape
            pos = (self.copy_index().astype(np.int64) * nrows + self.rows) * K + self.cols
            uniq, inv = np.unique(self.vec, return_inverse=True)
            first = np.full(uniq.size, np.iinfo(np.int64).max, dtype=np.int64)
            np.minimum.at(first, inv, pos)
            rank = np.empty(uniq.size, dtype=np.int64)
            rank[np.argsort(first, kind="stable")] = np.arange(1, uniq.size + 1)
            self._symbols = rank[inv]
        return self._symbols

    @property
    def num_symbols(self) -> int:
        return int(np.unique(self.vec).size)

    def symbol_table(self) -> dict[FillVector, int]:
        vids, first = np.unique(self.vec, return_index=True)
        syms = self.symbol_ids()[first]
        return {self.decode(v): int(s) for v, s in zip(vids.tolist(), syms.tolist())}

    def cell_vectors(self) -> dict[tuple[Subset, Subset], list[FillVector]]:
        out: dict[tuple[Subset, Subset], list[int]] = {}
        for r, c, v in zip(self.rows.tolist(), self.cols.tolist(), self.vec.tolist()):
            out.setdefault((self.base.row_labels[r], self.base.col_labels[c]), []).append(v)
        return {k: [self.decode(v) for v in sorted(vs)] for k, vs in out.items()}

    # -- compact JSON ------------------------------------------------------

    def to_compact_json(self) -> dict:
        n = self.ground
        fmt = lambda s: format_subset(s, n)  # noqa: E731
        order = np.lexsort((self.vec, self.cols, self.rows))
        vectors: dict[str, list] = {}
        for j in order.tolist():
            key = f"{fmt(self.base.row_labels[self.rows[j]])}|{fmt(self.base.col_labels[self.cols[j]])}"
            v = self.decode(self.vec[j])
            vectors.setdefault(key, []).append([v.sub_index, fmt(v.anchor), v.rotation_index])
        return {
            "compact": True,
            "ground": n,
            "pi": self.pi,
            "ell": self.ell,
            "mu": self.mu,
            "anchors": [fmt(a) for a in self.anchors],
            "base_rows": [fmt(T) for T in self.base.row_labels],
            "cols": [fmt(D) for D in self.base.col_labels],
            "vectors": vectors,
        }

    @classmethod
    def from_compact_json(cls, data: dict) -> "FilledArray":
        n = int(data["ground"])
        row_labels = [parse_subset(s, n) for s in data["base_rows"]]
        col_labels = [parse_subset(s, n) for s in data["cols"]]
        t, r = len(row_labels[0]), len(col_labels[0])
        base = user_retrieve_array(n, t, r)
        if base.row_labels != row_labels or base.col_labels != col_labels:
            raise InvalidParameterError("compact array labels are not in canonical order")
        anchors = [parse_subset(s, n) for s in data["anchors"]]
        a_index = {a: i for i, a in enumerate(anchors)}
        r_index = {s: i for i, s in enumerate(row_labels)}
        c_index = {s: i for i, s in enumerate(col_labels)}
        ell, mu = int(data["ell"]), int(data["mu"])
        rows, cols, vec = [], [], []
        for key, vs in data["vectors"].items():
            ts, ds = key.split("|")
            ri, ci = r_index[parse_subset(ts, n)], c_index[parse_subset(ds, n)]
            for sub, anchor, rot in vs:
                rows.append(ri)
                cols.append(ci)
                vec.append((a_index[parse_subset(anchor, n)] * ell + rot - 1) * mu + sub - 1)
        return cls(base, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                   np.array(vec, dtype=np.int64), anchors, ell, mu, int(data["L"]))


# ------------------------------------------------------------ template engine


@dataclass
class _Template:
    """Placements on the canonical anchor: element lists of T and D plus a local id."""

    T: list[Subset] = field(default_factory=list)
    D: list[Subset] = field(default_factory=list)
    local: list[int] = field(default_factory=list)

    def add(self, T: Subset, D: Subset, local: int) -> None:
        self.T.append(T)
        self.D.append(D)
        self.local.append(local)


def _rank_table(lam: int, k: int) -> np.ndarray:
    if lam > MAX_GROUND:
        raise InvalidParameterError(f"Λ={lam} exceeds the supported ground size {MAX_GROUND}")
    table = np.full(1 << lam, -1, dtype=np.int64)
    for i, S in enumerate(enumerate_subsets(ground_set(lam), k)):
        table[sum(1 << (x - 1) for x in S)] = i
    return table


def _relabel(lam: int, anchor: Subset) -> np.ndarray:
    """Map sending {1..m} onto ``anchor`` and {m+1..Λ} onto its complement, both order-preserving."""
    sigma = np.zeros(lam + 1, dtype=np.int64)
    sigma[1:] = list(anchor) + list(complement(anchor, lam))
    return sigma


def _masks(elems: np.ndarray) -> np.ndarray:
    if elems.shape[-1] == 0:
        return np.zeros(elems.shape[:-1], dtype=np.int64)
    return np.left_shift(np.int64(1), elems - 1).sum(axis=-1)


def _apply_template(
    lam: int, t: int, r: int, tpl: _Template, anchors: Sequence[Subset], anchor_ids: np.ndarray, block: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Place the template under every anchor; vector id = anchor_id * block + local."""
    sig = np.stack([_relabel(lam, a) for a in anchors])  # (nA, Λ+1)
    T = np.array(tpl.T, dtype=np.int64).reshape(len(tpl.T), t)
    D = np.array(tpl.D, dtype=np.int64).reshape(len(tpl.D), r)
    local = np.array(tpl.local, dtype=np.int64)
    row_rank = _rank_table(lam, t)[_masks(sig[:, T])]
    col_rank = _rank_table(lam, r)[_masks(sig[:, D])]
    vec = anchor_ids[:, None] * block + local[None, :]
    return row_rank.ravel(), col_rank.ravel(), vec.ravel()


def _check_single_fill(rows: np.ndarray, cols: np.ndarray, vec: np.ndarray, K: int) -> None:
    key = (vec.astype(np.int64) * (rows.max(initial=0) + 1) + rows) * K + cols
    if np.unique(key).size != key.size:
        raise ConsistencyError("a vector was placed twice into the same cell")


# ------------------------------------------------------------ knapsack-driven assembly


def _family_template(p: SystemParams, inst: KnapsackInstance, family: SolutionFamily) -> _Template:
    A0 = inst.anchor
    tpl = _Template()
    mu = family.mu
    for h, rot in enumerate(family.rotations):
        for item, xi in zip(inst.items, rot.x):
            if not xi:
                continue
            reps = mu // item.col_nulls
            for D in group_columns(p, A0, item.group):
                rest = [x for x in A0 if x not in D]
                nulls = enumerate_subsets(rest, p.t)
                if len(nulls) != item.col_nulls:
                    raise ConsistencyError(f"column {D} has {len(nulls)} Null rows, expected {item.col_nulls}")
                for n, T in enumerate(nulls):
                    for c in range(reps):
                        tpl.add(T, D, h * mu + n * reps + c)
    return tpl


def fill_subarray(
    f: FilledArray | None, p: SystemParams, A: Sequence[int], family: SolutionFamily,
    inst: KnapsackInstance | None = None,
) -> FilledArray:
    """Fill the Null cells selected by ``family`` under anchor A.

    ``f`` accumulates placements across calls; pass None to start a new
    filled array over U.  The anchor is appended to ``f.anchors`` so its
    vectors get the next anchor index.
    """
    A = tuple(sorted(A))
    if inst is None:
        inst = build_instance(p, A)
    if f is None:
        base = user_retrieve_array(p)
        f = FilledArray(base, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64),
                        [], family.ell, family.mu, p.L)
    if (f.ell, f.mu) != (family.ell, family.mu):
        raise ConsistencyError("families under different anchors must share (ℓ, μ)")
    canon = build_instance(p, canonical_anchor(p))
    tpl = _family_template(p, canon, family)
    a_id = len(f.anchors)
    rows, cols, vec = _apply_template(p.lam, p.t, p.r, tpl, [A], np.array([a_id]), f.ell * f.mu)
    f.anchors.append(A)
    f.rows = np.concatenate([f.rows, rows])
    f.cols = np.concatenate([f.cols, cols])
    f.vec = np.concatenate([f.vec, vec])
    f._copy = f._symbols = None
    _check_single_fill(f.rows, f.cols, f.vec, f.base.shape[1])
    return f


def replicate(f: FilledArray) -> Mapda:
    """Stack π copies of U; copy c shows the c-th vector of every Null cell."""
    pi = f.pi
    nrows, K = f.base.shape
    copy = f.copy_index()
    syms = f.symbol_ids()
    Q = np.zeros((pi * nrows, K), dtype=np.int64)
    Q[copy * nrows + f.rows, f.cols] = syms
    n = f.ground
    row_labels = [f"{c + 1}:{format_subset(T, n)}" for c in range(pi) for T in f.base.row_labels]
    col_labels = [format_subset(D, n) for D in f.base.col_labels]
    return Mapda(Q, f.antennas, f.num_symbols, row_labels, col_labels, source=f)


def solve_for(p: SystemParams, solver: str, inst: KnapsackInstance | None = None) -> KnapsackSolution:
    if inst is None:
        inst = build_instance(p, canonical_anchor(p))
    if solver == "dp":
        return solve_dp(inst)
    if solver == "greedy":
        return greedy_solution(p, inst)[1]
    if solver == "thm3":
        return theorem3_solution(p, inst)
    raise InvalidParameterError(f"unknown solver {solver!r}; expected dp, greedy or thm3")


def theorem1_family(p: SystemParams, solver: str = "dp") -> tuple[KnapsackInstance, SolutionFamily]:
    A0 = canonical_anchor(p)
    inst = build_instance(p, A0)
    base = solve_for(p, solver, inst)
    return inst, rotate_family(p, A0, base, inst)


def theorem1_metrics(p: SystemParams, family: SolutionFamily) -> SchemeMetrics:
    """Closed-form (F, Z, S, g) of the knapsack-driven array built from ``family``."""
    lam, r, t, b = p.lam, p.r, p.t, p.b
    pi = 0
    for lr in family.per_level:
        num = binom(r, r - lr.level) * binom(lam - t - r, lr.level - b) * family.ell * lr.q * family.mu
        den = lr.p * lr.u
        if num % den:
            raise ConsistencyError(f"non-integral vector count at level {lr.level}")
        pi += num // den
    S = family.ell * family.mu * binom(lam, p.anchor_size)
    return _metrics_from(p, pi, S, Fraction(family.base.phi))


def _metrics_from(p: SystemParams, pi: int, S: int, g: Fraction) -> SchemeMetrics:
    rows = binom(p.lam, p.t)
    return SchemeMetrics(p.L, p.K, pi * rows, pi * (rows - binom(p.lam - p.r, p.t)), S, Fraction(g))


def choose_b(p: SystemParams, solver: str = "dp") -> SystemParams:
    """Best b in [0, r-1]: largest g, then smallest F, then smallest b."""
    best = None
    for b in range(p.r):
        q = p.with_(shift_b=b)
        m = theorem1_metrics(q, theorem1_family(q, solver)[1])
        key = (-m.sum_dof, m.F, b)
        if best is None or key < best[0]:
            best = (key, q)
    return best[1]


def construct_theorem1(p: SystemParams, solver: str = "dp", b_mode: str = "fixed") -> Mapda:
    """Solve once on the canonical anchor, rotate, fill every anchor, replicate."""
    if b_mode == "auto":
        p = choose_b(p, solver)
    elif b_mode != "fixed":
        raise InvalidParameterError(f"unknown b mode {b_mode!r}")
    inst, family = theorem1_family(p, solver)
    tpl = _family_template(p, inst, family)
    anchors = enumerate_subsets(ground_set(p.lam), p.anchor_size)
    rows, cols, vec = _apply_template(
        p.lam, p.t, p.r, tpl, anchors, np.arange(len(anchors)), family.ell * family.mu
    )
    base = user_retrieve_array(p)
    _check_single_fill(rows, cols, vec, base.shape[1])
    f = FilledArray(base, rows, cols, vec, anchors, family.ell, family.mu, p.L,
                    info={"method": "thm1", "solver": solver, "b": p.b, "x": list(family.base.x),
                          "phi": family.base.phi, "ell": family.ell, "mu": family.mu})
    return replicate(f)


# ------------------------------------------------------------ complement merge


def check_theorem4(p: SystemParams) -> None:
    lam, r, t, b, L = p.lam, p.r, p.t, p.b, p.L
    if not b < r < 2 * b:
        raise ConstraintError("b < r < 2b", f"b={b}, r={r}")
    if not t + r > 2 * b:
        raise ConstraintError("t + r > 2b", f"t={t}, r={r}, b={b}")
    if lam != 2 * (t + r - b):
        raise ConstraintError("Λ = 2(t + r - b)", f"Λ={lam}, 2(t+r-b)={2 * (t + r - b)}")
    if L > binom(t + r - b, b):
        raise ConstraintError("L <= C(t+r-b, b)", f"L={L}, C(t+r-b,b)={binom(t + r - b, b)}")


def theorem4_solution(p: SystemParams, inst: KnapsackInstance) -> KnapsackSolution:
    """The L lex-first groups at level b; nothing else."""
    x, taken = [], 0
    for it in inst.items:
        take = it.level == p.b and taken < p.L
        taken += take
        x.append(int(take))
    return inst.evaluate(x)


def construct_theorem4(p: SystemParams) -> Mapda:
    """Fill every anchor with the level-b solution and merge each anchor with its complement.

    Vectors of A and of [Λ] \\ A with the same rotation index are identified
    under the lex-smaller of the two anchors.
    """
    check_theorem4(p)
    A0 = canonical_anchor(p)
    inst = build_instance(p, A0)
    family = rotate_family(p, A0, theorem4_solution(p, inst), inst)
    if family.mu != 1:
        raise ConsistencyError(f"level-b columns should hold one Null each, got μ={family.mu}")
    tpl = _family_template(p, inst, family)
    anchors = enumerate_subsets(ground_set(p.lam), p.anchor_size)
    reps = sorted({min(A, complement(A, p.lam)) for A in anchors})
    rep_index = {A: i for i, A in enumerate(reps)}
    pair_ids = np.array([rep_index[min(A, complement(A, p.lam))] for A in anchors])
    rows, cols, vec = _apply_template(p.lam, p.t, p.r, tpl, anchors, pair_ids, family.ell)
    base = user_retrieve_array(p)
    _check_merge(p, base, anchors, rows, cols, tpl)
    _check_single_fill(rows, cols, vec, base.shape[1])
    f = FilledArray(base, rows, cols, vec, reps, family.ell, 1, p.L,
                    info={"method": "thm4", "b": p.b, "x": list(family.base.x),
                          "phi": family.base.phi, "ell": family.ell, "mu": 1})
    return replicate(f)


def _check_merge(
    p: SystemParams, base: StarArray, anchors: list[Subset], rows: np.ndarray, cols: np.ndarray, tpl: _Template
) -> None:
    """Columns filled under an anchor must be all-star on the rows of its complement."""
    per = len(tpl.local)
    row_rank = {T: i for i, T in enumerate(base.row_labels)}
    for a, A in enumerate(anchors):
        partner_rows = [row_rank[T] for T in enumerate_subsets(complement(A, p.lam), p.t)]
        used = np.unique(cols[a * per:(a + 1) * per])
        if not base.cells[np.ix_(partner_rows, used)].all():
            raise ConsistencyError(f"merge of {A} with its complement would place integers on Null cells")


# ------------------------------------------------------------ single subarray


def check_theorem5(p: SystemParams, lambda_prime: int) -> None:
    if not p.t + p.r <= lambda_prime <= p.lam:
        raise ConstraintError("t + r <= Λ' <= Λ", f"Λ'={lambda_prime}")
    need = binom(lambda_prime - p.t, p.r)
    if need > p.L:
        raise ConstraintError("C(Λ'-t, r) <= L", f"C(Λ'-t,r)={need}, L={p.L}")


def construct_theorem5(p: SystemParams, lambda_prime: int) -> Mapda:
    """Fill U(C(H,t), C(H,r)) for every Λ'-subset H with one vector per Null."""
    check_theorem5(p, lambda_prime)
    H0 = tuple(range(1, lambda_prime + 1))
    mu = binom(lambda_prime - p.r, p.t)
    tpl = _Template()
    for D in enumerate_subsets(H0, p.r):
        rest = [x for x in H0 if x not in D]
        for n, T in enumerate(enumerate_subsets(rest, p.t)):
            tpl.add(T, D, n)
    anchors = enumerate_subsets(ground_set(p.lam), lambda_prime)
    rows, cols, vec = _apply_template(p.lam, p.t, p.r, tpl, anchors, np.arange(len(anchors)), mu)
    base = user_retrieve_array(p)
    _check_single_fill(rows, cols, vec, base.shape[1])
    f = FilledArray(base, rows, cols, vec, anchors, 1, mu, p.L,
                    info={"method": "thm5", "lambda_prime": lambda_prime})
    return replicate(f)


def best_lambda_prime(p: SystemParams) -> int:
    """Largest Λ' in [t+r, Λ] with C(Λ'-t, r) <= L."""
    ok = [lp for lp in range(p.t + p.r, p.lam + 1) if binom(lp - p.t, p.r) <= p.L]
    if not ok:
        raise ConstraintError("C(Λ'-t, r) <= L for some Λ' >= t + r", f"L={p.L}")
    return max(ok)


# ------------------------------------------------------------ predictors


def _lcm_binoms(t: int, upto: int) -> int:
    """LCM of C(t+j-1, t) over j = 1..upto."""
    return lcm_list(binom(t + j - 1, t) for j in range(1, upto + 1))


def _as_int(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise ConsistencyError(f"{what} = {x} is not an integer")
    return int(x)


def predict_greedy(p: SystemParams) -> SchemeMetrics:
    lam, r, t, b = p.lam, p.r, p.t, p.b
    gp = greedy_params(p)
    o, d, z = p.outside_size, gp.delta, gp.zeta
    d1 = math.lcm(binom(o, d), z)
    d2 = _lcm_binoms(t, d - b + 1)
    bracket = sum(
        (Fraction(binom(r, r - i) * binom(lam - t - r, i - b), z * binom(t + i - b, t)) for i in range(b, d)),
        Fraction(0),
    ) + Fraction(binom(r, r - d) * binom(lam - t - r, d - b), binom(o, d) * binom(t + d - b, t))
    pi = _as_int(d1 * d2 * bracket, "π")
    S = _as_int(Fraction(d1 * d2 * binom(lam, t + r - b), z), "S")
    g = sum(binom(o, i) * binom(t + r - b, r - i) for i in range(b, d)) + z * binom(t + r - b, r - d)
    return _metrics_from(p, pi, S, Fraction(g))


def predict_optimal(p: SystemParams) -> SchemeMetrics:
    p = p.with_(shift_b=0)
    check_theorem3(p)
    lam, r, t, L = p.lam, p.r, p.t, p.L
    top = binom(lam - t - r, r)
    q = min(L - theorem3_threshold(p), top)
    g = p.K + (theorem3_threshold(p) + q) - binom(lam - t, r)
    lower = sum(
        (Fraction(binom(r, r - i) * binom(lam - t - r, i), binom(t + i, t)) for i in range(r)), Fraction(0)
    )
    if q == 0:
        d3 = _lcm_binoms(t, r)
        pi = _as_int(d3 * lower, "π")
        S = d3 * binom(lam, t + r)
    else:
        d4 = _lcm_binoms(t, r + 1)
        d5 = math.lcm(top, q)
        pi = _as_int(d4 * d5 * (lower / q + Fraction(1, binom(t + r, t))), "π")
        S = _as_int(Fraction(d4 * d5 * binom(lam, t + r), q), "S")
    return _metrics_from(p, pi, S, Fraction(g))


def predict_merged(p: SystemParams) -> SchemeMetrics:
    check_theorem4(p)
    lam, r, t, b, L = p.lam, p.r, p.t, p.b, p.L
    beta = math.gcd(binom(lam - t - r + b, b), L)
    pi = binom(r, b) * L // beta
    S = _as_int(Fraction(binom(lam, t + r - b) * binom(lam - t - r + b, b), 2 * beta), "S")
    return _metrics_from(p, pi, S, Fraction(2 * L * binom(t + r - b, t)))


def predict_single(p: SystemParams, lambda_prime: int | None = None) -> SchemeMetrics:
    lp = best_lambda_prime(p) if lambda_prime is None else lambda_prime
    check_theorem5(p, lp)
    pi = binom(p.lam - p.t - p.r, lp - p.t - p.r)
    S = binom(lp - p.r, p.t) * binom(p.lam, lp)
    return _metrics_from(p, pi, S, Fraction(binom(lp, p.r)))


_PREDICTORS = {
    "thm2": predict_greedy,
    "co1": predict_greedy,
    "thm3": predict_optimal,
    "co2": predict_optimal,
    "thm4": predict_merged,
    "co3": predict_merged,
}


def predict_metrics(p: SystemParams, which: str, lambda_prime: int | None = None) -> SchemeMetrics:
    """Closed-form (F, Z, S, g) of a named theorem or corollary."""
    if which in ("thm5", "co4"):
        return predict_single(p, lambda_prime)
    try:
        return _PREDICTORS[which](p)
    except KeyError:
        raise InvalidParameterError(
            f"unknown scheme {which!r}; expected one of thm2..thm5, co1..co4"
        ) from None


def iter_sweep(
    lams: Iterable[int] = range(3, 9), max_r: int = 4, max_t: int = 4, max_L: int = 12
) -> Iterable[SystemParams]:
    """Every valid (Λ, r, t, b, L) in the desk-scale sweep."""
    for lam in lams:
        for r in range(1, min(max_r, lam - 1) + 1):
            for t in range(1, min(max_t, lam - r) + 1):
                for b in range(r):
                    for L in range(1, max_L + 1):
                        yield SystemParams(lam, r, t, L, b)


__all__: list[str] = [
    "FillVector",
    "FilledArray",
    "fill_subarray",
    "replicate",
    "construct_theorem1",
    "construct_theorem4",
    "construct_theorem5",
    "predict_metrics",
    "theorem1_metrics",
    "theorem1_family",
    "choose_b",
    "best_lambda_prime",
    "iter_sweep",
]
