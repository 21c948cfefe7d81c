"""The 0-1 knapsack over column groups, its solvers and the rotated solution family."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .combinatorics import Subset, binom, cyclic_regular_design, lcm_list
from .errors import ConstraintError, InvalidSolutionError, OracleLimitError
from .placement import SystemParams, _check_anchor, group_stats, knapsack_levels, partition_columns

BRUTE_LIMIT = 24


@dataclass(frozen=True)
class Item:
    group: Subset
    level: int
    weight: int  # z: Null entries per row
    value: int  # v: column count
    col_nulls: int  # u: Null entries per column


@dataclass(frozen=True)
class KnapsackInstance:
    items: tuple[Item, ...]
    capacity: int
    anchor: Subset = ()

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def weights(self) -> list[int]:
        return [it.weight for it in self.items]

    @property
    def values(self) -> list[int]:
        return [it.value for it in self.items]

    def evaluate(self, x: Sequence[int]) -> "KnapsackSolution":
        if len(x) != self.n or any(xi not in (0, 1) for xi in x):
            raise InvalidSolutionError(f"selection must be a 0/1 vector of length {self.n}")
        phi = sum(it.value for it, xi in zip(self.items, x) if xi)
        psi = sum(it.weight for it, xi in zip(self.items, x) if xi)
        return KnapsackSolution(x=tuple(int(v) for v in x), phi=phi, psi=psi,
                                groups=tuple(it.group for it in self.items))

    def to_json(self, fmt) -> dict:
        return {
            "items": [
                {"group": fmt(it.group), "level": it.level, "z": it.weight, "v": it.value, "u": it.col_nulls}
                for it in self.items
            ],
            "L": self.capacity,
        }


@dataclass(frozen=True)
class KnapsackSolution:
    x: tuple[int, ...]
    phi: int
    psi: int
    groups: tuple[Subset, ...]

    @property
    def selected(self) -> dict[Subset, int]:
        return dict(zip(self.groups, self.x))

    @property
    def selected_groups(self) -> list[Subset]:
        return [g for g, xi in zip(self.groups, self.x) if xi]


def build_instance(p: SystemParams, A: Sequence[int]) -> KnapsackInstance:
    """One item per group at the levels holding Null cells, ordered by level then lex."""
    A = _check_anchor(p, A)
    levels = set(knapsack_levels(p))
    items = []
    for G in partition_columns(p, A):
        if len(G) not in levels:
            continue
        st = group_stats(p, A, G)
        items.append(Item(G, st.level, st.nulls_per_row, st.cols, st.nulls_per_col))
    return KnapsackInstance(tuple(items), p.L, A)


def canonical_anchor(p: SystemParams) -> Subset:
    return tuple(range(1, p.anchor_size + 1))


def transfer(sol: KnapsackSolution, inst: KnapsackInstance) -> KnapsackSolution:
    """Carry a selection to another anchor's instance by item position.

    Instances for different anchors list their groups in the same level/lex
    pattern, so position i always plays the same role.
    """
    if len(sol.x) != inst.n:
        raise InvalidSolutionError(f"selection length {len(sol.x)} does not match n={inst.n}")
    return inst.evaluate(sol.x)


def solve_dp(inst: KnapsackInstance) -> KnapsackSolution:
    """Exact dynamic program over (item suffix, remaining capacity).

    Among all optimal selections, the lexicographically largest 0/1 vector
    is returned, so earlier items (lower level, lex-smaller group) win ties.
    """
    cap = max(inst.capacity, 0)
    n = inst.n
    best = np.zeros((n + 1, cap + 1), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        w, v = inst.items[i].weight, inst.items[i].value
        best[i] = best[i + 1]
        if w <= cap:
            take = best[i + 1, : cap + 1 - w] + v
            best[i, w:] = np.maximum(best[i + 1, w:], take)
    x = []
    c = cap
    for i in range(n):
        w, v = inst.items[i].weight, inst.items[i].value
        if w <= c and best[i + 1, c - w] + v == best[i, c]:
            x.append(1)
            c -= w
        else:
            x.append(0)
    sol = inst.evaluate(x)
    assert sol.phi == best[0, cap]
    return sol


def solve_brute(inst: KnapsackInstance) -> KnapsackSolution:
    """Exhaustive search over all 2^n selections, same tie-break as :func:`solve_dp`."""
    n = inst.n
    if n > BRUTE_LIMIT:
        raise OracleLimitError(f"brute force limited to n <= {BRUTE_LIMIT}, got n={n}")
    if n == 0:
        return inst.evaluate(())
    w = np.array(inst.weights, dtype=np.int64)
    v = np.array(inst.values, dtype=np.int64)
    # bit (n-1-i) of the mask is x_i, so integer order equals lex order of x
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_phi, best_mask = -1, -1
    chunk = 1 << 18
    total = 1 << n
    for start in range(0, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (masks[:, None] >> shifts[None, :]) & 1
        psi = bits @ w
        phi = np.where(psi <= inst.capacity, bits @ v, -1)
        top = phi.max()
        if top < best_phi:
            continue
        cand = masks[phi == top].max()
        if top > best_phi or cand > best_mask:
            best_phi, best_mask = int(top), int(cand)
    x = [(best_mask >> (n - 1 - i)) & 1 for i in range(n)]
    return inst.evaluate(x)


def solve_level_counts(inst: KnapsackInstance) -> int:
    """Optimal φ by enumerating how many items to take at each level.

    Items sharing a level have identical weight and value, so this search
    over count vectors is exhaustive.  Used as an oracle when n is too large
    for :func:`solve_brute`.
    """
    levels: dict[int, list[Item]] = {}
    for it in inst.items:
        levels.setdefault(it.level, []).append(it)
    spec = [(len(its), its[0].weight, its[0].value) for its in levels.values()]
    best = 0
    for counts in product(*(range(n + 1) for n, _, _ in spec)):
        psi = sum(c * w for c, (_, w, _) in zip(counts, spec))
        if psi <= inst.capacity:
            best = max(best, sum(c * v for c, (_, _, v) in zip(counts, spec)))
    return best


@dataclass(frozen=True)
class GreedyParams:
    delta: int
    eta: int
    zeta: int
    fallback: bool = False  # True when no level met the defining inequality


def greedy_params(p: SystemParams) -> GreedyParams:
    levels = list(knapsack_levels(p))
    o, r, b = p.outside_size, p.r, p.b
    running = 0
    delta = None
    for k in levels:
        running += binom(o, k) * binom(r - b, r - k)
        if p.L - running < (binom(r - b, r - k - 1) if r - k - 1 >= 0 else 0):
            delta = k
            break
    fallback = delta is None
    if fallback:
        delta = levels[-1]
    eta = p.L - sum(binom(o, i) * binom(r - b, r - i) for i in range(b, delta + 1))
    p_delta = binom(o, delta)
    zeta = min(p_delta + eta // binom(r - b, r - delta), p_delta)
    return GreedyParams(delta, eta, zeta, fallback)


def greedy_solution(
    p: SystemParams, inst: KnapsackInstance | None = None
) -> tuple[GreedyParams, KnapsackSolution]:
    """Take every group below level δ and the lex-first ζ groups at level δ."""
    if inst is None:
        inst = build_instance(p, canonical_anchor(p))
    gp = greedy_params(p)
    x = []
    taken_at_delta = 0
    for it in inst.items:
        if it.level < gp.delta:
            x.append(1)
        elif it.level == gp.delta and taken_at_delta < gp.zeta:
            x.append(1)
            taken_at_delta += 1
        else:
            x.append(0)
    return gp, inst.evaluate(x)


def theorem3_threshold(p: SystemParams) -> int:
    """C(Λ-t, r) - C(Λ-t-r, r): total weight of all levels below r when b = 0."""
    return binom(p.lam - p.t, p.r) - binom(p.lam - p.t - p.r, p.r)


def check_theorem3(p: SystemParams) -> None:
    if p.b != 0:
        raise ConstraintError("b = 0", f"got b={p.b}")
    if p.lam < 2 * p.r + p.t:
        raise ConstraintError("Λ >= 2r + t", f"Λ={p.lam}, 2r+t={2 * p.r + p.t}")
    thr = theorem3_threshold(p)
    if p.L < thr:
        raise ConstraintError("L >= C(Λ-t,r) - C(Λ-t-r,r)", f"L={p.L}, threshold={thr}")


def theorem3_solution(
    p: SystemParams, inst: KnapsackInstance | None = None
) -> KnapsackSolution:
    """All groups at levels 0..r-1 plus L - threshold lex-first groups at level r.

    The level-r count is capped at C(Λ-t-r, r), the number of groups there.
    """
    check_theorem3(p)
    if inst is None:
        inst = build_instance(p, canonical_anchor(p))
    extra = min(p.L - theorem3_threshold(p), binom(p.lam - p.t - p.r, p.r))
    x = []
    taken = 0
    for it in inst.items:
        if it.level < p.r:
            x.append(1)
        elif taken < extra:
            x.append(1)
            taken += 1
        else:
            x.append(0)
    return inst.evaluate(x)


@dataclass(frozen=True)
class LevelRotation:
    level: int
    p: int  # groups available at the level
    q: int  # groups selected by the base solution
    ell: int  # LCM(p, q)
    u: int  # Null entries per column for this level


@dataclass(frozen=True)
class SolutionFamily:
    base: KnapsackSolution
    rotations: tuple[KnapsackSolution, ...]
    per_level: tuple[LevelRotation, ...]
    ell: int
    mu: int

    def selections(self, group: Subset) -> int:
        idx = self.base.groups.index(group)
        return sum(rot.x[idx] for rot in self.rotations)


def rotate_family(
    p: SystemParams, A: Sequence[int], base: KnapsackSolution, inst: KnapsackInstance | None = None
) -> SolutionFamily:
    """Spread the base selection evenly over each level with cyclic regular designs.

    At a used level with p groups and q selected, the groups are numbered
    selected-first (lex) then unselected (lex); block 1 of the (p, q) design
    is then the base itself.  Rotation h (0-based) takes block h mod (ℓ_j/q_j)
    at level j, and ℓ = LCM over levels of ℓ_j/q_j.
    """
    if inst is None:
        inst = build_instance(p, A)
    if len(base.x) != inst.n:
        raise InvalidSolutionError(f"selection length {len(base.x)} does not match n={inst.n}")
    check = inst.evaluate(base.x)
    if check.psi > inst.capacity:
        raise InvalidSolutionError(f"base solution has weight {check.psi} > L={inst.capacity}")
    if check.phi == 0:
        raise InvalidSolutionError("base solution selects no group")

    by_level: dict[int, list[int]] = {}
    for idx, it in enumerate(inst.items):
        by_level.setdefault(it.level, []).append(idx)

    per_level = []
    orders = []
    designs = []
    for level, idxs in by_level.items():
        chosen = [i for i in idxs if base.x[i]]
        if not chosen:
            continue
        rest = [i for i in idxs if not base.x[i]]
        pj, qj = len(idxs), len(chosen)
        design = cyclic_regular_design(pj, qj)
        per_level.append(LevelRotation(level, pj, qj, design.block_size * len(design.blocks),
                                       inst.items[idxs[0]].col_nulls))
        orders.append(chosen + rest)
        designs.append(design)

    ell = lcm_list(lr.ell // lr.q for lr in per_level)
    mu = lcm_list(lr.u for lr in per_level)
    rotations = []
    for h in range(ell):
        x = [0] * inst.n
        for order, design in zip(orders, designs):
            block = design.blocks[h % len(design.blocks)]
            for point in block:
                x[order[point - 1]] = 1
        rotations.append(inst.evaluate(x))
    return SolutionFamily(check, tuple(rotations), tuple(per_level), ell, mu)
