"""One-shot zero-forcing delivery over a real Gaussian MISO channel.

Each integer s of a MAPDA is one transmission block.  User k served in
block s wants the packet of row f_k; its beamformer v_k has unit gain at k
and nulls at every other served user whose row f_k entry is an integer
(that user lacks the packet and cannot cancel it).  Receivers subtract the
terms whose packets they cache and keep the rest.

The batched engine works on constraint *sets*: every precoder whose
constraint users form the set S is a column of the pseudo-inverse of H_S,
so one factorization per distinct set and trial serves all of them, and
arrays sharing (K, L) share channels and therefore factorizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ChannelDegeneracyError, InvalidArrayError, UnknownSymbolError
from .mapda import STAR, Mapda

COND_LIMIT = 1e8
RESAMPLE_BUDGET = 3
TOLERANCE = 1e-8
_CHUNK_FLOATS = 4_000_000  # working-set cap per trial chunk


@dataclass
class Channel:
    """K x L real gains; row k is user k's channel vector."""

    gains: np.ndarray
    seed: int | None = None
    attempt: int = 0

    def resampled(self) -> "Channel":
        if self.seed is None:
            raise ChannelDegeneracyError("fixed channel cannot be resampled")
        K, L = self.gains.shape
        return _draw(K, L, self.seed, self.attempt + 1)


def _draw(K: int, L: int, seed: int, attempt: int) -> Channel:
    rng = np.random.default_rng(seed if attempt == 0 else [seed, attempt])
    return Channel(rng.standard_normal((K, L)), seed, attempt)


def gen_channel(k_active: int, L: int, seed: int) -> Channel:
    if k_active < 1 or L < 1:
        raise ValueError(f"need k_active, L >= 1, got ({k_active}, {L})")
    return _draw(k_active, L, seed, 0)


def conditioning(A: np.ndarray) -> np.ndarray:
    """max(σ_max, 1)/σ_min over the last two axes; inf when rank-deficient.

    The plain ratio σ_max/σ_min misses uniformly tiny gains, so σ_max is
    floored at 1.
    """
    sv = np.linalg.svd(A, compute_uv=False)
    smin, smax = sv[..., -1], sv[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(smin > 0, np.maximum(smax, 1.0) / smin, np.inf)


@dataclass
class BlockPlan:
    symbol: int
    served: list[tuple[int, int]]  # (user k, packet row f_k), 0-based
    precoders: np.ndarray  # L x r_s, column j serves served[j]
    constraints: list[list[int]]  # users each column is pinned at (own user first)


@dataclass
class DeliveryReport:
    max_residual: float
    all_decoded: bool
    measured_dof: Fraction
    trials: int = 1
    resamples: int = 0
    tolerance: float = TOLERANCE
    blocks: list[BlockPlan] = field(default_factory=list)

    def to_json(self) -> dict:
        dof = self.measured_dof
        return {
            "all_decoded": self.all_decoded,
            "max_residual": self.max_residual,
            "measured_dof": int(dof) if dof.denominator == 1 else str(dof),
            "trials": self.trials,
            "resamples": self.resamples,
        }


# ------------------------------------------------------------ single block


def _block_constraints(q: Mapda, s: int) -> tuple[list[tuple[int, int]], list[list[int]]]:
    rows, cols = np.nonzero(q.entries == s)
    if rows.size == 0:
        raise UnknownSymbolError(s)
    order = np.argsort(cols, kind="stable")
    rows, cols = rows[order], cols[order]
    served = [(int(k), int(f)) for f, k in zip(rows, cols)]
    cons = []
    for k, f in served:
        others = [int(u) for u in cols if u != k and q.entries[f, u] != STAR]
        if 1 + len(others) > q.L:
            raise InvalidArrayError(
                f"block {s} asks {1 + len(others)} constraints of a {q.L}-antenna precoder (C4 fails)"
            )
        cons.append([k] + others)
    return served, cons


def build_precoders(
    q: Mapda, s: int, demand: Sequence[int] | None, ch: Channel,
    cond_limit: float = COND_LIMIT, budget: int = RESAMPLE_BUDGET,
) -> BlockPlan:
    """Zero-forcing beamformers of block s, one least-norm solve per served user.

    The precoders do not depend on the demand; the argument is accepted for
    symmetry with :func:`simulate`.  An ill-conditioned system triggers a
    redraw of a seeded channel, at most ``budget`` times.
    """
    served, cons = _block_constraints(q, s)
    while True:
        mats = [ch.gains[c] for c in cons]
        worst = max(float(conditioning(A)) for A in mats)
        if worst <= cond_limit:
            break
        if ch.seed is None or ch.attempt >= budget:
            raise ChannelDegeneracyError(
                f"block {s}: conditioning {worst:.3g} above {cond_limit:g} after {ch.attempt} resamples"
            )
        ch = ch.resampled()
    V = np.empty((q.L, len(served)))
    for j, A in enumerate(mats):
        e1 = np.zeros(A.shape[0])
        e1[0] = 1.0
        V[:, j] = np.linalg.lstsq(A, e1, rcond=None)[0]
    return BlockPlan(int(s), served, V, cons)


# ------------------------------------------------------------ batched engine


@dataclass
class DeliveryPlan:
    """Channel-free description of every block of one MAPDA.

    Occurrences (integer cells) are sorted by symbol and then user.  Each
    occurrence j has a constraint set (users that must see unit gain or a
    null) stored as ``set_users[set_c[j]][set_id[j]]``, plus the position
    ``pos_own[j]`` of its own user in that set.  A pair (src, dst) says the
    user of occurrence dst cannot cancel the packet of occurrence src, so
    that term stays in dst's received signal; ``pair_pos[i]`` is where
    dst's user sits inside src's set.
    """

    K: int
    L: int
    F: int
    num_symbols: int
    user: np.ndarray
    row: np.ndarray
    set_users: dict[int, np.ndarray]  # c -> (n_c, c) ascending user lists
    set_id: np.ndarray
    set_c: np.ndarray
    pair_src: np.ndarray
    pair_dst: np.ndarray
    pair_pos: np.ndarray
    pos_own: np.ndarray

    @property
    def occurrences(self) -> int:
        return int(self.user.size)

    @property
    def measured_dof(self) -> Fraction:
        return Fraction(self.occurrences, self.num_symbols) if self.num_symbols else Fraction(0)


def plan(q: Mapda) -> DeliveryPlan:
    """Vectorized block analysis; raises InvalidArrayError when a precoder would be overdetermined."""
    e = q.entries
    K = q.K
    rows, cols = np.nonzero(e)
    syms = e[rows, cols]
    order = np.lexsort((cols, syms))
    rows, cols, syms = rows[order], cols[order], syms[order]
    n = syms.size
    starts = np.r_[0, np.flatnonzero(np.diff(syms)) + 1] if n else np.zeros(0, np.int64)
    sizes = np.diff(np.r_[starts, n])

    src_l, dst_l, pos_l = [], [], []
    mask = np.zeros((n, K), dtype=bool)
    for g in np.unique(sizes):
        idx = starts[sizes == g][:, None] + np.arange(g)[None, :]  # (B, g)
        u, f = cols[idx], rows[idx]
        # keep[b, a, d]: the user of position d has an integer in the packet row of a
        keep = e[f[:, :, None], u[:, None, :]] != STAR
        c = keep.sum(axis=2)
        if (c > q.L).any():
            b, a = np.argwhere(c > q.L)[0]
            raise InvalidArrayError(
                f"block {syms[idx[b, a]]} asks {c[b, a]} constraints of a {q.L}-antenna precoder (C4 fails)"
            )
        bb, aa, dd = np.nonzero(keep)
        src, dst = idx[bb, aa], idx[bb, dd]
        mask[src, cols[dst]] = True
        # users ascend inside a block, so the rank among kept positions is the set position
        rank = np.cumsum(keep, axis=2) - 1
        src_l.append(src)
        dst_l.append(dst)
        pos_l.append(rank[bb, aa, dd])
    empty = np.zeros(0, np.int64)
    pair_src = np.concatenate(src_l) if src_l else empty
    pair_dst = np.concatenate(dst_l) if dst_l else empty
    pair_pos = np.concatenate(pos_l) if pos_l else empty
    own = pair_src == pair_dst
    pos_own = np.empty(n, dtype=np.int64)
    pos_own[pair_src[own]] = pair_pos[own]

    set_c = mask.sum(axis=1)
    set_id = np.empty(n, dtype=np.int64)
    set_users: dict[int, np.ndarray] = {}
    for c in np.unique(set_c).tolist():
        sel = np.flatnonzero(set_c == c)
        uniq, inv = np.unique(np.packbits(mask[sel], axis=1), axis=0, return_inverse=True)
        set_users[c] = np.nonzero(np.unpackbits(uniq, axis=1, count=K))[1].reshape(-1, c)
        set_id[sel] = inv.ravel()
    return DeliveryPlan(K, q.L, q.F, q.S, cols, rows, set_users, set_id, set_c,
                        pair_src, pair_dst, pair_pos, pos_own)


def _solve_sets(H: np.ndarray, set_users: dict[int, np.ndarray]) -> tuple[dict, dict]:
    """Set gains and conditioning for every set and trial.

    ``G[c]`` has shape (T, n_c, c, c) with G[..., a, d] = h_a · v_d, the gain
    that set member a sees from the least-norm precoder owned by member d;
    ``cond[c]`` has shape (T, n_c).
    """
    G, cond = {}, {}
    for c, users in set_users.items():
        A = H[:, users, :]  # (T, n, c, L)
        Qm, R = np.linalg.qr(np.swapaxes(A, -1, -2))  # A^T = QR, so A^+ = Q R^{-T}
        k = conditioning(R)  # R carries the singular values of A
        Rt = np.swapaxes(R, -1, -2)
        # singular systems are reported through ``cond``; keep the algebra finite
        Rt = np.where(np.isfinite(k)[..., None, None], Rt, np.eye(c))
        V = Qm @ np.linalg.inv(Rt)  # (T, n, L, c)
        # one refinement step; V (I - AV) stays in the row space of A
        V = V + V @ (np.eye(c) - A @ V)
        G[c] = A @ V
        cond[c] = k
    return G, cond


def _union_sets(plans: Sequence[DeliveryPlan]) -> tuple[dict[int, np.ndarray], list[dict[int, np.ndarray]]]:
    """Merge the set tables of plans sharing (K, L); return the union and per-plan index maps."""
    union: dict[int, np.ndarray] = {}
    maps: list[dict[int, np.ndarray]] = [{} for _ in plans]
    for c in sorted({c for p in plans for c in p.set_users}):
        parts = [(i, p.set_users[c]) for i, p in enumerate(plans) if c in p.set_users]
        uniq, inv = np.unique(np.concatenate([u for _, u in parts]), axis=0, return_inverse=True)
        union[c] = uniq
        inv = inv.ravel()
        off = 0
        for i, u in parts:
            maps[i][c] = inv[off:off + len(u)]
            off += len(u)
    return union, maps


def _evaluate(
    p: DeliveryPlan, idx_map: dict[int, np.ndarray], G: dict, demands: np.ndarray, W: np.ndarray
) -> np.ndarray:
    """Worst |recovered - wanted| per trial for one plan.

    The user of occurrence dst keeps, from every src whose packet it cannot
    cancel, the term (h_dst · v_src) w_src; all other terms it subtracts.
    """
    T = W.shape[0]
    n = p.occurrences
    if n == 0:
        return np.zeros(T)
    coef = np.empty((T, p.pair_src.size))
    c_src = p.set_c[p.pair_src]
    for c, m in idx_map.items():
        sel = np.flatnonzero(c_src == c)
        if sel.size:
            src = p.pair_src[sel]
            coef[:, sel] = G[c][:, m[p.set_id[src]], p.pair_pos[sel], p.pos_own[src]]
    t_idx = np.arange(T)[:, None]
    w = W[t_idx, demands[:, p.user], p.row[None, :]]  # (T, n)
    contrib = coef * w[:, p.pair_src]
    flat = (t_idx * n + p.pair_dst[None, :]).ravel()
    rec = np.bincount(flat, weights=contrib.ravel(), minlength=T * n).reshape(T, n)
    return np.abs(rec - w).max(axis=1)


def _payloads(seed: int, demand: np.ndarray, F: int) -> np.ndarray:
    rng = np.random.default_rng([int(seed), 0xD])
    return rng.standard_normal((int(demand.max(initial=0)) + 1, F))


def _demands(seeds: Sequence[int], demands: np.ndarray | None, K: int) -> np.ndarray:
    """0-based (T, K) demands; drawn per seed over K files when not given."""
    if demands is not None:
        return np.asarray(demands, dtype=np.int64).reshape(len(seeds), K) - 1
    return np.array([np.random.default_rng([int(s), 0xE]).integers(0, K, size=K) for s in seeds],
                    dtype=np.int64).reshape(len(seeds), K)


def simulate_plans(
    plans: Sequence[DeliveryPlan],
    seeds: Sequence[int],
    demands: np.ndarray | None = None,
    tol: float = TOLERANCE,
    cond_limit: float = COND_LIMIT,
    budget: int = RESAMPLE_BUDGET,
    fixed_channel: Channel | None = None,
) -> list[DeliveryReport]:
    """Run every plan over the same seeded trials.

    Trial i of every plan with the same (K, L) sees the same channel, so
    their constraint sets are factorized together.  When a plan's systems
    are ill-conditioned in some trial, that trial's channel is redrawn for
    the plan (attempts 1, 2, ... of the same seed) up to ``budget`` times.
    """
    T = len(seeds)
    reports: list[DeliveryReport] = [None] * len(plans)  # type: ignore[list-item]
    groups: dict[tuple[int, int], list[int]] = {}
    for i, p in enumerate(plans):
        groups.setdefault((p.K, p.L), []).append(i)
    for (K, L), members in groups.items():
        gp = [plans[i] for i in members]
        union, maps = _union_sets(gp)
        dem = _demands(seeds, demands, K)
        worst = np.zeros((len(gp), T))
        resamples = np.zeros(len(gp), dtype=np.int64)
        per_trial = sum(len(u) * c * (L + c) for c, u in union.items())
        per_trial += max((p.pair_src.size + 2 * p.occurrences for p in gp), default=0)
        chunk = max(1, min(T, _CHUNK_FLOATS // max(per_trial, 1)))
        for start in range(0, T, chunk):
            trials = list(range(start, min(T, start + chunk)))
            _run_trials(gp, maps, union, K, L, seeds, trials, dem, worst, resamples,
                        cond_limit, budget, fixed_channel)
        for j, p in enumerate(gp):
            top = float(worst[j].max(initial=0.0))
            reports[members[j]] = DeliveryReport(top, bool(top < tol), p.measured_dof, T,
                                                 int(resamples[j]), tol)
    return reports


def _run_trials(gp, maps, union, K, L, seeds, trials, dem, worst, resamples,
                cond_limit, budget, fixed_channel) -> None:
    payload_cache: dict[tuple[int, int], np.ndarray] = {}

    def payloads(t: int, F: int) -> np.ndarray:
        if (t, F) not in payload_cache:
            payload_cache[t, F] = _payloads(seeds[t], dem[t], F)
        return payload_cache[t, F]

    pending = [(j, t) for j in range(len(gp)) for t in trials]
    for level in range(budget + 1):
        if not pending:
            return
        if level and fixed_channel is not None:
            raise ChannelDegeneracyError(f"fixed channel conditioning above {cond_limit:g}; cannot resample")
        ts = sorted({t for _, t in pending})
        row_of = {t: i for i, t in enumerate(ts)}
        if fixed_channel is not None:
            H = np.broadcast_to(fixed_channel.gains, (len(ts),) + fixed_channel.gains.shape)
        else:
            H = np.stack([_draw(K, L, int(seeds[t]), level).gains for t in ts])
        need = sorted({j for j, _ in pending})
        if len(need) == len(gp):
            G, cond = _solve_sets(H, union)
            local = maps
        else:
            # re-solve only the sets of the plans still pending
            sub, local = _union_sets([gp[j] for j in need])
            G, cond = _solve_sets(H, sub)
            local = dict(zip(need, local))
        nxt = []
        for j in need:
            tj = [t for jj, t in pending if jj == j]
            rows = np.array([row_of[t] for t in tj])
            m = local[j]
            k = np.ones(len(tj))
            for c, idx in m.items():
                k = np.maximum(k, cond[c][rows][:, idx].max(axis=1))
            good = k <= cond_limit
            if good.any():
                tok = [t for t, g in zip(tj, good) if g]
                W = _stack_payloads([payloads(t, gp[j].F) for t in tok])
                Gj = {c: G[c][rows[good]] for c in m}
                worst[j, tok] = _evaluate(gp[j], m, Gj, dem[tok], W)
            for t, g in zip(tj, good):
                if not g:
                    nxt.append((j, t))
                    resamples[j] += 1
        pending = nxt
    if pending:
        j, t = pending[0]
        raise ChannelDegeneracyError(
            f"precoder conditioning above {cond_limit:g} after {budget} resamples (trial {t})"
        )


def _stack_payloads(Ws: list[np.ndarray]) -> np.ndarray:
    n = max(w.shape[0] for w in Ws)
    out = np.zeros((len(Ws), n, Ws[0].shape[1]))
    for i, w in enumerate(Ws):
        out[i, : w.shape[0]] = w
    return out


def simulate_many(
    q: Mapda,
    seeds: Sequence[int],
    demands: np.ndarray | None = None,
    tol: float = TOLERANCE,
    cond_limit: float = COND_LIMIT,
    budget: int = RESAMPLE_BUDGET,
    fixed_channel: Channel | None = None,
) -> DeliveryReport:
    """One noiseless delivery per seed.

    ``demands`` is (trials, K) with 1-based file indices; when omitted each
    trial draws a demand over N = K files from its own seed.  Payloads are
    standard-normal stand-ins for the packets.
    """
    if demands is not None:
        demands = np.asarray(demands, dtype=np.int64).reshape(len(seeds), q.K)
        if (demands < 1).any():
            raise ValueError("demands are 1-based file indices")
    return simulate_plans([plan(q)], seeds, demands, tol, cond_limit, budget, fixed_channel)[0]


def simulate(
    q: Mapda, demand: Sequence[int], seed: int, tol: float = TOLERANCE,
    channel: Channel | None = None, cond_limit: float = COND_LIMIT,
) -> DeliveryReport:
    """Single delivery run for one demand vector (1-based files, length K)."""
    if len(demand) != q.K:
        raise ValueError(f"demand must list one file per user ({q.K}), got {len(demand)}")
    rep = simulate_many(q, [seed], np.asarray(demand)[None, :], tol, cond_limit, fixed_channel=channel)
    ch = channel if channel is not None else gen_channel(q.K, q.L, seed)
    if q.S <= 64:
        rep.blocks = [build_precoders(q, s, demand, ch, cond_limit) for s in range(1, q.S + 1)]
    return rep
