"""Closed-form parameters of earlier MAPDA schemes and comparison tables.

Each baseline is a dedicated-cache MISO scheme with K users and memory
ratio t/K.  Only the (F, Z, S, g) formulas are implemented, never the
interior arrays.  All arithmetic is on Python integers and Fractions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .assembly import best_lambda_prime, predict_metrics, theorem1_family, theorem1_metrics
from .combinatorics import binom
from .errors import ConsistencyError, ConstraintError, InvalidParameterError, MapdaError
from .mapda import SchemeMetrics
from .placement import SystemParams

BASELINES = ("ywcc", "npr", "wcc", "pr")
PREDICTED = ("thm1", "co1", "co2", "co3", "co4")


@dataclass(frozen=True)
class BaselineSpec:
    """One scheme evaluation.  ``K`` and ``t`` follow the dedicated-cache
    convention M/N = t/K; PR instead takes the node count ``C`` and ``r``."""

    scheme: str
    L: int
    K: int | None = None
    t: int | None = None
    m: int | None = None
    beta: int | None = None
    C: int | None = None
    r: int | None = None

    def params_text(self) -> str:
        if self.scheme == "ywcc":
            return f"m={self.m}"
        if self.scheme == "npr":
            return f"beta={_npr_beta(self)}"
        if self.scheme == "pr":
            return f"C={self.C},r={self.r}"
        return ""


def _need(spec: BaselineSpec, *names: str) -> None:
    missing = [n for n in names if getattr(spec, n) is None]
    if missing:
        raise InvalidParameterError(f"{spec.scheme} needs {', '.join(missing)}")


def _common(spec: BaselineSpec) -> tuple[int, int, int]:
    _need(spec, "K", "t")
    K, t, L = spec.K, spec.t, spec.L
    if not 1 <= t <= K:
        raise ConstraintError("t in [K]", f"t={t}, K={K}")
    if L < 1 or t + L > K:
        raise ConstraintError("t + L <= K", f"t={t}, L={L}, K={K}")
    return K, t, L


def _finish(spec: BaselineSpec, K: int, F: int, Z: int, S: int, g: int) -> SchemeMetrics:
    # every row must satisfy g = K(F - Z)/S; a mismatch means a formula slip
    if Fraction(K * (F - Z), S) != g:
        raise ConsistencyError(f"{spec.scheme}: K(F-Z)/S = {Fraction(K * (F - Z), S)} but g = {g}")
    return SchemeMetrics(spec.L, K, F, Z, S, Fraction(g))


def _ywcc(spec: BaselineSpec) -> SchemeMetrics:
    K, t, L = _common(spec)
    _need(spec, "m")
    m = spec.m
    if m < 1 or K % m or t % m:
        raise ConstraintError("m | K, m | t", f"m={m}, K={K}, t={t}")
    if m == L:
        n, k = K // L, t // L
        return _finish(spec, K, binom(n, k), binom(n - 1, k - 1), binom(n, k + 1), t + L)
    d = math.gcd(m, L - m)
    n, k = K // m, t // m
    F = (t + L) * binom(n, k) // d
    Z = (t + L) * binom(n - 1, k - 1) // d
    S = (t + m) * binom(n, k + 1) // d
    return _finish(spec, K, F, Z, S, t + L)


def _npr_beta(spec: BaselineSpec) -> int:
    return math.gcd(spec.K, spec.t, spec.L)


def _npr(spec: BaselineSpec) -> SchemeMetrics:
    K, t, L = _common(spec)
    beta = _npr_beta(spec)
    if spec.beta is not None and spec.beta != beta:
        raise ConstraintError("beta = gcd(K, t, L)", f"given beta={spec.beta}, gcd={beta}")
    n, k = K // beta, (t + L) // beta
    F = (t + L) * binom(n, k) // beta
    Z = t * binom(n - 1, k - 1) // beta
    S = (K - t) * binom(n, k) // beta
    return _finish(spec, K, F, Z, S, t + L)


def _wcc(spec: BaselineSpec) -> SchemeMetrics:
    K, t, L = _common(spec)
    if (K - t) % 2:
        return _finish(spec, K, 2 * L * K, 2 * L * t, K * (K - t), 2 * L)
    if K % L:
        return _finish(spec, K, L * K, L * t, K * (K - t) // 2, 2 * L)
    return _finish(spec, K, K, t, K * (K - t) // (2 * L), 2 * L)


def _pr(spec: BaselineSpec) -> SchemeMetrics:
    _need(spec, "C", "r", "t")
    C, r, t, L = spec.C, spec.r, spec.t, spec.L
    if L != r + 1:
        raise ConstraintError("L = r + 1", f"L={L}, r={r}")
    if r < 1 or t < 1 or t + r + 1 > C:
        raise ConstraintError("t + r + 1 <= C", f"t={t}, r={r}, C={C}")
    K = binom(C, r)
    F = (C - t - r) * binom(C, t)
    Z = (C - t - r) * (binom(C, t) - binom(C - r, t))
    S = (t + 1) * binom(C, t + r + 1)
    return _finish(spec, K, F, Z, S, binom(t + L, r))


_EVAL = {"ywcc": _ywcc, "npr": _npr, "wcc": _wcc, "pr": _pr}


def baseline_metrics(spec: BaselineSpec) -> SchemeMetrics:
    try:
        fn = _EVAL[spec.scheme]
    except KeyError:
        raise InvalidParameterError(f"unknown baseline {spec.scheme!r}; expected one of {BASELINES}") from None
    return fn(spec)


# ------------------------------------------------------------- tables


@dataclass
class TableRow:
    K: int
    memory_ratio: Fraction
    L: int
    scheme: str
    parameters: str
    F: int
    g: Fraction
    convention: str = "t/K"
    extra: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "K": self.K,
            "M/N": _exact(self.memory_ratio),
            "L": self.L,
            "scheme": self.scheme,
            "parameters": self.parameters,
            "F": self.F,
            "sum-DoF": _exact(self.g),
            "M/N convention": self.convention,
            **self.extra,
        }


def _exact(x: Fraction) -> int | str:
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def evaluate_row(row: dict[str, Any]) -> TableRow:
    """Evaluate one scheme description.

    Baselines take ``K, t, L`` (plus ``m`` or ``C, r``); the multi-access
    schemes take ``lam, r, t, L`` and optionally ``b`` and ``lambda_prime``.
    """
    row = dict(row)
    scheme = row.pop("scheme")
    if scheme in BASELINES:
        spec = BaselineSpec(scheme, **row)
        m = baseline_metrics(spec)
        t = spec.t
        return TableRow(m.K, Fraction(t, m.K), m.L, scheme, spec.params_text(), m.F, m.sum_dof)
    if scheme in PREDICTED:
        lp = row.pop("lambda_prime", None)
        p = SystemParams(row["lam"], row["r"], row["t"], row["L"], row.get("b", 0))
        m = multi_access_metrics(p, scheme, lp)
        text = f"(lam,r)=({p.lam},{p.r})"
        if scheme in ("thm1", "co1", "co3"):
            text += f",b={p.b}"
        if scheme == "co4":
            text += f",lambda'={lp if lp is not None else best_lambda_prime(p)}"
        return TableRow(m.K, p.retrieval_ratio, m.L, scheme, text, m.F, m.sum_dof, "retrieval")
    raise InvalidParameterError(f"unknown scheme {scheme!r}")


def multi_access_metrics(p: SystemParams, scheme: str, lambda_prime: int | None = None) -> SchemeMetrics:
    if scheme == "thm1":
        _, fam = theorem1_family(p, "dp")
        return theorem1_metrics(p, fam)
    return predict_metrics(p, scheme, lambda_prime)


def comparison_table(rows: Iterable[dict[str, Any]]) -> list[TableRow]:
    return [evaluate_row(r) for r in rows]


def table_to_csv(rows: Sequence[TableRow]) -> str:
    buf = io.StringIO()
    dicts = [r.as_dict() for r in rows]
    header = list(dicts[0]) if dicts else ["K", "M/N", "L", "scheme", "parameters", "F", "sum-DoF", "M/N convention"]
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    w.writerows(dicts)
    return buf.getvalue()


def table_to_json(rows: Sequence[TableRow]) -> list[dict[str, Any]]:
    return [r.as_dict() for r in rows]


def table_iii_rows() -> list[list[dict[str, Any]]]:
    """The eight published comparison pairs as (baseline, multi-access) inputs.

    The pairs with (lam, r) = (8, 3) use K = C(8, 3) = 56.
    """
    co2 = lambda lam, r, t, L: {"scheme": "co2", "lam": lam, "r": r, "t": t, "L": L}  # noqa: E731
    return [
        [{"scheme": "ywcc", "K": 15, "t": 9, "L": 5, "m": 3}, co2(6, 2, 2, 5)],
        [{"scheme": "ywcc", "K": 21, "t": 11, "L": 7, "m": 1}, co2(7, 2, 2, 7)],
        [{"scheme": "ywcc", "K": 21, "t": 15, "L": 5, "m": 3}, co2(7, 2, 3, 5)],
        [{"scheme": "ywcc", "K": 56, "t": 36, "L": 19, "m": 4}, co2(8, 3, 2, 19)],
        [{"scheme": "npr", "K": 15, "t": 9, "L": 5}, co2(6, 2, 2, 5)],
        [{"scheme": "npr", "K": 56, "t": 36, "L": 19}, co2(8, 3, 2, 19)],
        [{"scheme": "npr", "K": 36, "t": 21, "L": 10}, co2(9, 2, 3, 10)],
        [{"scheme": "npr", "K": 78, "t": 50, "L": 16}, co2(13, 2, 5, 16)],
    ]


# ------------------------------------------------------------- sweeps


def _dedicated_t(p_lam: int, r: int, t: int) -> int | None:
    """K·M/N for the multi-access memory ratio, when it is an integer."""
    K = binom(p_lam, r)
    x = K * (1 - Fraction(binom(p_lam - r, t), binom(p_lam, t)))
    return int(x) if x.denominator == 1 else None


def sweep(
    schemes: Sequence[str],
    r: int,
    L: int,
    lam: int | None = None,
    b: int = 0,
    t_values: Iterable[int] | None = None,
) -> list[dict[str, Any]]:
    """Figure data: (F, g) per scheme over the memory grid t.

    With ``lam`` fixed, t runs over 1..lam-r.  Points of the b = 0 closed-form family need
    lam = 2(t+r-b); when ``lam`` is omitted it is derived from t for every
    scheme.  Baselines see K = C(lam, r) users and the equivalent dedicated
    t = K·M/N, with YWCC at m = 1.  Points where a scheme's conditions fail
    are left out.
    """
    for s in schemes:
        if s not in BASELINES and s not in PREDICTED:
            raise InvalidParameterError(f"unknown scheme {s!r}")
    if t_values is None:
        t_values = range(1, (lam - r if lam is not None else 2 * r + 6) + 1)
    out = []
    for t in t_values:
        n = lam if lam is not None else 2 * (t + r - b)
        try:
            p = SystemParams(n, r, t, L, b)
        except InvalidParameterError:
            continue
        for s in schemes:
            spec: dict[str, Any] | None
            if s in PREDICTED:
                spec = {"scheme": s, "lam": n, "r": r, "t": t, "L": L, "b": b}
            else:
                td = _dedicated_t(n, r, t)
                K = binom(n, r)
                if s == "pr":
                    spec = {"scheme": "pr", "C": n, "r": r, "t": t, "L": L}
                elif td is None:
                    continue
                elif s == "ywcc":
                    spec = {"scheme": "ywcc", "K": K, "t": td, "L": L, "m": 1}
                else:
                    spec = {"scheme": s, "K": K, "t": td, "L": L}
            try:
                row = evaluate_row(spec)
            except MapdaError:
                continue
            d = row.as_dict()
            out.append({"scheme": s, "lam": n, "r": r, "t": t, "b": b, "L": L, "K": d["K"],
                        "M/N": _exact(p.retrieval_ratio), "F": d["F"], "g": d["sum-DoF"]})
    return out


def sweep_to_csv(rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    header = ["scheme", "lam", "r", "t", "b", "L", "K", "M/N", "F", "g"]
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
