"""Command-line front end.

Exit codes: 0 success, 1 invalid array or failed decode, 2 usage error,
3 violated theorem or table constraint.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .assembly import (
    construct_theorem1,
    construct_theorem4,
    construct_theorem5,
    rotate_family,
    solve_for,
)
from .baselines import comparison_table, sweep, sweep_to_csv, table_iii_rows, table_to_csv, table_to_json
from .combinatorics import format_subset, parse_subset
from .delivery import COND_LIMIT, TOLERANCE, simulate_many
from .errors import ConstraintError, InvalidArrayError, InvalidParameterError, MapdaError
from .knapsack import build_instance, canonical_anchor, greedy_params, solve_brute
from .mapda import from_json, metrics, to_json, verify, verify_compact
from .placement import SystemParams

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_CONSTRAINT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _params(a: argparse.Namespace) -> SystemParams:
    try:
        return SystemParams(a.lam, a.r, a.t, a.L, a.b, a.N)
    except InvalidParameterError as e:
        raise UsageError(str(e)) from None


def _add_system(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system")
    g.add_argument("--lambda", dest="lam", type=int, required=True, help="number of cache nodes Λ")
    g.add_argument("--r", type=int, required=True, help="nodes each user accesses")
    g.add_argument("--t", type=int, required=True, help="placement parameter")
    g.add_argument("--L", type=int, default=1, help="server antennas")
    g.add_argument("--b", type=int, default=0, help="shift b in [0, r-1]")
    g.add_argument("--N", type=int, default=None, help="number of files (metadata only)")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise InvalidArrayError(f"{path} is not valid JSON: {e}") from None


def _load_mapda(path: str):
    data = _load_json(path)
    try:
        return from_json(data)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, MapdaError):
            raise
        raise InvalidArrayError(f"{path} is not a MAPDA document: {e}") from None


# ------------------------------------------------------------- commands


def cmd_construct(a: argparse.Namespace) -> int:
    if a.b_mode == "auto" and a.method != "thm1":
        raise UsageError("--b-mode auto is only valid with --method thm1")
    if a.lambda_prime is not None and a.method != "thm5":
        raise UsageError("--lambda-prime is only valid with --method thm5")
    p = _params(a)
    if a.method == "thm1":
        q = construct_theorem1(p, a.solver, a.b_mode)
    elif a.method == "thm4":
        q = construct_theorem4(p)
    else:
        from .assembly import best_lambda_prime

        q = construct_theorem5(p, a.lambda_prime if a.lambda_prime is not None else best_lambda_prime(p))
    if a.out:
        Path(a.out).write_text(_dump(to_json(q, compact=a.compact)))
    sys.stdout.write(_dump(metrics(q).to_json()))
    return EXIT_OK


def cmd_verify(a: argparse.Namespace) -> int:
    q = _load_mapda(a.inp)
    rep = verify_compact(q.source) if q.source is not None else verify(q)
    doc = rep.to_json()
    if rep.valid:
        doc["metrics"] = metrics(q).to_json()
    sys.stdout.write(_dump(doc))
    return EXIT_OK if rep.valid else EXIT_INVALID


def cmd_knapsack(a: argparse.Namespace) -> int:
    p = _params(a)
    A = parse_subset(a.anchor, p.lam) if a.anchor else canonical_anchor(p)
    inst = build_instance(p, A)
    sol = solve_brute(inst) if a.solver == "brute" else solve_for(p, a.solver, inst)
    fmt = lambda s: format_subset(s, p.lam)  # noqa: E731
    doc: dict[str, Any] = {
        "anchor": fmt(A),
        "instance": inst.to_json(fmt),
        "solution": {"x": list(sol.x), "phi": sol.phi, "psi": sol.psi,
                     "selected": [fmt(g) for g in sol.selected_groups]},
    }
    if a.solver == "greedy":
        gp = greedy_params(p)
        doc["greedy"] = {"delta": gp.delta, "eta": gp.eta, "zeta": gp.zeta, "fallback": gp.fallback}
    if sol.phi > 0:
        fam = rotate_family(p, A, sol, inst)
        doc["family"] = {"ell": fam.ell, "mu": fam.mu,
                         "levels": [vars(lr) for lr in fam.per_level]}
    sys.stdout.write(_dump(doc))
    return EXIT_OK


def _parse_demand(text: str, K: int) -> np.ndarray:
    try:
        d = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--demand must be comma-separated integers, got {text!r}") from None
    if len(d) != K or min(d) < 1:
        raise UsageError(f"--demand needs {K} file indices >= 1")
    return np.array(d, dtype=np.int64)


def cmd_simulate(a: argparse.Namespace) -> int:
    if a.trials < 1:
        raise UsageError("--trials must be >= 1")
    q = _load_mapda(a.inp)
    rep = verify(q)
    if not rep.valid:
        raise InvalidArrayError(f"input fails {', '.join(rep.failed())}")
    seeds = [a.seed + i for i in range(a.trials)]
    demands = None
    if a.demand:
        demands = np.tile(_parse_demand(a.demand, q.K), (a.trials, 1))
    res = simulate_many(q, seeds, demands, a.tolerance, a.cond_limit)
    sys.stdout.write(_dump(res.to_json()))
    return EXIT_OK if res.all_decoded else EXIT_INVALID


def cmd_compare(a: argparse.Namespace) -> int:
    if a.table_iii:
        rows = [r for pair in table_iii_rows() for r in pair]
    elif a.rows:
        rows = _load_json(a.rows)
        if not isinstance(rows, list):
            raise UsageError("--rows must hold a JSON list of scheme objects")
    else:
        raise UsageError("give --rows FILE or --table-iii")
    try:
        table = comparison_table(rows)
    except TypeError as e:
        raise UsageError(f"bad row: {e}") from None
    text = table_to_csv(table) if a.format == "csv" else _dump(table_to_json(table))
    _emit(text, a.out)
    return EXIT_OK


def cmd_sweep(a: argparse.Namespace) -> int:
    schemes = [s.strip() for s in a.scheme.split(",") if s.strip()]
    t_values = range(1, a.t_max + 1) if a.t_max else None
    if a.lam is None and t_values is None:
        t_values = range(1, 9)
    rows = sweep(schemes, a.r, a.L, a.lam, a.b, t_values)
    text = sweep_to_csv(rows) if a.format == "csv" else _dump(rows)
    _emit(text, a.out)
    return EXIT_OK


# ------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mapdakit", description="Multi-access MISO coded caching arrays")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a MAPDA and print its metrics")
    _add_system(c)
    c.add_argument("--method", choices=["thm1", "thm4", "thm5"], default="thm1")
    c.add_argument("--solver", choices=["dp", "greedy", "thm3"], default="dp")
    c.add_argument("--b-mode", choices=["fixed", "auto"], default="fixed")
    c.add_argument("--lambda-prime", type=int, default=None)
    c.add_argument("--out", help="write the array JSON here")
    c.add_argument("--compact", action="store_true", help="store the filled base array instead of the grid")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check C1-C4 on an array file")
    v.add_argument("--in", dest="inp", required=True)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("knapsack", help="show the knapsack instance and solution for one anchor")
    _add_system(k)
    k.add_argument("--solver", choices=["dp", "greedy", "thm3", "brute"], default="dp")
    k.add_argument("--anchor", help="anchor subset such as 1,2,3 (default: the first t+r-b nodes)")
    k.set_defaults(func=cmd_knapsack)

    s = sub.add_parser("simulate", help="run seeded zero-forcing delivery trials")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--demand", help="comma-separated 1-based file per user")
    s.add_argument("--tolerance", type=float, default=TOLERANCE)
    s.add_argument("--cond-limit", type=float, default=COND_LIMIT)
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("compare", help="evaluate scheme rows into a comparison table")
    m.add_argument("--rows", help="JSON list of {scheme, ...params}")
    m.add_argument("--table-iii", action="store_true", help="use the built-in published comparison rows")
    m.add_argument("--format", choices=["csv", "json"], default="csv")
    m.add_argument("--out")
    m.set_defaults(func=cmd_compare)

    w = sub.add_parser("sweep", help="emit (F, g) series over the memory grid")
    w.add_argument("--scheme", required=True, help="comma list from thm1,co1..co4,ywcc,npr,wcc,pr")
    w.add_argument("--lambda", dest="lam", type=int, default=None)
    w.add_argument("--r", type=int, required=True)
    w.add_argument("--L", type=int, required=True)
    w.add_argument("--b", type=int, default=0)
    w.add_argument("--t-max", type=int, default=None)
    w.add_argument("--format", choices=["csv", "json"], default="csv")
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return ap


def _thread_cap() -> int | None:
    raw = os.environ.get("MAPDA_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"MAPDA_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"MAPDA_THREADS must be a positive integer, got {raw!r}")
    return n


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        with threadpool_limits(limits=_thread_cap()):
            return a.func(a)
    except UsageError as e:
        print(f"mapdakit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConstraintError as e:
        print(f"mapdakit: {e}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except InvalidParameterError as e:
        print(f"mapdakit: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MapdaError as e:
        print(f"mapdakit: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
