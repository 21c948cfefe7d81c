import csv
import io
import math
from fractions import Fraction

import pytest

from mapdakit.assembly import construct_theorem5, predict_metrics
from mapdakit.baselines import (
    BaselineSpec,
    baseline_metrics,
    comparison_table,
    evaluate_row,
    sweep,
    sweep_to_csv,
    table_iii_rows,
    table_to_csv,
    table_to_json,
)
from mapdakit.errors import ConstraintError, InvalidParameterError
from mapdakit.mapda import metrics
from mapdakit.placement import SystemParams

# (F, sum-DoF) as printed in the published comparison table, pair by pair
PRINTED = [
    ((140, 14), (105, 14)),
    ((6348888, 18), (189, 18)),
    ((420, 20), (280, 20)),
    ((110110, 55), (924, 55)),
    ((210, 14), (105, 14)),
    ((3080, 55), (924, 55)),
    ((11686752, 31), (31248, 31)),
    ((107666559, 66), (849420, 66)),
]


def test_published_pairs():
    for pair, want in zip(table_iii_rows(), PRINTED):
        got = tuple((r.F, r.g) for r in map(evaluate_row, pair))
        assert got == want


def test_smaller_subpacketization_at_equal_dof():
    for base, ours in table_iii_rows():
        a, b = evaluate_row(base), evaluate_row(ours)
        assert a.g == b.g and b.F < a.F


def test_ywcc_single_row_branch():
    m = baseline_metrics(BaselineSpec("ywcc", 3, K=12, t=6, m=3))
    assert (m.F, m.S, m.sum_dof) == (math.comb(4, 2), math.comb(4, 3), 9)


def test_ywcc_divisibility():
    with pytest.raises(ConstraintError, match="m \\| K"):
        baseline_metrics(BaselineSpec("ywcc", 5, K=15, t=9, m=2))


def test_npr_beta_must_be_gcd():
    assert evaluate_row({"scheme": "npr", "K": 78, "t": 50, "L": 16}).parameters == "beta=2"
    with pytest.raises(ConstraintError, match="gcd"):
        baseline_metrics(BaselineSpec("npr", 16, K=78, t=50, beta=1))


def test_common_constraints():
    with pytest.raises(ConstraintError, match="t \\+ L <= K"):
        baseline_metrics(BaselineSpec("wcc", 5, K=10, t=6))
    with pytest.raises(ConstraintError, match="t in \\[K\\]"):
        baseline_metrics(BaselineSpec("npr", 1, K=10, t=0))
    with pytest.raises(InvalidParameterError):
        baseline_metrics(BaselineSpec("mds", 1, K=10, t=2))


@pytest.mark.parametrize("K, t, L", [(9, 4, 2), (10, 4, 3), (12, 4, 3)])
def test_wcc_cases_are_consistent(K, t, L):
    m = baseline_metrics(BaselineSpec("wcc", L, K=K, t=t))
    assert m.sum_dof == 2 * L
    assert Fraction(K * (m.F - m.Z), m.S) == m.sum_dof


def test_pr_equals_single_subarray_scheme():
    for C in range(3, 10):
        for r in range(1, 4):
            for t in range(1, C - r):
                p = SystemParams(C, r, t, r + 1)
                pr = baseline_metrics(BaselineSpec("pr", r + 1, C=C, r=r, t=t))
                assert pr.key() == predict_metrics(p, "co4", t + r + 1).key()


def test_pr_formula_checked_by_construction():
    q = construct_theorem5(SystemParams(7, 2, 2, 3), 5)
    pr = baseline_metrics(BaselineSpec("pr", 3, C=7, r=2, t=2))
    assert metrics(q).key() == pr.key()


def test_pr_constraints():
    with pytest.raises(ConstraintError, match="L = r \\+ 1"):
        baseline_metrics(BaselineSpec("pr", 5, C=9, r=3, t=2))


def test_empty_table_still_has_header():
    text = table_to_csv(comparison_table([]))
    assert text.splitlines()[0].startswith("K,M/N,L,scheme")
    assert table_to_json([]) == []


def test_csv_round_trip():
    rows = comparison_table([r for pair in table_iii_rows() for r in pair])
    parsed = list(csv.DictReader(io.StringIO(table_to_csv(rows))))
    assert [int(r["F"]) for r in parsed] == [r.F for r in rows]
    assert parsed[1]["M/N convention"] == "retrieval"


def test_sweep_rows():
    rows = sweep(["co2", "ywcc", "npr"], r=2, L=7, lam=7)
    assert {"co2", "ywcc", "npr"} <= {r["scheme"] for r in rows}
    co2 = [r for r in rows if r["scheme"] == "co2" and r["t"] == 2]
    assert co2[0]["F"] == 189 and co2[0]["g"] == 18
    assert sweep_to_csv(rows).count("\n") == len(rows) + 1


def test_sweep_derives_lambda_for_merged_scheme():
    rows = sweep(["co3"], r=3, L=3, b=2, t_values=[2])
    assert rows and rows[0]["lam"] == 6 and rows[0]["F"] == 45


def test_sweep_rejects_unknown():
    with pytest.raises(InvalidParameterError):
        sweep(["abc"], r=2, L=3, lam=6)
