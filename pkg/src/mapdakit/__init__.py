"""Multi-antenna placement delivery arrays for multi-access coded caching."""

from .assembly import (
    FilledArray,
    FillVector,
    construct_theorem1,
    construct_theorem4,
    construct_theorem5,
    fill_subarray,
    predict_metrics,
    replicate,
)
from .combinatorics import binom, cyclic_regular_design, enumerate_subsets, lcm_list
from .knapsack import (
    build_instance,
    greedy_solution,
    rotate_family,
    solve_brute,
    solve_dp,
    theorem3_solution,
)
from .mapda import Mapda, SchemeMetrics, VerificationReport, dof_upper_bound, metrics, symbol_subarray, verify
from .placement import (
    StarArray,
    SystemParams,
    group_stats,
    node_placement_array,
    partition_columns,
    user_retrieve_array,
)

__all__ = [
    "FilledArray",
    "FillVector",
    "Mapda",
    "SchemeMetrics",
    "StarArray",
    "SystemParams",
    "VerificationReport",
    "binom",
    "build_instance",
    "construct_theorem1",
    "construct_theorem4",
    "construct_theorem5",
    "cyclic_regular_design",
    "dof_upper_bound",
    "enumerate_subsets",
    "fill_subarray",
    "greedy_solution",
    "group_stats",
    "lcm_list",
    "metrics",
    "node_placement_array",
    "partition_columns",
    "predict_metrics",
    "replicate",
    "rotate_family",
    "solve_brute",
    "solve_dp",
    "symbol_subarray",
    "theorem3_solution",
    "user_retrieve_array",
    "verify",
]
