import numpy as np
import pytest

from mapdakit.combinatorics import binom
from mapdakit.errors import InvalidParameterError
from mapdakit.placement import (
    StarArray,
    SystemParams,
    group_stats,
    knapsack_levels,
    level_bounds,
    node_placement_array,
    partition_columns,
    user_retrieve_array,
)


def tally(p, A, G):
    """(v, z per row, u per column) counted on the U subarray directly."""
    U = user_retrieve_array(p)
    rows = [i for i, T in enumerate(U.row_labels) if set(T) <= set(A)]
    cols = [j for j, D in enumerate(U.col_labels) if tuple(sorted(set(D) - set(A))) == tuple(G)]
    sub = ~U.cells[np.ix_(rows, cols)]
    z = set(sub.sum(axis=1).tolist())
    u = set(sub.sum(axis=0).tolist())
    assert len(z) == 1 and len(u) == 1
    return len(cols), z.pop(), u.pop()


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        SystemParams(5, 5, 1)
    with pytest.raises(InvalidParameterError):
        SystemParams(5, 3, 3)
    with pytest.raises(InvalidParameterError):
        SystemParams(5, 3, 1, 2, 3)
    assert SystemParams(5, 3, 1, 2, 1).K == 10


def test_node_placement_five_one():
    C = node_placement_array(5, 1)
    assert C.cells.tolist() == np.eye(5, dtype=bool).tolist()


def test_user_retrieve_stars_where_sets_meet():
    U = user_retrieve_array(SystemParams(5, 3, 1))
    assert U.shape == (5, 10)
    for i, T in enumerate(U.row_labels):
        for j, D in enumerate(U.col_labels):
            assert U.cells[i, j] == bool(set(T) & set(D))


def test_star_array_json_round_trip():
    U = user_retrieve_array(SystemParams(6, 3, 2))
    back = StarArray.from_json(U.to_json())
    assert back.row_labels == U.row_labels and (back.cells == U.cells).all()


def test_levels_small_case():
    p = SystemParams(5, 3, 1, 2, 1)
    assert level_bounds(p) == (0, 2)
    assert list(knapsack_levels(p)) == [1, 2]


def test_partition_covers_every_column_once():
    p = SystemParams(7, 3, 2, 1, 1)
    blocks = partition_columns(p, (1, 2, 3, 4))
    cols = [D for bl in blocks.values() for D in bl]
    assert sorted(cols) == sorted(user_retrieve_array(p).col_labels)
    assert len(cols) == len(set(cols)) == p.K


def test_group_stats_match_tallies():
    for p in [SystemParams(5, 3, 1, 2, 1), SystemParams(6, 3, 2, 3, 2), SystemParams(8, 3, 2, 4, 0)]:
        A = tuple(range(1, p.anchor_size + 1))
        for G in partition_columns(p, A):
            if len(G) < p.b:
                continue
            st = group_stats(p, A, G)
            assert (st.cols, st.nulls_per_row, st.nulls_per_col) == tally(p, A, G)


def test_group_stats_rejects_overlap():
    p = SystemParams(5, 3, 1, 2, 1)
    with pytest.raises(InvalidParameterError):
        group_stats(p, (1, 2, 3), (3,))


def test_group_sizes_are_binomial():
    p = SystemParams(8, 3, 2, 4, 1)
    A = tuple(range(1, p.anchor_size + 1))
    for G, cols in partition_columns(p, A).items():
        assert len(cols) == binom(p.anchor_size, p.r - len(G))
