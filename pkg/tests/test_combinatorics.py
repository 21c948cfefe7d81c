import itertools
import math

import pytest
from hypothesis import given, strategies as st

from mapdakit.combinatorics import (
    binom,
    complement,
    cyclic_regular_design,
    enumerate_subsets,
    format_subset,
    from_mask,
    lcm_list,
    parse_subset,
    to_mask,
)
from mapdakit.errors import InvalidParameterError


def test_binom_matches_math_comb():
    for n in range(0, 20):
        for k in range(-1, n + 2):
            assert binom(n, k) == (math.comb(n, k) if 0 <= k <= n else 0)


def test_lcm_list():
    assert lcm_list([4, 6, 10]) == 60
    assert lcm_list([7]) == 7


def test_enumerate_subsets_is_lex():
    got = enumerate_subsets((1, 2, 3, 4, 5), 3)
    assert got[:3] == [(1, 2, 3), (1, 2, 4), (1, 2, 5)]
    assert got == list(itertools.combinations(range(1, 6), 3))


@given(st.sets(st.integers(1, 20), max_size=20))
def test_mask_round_trip(s):
    sub = tuple(sorted(s))
    assert from_mask(to_mask(sub)) == sub


def test_complement():
    assert complement((2, 4), 5) == (1, 3, 5)


@pytest.mark.parametrize("n", [5, 12])
def test_subset_text_round_trip(n):
    for sub in enumerate_subsets(tuple(range(1, n + 1)), 3):
        assert parse_subset(format_subset(sub, n), n) == sub


def test_design_three_two():
    d = cyclic_regular_design(3, 2)
    assert d.blocks == ((1, 2), (1, 3), (2, 3))
    assert d.replication == 2


def test_design_rejects_oversized_blocks():
    with pytest.raises(InvalidParameterError):
        cyclic_regular_design(3, 4)


@given(st.integers(1, 12).flatmap(lambda v: st.tuples(st.just(v), st.integers(1, v))))
def test_design_is_regular(vk):
    v, k = vk
    d = cyclic_regular_design(v, k)
    assert all(len(set(b)) == k for b in d.blocks)
    assert d.occurrences() == [math.lcm(v, k) // v] * v
