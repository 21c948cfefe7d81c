"""Exact integer combinatorics on 1-based ground sets.

Subsets are plain sorted tuples of ints.  Lexicographic order of those tuples
is the canonical order used for every row and column label in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from itertools import combinations
from typing import Iterable, Sequence

from .errors import InvalidParameterError

Subset = tuple[int, ...]

# Core construction counts are kept inside signed 64-bit range; anything
# larger means the parameters are far outside desk scale.
WORD_MAX = 2**63 - 1


def _checked(value: int, what: str) -> int:
    if value > WORD_MAX:
        raise OverflowError(f"{what} = {value} exceeds the 64-bit word range")
    return value


def binom(n: int, k: int) -> int:
    """C(n, k) with the conventions C(n, 0) = 1 and C(n, k) = 0 for k > n or k < 0."""
    if n < 0:
        raise ValueError(f"binom: n must be nonnegative, got {n}")
    if k < 0 or k > n:
        return 0
    return _checked(math.comb(n, k), f"C({n},{k})")


def lcm_list(values: Iterable[int]) -> int:
    vals = list(values)
    if not vals:
        raise ValueError("lcm_list: empty input")
    if any(v <= 0 for v in vals):
        raise ValueError(f"lcm_list: values must be positive, got {vals}")
    return _checked(reduce(math.lcm, vals), f"LCM{tuple(vals)}")


def enumerate_subsets(ground: Iterable[int], k: int) -> list[Subset]:
    """All k-subsets of ``ground`` in lexicographic order."""
    if k < 0:
        raise ValueError(f"enumerate_subsets: k must be nonnegative, got {k}")
    return list(combinations(sorted(ground), k))


def ground_set(n: int) -> Subset:
    return tuple(range(1, n + 1))


def rank_index(subsets: Sequence[Subset]) -> dict[Subset, int]:
    """Map each subset to its 0-based position in ``subsets``."""
    return {s: i for i, s in enumerate(subsets)}


def complement(subset: Iterable[int], n: int) -> Subset:
    members = set(subset)
    return tuple(x for x in range(1, n + 1) if x not in members)


def to_mask(subset: Iterable[int]) -> int:
    mask = 0
    for x in subset:
        if not 1 <= x <= 64:
            raise ValueError(f"element {x} outside [1, 64]")
        mask |= 1 << (x - 1)
    return mask


def from_mask(mask: int) -> Subset:
    out = []
    x = 1
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return tuple(out)


def format_subset(subset: Sequence[int], n: int) -> str:
    """Concatenated digits when the ground set is [n] with n <= 9, comma-joined otherwise."""
    sep = "" if n <= 9 else ","
    return sep.join(str(x) for x in subset)


def parse_subset(text: str, n: int) -> Subset:
    text = text.strip()
    if not text:
        return ()
    if n <= 9 and "," not in text:
        return tuple(int(ch) for ch in text)
    return tuple(int(tok) for tok in text.split(","))


@dataclass(frozen=True)
class RegularDesign:
    point_count: int
    block_size: int
    blocks: tuple[Subset, ...]
    replication: int

    def occurrences(self) -> list[int]:
        """Number of blocks containing each point 1..v, by direct tally."""
        counts = [0] * self.point_count
        for block in self.blocks:
            for x in block:
                counts[x - 1] += 1
        return counts


def cyclic_regular_design(v: int, k: int) -> RegularDesign:
    """Cut the cyclic sequence 1, 2, ..., v, 1, 2, ... into LCM(v, k)/k windows of length k.

    Every point lands in exactly LCM(v, k)/v windows.  Each window is stored
    sorted, so block 2 of (3, 2) is the window {3, 1} stored as (1, 3).
    """
    if v < 1 or k < 1:
        raise InvalidParameterError(f"cyclic_regular_design: need v, k >= 1, got ({v}, {k})")
    if k > v:
        raise InvalidParameterError(f"cyclic_regular_design: block size {k} exceeds point count {v}")
    z = math.lcm(v, k)
    blocks = tuple(
        tuple(sorted(((i * k + j) % v) + 1 for j in range(k))) for i in range(z // k)
    )
    return RegularDesign(point_count=v, block_size=k, blocks=blocks, replication=z // v)
