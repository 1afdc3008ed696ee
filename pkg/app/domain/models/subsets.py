"""
Bitmask helpers for subsets of a ground set {0, ..., n-1}.
"""

from itertools import combinations
from typing import Iterable, Iterator, List, Sequence


def popcount(mask: int) -> int:
    return mask.bit_count()


def full_mask(size: int) -> int:
    return (1 << size) - 1


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def elements(mask: int) -> List[int]:
    """Indices of the set bits, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def subsets_of_size(ground: int, k: int) -> Iterator[int]:
    """All k-subsets of the elements of `ground`, in lexicographic index order."""
    for combo in combinations(elements(ground), k):
        yield mask_of(combo)


def submasks(mask: int) -> Iterator[int]:
    """All submasks of `mask`, including 0 and `mask` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def compress(mask: int, kept: Sequence[int]) -> int:
    """Re-index `mask` onto positions of `kept` (parent indices, ascending)."""
    out = 0
    for pos, idx in enumerate(kept):
        if mask >> idx & 1:
            out |= 1 << pos
    return out


def expand(mask: int, kept: Sequence[int]) -> int:
    """Inverse of `compress`: map a minor's mask back to parent indices."""
    out = 0
    for pos, idx in enumerate(kept):
        if mask >> pos & 1:
            out |= 1 << idx
    return out


def permute(mask: int, permutation: Sequence[int]) -> int:
    """Apply `permutation` (old index -> new index) to `mask`."""
    out = 0
    for i, j in enumerate(permutation):
        if mask >> i & 1:
            out |= 1 << j
    return out
