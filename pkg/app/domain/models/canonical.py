"""
Canonical labelling of matroids.

Exact isomorphism fingerprint: individualization-refinement over ordered
partitions of the ground set, refined by how bases meet the current cells,
with automorphism pruning. The key is the smallest relabelled basis family
among the leaves of the search tree, which makes it a complete invariant.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.core.config import settings
from app.core.exceptions import SizeExceededError

_MASK_BYTES = 3


@dataclass(frozen=True, order=True)
class CanonicalKey:
    """Isomorphism-invariant identity of a matroid."""

    size: int
    rank: int
    data: bytes

    def bases(self) -> List[int]:
        step = _MASK_BYTES
        return [
            int.from_bytes(self.data[i : i + step], "big")
            for i in range(0, len(self.data), step)
        ]

    def hex(self) -> str:
        return f"{self.size:02x}{self.rank:02x}" + self.data.hex()

    @classmethod
    def from_hex(cls, text: str) -> "CanonicalKey":
        raw = bytes.fromhex(text)
        if len(raw) < 2 or (len(raw) - 2) % _MASK_BYTES:
            raise ValueError(f"malformed canonical key: {text!r}")
        return cls(raw[0], raw[1], raw[2:])

    def short(self) -> str:
        return self.hex()[:16]

    def __str__(self) -> str:
        return self.hex()


def _encode(size: int, rank: int, bases: Sequence[int]) -> CanonicalKey:
    data = b"".join(b.to_bytes(_MASK_BYTES, "big") for b in bases)
    return CanonicalKey(size, rank, data)


def _relabel(bases: Sequence[int], labels: Sequence[int]) -> Tuple[int, ...]:
    out = []
    for b in bases:
        m = 0
        i = 0
        while b:
            if b & 1:
                m |= 1 << labels[i]
            b >>= 1
            i += 1
        out.append(m)
    out.sort()
    return tuple(out)


class _Search:
    """One canonical-labelling search over a fixed basis family."""

    def __init__(self, size: int, bases: Sequence[int], rank: Callable[[int], int]):
        self.size = size
        self.bases = list(bases)
        self.members = [[i for i in range(size) if b >> i & 1] for b in self.bases]
        self.containing: List[List[int]] = [[] for _ in range(size)]
        for idx, mem in enumerate(self.members):
            for e in mem:
                self.containing[e].append(idx)
        self.rank = rank
        self.best: Optional[Tuple[int, ...]] = None
        self.best_labels: Optional[List[int]] = None
        self.automorphisms: List[List[int]] = []

    def initial_partition(self) -> List[List[int]]:
        """Cells by element degree and pair-rank profile."""
        invariants = {}
        for e in range(self.size):
            pair_ranks = sorted(
                self.rank((1 << e) | (1 << f)) for f in range(self.size) if f != e
            )
            invariants[e] = (len(self.containing[e]), tuple(pair_ranks))
        order = sorted(set(invariants.values()))
        return [[e for e in range(self.size) if invariants[e] == inv] for inv in order]

    def refine(self, partition: List[List[int]]) -> List[List[int]]:
        while True:
            cell_of = [0] * self.size
            for c, cell in enumerate(partition):
                for e in cell:
                    cell_of[e] = c
            k = len(partition)
            profiles = []
            for mem in self.members:
                counts = [0] * k
                for e in mem:
                    counts[cell_of[e]] += 1
                profiles.append(tuple(counts))
            refined = []
            for cell in partition:
                if len(cell) == 1:
                    refined.append(cell)
                    continue
                signature = {
                    e: tuple(sorted(profiles[i] for i in self.containing[e])) for e in cell
                }
                for sig in sorted(set(signature.values())):
                    refined.append([e for e in cell if signature[e] == sig])
            if len(refined) == len(partition):
                return refined
            partition = refined

    def leaf(self, partition: List[List[int]]) -> None:
        labels = [0] * self.size
        for pos, cell in enumerate(partition):
            labels[cell[0]] = pos
        encoded = _relabel(self.bases, labels)
        if self.best is None or encoded < self.best:
            self.best = encoded
            self.best_labels = labels
        elif encoded == self.best:
            inverse = [0] * self.size
            for e, pos in enumerate(self.best_labels):
                inverse[pos] = e
            self.automorphisms.append([inverse[labels[e]] for e in range(self.size)])

    def _orbit_roots(self, cell: List[int], path: List[int]) -> Dict[int, int]:
        parent = {e: e for e in range(self.size)}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gen in self.automorphisms:
            if all(gen[p] == p for p in path):
                for e in range(self.size):
                    a, b = find(e), find(gen[e])
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return {e: find(e) for e in cell}

    def search(self, partition: List[List[int]], path: List[int]) -> None:
        partition = self.refine(partition)
        target = next((c for c, cell in enumerate(partition) if len(cell) > 1), None)
        if target is None:
            self.leaf(partition)
            return
        cell = partition[target]
        tried: List[int] = []
        for x in cell:
            if tried:
                # siblings in one orbit of the path stabilizer give equal subtrees
                roots = self._orbit_roots(cell, path)
                if any(roots[x] == roots[t] for t in tried):
                    continue
            child = (
                partition[:target]
                + [[x], [e for e in cell if e != x]]
                + partition[target + 1 :]
            )
            self.search(child, path + [x])
            tried.append(x)


def canonical_form(
    size: int,
    bases: Sequence[int],
    rank: Callable[[int], int],
) -> Tuple[CanonicalKey, Tuple[int, ...]]:
    """
    Canonical key of the matroid on `size` elements with the given bases.

    Args:
        size: Ground set size
        bases: Basis masks
        rank: Rank oracle of the same matroid

    Returns:
        The key and the labelling (old index -> canonical index) producing it
    """
    cap = settings.MAX_CANONICAL_SIZE
    if size > cap:
        raise SizeExceededError(size, cap, "canonicalization")
    rank_of_ground = bin(bases[0]).count("1") if bases else 0
    if size == 0:
        return _encode(0, rank_of_ground, list(bases)), ()
    search = _Search(size, bases, rank)
    search.search(search.initial_partition(), [])
    return _encode(size, rank_of_ground, search.best), tuple(search.best_labels)
