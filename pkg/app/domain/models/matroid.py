"""
Matroid domain model.
A finite matroid stored by its basis family over a bitmask-encoded ground set,
with lazily populated rank, flat and canonical-key caches.
"""

import threading
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import MatroidAxiomError, SizeExceededError
from app.domain.models.canonical import CanonicalKey, canonical_form
from app.domain.models.subsets import (
    compress,
    elements,
    full_mask,
    mask_of,
    permute,
    popcount,
    submasks,
)

GROUND_SIZE_CAP = 20


class GroundSet(BaseModel):
    """Ground set {0, ..., size-1} with display labels."""

    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=0, le=GROUND_SIZE_CAP, description="Number of elements")
    labels: Tuple[str, ...] = Field(default=(), description="Display name per index")

    @model_validator(mode="before")
    @classmethod
    def default_labels(cls, data):
        if isinstance(data, dict) and not data.get("labels"):
            data = dict(data)
            data["labels"] = tuple(str(i) for i in range(data.get("size", 0)))
        return data

    @model_validator(mode="after")
    def check_labels(self):
        if len(self.labels) != self.size:
            raise ValueError(f"{len(self.labels)} labels for {self.size} elements")
        if len(set(self.labels)) != self.size:
            raise ValueError("element labels must be unique")
        return self

    @property
    def full(self) -> int:
        return full_mask(self.size)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def format(self, mask: int) -> str:
        return "{" + ",".join(self.labels[i] for i in elements(mask)) + "}"


class MinorSpec(BaseModel):
    """A minor M / contract \\ delete, given by two disjoint masks."""

    model_config = ConfigDict(frozen=True)

    contract: int = Field(0, ge=0, description="Elements to contract")
    delete: int = Field(0, ge=0, description="Elements to delete")

    @model_validator(mode="after")
    def check_disjoint(self):
        if self.contract & self.delete:
            raise ValueError("contract and delete sets must be disjoint")
        return self


class Matroid:
    """
    Immutable matroid given by its bases.

    Derived tables (rank memo, flats, dual, canonical key) are filled on first
    use under an internal lock, so instances can be shared between threads.
    """

    __slots__ = (
        "ground",
        "bases",
        "rank_of_ground",
        "_basis_set",
        "_lock",
        "_rank_memo",
        "_rank_table",
        "_flats",
        "_dual",
        "_key",
        "_canonical_labels",
    )

    def __init__(
        self,
        ground: GroundSet,
        bases: Iterable[int],
        validate: bool = True,
    ):
        basis_list = sorted(set(bases))
        if not basis_list:
            raise MatroidAxiomError("basis family is empty")
        full = ground.full
        ranks = {popcount(b) for b in basis_list}
        if validate:
            if any(b & ~full for b in basis_list):
                raise MatroidAxiomError("basis uses an element outside the ground set")
            if len(ranks) != 1:
                raise MatroidAxiomError(
                    "bases have different sizes", {"sizes": sorted(ranks)}
                )
        self.ground = ground
        self.bases: Tuple[int, ...] = tuple(basis_list)
        self.rank_of_ground = ranks.pop()
        self._basis_set = frozenset(basis_list)
        self._lock = threading.RLock()
        self._rank_memo: Dict[int, int] = {0: 0, full: self.rank_of_ground}
        self._rank_table: Optional[bytearray] = None
        self._flats: Optional[Tuple[int, ...]] = None
        self._dual: Optional["Matroid"] = None
        self._key: Optional[CanonicalKey] = None
        self._canonical_labels: Optional[Tuple[int, ...]] = None
        if validate:
            self._check_exchange()

    # Construction helpers

    @classmethod
    def from_bases(
        cls,
        size: int,
        bases: Iterable[Iterable[int]],
        labels: Optional[Sequence[str]] = None,
        validate: bool = True,
    ) -> "Matroid":
        ground = GroundSet(size=size, labels=tuple(labels or ()))
        return cls(ground, [mask_of(b) for b in bases], validate=validate)

    @classmethod
    def from_key(cls, key: CanonicalKey) -> "Matroid":
        matroid = cls(GroundSet(size=key.size), key.bases(), validate=False)
        matroid._key = key
        # bases are already in canonical coordinates
        matroid._canonical_labels = tuple(range(key.size))
        return matroid

    def _check_exchange(self) -> None:
        """Exhaustive basis-exchange check over ordered pairs of bases."""
        for b1 in self.bases:
            for b2 in self.bases:
                if b1 == b2:
                    continue
                for x in elements(b1 & ~b2):
                    base = b1 & ~(1 << x)
                    if not any(
                        (base | (1 << y)) in self._basis_set
                        for y in elements(b2 & ~b1)
                    ):
                        raise MatroidAxiomError(
                            "basis exchange fails for "
                            f"{self.ground.format(b1)} and {self.ground.format(b2)} "
                            f"removing {self.ground.labels[x]}",
                            {
                                "basis_1": self.ground.format(b1),
                                "basis_2": self.ground.format(b2),
                                "element": self.ground.labels[x],
                            },
                        )

    # Basic queries

    @property
    def size(self) -> int:
        return self.ground.size

    @property
    def full(self) -> int:
        return self.ground.full

    def is_basis(self, mask: int) -> bool:
        return mask in self._basis_set

    def rank(self, x: int) -> int:
        table = self._rank_table
        if table is not None:
            return table[x]
        memo = self._rank_memo
        cached = memo.get(x)
        if cached is not None:
            return cached
        bound = min(popcount(x), self.rank_of_ground)
        best = 0
        for b in self.bases:
            c = popcount(b & x)
            if c > best:
                best = c
                if best == bound:
                    break
        with self._lock:
            memo[x] = best
        return best

    def rank_table(self) -> bytearray:
        """Rank of every subset, indexed by mask. Used for full 2^n scans."""
        if self._rank_table is not None:
            return self._rank_table
        with self._lock:
            if self._rank_table is None:
                n = self.size
                independent = bytearray(1 << n)
                for b in self.bases:
                    if independent[b]:
                        continue
                    for sub in submasks(b):
                        independent[sub] = 1
                table = bytearray(1 << n)
                for x in range(1, 1 << n):
                    if independent[x]:
                        table[x] = popcount(x)
                        continue
                    best = 0
                    rest = x
                    while rest:
                        low = rest & -rest
                        r = table[x ^ low]
                        if r > best:
                            best = r
                        rest ^= low
                    table[x] = best
                self._rank_table = table
        return self._rank_table

    def is_independent(self, x: int) -> bool:
        return self.rank(x) == popcount(x)

    def closure(self, x: int) -> int:
        r = self.rank(x)
        out = x
        for e in range(self.size):
            bit = 1 << e
            if not x & bit and self.rank(x | bit) == r:
                out |= bit
        return out

    def is_flat(self, x: int) -> bool:
        return self.closure(x) == x

    def flats(self) -> Tuple[int, ...]:
        """All flats, sorted by rank then mask."""
        if self._flats is None:
            found = self.flats_within(self.full)
            with self._lock:
                self._flats = found
        return self._flats

    def flats_within(self, keep: int) -> Tuple[int, ...]:
        """Flats of the restriction to `keep`, as masks in this matroid's indices."""
        start = self.closure(0) & keep
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for flat in frontier:
                for e in elements(keep & ~flat):
                    cover = self.closure(flat | (1 << e)) & keep
                    if cover not in seen:
                        seen.add(cover)
                        nxt.append(cover)
            frontier = nxt
        return tuple(sorted(seen, key=lambda f: (self.rank(f), f)))

    def loops(self) -> int:
        return self.closure(0)

    def coloops(self) -> int:
        out = self.full
        for b in self.bases:
            out &= b
        return out

    # Derived matroids

    def dual(self) -> "Matroid":
        if self._dual is None:
            full = self.full
            dual = Matroid(self.ground, [full ^ b for b in self.bases], validate=False)
            dual._dual = self
            with self._lock:
                if self._dual is None:
                    self._dual = dual
        return self._dual

    def independent_core(self, x: int) -> int:
        """A maximal independent subset of `x`, chosen greedily by index."""
        core = 0
        for e in elements(x):
            if self.rank(core | (1 << e)) > popcount(core):
                core |= 1 << e
        return core

    def minor(self, spec: MinorSpec) -> "Matroid":
        """M / contract \\ delete on the remaining elements, re-indexed in order."""
        keep = self.full & ~(spec.contract | spec.delete)
        core = self.independent_core(spec.contract)
        candidates = {b & keep for b in self.bases if b & core == core}
        top = max(popcount(c) for c in candidates)
        kept = elements(keep)
        bases = [compress(c, kept) for c in candidates if popcount(c) == top]
        ground = GroundSet(
            size=len(kept), labels=tuple(self.ground.labels[i] for i in kept)
        )
        return Matroid(ground, bases, validate=False)

    def restrict(self, keep: int) -> "Matroid":
        return self.minor(MinorSpec(delete=self.full & ~keep))

    def delete(self, x: int) -> "Matroid":
        return self.minor(MinorSpec(delete=x))

    def contract(self, x: int) -> "Matroid":
        return self.minor(MinorSpec(contract=x))

    def relabel(self, permutation: Sequence[int]) -> "Matroid":
        """Isomorphic copy where element i becomes element permutation[i]."""
        labels = [""] * self.size
        for i, j in enumerate(permutation):
            labels[j] = self.ground.labels[i]
        ground = GroundSet(size=self.size, labels=tuple(labels))
        return Matroid(ground, [permute(b, permutation) for b in self.bases], validate=False)

    # Isomorphism

    @property
    def key(self) -> CanonicalKey:
        if self._key is None:
            key, labelling = canonical_form(self.size, self.bases, self.rank)
            with self._lock:
                if self._key is None:
                    self._key = key
                    self._canonical_labels = labelling
        return self._key

    def canonical_labelling(self) -> Tuple[int, ...]:
        """Permutation (old index -> canonical index) realizing `key`."""
        self.key
        return self._canonical_labels

    def is_isomorphic(self, other: "Matroid") -> bool:
        if (self.size, self.rank_of_ground, len(self.bases)) != (
            other.size,
            other.rank_of_ground,
            len(other.bases),
        ):
            return False
        return self.key == other.key

    def same_bases(self, other: "Matroid") -> bool:
        return self.size == other.size and self.bases == other.bases

    def format(self, mask: int) -> str:
        return self.ground.format(mask)

    def __repr__(self) -> str:
        return f"Matroid(n={self.size}, rank={self.rank_of_ground}, bases={len(self.bases)})"


def direct_sum(a: Matroid, b: Matroid) -> Matroid:
    """a ⊕ b with b's elements shifted after a's."""
    shift = a.size
    labels = list(a.ground.labels)
    taken = set(labels)
    for label in b.ground.labels:
        while label in taken:
            label = label + "'"
        taken.add(label)
        labels.append(label)
    ground = GroundSet(size=a.size + b.size, labels=tuple(labels))
    bases = [x | (y << shift) for x in a.bases for y in b.bases]
    return Matroid(ground, bases, validate=False)


def check_size(matroid_size: int, cap: int, what: str = "ground set") -> None:
    if matroid_size > cap:
        raise SizeExceededError(matroid_size, cap, what)


# Named matroids


def uniform(rank: int, size: int, labels: Optional[Sequence[str]] = None) -> Matroid:
    """U_{rank,size}."""
    return Matroid.from_bases(size, combinations(range(size), rank), labels, validate=False)


def free(size: int) -> Matroid:
    return uniform(size, size)


def loops(size: int) -> Matroid:
    return uniform(0, size)


def cycle_matroid_k4() -> Matroid:
    """M(K4): edges 12,13,14,23,24,34; bases are the spanning trees."""
    labels = ("12", "13", "14", "23", "24", "34")
    triangles = [{0, 1, 3}, {0, 2, 4}, {1, 2, 5}, {3, 4, 5}]
    trees = [c for c in combinations(range(6), 3) if set(c) not in triangles]
    return Matroid.from_bases(6, trees, labels, validate=False)


def bases_from_nonbases(size: int, rank: int, nonbases: List[int]) -> List[int]:
    """All rank-subsets of the ground set except the listed dependent ones."""
    skip = set(nonbases)
    return [
        mask_of(c) for c in combinations(range(size), rank) if mask_of(c) not in skip
    ]
