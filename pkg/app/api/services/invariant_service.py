"""
Invariant Service.
Alpha invariant, strict-gammoid test, strong base-orderability, binary and
series-parallel minor tests, and the rank-3 contraction witness.
"""

from itertools import combinations, permutations
from typing import Dict, List, Optional, Tuple

from app.core.config import settings
from app.core.exceptions import RankTooLowError, SizeExceededError
from app.core.logging import get_logger, log_certificate
from app.api.services.matroid_service import MK4, U24, matroid_service
from app.domain.models.certificates import (
    AlphaTable,
    Evidence,
    EvidenceKind,
    OrderabilityVerdict,
    SboWitness,
    SeriesParallelVerdict,
)
from app.domain.models.matroid import Matroid
from app.domain.models.subsets import elements, expand, mask_of, popcount, submasks
from app.infrastructure.cache import certificate_cache

logger = get_logger(__name__)

_TABLE_SIZE_LIMIT = 16


class InvariantService:
    """Certificate tests used by the seed rules and the decision procedure."""

    # Alpha invariant

    def alpha_table(self, m: Matroid) -> AlphaTable:
        """
        Alpha on every flat, resolved in increasing rank.

        Args:
            m: Matroid

        Returns:
            AlphaTable with values keyed by flat mask
        """
        values: Dict[int, int] = {}
        for flat in m.flats():
            below = sum(a for g, a in values.items() if g & flat == g and g != flat)
            values[flat] = popcount(flat) - m.rank(flat) - below
        return AlphaTable(values=values)

    def alpha(self, m: Matroid, x: int, table: Optional[AlphaTable] = None) -> int:
        """alpha_M(X) from the flat table plus one subtraction pass."""
        table = table or self.alpha_table(m)
        if x in table.values:
            return table.values[x]
        below = sum(a for f, a in table.values.items() if a and f & x == f)
        return popcount(x) - m.rank(x) - below

    def alpha_non_negative(self, m: Matroid, flats_only: Optional[bool] = None) -> Optional[int]:
        """
        Scan for a subset with negative alpha.

        Args:
            m: Matroid
            flats_only: Only inspect flats (heuristic); defaults to settings

        Returns:
            Optional[int]: the smallest such subset (by size, then index order),
            or None when m is a strict gammoid
        """
        if flats_only is None:
            flats_only = settings.ALPHA_FLATS_ONLY
        table = self.alpha_table(m)
        if flats_only:
            negative = [f for f, a in table.values.items() if a < 0]
            return min(negative, key=lambda f: (popcount(f), f)) if negative else None

        if m.size > settings.MAX_GROUND_SIZE:
            raise SizeExceededError(m.size, settings.MAX_GROUND_SIZE)
        if m.size <= _TABLE_SIZE_LIMIT:
            m.rank_table()
        nonzero: List[Tuple[int, int]] = [(f, a) for f, a in table.values.items() if a]
        for k in range(m.size + 1):
            for combo in combinations(range(m.size), k):
                x = mask_of(combo)
                if x in table.values:
                    value = table.values[x]
                else:
                    value = k - m.rank(x) - sum(a for f, a in nonzero if f & x == f)
                if value < 0:
                    return x
        return None

    def is_strict_gammoid(self, m: Matroid) -> bool:
        """alpha_M >= 0 everywhere, cached per isomorphism class."""

        def compute():
            strict = self.alpha_non_negative(m) is None
            log_certificate("alpha", "nonnegative" if strict else "negative", size=m.size)
            return strict

        return self._cached("strict", m, compute)

    # Strong base-orderability

    def _subsets_with(self, j: int) -> List[int]:
        """Position masks over 0..j that contain j, by increasing size."""
        subs = [s | (1 << j) for s in submasks((1 << j) - 1)]
        return sorted(subs, key=lambda s: (popcount(s), s))

    def _exchange_ok(self, m: Matroid, b1: int, d1: List[int], d2: List[int], phi: List[int], positions: int) -> bool:
        removed = 0
        added = 0
        for p in elements(positions):
            removed |= 1 << d1[p]
            added |= 1 << d2[phi[p]]
        return m.is_basis((b1 & ~removed) | added)

    def _find_bijection(self, m: Matroid, b1: int, d1: List[int], d2: List[int]) -> Optional[List[int]]:
        k = len(d1)
        checks = [self._subsets_with(j) for j in range(k)]
        phi: List[int] = [0] * k
        used = [False] * k

        def extend(j: int) -> bool:
            if j == k:
                return True
            for t in range(k):
                if used[t]:
                    continue
                phi[j] = t
                if all(self._exchange_ok(m, b1, d1, d2, phi, s) for s in checks[j]):
                    used[t] = True
                    if extend(j + 1):
                        return True
                    used[t] = False
            return False

        return list(phi) if extend(0) else None

    def _failures(self, m: Matroid, b1: int, d1: List[int], d2: List[int]) -> List[Tuple[List[Tuple[int, int]], int]]:
        k = len(d1)
        every = sorted((s for s in submasks((1 << k) - 1) if s), key=lambda s: (popcount(s), s))
        out = []
        for perm in permutations(range(k)):
            phi = list(perm)
            bad = next(s for s in every if not self._exchange_ok(m, b1, d1, d2, phi, s))
            pairs = [(d1[p], d2[phi[p]]) for p in range(k)]
            out.append((pairs, mask_of(d1[p] for p in elements(bad))))
        return out

    def strongly_base_orderable(self, m: Matroid) -> SboWitness:
        """
        Search every unordered basis pair for a simultaneous-exchange bijection.

        phi is the identity on B1 ∩ B2, so only B1 \\ B2 -> B2 \\ B1 is permuted;
        the reverse pair is covered by the inverse bijection.

        Args:
            m: Matroid

        Returns:
            SboWitness: failing pair with per-bijection counterexamples, or the
            largest checked pair with a passing bijection
        """
        largest: Optional[Tuple[int, int, List[Tuple[int, int]]]] = None
        bases = m.bases
        for i, b1 in enumerate(bases):
            for b2 in bases[i + 1 :]:
                d1 = elements(b1 & ~b2)
                d2 = elements(b2 & ~b1)
                if len(d1) <= 1:
                    continue
                phi = self._find_bijection(m, b1, d1, d2)
                if phi is None:
                    log_certificate("sbo", "notOrderable", size=m.size)
                    return SboWitness(
                        verdict=OrderabilityVerdict.NOT_ORDERABLE,
                        basis_pair=(b1, b2),
                        failing_subsets=self._failures(m, b1, d1, d2),
                    )
                if largest is None or len(d1) > popcount(largest[0] & ~largest[1]):
                    largest = (b1, b2, [(d1[p], d2[phi[p]]) for p in range(len(d1))])
        log_certificate("sbo", "orderable", size=m.size)
        if largest is None:
            return SboWitness(verdict=OrderabilityVerdict.ORDERABLE)
        return SboWitness(
            verdict=OrderabilityVerdict.ORDERABLE,
            basis_pair=(largest[0], largest[1]),
            bijection=largest[2],
        )

    def is_strongly_base_orderable(self, m: Matroid) -> bool:
        return self._cached(
            "sbo",
            m,
            lambda: self.strongly_base_orderable(m).verdict == OrderabilityVerdict.ORDERABLE,
        )

    # Minor-based tests

    def is_binary(self, m: Matroid) -> bool:
        return matroid_service.has_minor_isomorphic_to(m, U24) is None

    def series_parallel_gammoid_test(self, m: Matroid) -> SeriesParallelVerdict:
        """
        Excluded-minor test: an M(K4) minor rules gammoids out; a binary
        matroid without one is series-parallel, hence a gammoid.
        """
        if matroid_service.has_minor_isomorphic_to(m, MK4) is not None:
            return SeriesParallelVerdict.NOT_GAMMOID
        if self.is_binary(m):
            return SeriesParallelVerdict.GAMMOID
        return SeriesParallelVerdict.INCONCLUSIVE

    # Rank-3 contractions

    def rank3_contraction_witness(self, m: Matroid) -> Optional[Tuple[int, int]]:
        """
        Find an independent X of size rank - 3 and Y ⊆ E \\ X with
        alpha_{M/X}(Y) < 0.

        Args:
            m: Matroid of rank at least 3

        Returns:
            Optional[Tuple[int, int]]: (X, Y) in m's indices, or None

        Raises:
            RankTooLowError: rank below 3
        """
        r = m.rank_of_ground
        if r < 3:
            raise RankTooLowError(r)
        for combo in combinations(range(m.size), r - 3):
            x = mask_of(combo)
            if not m.is_independent(x):
                continue
            y = self.alpha_non_negative(m.contract(x))
            if y is not None:
                log_certificate("rank3", "witness", size=m.size)
                return x, expand(y, elements(m.full & ~x))
        return None

    def rank3_negative_set(self, m: Matroid) -> Optional[int]:
        """
        Smallest X with rank 3 and alpha_M(X) < 0, or None.

        M|X is then a rank-3 matroid that is not a strict gammoid.
        """
        if m.rank_of_ground < 3:
            return None
        if m.size > settings.MAX_GROUND_SIZE:
            raise SizeExceededError(m.size, settings.MAX_GROUND_SIZE)
        table = self.alpha_table(m)
        nonzero = [(f, a) for f, a in table.values.items() if a]
        for k in range(3, m.size + 1):
            for combo in combinations(range(m.size), k):
                x = mask_of(combo)
                if m.rank(x) != 3:
                    continue
                if x in table.values:
                    value = table.values[x]
                else:
                    value = k - 3 - sum(a for f, a in nonzero if f & x == f)
                if value < 0:
                    return x
        return None

    def has_rank3_negative_set(self, m: Matroid) -> bool:
        return self._cached("rank3set", m, lambda: self.rank3_negative_set(m) is not None)

    def has_rank3_witness(self, m: Matroid) -> bool:
        if m.rank_of_ground < 3:
            return False
        return self._cached("rank3", m, lambda: self.rank3_contraction_witness(m) is not None)

    # Combined evidence

    def evidence(self, m: Matroid, max_size: Optional[int] = None) -> Evidence:
        """
        Direct gammoid evidence from the cheap certificate tests.

        Args:
            m: Matroid
            max_size: Ground-set budget; larger matroids yield UNKNOWN

        Returns:
            Evidence
        """
        if max_size is not None and m.size > max_size:
            return Evidence(kind=EvidenceKind.UNKNOWN, reason="over-budget")

        def compute():
            if self.is_strict_gammoid(m):
                return Evidence(kind=EvidenceKind.GAMMOID, reason="alpha-nonnegative")
            if self.is_strict_gammoid(m.dual()):
                return Evidence(kind=EvidenceKind.GAMMOID, reason="dual-of-strict")
            if self.has_rank3_negative_set(m) or self.has_rank3_negative_set(m.dual()):
                return Evidence(kind=EvidenceKind.NOT_GAMMOID, reason="rank3-alpha")
            verdict = self.series_parallel_gammoid_test(m)
            if verdict == SeriesParallelVerdict.NOT_GAMMOID:
                return Evidence(kind=EvidenceKind.NOT_GAMMOID, reason="excluded-minor-mk4")
            if verdict == SeriesParallelVerdict.GAMMOID:
                return Evidence(kind=EvidenceKind.GAMMOID, reason="series-parallel")
            if not self.is_strongly_base_orderable(m):
                return Evidence(kind=EvidenceKind.NOT_GAMMOID, reason="not-sbo")
            if self.has_rank3_witness(m) or self.has_rank3_witness(m.dual()):
                return Evidence(kind=EvidenceKind.NOT_GAMMOID, reason="rank3-alpha")
            return Evidence(kind=EvidenceKind.UNKNOWN, reason="no-direct-certificate")

        return self._cached("evidence", m, compute)

    def _cached(self, prefix: str, m: Matroid, compute):
        try:
            key = m.key.hex()
        except SizeExceededError:
            return compute()
        return certificate_cache.get_or_set(certificate_cache.generate_key(prefix, key), compute)


invariant_service = InvariantService()
