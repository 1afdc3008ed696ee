"""
Matroid Service.
Minor search and isomorphism queries over explicit matroids.
"""

from itertools import combinations
from typing import Iterator, Optional

from app.core.exceptions import SizeExceededError
from app.core.logging import get_logger, log_certificate
from app.domain.models.matroid import Matroid, MinorSpec, cycle_matroid_k4, uniform
from app.domain.models.subsets import mask_of, permute
from app.infrastructure.cache import certificate_cache

logger = get_logger(__name__)

U24 = uniform(2, 4, labels=("a", "b", "c", "d"))
MK4 = cycle_matroid_k4()

PATTERNS = {"U24": U24, "MK4": MK4}


class MatroidService:
    """Service for minor and isomorphism questions."""

    def candidate_minors(self, m: Matroid, rank: int, size: int) -> Iterator[MinorSpec]:
        """
        Minor specs M / C \\ D with C independent, D coindependent in M / C,
        rank(M / C \\ D) = rank and |E| - |C| - |D| = size.
        """
        r = m.rank_of_ground
        contract_size = r - rank
        delete_size = m.size - contract_size - size
        if contract_size < 0 or delete_size < 0:
            return
        for c in combinations(range(m.size), contract_size):
            c_mask = mask_of(c)
            if not m.is_independent(c_mask):
                continue
            rest = [e for e in range(m.size) if not c_mask >> e & 1]
            for d in combinations(rest, delete_size):
                d_mask = mask_of(d)
                if m.rank(m.full & ~d_mask) == r:
                    yield MinorSpec(contract=c_mask, delete=d_mask)

    def _search_minor(self, m: Matroid, pattern: Matroid) -> Optional[MinorSpec]:
        if pattern.size > m.size or pattern.rank_of_ground > m.rank_of_ground:
            return None
        corank = pattern.size - pattern.rank_of_ground
        if corank > m.size - m.rank_of_ground:
            return None
        basis_count = len(pattern.bases)
        for spec in self.candidate_minors(m, pattern.rank_of_ground, pattern.size):
            minor = m.minor(spec)
            if len(minor.bases) == basis_count and minor.is_isomorphic(pattern):
                return spec
        return None

    def has_minor_isomorphic_to(self, m: Matroid, pattern: Matroid) -> Optional[MinorSpec]:
        """
        Find a minor of m isomorphic to pattern.

        Results are cached per isomorphism class of m, stored in canonical
        coordinates and mapped back onto m's own indices.

        Args:
            m: Matroid to search
            pattern: Matroid to look for

        Returns:
            Optional[MinorSpec]: a witness, or None
        """
        if pattern.size > m.size:
            return None
        try:
            m_key = m.key
            p_key = pattern.key
        except SizeExceededError:
            return self._search_minor(m, pattern)

        labelling = m.canonical_labelling()
        cache_key = certificate_cache.generate_key("minor", m_key.hex(), p_key.hex())

        def compute():
            spec = self._search_minor(m, pattern)
            log_certificate("minor", "found" if spec else "absent", size=m.size, pattern=p_key.short())
            if spec is None:
                return None
            return (permute(spec.contract, labelling), permute(spec.delete, labelling))

        cached = certificate_cache.get_or_set(cache_key, compute)
        if cached is None:
            return None
        inverse = [0] * m.size
        for old, new in enumerate(labelling):
            inverse[new] = old
        return MinorSpec(contract=permute(cached[0], inverse), delete=permute(cached[1], inverse))

    def is_isomorphic(self, a: Matroid, b: Matroid) -> bool:
        return a.is_isomorphic(b)

    def describe_minor(self, m: Matroid, spec: MinorSpec) -> str:
        return f"contract {m.format(spec.contract)} delete {m.format(spec.delete)}"


matroid_service = MatroidService()
