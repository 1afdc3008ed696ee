"""
Extension Service.
Modular cuts, single-element extensions, deflation search and enumeration
of extensions up to isomorphism.
"""

from typing import Callable, Dict, Iterator, List, Optional, Tuple

from app.core.config import settings
from app.core.exceptions import FlatLatticeTooLargeError, InvalidCutError
from app.core.logging import get_logger, log_certificate
from app.domain.models.canonical import CanonicalKey
from app.domain.models.extension import DeflationCertificate, ModularCut
from app.domain.models.matroid import GroundSet, Matroid
from app.domain.models.subsets import elements, popcount

logger = get_logger(__name__)


class ExtensionService:
    """Service for the extension lattice of a matroid."""

    # Modular cuts

    def iter_modular_cuts(self, m: Matroid) -> Iterator[ModularCut]:
        """
        Enumerate modular cuts by deciding flats from the top of the lattice down.

        A flat may join only when all its super-flats have; it must join when a
        modular pair of members meets in it. Both conditions are decided as soon
        as the flat is reached, since super-flats have strictly larger rank.

        Raises:
            FlatLatticeTooLargeError: more flats than MAX_FLATS_FOR_CUTS
        """
        flats = m.flats()
        cap = settings.MAX_FLATS_FOR_CUTS
        if len(flats) > cap:
            raise FlatLatticeTooLargeError(len(flats), cap)
        index = {f: i for i, f in enumerate(flats)}
        ranks = [m.rank(f) for f in flats]
        supers = [0] * len(flats)
        meets: List[List[Tuple[int, int]]] = [[] for _ in flats]
        for i, f in enumerate(flats):
            for j, g in enumerate(flats):
                if i != j and f & g == f:
                    supers[i] |= 1 << j
        for i, f in enumerate(flats):
            for j in range(i + 1, len(flats)):
                g = flats[j]
                meet = f & g
                if meet in (f, g):
                    continue
                if ranks[i] + ranks[j] == m.rank(f | g) + ranks[index[meet]]:
                    meets[index[meet]].append((i, j))
        order = sorted(range(len(flats)), key=lambda i: (-ranks[i], flats[i]))

        def build(chosen: int) -> ModularCut:
            members = [i for i in range(len(flats)) if chosen >> i & 1]
            minimal = tuple(
                sorted(
                    flats[i]
                    for i in members
                    if not any(chosen >> j & 1 and supers[j] >> i & 1 for j in members)
                )
            )
            return ModularCut(
                minimal_flats=minimal, all_flats=frozenset(flats[i] for i in members)
            )

        def walk(pos: int, chosen: int) -> Iterator[ModularCut]:
            if pos == len(order):
                yield build(chosen)
                return
            i = order[pos]
            closed_above = supers[i] & ~chosen == 0
            forced = any(chosen >> a & 1 and chosen >> b & 1 for a, b in meets[i])
            if not forced:
                yield from walk(pos + 1, chosen)
            if closed_above:
                yield from walk(pos + 1, chosen | (1 << i))

        yield from walk(0, 0)

    def modular_cuts(self, m: Matroid) -> List[ModularCut]:
        return list(self.iter_modular_cuts(m))

    def check_cut(self, m: Matroid, cut: ModularCut) -> None:
        """
        Raises:
            InvalidCutError: the family is not a modular cut of m
        """
        flats = set(m.flats())
        members = cut.all_flats
        stray = [f for f in members if f not in flats]
        if stray:
            raise InvalidCutError(f"{m.format(stray[0])} is not a flat")
        for f in members:
            for g in flats:
                if f & g == f and g not in members:
                    raise InvalidCutError(
                        f"cut is not up-closed: {m.format(f)} in, {m.format(g)} out"
                    )
        for f in members:
            for g in members:
                meet = f & g
                if meet in (f, g) or meet in members:
                    continue
                if m.rank(f) + m.rank(g) == m.rank(f | g) + m.rank(meet):
                    raise InvalidCutError(
                        f"modular pair {m.format(f)}, {m.format(g)} meets outside the cut"
                    )
        minimal = tuple(sorted(f for f in members if not any(g != f and g & f == g for g in members)))
        if tuple(sorted(cut.minimal_flats)) != minimal:
            raise InvalidCutError("minimal flats do not match the cut")

    def extend_by_cut(self, m: Matroid, cut: ModularCut, label: Optional[str] = None) -> Matroid:
        """
        The single-element extension of m determined by cut.

        Args:
            m: Matroid on n elements
            cut: Modular cut of m
            label: Display label for the new element

        Returns:
            Matroid on n + 1 elements; the new element has index n

        Raises:
            InvalidCutError: cut is not a modular cut of m
        """
        self.check_cut(m, cut)
        n = m.size
        new = 1 << n
        if cut.is_empty:
            bases = [b | new for b in m.bases]
        else:
            bases = list(m.bases)
            near_bases = {b & ~(1 << x) for b in m.bases for x in elements(b)}
            for i in sorted(near_bases):
                if m.closure(i) not in cut.all_flats:
                    bases.append(i | new)
        labels = list(m.ground.labels)
        name = label or f"x{n}"
        while name in labels:
            name += "'"
        ground = GroundSet(size=n + 1, labels=tuple(labels + [name]))
        return Matroid(ground, bases)

    # Deflation

    def principal_cut_minimum(self, m: Matroid, keep: int, e: int) -> Optional[int]:
        """
        Unique minimal flat of {F flat of M|keep : e ∈ cl_M(F)}.

        Returns:
            Optional[int]: the minimum, or None when the cut has several minimal
            flats or is empty (e a coloop of M|(keep ∪ e))
        """
        bit = 1 << e
        cut = [f for f in m.flats_within(keep) if m.rank(f | bit) == m.rank(f)]
        if not cut:
            return None
        minimal = [f for f in cut if not any(g != f and g & f == g for g in cut)]
        return minimal[0] if len(minimal) == 1 else None

    def _removal_search(
        self, m: Matroid, target: Optional[int] = None, greedy: bool = False
    ) -> Tuple[int, Dict[int, Tuple[int, int, int]]]:
        """
        Breadth-first search over kept sets, removing one re-attachable element
        per move. With a target, only supersets of it are visited.
        """
        parents: Dict[int, Tuple[int, int, int]] = {}
        frontier = [m.full]
        best = m.full
        while frontier:
            nxt = []
            for state in frontier:
                for e in elements(state):
                    keep = state & ~(1 << e)
                    if keep in parents or (target is not None and target & keep != target):
                        continue
                    flat = self.principal_cut_minimum(m, keep, e)
                    if flat is None:
                        continue
                    parents[keep] = (state, e, flat)
                    nxt.append(keep)
                    if greedy:
                        break
                if greedy and nxt:
                    break
            if not nxt:
                break
            frontier = sorted(nxt)
            best = frontier[0]
        return best, parents

    def _certificate(self, kept: int, parents: Dict[int, Tuple[int, int, int]], full: int) -> DeflationCertificate:
        order: List[int] = []
        flats: List[int] = []
        state = kept
        while state != full:
            state, e, flat = parents[state]
            order.append(e)
            flats.append(flat)
        return DeflationCertificate(kept_set=kept, removal_order=order, minimal_flat_per_step=flats)

    def minimal_deflate(self, m: Matroid, greedy: Optional[bool] = None) -> Tuple[Matroid, DeflationCertificate]:
        """
        A deflate of m with the fewest elements.

        Args:
            m: Matroid
            greedy: Remove the first removable element only (heuristic);
                defaults to settings

        Returns:
            (M|X, certificate); (m, empty certificate) when m is deflated
        """
        if greedy is None:
            greedy = settings.DEFLATE_GREEDY
        best, parents = self._removal_search(m, greedy=greedy)
        certificate = self._certificate(best, parents, m.full)
        log_certificate("deflate", f"{popcount(best)}/{m.size}", size=m.size)
        if best == m.full:
            return m, certificate
        return m.restrict(best), certificate

    def is_deflated(self, m: Matroid) -> bool:
        return all(
            self.principal_cut_minimum(m, m.full & ~(1 << e), e) is None for e in range(m.size)
        )

    def replay_certificate(self, m: Matroid, certificate: DeflationCertificate) -> bool:
        """Re-verify every unique-minimal-flat step of a deflation certificate."""
        state = certificate.kept_set
        if len(certificate.removal_order) != len(certificate.minimal_flat_per_step):
            return False
        for e, flat in zip(certificate.removal_order, certificate.minimal_flat_per_step):
            if state >> e & 1:
                return False
            if self.principal_cut_minimum(m, state, e) != flat:
                return False
            state |= 1 << e
        return state == m.full

    def deflation_of(self, small: Matroid, large: Matroid) -> Optional[DeflationCertificate]:
        """
        A certificate that some restriction of large isomorphic to small is a
        deflate of large, or None.
        """
        if small.size > large.size or small.rank_of_ground != large.rank_of_ground:
            return None
        if small.size == large.size:
            return DeflationCertificate(kept_set=large.full) if small.is_isomorphic(large) else None
        _, parents = self._removal_search(large, target=None)
        for kept in sorted(parents):
            if popcount(kept) != small.size:
                continue
            restriction = large.restrict(kept)
            if restriction.is_isomorphic(small):
                return self._certificate(kept, parents, large.full)
        return None

    # Extensions up to isomorphism

    def iter_extensions(
        self,
        m: Matroid,
        max_size: int,
        min_size: Optional[int] = None,
        stop: Optional[Callable[[Matroid], bool]] = None,
    ) -> Iterator[Matroid]:
        """
        One representative per isomorphism class of extensions of m with
        min_size..max_size elements, smallest sizes first.

        Each level is deduplicated by canonical key before it is extended.

        Raises:
            SizeExceededError: canonicalization cap reached
        """
        min_size = m.size if min_size is None else min_size
        if min_size <= m.size <= max_size:
            yield m
            if stop and stop(m):
                return
        level: Dict[CanonicalKey, Matroid] = {m.key: m}
        for size in range(m.size + 1, max_size + 1):
            nxt: Dict[CanonicalKey, Matroid] = {}
            for key in sorted(level):
                parent = level[key]
                for cut in self.iter_modular_cuts(parent):
                    child = self.extend_by_cut(parent, cut)
                    child_key = child.key
                    if child_key in nxt:
                        continue
                    nxt[child_key] = child
                    if size >= min_size:
                        yield child
                        if stop and stop(child):
                            return
            level = nxt

    def extensions_up_to_iso(
        self,
        m: Matroid,
        target_size: int,
        stop: Optional[Callable[[Matroid], bool]] = None,
    ) -> Iterator[Matroid]:
        """Extension classes of m with exactly target_size elements."""
        if target_size < m.size:
            raise ValueError(f"target size {target_size} below ground size {m.size}")
        return self.iter_extensions(m, target_size, target_size, stop)

    def size_bound(self, m: Matroid) -> int:
        r = m.rank_of_ground
        return r * r * m.size + r + m.size


extension_service = ExtensionService()
