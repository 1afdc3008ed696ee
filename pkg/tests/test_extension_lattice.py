from itertools import combinations

import pytest

from app.api.services.extension_service import extension_service
from app.core.config import settings
from app.core.exceptions import FlatLatticeTooLargeError, InvalidCutError, MatroidAxiomError
from app.domain.models.extension import DeflationCertificate, ModularCut
from app.domain.models.matroid import GroundSet, Matroid, free, loops, uniform
from app.domain.models.subsets import mask_of
from app.infrastructure.formats.matroid_format import parse_subset


def labelled_extensions(m: Matroid):
    """Every basis family on E + e whose deletion of e is m, found by brute force."""
    n = m.size
    new = 1 << n
    ground = GroundSet(size=n + 1)
    found = {tuple(sorted(b | new for b in m.bases))}  # e a coloop
    near = [mask_of(c) | new for c in combinations(range(n), m.rank_of_ground - 1)] if m.rank_of_ground else []
    for k in range(len(near) + 1):
        for extra in combinations(near, k):
            try:
                candidate = Matroid(ground, list(m.bases) + list(extra))
            except MatroidAxiomError:
                continue
            found.add(candidate.bases)
    return found


SMALL = [
    loops(0),
    free(1),
    loops(1),
    uniform(1, 2),
    uniform(2, 3),
    uniform(1, 3),
    uniform(2, 4),
    Matroid.from_bases(3, [(0, 2), (1, 2)]),
    Matroid.from_bases(4, [(0, 2), (0, 3), (1, 2), (1, 3)]),
]


class TestModularCuts:
    @pytest.mark.parametrize("m, expected", [(loops(0), 2), (free(1), 3), (uniform(2, 3), 6)])
    def test_cut_counts(self, m, expected):
        assert len(extension_service.modular_cuts(m)) == expected

    @pytest.mark.parametrize("m", SMALL)
    def test_cuts_match_labelled_extensions(self, m):
        cuts = extension_service.modular_cuts(m)
        extensions = {extension_service.extend_by_cut(m, cut).bases for cut in cuts}
        assert len(extensions) == len(cuts)
        assert extensions == labelled_extensions(m)

    @pytest.mark.parametrize("m", SMALL)
    def test_every_enumerated_cut_is_valid(self, m):
        for cut in extension_service.iter_modular_cuts(m):
            extension_service.check_cut(m, cut)

    def test_non_up_closed_family_is_rejected(self):
        m = uniform(2, 3)
        with pytest.raises(InvalidCutError):
            extension_service.check_cut(m, ModularCut(minimal_flats=(0b001,), all_flats=frozenset({0b001})))

    def test_modular_pair_must_meet_inside(self):
        m = uniform(2, 3)
        cut = ModularCut(minimal_flats=(0b001, 0b010), all_flats=frozenset({0b001, 0b010, 0b111}))
        with pytest.raises(InvalidCutError):
            extension_service.extend_by_cut(m, cut)

    def test_flat_lattice_cap(self, monkeypatch):
        monkeypatch.setattr(settings, "MAX_FLATS_FOR_CUTS", 3)
        with pytest.raises(FlatLatticeTooLargeError):
            extension_service.modular_cuts(uniform(2, 3))


class TestExtendByCut:
    def test_empty_cut_adds_coloop(self):
        m = extension_service.extend_by_cut(free(1), ModularCut())
        assert m.is_isomorphic(free(2))
        assert m.ground.labels == ("0", "x1")

    def test_top_cut_adds_parallel_element(self):
        m = free(1)
        cut = ModularCut(minimal_flats=(0b1,), all_flats=frozenset({0b1}))
        assert extension_service.extend_by_cut(m, cut).is_isomorphic(uniform(1, 2))

    def test_full_cut_adds_loop(self):
        m = free(1)
        cut = ModularCut(minimal_flats=(0,), all_flats=frozenset({0, 0b1}))
        ext = extension_service.extend_by_cut(m, cut)
        assert ext.loops() == 0b10

    def test_label_is_unique(self):
        m = Matroid.from_bases(1, [(0,)], labels=["x1"])
        ext = extension_service.extend_by_cut(m, ModularCut())
        assert ext.ground.labels == ("x1", "x1'")


class TestExtensionsUpToIsomorphism:
    def test_single_element_extensions_of_u11(self):
        classes = list(extension_service.extensions_up_to_iso(free(1), 2))
        assert len(classes) == 3
        assert len({m.key for m in classes}) == 3

    @pytest.mark.parametrize("m, size", [(free(1), 4), (uniform(1, 2), 5), (uniform(2, 3), 4)])
    def test_classes_match_brute_force(self, m, size):
        classes = {x.key for x in extension_service.extensions_up_to_iso(m, size)}
        level = {m.key: m}
        for _ in range(size - m.size):
            nxt = {}
            for parent in level.values():
                for bases in labelled_extensions(parent):
                    child = Matroid(GroundSet(size=parent.size + 1), bases, validate=False)
                    nxt.setdefault(child.key, child)
            level = nxt
        assert classes == set(level)

    def test_stream_yields_smaller_sizes_first(self):
        sizes = [x.size for x in extension_service.iter_extensions(free(1), 3, 2)]
        assert sizes == sorted(sizes)
        assert sizes[0] == 2

    def test_stop_callback_ends_stream(self):
        seen = list(extension_service.iter_extensions(free(1), 3, 2, stop=lambda x: True))
        assert len(seen) == 1

    def test_target_below_ground_size(self):
        with pytest.raises(ValueError):
            extension_service.extensions_up_to_iso(uniform(2, 4), 3)

    def test_size_bound(self, g841):
        assert extension_service.size_bound(g841) == 4 * 4 * 8 + 4 + 8


class TestDeflation:
    def test_u24_deflates_to_u22(self, u24):
        deflate, certificate = extension_service.minimal_deflate(u24)
        assert deflate.is_isomorphic(free(2))
        assert len(certificate.removal_order) == 2
        assert extension_service.replay_certificate(u24, certificate)

    def test_example_is_deflated(self, g841):
        assert extension_service.is_deflated(g841)
        deflate, certificate = extension_service.minimal_deflate(g841)
        assert deflate is g841
        assert certificate.is_trivial

    def test_dual_drops_to_seven_elements(self, g841_dual):
        deflate, certificate = extension_service.minimal_deflate(g841_dual)
        assert deflate.size == 7
        assert deflate.rank_of_ground == 4
        assert extension_service.replay_certificate(g841_dual, certificate)
        assert extension_service.deflation_of(deflate, g841_dual) is not None

    def test_removing_8_via_flat_123(self, g841_dual):
        keep = parse_subset(g841_dual, list("1234567"))
        flat = extension_service.principal_cut_minimum(g841_dual, keep, 7)
        assert flat == parse_subset(g841_dual, ["1", "2", "3"])

    def test_greedy_still_yields_a_deflate(self, g841_dual):
        deflate, certificate = extension_service.minimal_deflate(g841_dual, greedy=True)
        assert deflate.size < g841_dual.size
        assert extension_service.replay_certificate(g841_dual, certificate)

    def test_coloop_is_not_removable(self):
        m = free(2)
        assert extension_service.principal_cut_minimum(m, 0b01, 1) is None
        assert extension_service.is_deflated(m)

    def test_tampered_certificate_fails_replay(self, u24):
        _, certificate = extension_service.minimal_deflate(u24)
        forged = DeflationCertificate(
            kept_set=certificate.kept_set,
            removal_order=certificate.removal_order,
            minimal_flat_per_step=[0] * len(certificate.removal_order),
        )
        assert not extension_service.replay_certificate(u24, forged)

    def test_unrelated_matroids_are_not_deflates(self, u24, mk4):
        assert extension_service.deflation_of(u24, mk4) is None
        assert extension_service.deflation_of(uniform(2, 3), u24) is not None


def all_matroids(max_size: int):
    """Every labelled matroid on at most max_size elements."""
    for n in range(max_size + 1):
        for r in range(n + 1):
            candidates = [mask_of(c) for c in combinations(range(n), r)]
            for k in range(1, len(candidates) + 1):
                for bases in combinations(candidates, k):
                    try:
                        yield Matroid(GroundSet(size=n), list(bases))
                    except MatroidAxiomError:
                        continue


def test_cut_count_equals_labelled_extension_count_up_to_four_elements():
    checked = 0
    for m in all_matroids(4):
        assert len(extension_service.modular_cuts(m)) == len(labelled_extensions(m))
        checked += 1
    # labelled matroids on 0..4 elements: 1 + 2 + 5 + 16 + 68
    assert checked == 92
