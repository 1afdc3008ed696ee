import pytest

from app.api.services.invariant_service import invariant_service
from app.api.services.oracle_service import oracle_service
from app.core.exceptions import InputError, MatroidFormatError, SizeExceededError
from app.domain.models.digraph import Digraph, Representation, Routing
from app.domain.models.matroid import uniform
from app.infrastructure.formats.digraph_format import dump_digraph, load_digraph, parse_digraph


def path_rep() -> Representation:
    """0 -> 1 -> 2 with target 2 and ground {0, 1}."""
    return Representation(
        digraph=Digraph(vertex_count=3, arcs=frozenset({(0, 1), (1, 2)})),
        targets=frozenset({2}),
        ground=(0, 1),
    )


class TestRouting:
    def test_single_path(self):
        rep = path_rep()
        routing = oracle_service.route(rep, [0])
        assert routing is not None
        assert routing.paths == [(0, 1, 2)]
        assert oracle_service.verify_routing(rep, routing, [0])

    def test_two_sources_share_a_vertex(self):
        rep = path_rep()
        assert oracle_service.route(rep, [0, 1]) is None
        assert not oracle_service.is_linked(rep, [0, 1])

    def test_target_routes_to_itself(self):
        rep = path_rep()
        assert oracle_service.is_linked(rep, [2])

    def test_verify_rejects_bad_paths(self):
        rep = path_rep()
        assert not oracle_service.verify_routing(rep, Routing(paths=[(0, 2)]), [0])
        assert not oracle_service.verify_routing(rep, Routing(paths=[(0, 1)]), [0])
        assert not oracle_service.verify_routing(rep, Routing(paths=[(0, 1, 2), (1, 2)]), [0, 1])
        assert not oracle_service.verify_routing(rep, Routing(paths=[(1, 2)]), [0])


class TestGamma:
    def test_bundled_digraph_is_u12(self, data_file):
        m = oracle_service.gamma(load_digraph(data_file("u12.digraph")))
        assert m.is_isomorphic(uniform(1, 2))
        assert m.ground.labels == ("0", "1")

    def test_path_gives_rank_one(self):
        m = oracle_service.gamma(path_rep())
        assert m.rank_of_ground == 1
        assert m.is_isomorphic(uniform(1, 2))

    def test_u24_from_bipartite_digraph(self):
        # four sources each pointing at both targets
        arcs = frozenset((s, t) for s in range(4) for t in (4, 5))
        rep = Representation(digraph=Digraph(vertex_count=6, arcs=arcs), targets=frozenset({4, 5}), ground=(0, 1, 2, 3))
        assert oracle_service.gamma(rep).is_isomorphic(uniform(2, 4))

    def test_vertex_cap(self, monkeypatch):
        from app.core.config import settings

        monkeypatch.setattr(settings, "MAX_ORACLE_VERTICES", 2)
        with pytest.raises(SizeExceededError):
            oracle_service.gamma(path_rep())

    def test_deflation_extension_of_representation(self):
        rep = oracle_service.deflation_extend_representation(path_rep(), [1])
        assert rep.vertex_count == 4
        assert rep.ground == (0, 1, 3)
        m = oracle_service.gamma(rep)
        assert m.is_isomorphic(uniform(1, 3))

    def test_deflation_extension_rejects_foreign_vertices(self):
        with pytest.raises(InputError):
            oracle_service.deflation_extend_representation(path_rep(), [2])
        with pytest.raises(InputError):
            oracle_service.deflation_extend_representation(path_rep(), [1], e_new=1)


class TestRandomGammoids:
    def test_seed_is_reproducible(self):
        rep_a, m_a = oracle_service.random_gammoid(7, 6, 5)
        rep_b, m_b = oracle_service.random_gammoid(7, 6, 5)
        assert rep_a == rep_b
        assert m_a.same_bases(m_b)

    @pytest.mark.parametrize("seed", range(25))
    def test_strict_gammoids_are_alpha_nonnegative(self, seed):
        rep, m = oracle_service.random_gammoid(seed, 6, 6, strict=True)
        assert set(rep.ground) == set(range(rep.vertex_count))
        assert invariant_service.alpha_non_negative(m) is None

    @pytest.mark.parametrize("seed", range(25))
    def test_random_gammoids_are_strongly_base_orderable(self, seed):
        _, m = oracle_service.random_gammoid(seed, 7, 5)
        assert invariant_service.is_strongly_base_orderable(m)

    def test_empty_bound(self):
        rep, m = oracle_service.random_gammoid(1, 0, 0)
        assert rep.vertex_count == 0
        assert m.size == 0


class TestDigraphFormat:
    def test_round_trip(self):
        rep = path_rep()
        assert parse_digraph(dump_digraph(rep)) == rep

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "VERTICES two\n",
            "VERTICES 2\nTARGETS 5\n",
            "VERTICES 2\nGROUND 0 0\n",
            "VERTICES 2\nARCS\n0\n",
            "VERTICES 2\n0 1\n",
            "VERTICES 2\nTARGETS 0\nTARGETS 1\n",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(MatroidFormatError):
            parse_digraph(text)
