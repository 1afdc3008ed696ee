"""
End-to-end checks on the bundled examples and on seeded random gammoids.
"""

import random

import pytest

from app.api.services.engine_service import engine_service
from app.api.services.invariant_service import invariant_service
from app.api.services.matroid_service import MK4, matroid_service
from app.api.services.oracle_service import oracle_service
from app.domain.models.certificates import EvidenceKind, OrderabilityVerdict
from app.domain.models.engine import EngineConfig
from app.domain.models.matroid import direct_sum, free, uniform
from app.domain.models.tableau import Decision, DecisiveCase
from app.infrastructure.formats.matroid_format import parse_subset


def config(**overrides) -> EngineConfig:
    return EngineConfig.from_settings(**overrides)


class TestEightElementExample:
    def test_alpha_values(self, g841, g841_dual, g841_hyperplanes):
        table = invariant_service.alpha_table(g841)
        assert [invariant_service.alpha(g841, parse_subset(g841, list(h)), table) for h in g841_hyperplanes] == [1] * 5
        assert invariant_service.alpha(g841, g841.full) == -1
        assert invariant_service.alpha(g841_dual, g841_dual.full) == -1
        seven = g841_dual.restrict(parse_subset(g841_dual, list("1234567")))
        assert invariant_service.alpha(seven, seven.full) == -1
        assert invariant_service.alpha_non_negative(seven.dual()) is None

    def test_verdict(self, g841):
        verdict, trace, _ = engine_service.decide(g841, config())
        assert verdict.decision == Decision.GAMMOID
        assert verdict.case == DecisiveCase.MATCHING_GAMMOID
        identifications = [o for o in trace.outcomes(12) if o.startswith("identified with deflate on 7 of 8")]
        assert identifications
        assert trace.outcomes(1) == ["decisive, case (i)"]


class TestMK4Routes:
    def test_three_certificates_agree(self, mk4):
        # excluded minor: the matroid itself
        spec = matroid_service.has_minor_isomorphic_to(mk4, MK4)
        assert spec is not None
        assert spec.contract == 0 and spec.delete == 0
        # rank-3 alpha witness
        assert invariant_service.rank3_negative_set(mk4) == mk4.full
        assert invariant_service.alpha(mk4, mk4.full) == -1
        # strong base-orderability fails
        assert invariant_service.strongly_base_orderable(mk4).verdict == OrderabilityVerdict.NOT_ORDERABLE
        verdict, _, _ = engine_service.decide(mk4, config())
        assert verdict.decision == Decision.NOT_GAMMOID


class TestOracleSweep:
    @pytest.mark.parametrize("seed", range(200))
    def test_random_gammoid_is_never_excluded(self, seed):
        rep, m = oracle_service.random_gammoid(seed, 7, 7)
        assert invariant_service.evidence(m).kind != EvidenceKind.NOT_GAMMOID
        if set(rep.ground) == set(range(rep.vertex_count)):
            assert invariant_service.alpha_non_negative(m) is None

    @pytest.mark.parametrize("seed", range(200))
    def test_random_gammoid_decides_gammoid(self, seed):
        _, m = oracle_service.random_gammoid(seed, 7, 5)
        verdict, _, _ = engine_service.decide(m, config(max_iterations=200, max_extension_size=m.size + 1))
        assert verdict.decision == Decision.GAMMOID


CORPUS = [
    uniform(2, 4),
    uniform(1, 3),
    uniform(2, 5),
    uniform(3, 6),
    direct_sum(uniform(1, 2), uniform(1, 2)),
    direct_sum(uniform(2, 3), free(1)),
]


class TestInvariance:
    @pytest.mark.parametrize("m", CORPUS + [MK4])
    def test_duality_and_permutations(self, m):
        expected, _, _ = engine_service.decide(m, config())
        dual, _, _ = engine_service.decide(m.dual(), config())
        assert dual.decision == expected.decision
        rng = random.Random(m.size * 101 + m.rank_of_ground)
        for _ in range(5):
            permutation = list(range(m.size))
            rng.shuffle(permutation)
            verdict, _, _ = engine_service.decide(m.relabel(permutation), config())
            assert verdict.decision == expected.decision


class TestParallelVerdicts:
    @pytest.mark.parametrize("workers", [1, 2, 4, 8])
    def test_small_examples(self, workers, u24, mk4):
        assert engine_service.decide(u24, config(worker_count=workers))[0].decision == Decision.GAMMOID
        assert engine_service.decide(mk4, config(worker_count=workers))[0].decision == Decision.NOT_GAMMOID

    @pytest.mark.parametrize("workers", [1, 2, 4, 8])
    def test_eight_element_example(self, workers, g841):
        verdict, _, _ = engine_service.decide(g841, config(worker_count=workers, deterministic_seed=workers))
        assert verdict.decision == Decision.GAMMOID

    @pytest.mark.parametrize("strict", [True, False])
    @pytest.mark.parametrize("seed", range(10))
    def test_oracle_gammoids(self, seed, strict):
        _, m = oracle_service.random_gammoid(seed, 7, 5, strict=strict)
        caps = {"max_iterations": 200, "max_extension_size": m.size + 1}
        verdicts = {
            engine_service.decide(m, config(worker_count=workers, **caps))[0].decision for workers in (1, 2, 4, 8)
        }
        assert verdicts == {Decision.GAMMOID}
