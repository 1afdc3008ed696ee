"""
Engine Service.
The decision procedure: decisiveness check, intermediate-goal selection,
the certificate steps, extension exhaustion and parallel workers sharing
one tableau store.
"""

import random
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple

from app.core.config import settings
from app.core.exceptions import GammoidException, ResourceExhaustedError
from app.core.logging import get_logger, log_engine_step, log_extension_batch
from app.api.services.extension_service import extension_service
from app.api.services.invariant_service import invariant_service
from app.api.services.matroid_service import MK4, matroid_service
from app.api.services.tableau_service import diff, tableau_service
from app.domain.models.canonical import CanonicalKey
from app.domain.models.engine import EngineConfig, GoalSelection, Trace
from app.domain.models.matroid import Matroid, check_size
from app.domain.models.tableau import Certificate, Decision, Tableau, Verdict
from app.domain.repositories.tableau_repository import TableauStore

logger = get_logger(__name__)

CERTIFICATE_STEPS = tuple(range(3, 13))
EXHAUSTION_STEP = 13
# an exhausted extension stream sends the goal back through these
RESET_STEPS = tuple(range(5, 13))


@dataclass
class StepResult:
    """Outcome of one step: a contribution to commit and whether to go back to Step 1."""

    outcome: str
    contribution: Optional[Tableau] = None
    restart: bool = False
    exhausted: bool = False


class _Run:
    """Shared state of one decision run."""

    def __init__(self, engine: "EngineService", goal: Matroid, cfg: EngineConfig, kb: Optional[Tableau]):
        self.engine = engine
        self.cfg = cfg
        initial = Tableau.initial(goal)
        self.store = TableauStore(engine.merge(initial, kb or initial), engine.merge)
        self.trace = Trace()
        self.lock = threading.Lock()
        self.stop = threading.Event()
        self.done: Dict[CanonicalKey, Set[int]] = defaultdict(set)
        self.streams: Dict[CanonicalKey, Iterator[Matroid]] = {}
        self.finished: Set[CanonicalKey] = set()
        self.claimed: Set[CanonicalKey] = set()
        self.iterations = 0
        self.started = time.monotonic()
        self.verdict: Optional[Verdict] = None
        self.final: Optional[Tableau] = None
        self.error: Optional[GammoidException] = None

    def record(self, step: int, key: Optional[CanonicalKey], outcome: str, delta: str = "", worker: int = 0) -> None:
        goal_key = key.hex() if key else None
        with self.lock:
            self.trace.add(step, goal_key, outcome, delta, worker)
        log_engine_step(step, goal_key, outcome, worker, delta=delta)

    def check_time(self) -> None:
        if time.monotonic() - self.started > self.cfg.time_limit_seconds:
            raise ResourceExhaustedError(f"time limit of {self.cfg.time_limit_seconds}s reached")

    def tick(self) -> None:
        with self.lock:
            self.iterations += 1
            if self.iterations > self.cfg.max_iterations:
                raise ResourceExhaustedError(f"iteration cap of {self.cfg.max_iterations} reached")
        self.check_time()

    def steps_done(self, key: CanonicalKey) -> bool:
        return self.done[key].issuperset(CERTIFICATE_STEPS)

    def claim(self, t: Tableau, worker: int, designated: bool) -> Optional[CanonicalKey]:
        with self.lock:
            exclude = self.finished | self.claimed
            if not designated:
                exclude |= {k for k in self.done if self.steps_done(k)}
            ranked = self.engine.rank_candidates(t, self.cfg, exclude)
            if not ranked:
                return None
            if designated or len(ranked) == 1:
                key = ranked[0]
            else:
                rng = random.Random(self.cfg.deterministic_seed * 1009 + worker * 31 + self.iterations)
                key = rng.choice(ranked[: self.cfg.worker_count])
            self.claimed.add(key)
            return key

    def release(self, key: CanonicalKey) -> None:
        with self.lock:
            self.claimed.discard(key)

    def conclude(self, t: Tableau, verdict: Verdict, worker: int) -> None:
        with self.lock:
            if self.verdict is not None:
                return
            self.verdict = verdict
        final = self.store.commit(tableau_service.conclusion(t, verdict))
        self.final = final
        self.record(1, t.goal_key, f"decisive, case ({verdict.case.value})", worker=worker)
        self.stop.set()

    def fail(self, error: GammoidException) -> None:
        with self.lock:
            if self.error is None and self.verdict is None:
                self.error = error
        self.stop.set()

    def work(self, worker: int, designated: bool) -> None:
        """Steps 1 to 13 for one worker until some worker reaches a verdict."""
        try:
            while not self.stop.is_set():
                self.check_time()
                t = self.store.snapshot()
                verdict = tableau_service.is_decisive(t)
                if verdict is not None:
                    self.conclude(t, verdict, worker)
                    return
                key = self.claim(t, worker, designated)
                if key is None:
                    if designated:
                        raise ResourceExhaustedError("no intermediate goal left within the extension cap")
                    self.stop.wait(0.05)
                    continue
                self.record(2, key, "selected", worker=worker)
                try:
                    self.advance(t, key, worker, designated)
                finally:
                    self.release(key)
        except GammoidException as e:
            self.fail(e)

    def advance(self, t: Tableau, key: CanonicalKey, worker: int, designated: bool) -> None:
        for step in CERTIFICATE_STEPS:
            with self.lock:
                if step in self.done[key]:
                    continue
                self.done[key].add(step)
            self.tick()
            result = self.engine.run_step(t, key, step)
            self.commit(t, key, step, result, worker)
            if result.restart or self.stop.is_set():
                return
            t = self.store.snapshot()
        if not designated:
            return
        self.tick()
        result = self.engine.exhaust_step(t, key, self.cfg, self.streams)
        self.commit(t, key, EXHAUSTION_STEP, result, worker)
        if result.exhausted:
            with self.lock:
                self.finished.add(key)
            self.reset_to_goal(key, worker, designated)

    def reset_to_goal(self, key: CanonicalKey, worker: int, designated: bool) -> None:
        """Set M := G and continue at Step 5."""
        t = self.store.snapshot()
        goal_key = t.goal_key
        if key == goal_key or self.stop.is_set() or t.known_gammoid(goal_key) or goal_key in t.excluded:
            return
        with self.lock:
            self.done[goal_key].difference_update(RESET_STEPS)
        self.record(EXHAUSTION_STEP, goal_key, "reset to goal, continue at step 5", worker=worker)
        self.advance(t, goal_key, worker, designated)

    def commit(self, t: Tableau, key: CanonicalKey, step: int, result: StepResult, worker: int) -> None:
        delta = ""
        if result.contribution is not None:
            delta = diff(t, result.contribution).summary()
            self.store.commit(result.contribution)
        self.record(step, key, result.outcome, delta, worker)

    def result(self) -> Tuple[Verdict, Trace, Tableau]:
        if self.verdict is not None:
            return self.verdict, self.trace, self.final
        error = self.error or ResourceExhaustedError("run stopped before a verdict")
        if isinstance(error, ResourceExhaustedError):
            error.tableau = self.store.snapshot()
            error.trace = self.trace
        raise error


class EngineService:
    """Service driving the decision procedure."""

    def merge(self, current: Tableau, contribution: Tableau) -> Tableau:
        """Commit rule: expansion of the extended joint tableau."""
        joined = tableau_service.join([current, contribution])
        return tableau_service.expansion(tableau_service.extended(joined))

    # Goal selection

    def rank_candidates(
        self, t: Tableau, cfg: EngineConfig, exclude: Set[CanonicalKey] = frozenset()
    ) -> List[CanonicalKey]:
        """Undecided minors of the goal and intermediates, best first."""
        decided = t.gammoids | t.excluded | t.implied_gammoids
        candidates = {k for k in t.registry if t.is_minor_of_goal(k)} | set(t.intermediates)
        candidates -= decided
        candidates -= set(exclude)
        goal_root = t.find(t.goal_key)

        def preference(key: CanonicalKey):
            first = cfg.goal_selection == GoalSelection.GOAL_FIRST and key == t.goal_key
            return (not first, t.find(key) != goal_root, key.size, key.rank, key)

        return sorted(candidates, key=preference)

    def select_intermediate_goal(
        self, t: Tableau, cfg: Optional[EngineConfig] = None, exclude: Set[CanonicalKey] = frozenset()
    ) -> Optional[CanonicalKey]:
        ranked = self.rank_candidates(t, cfg or EngineConfig.from_settings(), exclude)
        return ranked[0] if ranked else None

    # Steps 3 to 12

    def _seed(self, t: Tableau, m: Matroid, rule: Certificate) -> Tableau:
        return tableau_service.join([t, tableau_service.seed_tableau(m, rule)])

    def run_step(self, t: Tableau, key: CanonicalKey, step: int) -> StepResult:
        """
        Run one certificate step on the intermediate goal with the given key.

        Args:
            t: Current tableau snapshot
            key: Registered key of the intermediate goal M
            step: Step number, 3 to 12

        Returns:
            StepResult with the tableau to commit, if any
        """
        m = t.matroid(key)
        if step == 3:
            verdict = tableau_service.is_decisive(t.with_goal(m))
            if verdict is None:
                return StepResult("T_M not decisive")
            concluded = tableau_service.conclusion(t.with_goal(m), verdict)
            return StepResult(
                f"T_M decisive, case ({verdict.case.value})",
                tableau_service.join([t, concluded]),
                restart=True,
            )
        if step == 4:
            spec = matroid_service.has_minor_isomorphic_to(m, MK4)
            if spec is None:
                return StepResult("no M(K4) minor")
            return StepResult(
                f"M(K4) minor via {matroid_service.describe_minor(m, spec)}",
                self._seed(t, m, Certificate.EXCLUDED_MINOR_MK4),
                restart=True,
            )
        if step == 5:
            if not invariant_service.is_binary(m):
                return StepResult("U2,4 minor")
            return StepResult("binary without M(K4)", self._seed(t, m, Certificate.SERIES_PARALLEL), restart=True)
        if step in (6, 7):
            target = m if step == 6 else m.dual()
            if target.key in t.intermediates:
                return StepResult("already intermediate")
            if invariant_service.is_strict_gammoid(target):
                return StepResult("alpha nonnegative", self._seed(t, target, Certificate.ALPHA_NONNEGATIVE), restart=True)
            return StepResult("alpha negative", self._seed(t, target, Certificate.ALPHA_NEGATIVE))
        if step == 8:
            if invariant_service.is_strongly_base_orderable(m):
                return StepResult("strongly base-orderable")
            return StepResult("not strongly base-orderable", self._seed(t, m, Certificate.NOT_SBO), restart=True)
        if step in (9, 10):
            target = m if step == 9 else m.dual()
            if target.rank_of_ground < 3:
                return StepResult("rank below 3")
            witness = invariant_service.rank3_contraction_witness(target)
            if witness is None:
                return StepResult("no rank-3 witness")
            x, y = witness
            return StepResult(
                f"rank-3 witness: contract {target.format(x)}, alpha negative on {target.format(y)}",
                self._seed(t, m, Certificate.RANK3_ALPHA),
                restart=True,
            )
        if step in (11, 12):
            target = m if step == 11 else m.dual()
            deflate, certificate = extension_service.minimal_deflate(target)
            if deflate.size == target.size:
                return StepResult("deflated")
            joined = tableau_service.join([t, Tableau.initial(target), tableau_service.seed_tableau(deflate)])
            identified = tableau_service.identify(joined, target.key, deflate.key)
            removed = target.format(target.full & ~certificate.kept_set)
            return StepResult(
                f"identified with deflate on {deflate.size} of {target.size} elements, removed {removed}",
                identified,
                restart=True,
            )
        raise ValueError(f"step {step} is not a certificate step")

    # Step 13

    def _conclude_through(self, t: Tableau, m: Matroid, extension: Matroid) -> Optional[Tableau]:
        """Conclusion of T_N for a registered gammoid extension N, with M registered as its minor."""
        seeded = tableau_service.register_minor(t.with_goal(extension), m, extension)
        verdict = tableau_service.is_decisive(seeded, exhaustive=False)
        if verdict is None or verdict.decision != Decision.GAMMOID:
            return None
        return tableau_service.conclusion(seeded, verdict)

    def exhaust_step(
        self,
        t: Tableau,
        key: CanonicalKey,
        cfg: EngineConfig,
        streams: Dict[CanonicalKey, Iterator[Matroid]],
    ) -> StepResult:
        """
        Pull up to cfg.extension_batch unseen extension classes of M and classify them.

        A strict-gammoid extension N enters 𝒢 with N*, and the conclusion of
        T_N marks M, registered as a minor of N, as a gammoid.

        Args:
            t: Current tableau snapshot
            key: Registered key of M
            cfg: Engine configuration
            streams: Per-key extension streams, kept across visits

        Returns:
            StepResult; exhausted is set when the stream is empty
        """
        m = t.matroid(key)
        limit = min(extension_service.size_bound(t.goal), cfg.max_extension_size)
        stream = streams.get(key)
        if stream is None:
            stream = extension_service.iter_extensions(m, limit, m.size + 1)
            streams[key] = stream
        known = t.gammoids | t.intermediates | t.excluded
        parts = [t]
        pulled = 0
        exhausted = False
        while pulled < cfg.extension_batch:
            extension = next(stream, None)
            if extension is None:
                exhausted = True
                break
            if extension.key in known:
                concluded = self._conclude_through(t, m, extension)
                if concluded is not None:
                    log_extension_batch(key.hex(), limit, pulled, exhausted)
                    parts.append(concluded)
                    return StepResult("extension already a gammoid", tableau_service.join(parts), restart=True)
                continue
            pulled += 1
            if invariant_service.is_strict_gammoid(extension):
                seeded = tableau_service.seed_tableau(extension, Certificate.EXHAUSTION)
                seeded = tableau_service.register_minor(seeded, m, extension)
                parts.append(tableau_service.conclusion(seeded))
            else:
                parts.append(tableau_service.seed_tableau(extension, Certificate.ALPHA_NEGATIVE))
        log_extension_batch(key.hex(), limit, pulled, exhausted)
        if pulled == 0:
            return StepResult("extensions exhausted, reset to goal", restart=True, exhausted=exhausted)
        outcome = f"{pulled} extension classes up to {limit} elements"
        return StepResult(outcome, tableau_service.join(parts), restart=True, exhausted=exhausted)

    # Drivers

    def decide(
        self, goal: Matroid, cfg: Optional[EngineConfig] = None, kb: Optional[Tableau] = None
    ) -> Tuple[Verdict, Trace, Tableau]:
        """
        Decide whether goal is a gammoid.

        Args:
            goal: Matroid to decide
            cfg: Engine configuration; defaults from settings
            kb: Knowledge base joined into the initial tableau

        Returns:
            (Verdict, Trace, final Tableau)

        Raises:
            SizeExceededError: goal over the canonicalization cap
            ResourceExhaustedError: caps hit first; carries the partial tableau
        """
        cfg = cfg or EngineConfig.from_settings()
        check_size(goal.size, settings.MAX_CANONICAL_SIZE, "goal ground set")
        if cfg.worker_count > 1:
            return self.run_parallel(goal, cfg, kb)
        run = _Run(self, goal, cfg, kb)
        run.work(0, designated=True)
        verdict, trace, final = run.result()
        logger.info("Decision reached", decision=verdict.decision.value, case=verdict.case.value, steps=len(trace.steps))
        return verdict, trace, final

    def run_parallel(
        self, goal: Matroid, cfg: EngineConfig, kb: Optional[Tableau] = None
    ) -> Tuple[Verdict, Trace, Tableau]:
        """
        Workers share one store; worker 0 is the one that runs exhaustion.
        """
        check_size(goal.size, settings.MAX_CANONICAL_SIZE, "goal ground set")
        run = _Run(self, goal, cfg, kb)
        with ThreadPoolExecutor(max_workers=cfg.worker_count, thread_name_prefix="engine") as pool:
            futures = [pool.submit(run.work, i, i == 0) for i in range(cfg.worker_count)]
            for future in futures:
                future.result()
        verdict, trace, final = run.result()
        logger.info(
            "Parallel decision reached",
            decision=verdict.decision.value,
            workers=cfg.worker_count,
            steps=len(trace.steps),
        )
        return verdict, trace, final


engine_service = EngineService()
