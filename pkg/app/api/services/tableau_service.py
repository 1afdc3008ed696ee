"""
Tableau Service.
Valid derivations on matroid tableaux, seeding from certificates, the
decisiveness test, the validity audit and log replay.
"""

from dataclasses import replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from app.core.config import settings
from app.core.exceptions import (
    InvalidSelectionError,
    NotADeflateError,
    NotDecisiveError,
)
from app.core.logging import get_logger, log_derivation
from app.api.services.extension_service import extension_service
from app.api.services.invariant_service import invariant_service
from app.api.services.matroid_service import MK4, U24, matroid_service
from app.domain.models.canonical import CanonicalKey
from app.domain.models.certificates import EvidenceKind, SeriesParallelVerdict
from app.domain.models.matroid import Matroid
from app.domain.models.tableau import (
    WITNESS_PRIORITY,
    AuditEntry,
    AuditReport,
    Certificate,
    Decision,
    DecisiveCase,
    DerivationKind,
    DerivationRecord,
    Family,
    Link,
    LinkReason,
    Tableau,
    TableauDelta,
    TableauSelection,
    Verdict,
)

logger = get_logger(__name__)


def _hexes(keys: Iterable[CanonicalKey]) -> List[str]:
    return sorted(k.hex() for k in keys)


def _keys(hexes: Iterable[str]) -> Set[CanonicalKey]:
    return {CanonicalKey.from_hex(h) for h in hexes}


def diff(before: Tableau, after: Tableau) -> TableauDelta:
    """Everything after holds that before does not."""
    return TableauDelta(
        registered=_hexes(set(after.registry) - set(before.registry)),
        gammoids=_hexes(after.gammoids - before.gammoids),
        intermediates=_hexes(after.intermediates - before.intermediates),
        excluded=_hexes(after.excluded - before.excluded),
        certificates=sorted(
            (f.value, k.hex(), c.value)
            for (f, k), c in after.certificates.items()
            if (f, k) not in before.certificates
        ),
        links=sorted((l.a.hex(), l.b.hex(), l.reason.value) for l in after.links - before.links),
        minor_closed=_hexes(after.minor_closed - before.minor_closed),
        minor_of=sorted((c.hex(), p.hex()) for c, p in after.minor_of - before.minor_of),
    )


class _Draft:
    """Mutable working copy of a tableau."""

    def __init__(self, t: Tableau):
        self.goal = t.goal
        self.registry: Dict[CanonicalKey, Matroid] = dict(t.registry)
        self.families: Dict[Family, Set[CanonicalKey]] = {f: set(t.members(f)) for f in Family}
        self.certificates = dict(t.certificates)
        self.links = set(t.links)
        self.minor_closed = set(t.minor_closed)
        self.minor_of = set(t.minor_of)

    def register(self, m: Matroid) -> CanonicalKey:
        key = m.key
        self.registry.setdefault(key, m)
        return key

    def add_key(self, family: Family, key: CanonicalKey, certificate: Certificate) -> None:
        self.families[family].add(key)
        self.certificates.setdefault((family, key), certificate)

    def add(self, family: Family, m: Matroid, certificate: Certificate) -> CanonicalKey:
        key = self.register(m)
        self.add_key(family, key, certificate)
        return key

    def merge(self, t: Tableau) -> None:
        for key, m in t.registry.items():
            self.registry.setdefault(key, m)
        for f in Family:
            self.families[f] |= t.members(f)
        for entry, certificate in t.certificates.items():
            self.certificates.setdefault(entry, certificate)
        self.links |= t.links
        self.minor_closed |= t.minor_closed
        self.minor_of |= t.minor_of

    def build(self, log: Tuple[DerivationRecord, ...] = ()) -> Tableau:
        return Tableau(
            goal=self.goal,
            registry=self.registry,
            gammoids=frozenset(self.families[Family.GAMMOIDS]),
            intermediates=frozenset(self.families[Family.INTERMEDIATES]),
            excluded=frozenset(self.families[Family.EXCLUDED]),
            certificates=self.certificates,
            links=frozenset(self.links),
            minor_closed=frozenset(self.minor_closed),
            minor_of=frozenset(self.minor_of),
            log=log,
        )


def apply_delta(t: Tableau, delta: TableauDelta) -> Tableau:
    """Apply one logged delta; a snapshot delta starts from the bare goal tableau."""
    base = Tableau.initial(t.goal) if delta.snapshot else t
    draft = _Draft(base)
    for key in sorted(_keys(delta.registered)):
        draft.registry.setdefault(key, t.registry.get(key) or Matroid.from_key(key))
    for family, hexes in (
        (Family.GAMMOIDS, delta.gammoids),
        (Family.INTERMEDIATES, delta.intermediates),
        (Family.EXCLUDED, delta.excluded),
    ):
        draft.families[family] |= _keys(hexes)
    for family, key, certificate in delta.certificates:
        draft.certificates.setdefault((Family(family), CanonicalKey.from_hex(key)), Certificate(certificate))
    for a, b, reason in delta.links:
        draft.links.add(Link.of(CanonicalKey.from_hex(a), CanonicalKey.from_hex(b), LinkReason(reason)))
    draft.minor_closed |= _keys(delta.minor_closed)
    draft.minor_of |= {(CanonicalKey.from_hex(c), CanonicalKey.from_hex(p)) for c, p in delta.minor_of}
    return draft.build(t.log)


class TableauService:
    """Service implementing the valid derivations."""

    def _derive(
        self,
        before: Tableau,
        after: Tableau,
        kind: DerivationKind,
        justification: str,
        inputs: Sequence[CanonicalKey] = (),
        delta: Optional[TableauDelta] = None,
    ) -> Tableau:
        delta = delta or diff(before, after)
        if delta.is_empty:
            return replace(after, log=before.log)
        record = DerivationRecord(
            kind=kind,
            justification=justification,
            inputs=[k.hex() for k in inputs],
            delta=delta,
        )
        log_derivation(kind.value, justification, inputs=len(inputs), delta=delta.summary())
        return replace(after, log=before.log + (record,))

    # Derivations

    def join(self, ts: Sequence[Tableau]) -> Tableau:
        """
        Joint tableau: unions of the families and the generated equivalence.

        Args:
            ts: Non-empty list of tableaux; the goal is taken from ts[0]

        Raises:
            InvalidSelectionError: ts is empty
        """
        if not ts:
            raise InvalidSelectionError("join needs at least one tableau")
        base = ts[0]
        if len(ts) == 1:
            return base
        draft = _Draft(base)
        for t in ts[1:]:
            draft.merge(t)
        return self._derive(
            base, draft.build(), DerivationKind.JOIN, "joint tableau", [t.goal_key for t in ts]
        )

    def sub_tableau(self, t: Tableau, selection: TableauSelection) -> Tableau:
        """
        Keep the selected part of t.

        Raises:
            InvalidSelectionError: a selected entry or link is not in t
        """
        chosen = {
            Family.GAMMOIDS: _keys(selection.gammoids),
            Family.INTERMEDIATES: _keys(selection.intermediates),
            Family.EXCLUDED: _keys(selection.excluded),
        }
        for family, keys in chosen.items():
            stray = keys - t.members(family)
            if stray:
                raise InvalidSelectionError(
                    f"{min(stray).short()} is not in family {family.value}",
                    {"family": family.value},
                )
        by_pair = {(l.a, l.b): l for l in t.links}
        links = set()
        for a, b in selection.links:
            x, y = sorted((CanonicalKey.from_hex(a), CanonicalKey.from_hex(b)))
            if (x, y) not in by_pair:
                raise InvalidSelectionError(f"{x.short()} ≃ {y.short()} is not a link of the tableau")
            links.add(by_pair[(x, y)])
        minor_closed = _keys(selection.minor_closed)
        minor_of = {(CanonicalKey.from_hex(c), CanonicalKey.from_hex(p)) for c, p in selection.minor_of}
        if not minor_closed <= t.minor_closed or not minor_of <= t.minor_of:
            raise InvalidSelectionError("minor records must come from the tableau")

        result = Tableau(
            goal=t.goal,
            registry=t.registry,
            gammoids=frozenset(chosen[Family.GAMMOIDS]),
            intermediates=frozenset(chosen[Family.INTERMEDIATES]),
            excluded=frozenset(chosen[Family.EXCLUDED]),
            certificates={
                (f, k): c for (f, k), c in t.certificates.items() if k in chosen[f]
            },
            links=frozenset(links),
            minor_closed=frozenset(minor_closed),
            minor_of=frozenset(minor_of),
        )
        if result.same_state(t):
            return t
        snapshot = diff(Tableau.initial(t.goal), result).model_copy(update={"snapshot": True})
        return self._derive(t, result, DerivationKind.SUB, "sub-tableau", delta=snapshot)

    def expansion(self, t: Tableau) -> Tableau:
        """Close 𝒢 and 𝒳 under ≃; implied gammoids of minor-closed keys join 𝒢 first."""
        draft = _Draft(t)
        for key in sorted(t.implied_gammoids - t.gammoids):
            draft.add_key(Family.GAMMOIDS, key, Certificate.CONCLUSION_MINOR)
        for family in (Family.GAMMOIDS, Family.EXCLUDED):
            for key in sorted(draft.families[family]):
                for other in t.class_of(key):
                    if other not in draft.families[family]:
                        draft.add_key(family, other, Certificate.EXPANSION)
        return self._derive(t, draft.build(), DerivationKind.EXPANSION, "expansion tableau")

    def extended(self, t: Tableau) -> Tableau:
        """Add duals to 𝒢 and 𝒳, put 𝒳 into ℳ and link every M with M*."""
        draft = _Draft(t)
        for key in sorted(t.registry):
            dual_key = draft.register(t.registry[key].dual())
            if dual_key != key:
                draft.links.add(Link.of(key, dual_key, LinkReason.DUAL))
        for family in (Family.GAMMOIDS, Family.EXCLUDED):
            for key in sorted(t.members(family)):
                draft.add(family, t.registry[key].dual(), Certificate.EXTENDED_DUAL)
        for key in sorted(draft.families[Family.EXCLUDED]):
            draft.add_key(Family.INTERMEDIATES, key, Certificate.EXTENDED_EXCLUDED)
        return self._derive(t, draft.build(), DerivationKind.EXTENDED, "extended tableau")

    def conclusion(self, t: Tableau, verdict: Optional[Verdict] = None) -> Tableau:
        """
        Record the goal's status once t is decisive.

        Case (i) puts the goal into 𝒢 and marks its minors as gammoids;
        cases (ii) and (iii) put the goal into 𝒳.

        Raises:
            NotDecisiveError: t is not decisive
        """
        verdict = verdict or self.is_decisive(t)
        if verdict is None:
            raise NotDecisiveError({"goal": t.goal_key.short()})
        draft = _Draft(t)
        if verdict.decision == Decision.GAMMOID:
            draft.add_key(Family.GAMMOIDS, t.goal_key, Certificate.CONCLUSION_MINOR)
            draft.minor_closed.add(t.goal_key)
        else:
            draft.add_key(Family.EXCLUDED, t.goal_key, Certificate.CONCLUSION_EXCLUDED)
        return self._derive(
            t,
            draft.build(),
            DerivationKind.CONCLUSION,
            f"conclusion, case ({verdict.case.value})",
            [t.goal_key],
        )

    def identify(self, t: Tableau, k1: CanonicalKey, k2: CanonicalKey) -> Tableau:
        """
        Merge the classes of a matroid and one of its deflates.

        Raises:
            UnregisteredMatroidError: a key is not registered
            NotADeflateError: neither is a deflate of the other
        """
        m1 = t.matroid(k1)
        m2 = t.matroid(k2)
        if k1 == k2:
            return t
        small, large = (m1, m2) if m1.size <= m2.size else (m2, m1)
        if extension_service.deflation_of(small, large) is None:
            raise NotADeflateError(k1.short(), k2.short())
        draft = _Draft(t)
        draft.links.add(Link.of(k1, k2, LinkReason.DEFLATE))
        draft.minor_of.add((small.key, large.key))
        return self._derive(t, draft.build(), DerivationKind.IDENTIFIED, "identified tableau", [k1, k2])

    def register_minor(self, t: Tableau, child: Matroid, parent: Matroid) -> Tableau:
        """
        Register child as a restriction of parent to its first elements.

        Raises:
            InvalidSelectionError: child is not that restriction
        """
        if child.size > parent.size or not parent.restrict(child.full).same_bases(child):
            raise InvalidSelectionError(f"{child.key.short()} is not a restriction of {parent.key.short()}")
        draft = _Draft(t)
        draft.register(child)
        draft.register(parent)
        draft.minor_of.add((child.key, parent.key))
        return self._derive(
            t, draft.build(), DerivationKind.SEED, "minor registration", [child.key, parent.key]
        )

    # Seeding

    def seed_rule(self, m: Matroid) -> Certificate:
        """The first seed rule that applies to m, cheapest test first."""
        if invariant_service.is_strict_gammoid(m):
            return Certificate.ALPHA_NONNEGATIVE
        if invariant_service.has_rank3_negative_set(m) or invariant_service.has_rank3_negative_set(m.dual()):
            return Certificate.RANK3_ALPHA
        verdict = invariant_service.series_parallel_gammoid_test(m)
        if verdict == SeriesParallelVerdict.NOT_GAMMOID:
            return Certificate.EXCLUDED_MINOR_MK4
        if verdict == SeriesParallelVerdict.GAMMOID:
            return Certificate.SERIES_PARALLEL
        if not invariant_service.is_strongly_base_orderable(m):
            return Certificate.NOT_SBO
        return Certificate.ALPHA_NEGATIVE

    def seed_tableau(self, m: Matroid, rule: Optional[Certificate] = None) -> Tableau:
        """
        Strongest valid seed tableau with goal m.

        Args:
            m: Matroid
            rule: Force a rule instead of testing; the caller vouches for it

        Returns:
            Tableau with m (and m* where the rule covers it) in one family
        """
        base = Tableau.initial(m)
        rule = rule or self.seed_rule(m)
        draft = _Draft(base)
        if rule == Certificate.ALPHA_NONNEGATIVE:
            draft.add(Family.GAMMOIDS, m, rule)
            draft.add(Family.GAMMOIDS, m.dual(), Certificate.DUAL_OF_STRICT)
        elif rule == Certificate.DUAL_OF_STRICT:
            draft.add(Family.GAMMOIDS, m, rule)
            draft.add(Family.GAMMOIDS, m.dual(), Certificate.ALPHA_NONNEGATIVE)
        elif rule in (Certificate.SERIES_PARALLEL, Certificate.EXHAUSTION):
            draft.add(Family.GAMMOIDS, m, rule)
            draft.add(Family.GAMMOIDS, m.dual(), rule)
        elif rule in (Certificate.RANK3_ALPHA, Certificate.EXCLUDED_MINOR_MK4, Certificate.NOT_SBO):
            draft.add(Family.EXCLUDED, m, rule)
            draft.add(Family.EXCLUDED, m.dual(), rule)
        else:
            draft.add(Family.INTERMEDIATES, m, Certificate.ALPHA_NEGATIVE)
        return self._derive(base, draft.build(), DerivationKind.SEED, rule.value, [m.key])

    # Decisiveness

    def _witness(self, t: Tableau, keys: Iterable[CanonicalKey]) -> Tuple[CanonicalKey, str]:
        def preference(key: CanonicalKey):
            certificate = t.certificates.get((Family.GAMMOIDS, key))
            return (WITNESS_PRIORITY.get(certificate, len(WITNESS_PRIORITY)), key.size, key)

        best = min(keys, key=preference)
        certificate = t.certificates.get((Family.GAMMOIDS, best))
        return best, certificate.value if certificate else "minor-closure"

    def pattern_name(self, m: Matroid) -> str:
        if m.is_isomorphic(MK4):
            return "M(K4)"
        if m.is_isomorphic(U24):
            return "U2,4"
        return f"matroid {m.key.short()}"

    def is_decisive(self, t: Tableau, exhaustive: bool = True) -> Optional[Verdict]:
        """
        Test the three decisive cases in order.

        Args:
            t: Tableau
            exhaustive: Also try case (iii) by streaming extensions

        Returns:
            Optional[Verdict]: the verdict, or None when t is not decisive
        """
        goal = t.goal
        matches = [k for k in t.class_of(t.goal_key) if t.known_gammoid(k)]
        if matches:
            key, certificate = self._witness(t, matches)
            return Verdict(
                decision=Decision.GAMMOID,
                case=DecisiveCase.MATCHING_GAMMOID,
                witness_key=key.hex(),
                certificate=certificate,
            )

        for key in sorted(t.excluded):
            if key.size > goal.size or key.rank > goal.rank_of_ground:
                continue
            excluded = t.registry[key]
            spec = matroid_service.has_minor_isomorphic_to(goal, excluded)
            if spec is not None:
                return Verdict(
                    decision=Decision.NOT_GAMMOID,
                    case=DecisiveCase.EXCLUDED_MINOR,
                    witness_key=key.hex(),
                    certificate=t.certificates.get((Family.EXCLUDED, key), Certificate.SEED).value,
                    minor=matroid_service.describe_minor(goal, spec),
                    detail=self.pattern_name(excluded),
                )

        if exhaustive:
            return self._exhaustion_verdict(t)
        return None

    def _exhaustion_verdict(self, t: Tableau) -> Optional[Verdict]:
        goal = t.goal
        bound = extension_service.size_bound(goal)
        if not any(k.size == bound for k in t.intermediates):
            return None
        for extension in extension_service.extensions_up_to_iso(goal, bound):
            if extension.key not in t.intermediates:
                return None
        return Verdict(
            decision=Decision.NOT_GAMMOID,
            case=DecisiveCase.EXHAUSTION,
            certificate=Certificate.EXHAUSTION.value,
            detail=f"every extension with {bound} elements is an intermediate",
        )

    # Audit

    def is_valid(self, t: Tableau, oracle_budget: Optional[int] = None) -> AuditReport:
        """
        Re-check the certificates behind every entry and link of t.

        Args:
            t: Tableau
            oracle_budget: Largest ground size re-checked; defaults to settings

        Returns:
            AuditReport: failures only for entries contradicted by a certificate
        """
        budget = settings.AUDIT_MAX_SIZE if oracle_budget is None else oracle_budget
        report = AuditReport()

        for key in sorted(t.registry):
            m = t.registry[key]
            for family in Family:
                if key not in t.members(family):
                    continue
                entry = AuditEntry(key=key.hex(), family=family.value)
                if m.size > budget:
                    report.unverified.append(entry.model_copy(update={"note": "over budget"}))
                    continue
                if family == Family.INTERMEDIATES:
                    if invariant_service.is_strict_gammoid(m):
                        report.failures.append(entry.model_copy(update={"note": "alpha is nonnegative"}))
                    else:
                        report.verified.append(entry.model_copy(update={"note": "alpha-negative"}))
                    continue
                evidence = invariant_service.evidence(m)
                contradicting = EvidenceKind.NOT_GAMMOID if family == Family.GAMMOIDS else EvidenceKind.GAMMOID
                if evidence.kind == contradicting:
                    report.failures.append(entry.model_copy(update={"note": evidence.reason}))
                elif evidence.kind == EvidenceKind.UNKNOWN:
                    certificate = t.certificates.get((family, key))
                    note = f"{certificate.value if certificate else 'uncertified'}: {evidence.reason}"
                    report.unverified.append(entry.model_copy(update={"note": note}))
                else:
                    report.verified.append(entry.model_copy(update={"note": evidence.reason}))

        for root, members in sorted(t.classes.items()):
            has_gammoid = any(t.known_gammoid(k) for k in members)
            has_excluded = any(k in t.excluded for k in members)
            if has_gammoid and has_excluded:
                report.failures.append(
                    AuditEntry(key=root.hex(), family="class", note="class mixes gammoids and excluded matroids")
                )
            elif not has_gammoid and not has_excluded and any(k in t.intermediates for k in members):
                report.open_classes.append(_hexes(members))

        for link in sorted(t.links):
            entry = AuditEntry(key=f"{link.a.hex()}~{link.b.hex()}", family="link", note=link.reason.value)
            a, b = t.registry[link.a], t.registry[link.b]
            if max(a.size, b.size) > budget:
                report.unverified.append(entry)
                continue
            if link.reason == LinkReason.DUAL:
                ok = a.dual().key == link.b
            else:
                small, large = (a, b) if a.size <= b.size else (b, a)
                ok = extension_service.deflation_of(small, large) is not None
            (report.verified if ok else report.failures).append(entry)

        logger.info(
            "Tableau audited",
            verified=len(report.verified),
            failures=len(report.failures),
            unverified=len(report.unverified),
            open_classes=len(report.open_classes),
        )
        return report

    # Replay

    def replay(self, goal: Matroid, log: Sequence[DerivationRecord]) -> Tableau:
        """Rebuild a tableau by applying each logged delta to the bare goal tableau."""
        t = Tableau.initial(goal)
        for record in log:
            t = apply_delta(t, record.delta)
            t = replace(t, log=t.log + (record,))
        return t


tableau_service = TableauService()
