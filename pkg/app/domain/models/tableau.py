"""
Matroid tableau models: the goal, the three families, the equivalence
relation, the lazy minor-closure records and the derivation log.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, List, Mapping, NamedTuple, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, Field

from app.core.exceptions import UnregisteredMatroidError
from app.domain.models.canonical import CanonicalKey
from app.domain.models.matroid import Matroid


class Family(str, Enum):
    GAMMOIDS = "G"
    INTERMEDIATES = "M"
    EXCLUDED = "X"


class Certificate(str, Enum):
    """Rule that placed a matroid into a family."""

    ALPHA_NONNEGATIVE = "alpha-nonnegative"
    DUAL_OF_STRICT = "dual-of-strict"
    SERIES_PARALLEL = "series-parallel"
    ALPHA_NEGATIVE = "alpha-negative"
    EXCLUDED_MINOR_MK4 = "excluded-minor-mk4"
    RANK3_ALPHA = "rank3-alpha"
    NOT_SBO = "not-sbo"
    EXTENDED_DUAL = "extended-dual"
    EXTENDED_EXCLUDED = "extended-excluded"
    EXPANSION = "expansion"
    CONCLUSION_MINOR = "conclusion-minor"
    CONCLUSION_EXCLUDED = "conclusion-excluded"
    EXHAUSTION = "exhaustion"
    SEED = "seed"


# Witness preference for case (i): direct certificates first.
WITNESS_PRIORITY = {
    Certificate.ALPHA_NONNEGATIVE: 0,
    Certificate.DUAL_OF_STRICT: 1,
    Certificate.SERIES_PARALLEL: 2,
    Certificate.EXHAUSTION: 3,
    Certificate.EXTENDED_DUAL: 4,
    Certificate.SEED: 5,
    Certificate.CONCLUSION_MINOR: 6,
    Certificate.EXPANSION: 7,
}


class LinkReason(str, Enum):
    DUAL = "dual"
    DEFLATE = "deflate"


class Link(NamedTuple):
    """An equivalence M ≃ N with a ≤ b."""

    a: CanonicalKey
    b: CanonicalKey
    reason: LinkReason

    @classmethod
    def of(cls, x: CanonicalKey, y: CanonicalKey, reason: LinkReason) -> "Link":
        return cls(min(x, y), max(x, y), reason)


class DerivationKind(str, Enum):
    JOIN = "join"
    SUB = "sub"
    EXPANSION = "expansion"
    EXTENDED = "extended"
    CONCLUSION = "conclusion"
    IDENTIFIED = "identified"
    SEED = "seed"


class TableauDelta(BaseModel):
    """What a derivation added, in hex keys. A snapshot delta replaces everything."""

    registered: List[str] = Field(default_factory=list)
    gammoids: List[str] = Field(default_factory=list)
    intermediates: List[str] = Field(default_factory=list)
    excluded: List[str] = Field(default_factory=list)
    certificates: List[Tuple[str, str, str]] = Field(default_factory=list)
    links: List[Tuple[str, str, str]] = Field(default_factory=list)
    minor_closed: List[str] = Field(default_factory=list)
    minor_of: List[Tuple[str, str]] = Field(default_factory=list)
    snapshot: bool = False

    @property
    def is_empty(self) -> bool:
        return not (
            self.registered
            or self.gammoids
            or self.intermediates
            or self.excluded
            or self.certificates
            or self.links
            or self.minor_closed
            or self.minor_of
            or self.snapshot
        )

    def summary(self) -> str:
        parts = [
            f"G+{len(self.gammoids)}",
            f"M+{len(self.intermediates)}",
            f"X+{len(self.excluded)}",
            f"links+{len(self.links)}",
        ]
        if self.minor_closed:
            parts.append(f"closed+{len(self.minor_closed)}")
        if self.snapshot:
            parts.append("snapshot")
        return " ".join(parts)


class DerivationRecord(BaseModel):
    """One log entry: the derivation kind, its rule and the resulting delta."""

    kind: DerivationKind
    justification: str = ""
    inputs: List[str] = Field(default_factory=list, description="Hex keys the derivation was applied to")
    delta: TableauDelta = Field(default_factory=TableauDelta)


@dataclass(frozen=True, eq=False)
class Tableau:
    """
    An immutable matroid tableau.

    registry maps every known canonical key to a representative matroid; the
    equivalence relation lives on registry keys and is generated by links.
    A key in minor_closed stands for "all minors of this matroid are
    gammoids"; minor_of pairs (child, parent) say child is a minor of parent.
    """

    goal: Matroid
    registry: Mapping[CanonicalKey, Matroid]
    gammoids: FrozenSet[CanonicalKey] = frozenset()
    intermediates: FrozenSet[CanonicalKey] = frozenset()
    excluded: FrozenSet[CanonicalKey] = frozenset()
    certificates: Mapping[Tuple[Family, CanonicalKey], Certificate] = field(default_factory=dict)
    links: FrozenSet[Link] = frozenset()
    minor_closed: FrozenSet[CanonicalKey] = frozenset()
    minor_of: FrozenSet[Tuple[CanonicalKey, CanonicalKey]] = frozenset()
    log: Tuple[DerivationRecord, ...] = ()

    @classmethod
    def initial(cls, goal: Matroid) -> "Tableau":
        """The bare tableau (G, ∅, ∅, ∅, ⟨⟩)."""
        return cls(goal=goal, registry={goal.key: goal})

    @property
    def goal_key(self) -> CanonicalKey:
        return self.goal.key

    def matroid(self, key: CanonicalKey) -> Matroid:
        try:
            return self.registry[key]
        except KeyError:
            raise UnregisteredMatroidError(key.hex()) from None

    def members(self, family: Family) -> FrozenSet[CanonicalKey]:
        return {
            Family.GAMMOIDS: self.gammoids,
            Family.INTERMEDIATES: self.intermediates,
            Family.EXCLUDED: self.excluded,
        }[family]

    def families_of(self, key: CanonicalKey) -> str:
        return "".join(f.value for f in Family if key in self.members(f))

    def with_goal(self, goal: Matroid) -> "Tableau":
        """Same families and relation, another goal (registered on the way)."""
        registry = dict(self.registry)
        registry.setdefault(goal.key, goal)
        return replace(self, goal=goal, registry=registry)

    # Equivalence

    @cached_property
    def classes(self) -> Dict[CanonicalKey, FrozenSet[CanonicalKey]]:
        """Equivalence classes keyed by their smallest member."""
        graph = nx.Graph()
        graph.add_nodes_from(self.registry)
        graph.add_edges_from((link.a, link.b) for link in self.links)
        out = {}
        for component in nx.connected_components(graph):
            members = frozenset(component)
            out[min(members)] = members
        return out

    @cached_property
    def _roots(self) -> Dict[CanonicalKey, CanonicalKey]:
        return {k: root for root, members in self.classes.items() for k in members}

    def find(self, key: CanonicalKey) -> CanonicalKey:
        return self._roots.get(key, key)

    def class_of(self, key: CanonicalKey) -> FrozenSet[CanonicalKey]:
        return self.classes.get(self.find(key), frozenset({key}))

    def equivalent(self, a: CanonicalKey, b: CanonicalKey) -> bool:
        return self.find(a) == self.find(b)

    def partition(self) -> FrozenSet[FrozenSet[CanonicalKey]]:
        return frozenset(self.classes.values())

    # Lazy minor closure

    @cached_property
    def minors_closure(self) -> Dict[CanonicalKey, FrozenSet[CanonicalKey]]:
        """For each registered key, every registered key it is known to be a minor of."""
        graph = nx.DiGraph()
        graph.add_nodes_from(self.registry)
        graph.add_edges_from(self.minor_of)
        return {k: frozenset(nx.descendants(graph, k)) for k in graph.nodes}

    @cached_property
    def implied_gammoids(self) -> FrozenSet[CanonicalKey]:
        """Registered keys that are minors of a minor-closed key."""
        closed = self.minor_closed
        return frozenset(
            k for k, parents in self.minors_closure.items() if k in closed or parents & closed
        )

    def is_minor_of_goal(self, key: CanonicalKey) -> bool:
        return key == self.goal_key or self.goal_key in self.minors_closure.get(key, frozenset())

    def known_gammoid(self, key: CanonicalKey) -> bool:
        return key in self.gammoids or key in self.implied_gammoids

    # Comparison

    def state(self) -> Tuple:
        """Everything but the log and matroid labels, for equality checks."""
        return (
            self.goal_key,
            frozenset(self.registry),
            self.gammoids,
            self.intermediates,
            self.excluded,
            frozenset(self.certificates.items()),
            self.links,
            self.minor_closed,
            self.minor_of,
        )

    def same_state(self, other: "Tableau") -> bool:
        return self.state() == other.state()

    def summary(self) -> str:
        return (
            f"|G|={len(self.gammoids)} |M|={len(self.intermediates)} |X|={len(self.excluded)} "
            f"classes={len(self.classes)} registered={len(self.registry)}"
        )


class TableauSelection(BaseModel):
    """Families and equivalences to keep in a sub-tableau, as hex keys."""

    gammoids: List[str] = Field(default_factory=list)
    intermediates: List[str] = Field(default_factory=list)
    excluded: List[str] = Field(default_factory=list)
    links: List[Tuple[str, str]] = Field(default_factory=list)
    minor_closed: List[str] = Field(default_factory=list)
    minor_of: List[Tuple[str, str]] = Field(default_factory=list)

    @classmethod
    def full(cls, t: Tableau) -> "TableauSelection":
        return cls(
            gammoids=sorted(k.hex() for k in t.gammoids),
            intermediates=sorted(k.hex() for k in t.intermediates),
            excluded=sorted(k.hex() for k in t.excluded),
            links=sorted((link.a.hex(), link.b.hex()) for link in t.links),
            minor_closed=sorted(k.hex() for k in t.minor_closed),
            minor_of=sorted((c.hex(), p.hex()) for c, p in t.minor_of),
        )


class Decision(str, Enum):
    GAMMOID = "gammoid"
    NOT_GAMMOID = "notGammoid"


class DecisiveCase(str, Enum):
    MATCHING_GAMMOID = "i"
    EXCLUDED_MINOR = "ii"
    EXHAUSTION = "iii"


class Verdict(BaseModel):
    """Outcome of a decisive tableau and the witness for the case used."""

    decision: Decision
    case: DecisiveCase
    witness_key: Optional[str] = Field(None, description="Hex key of the witness matroid")
    certificate: Optional[str] = Field(None, description="Certificate tag of the witness")
    minor: Optional[str] = Field(None, description="Minor description for case ii")
    detail: str = ""

    def describe(self) -> str:
        if self.decision == Decision.GAMMOID:
            return f"GAMMOID: goal equivalent to {self.witness_key} ({self.certificate})"
        if self.case == DecisiveCase.EXCLUDED_MINOR:
            return f"NOT A GAMMOID: excluded minor {self.detail} via {self.minor}"
        return f"NOT A GAMMOID: {self.detail}"


class AuditEntry(BaseModel):
    key: str
    family: str
    note: str = ""


class AuditReport(BaseModel):
    """Result of re-checking the certificates behind a tableau."""

    verified: List[AuditEntry] = Field(default_factory=list)
    failures: List[AuditEntry] = Field(default_factory=list)
    unverified: List[AuditEntry] = Field(default_factory=list)
    open_classes: List[List[str]] = Field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.failures
