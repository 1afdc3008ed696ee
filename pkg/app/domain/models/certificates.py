"""
Certificate models: alpha tables, base-orderability witnesses and
gammoid evidence produced by the invariant tests.
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field


class OrderabilityVerdict(str, Enum):

    ORDERABLE = "orderable"
    NOT_ORDERABLE = "notOrderable"


class SeriesParallelVerdict(str, Enum):

    GAMMOID = "gammoid"
    NOT_GAMMOID = "notGammoid"
    INCONCLUSIVE = "inconclusive"


class EvidenceKind(str, Enum):
    """Direct evidence about gammoid status of one isomorphism class."""

    GAMMOID = "gammoid"
    NOT_GAMMOID = "notGammoid"
    UNKNOWN = "unknown"


class AlphaTable(BaseModel):
    """Alpha values of the flats plus the first negative subset, if any."""

    values: Dict[int, int] = Field(default_factory=dict, description="alpha by flat mask")
    negative_witness: Optional[int] = Field(None, description="A subset with negative alpha")


class SboWitness(BaseModel):
    """Outcome of the strong base-orderability search."""

    verdict: OrderabilityVerdict
    basis_pair: Optional[Tuple[int, int]] = Field(
        None, description="Failing pair, or the largest pair checked when orderable"
    )
    bijection: Optional[List[Tuple[int, int]]] = Field(
        None, description="A passing bijection for basis_pair when orderable"
    )
    failing_subsets: List[Tuple[List[Tuple[int, int]], int]] = Field(
        default_factory=list,
        description="For each bijection of the failing pair, one subset X breaking it",
    )


class Evidence(BaseModel):
    """Gammoid evidence for a matroid and the rule that produced it."""

    kind: EvidenceKind
    reason: str = Field("", description="Certificate tag of the deciding test")
