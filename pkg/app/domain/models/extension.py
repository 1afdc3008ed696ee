"""
Single-element extension models: modular cuts and deflation certificates.
"""

from typing import FrozenSet, List, Tuple

from pydantic import BaseModel, ConfigDict, Field


class ModularCut(BaseModel):
    """An up-closed family of flats closed under modular-pair intersections."""

    model_config = ConfigDict(frozen=True)

    minimal_flats: Tuple[int, ...] = Field(default=(), description="Antichain generating the cut")
    all_flats: FrozenSet[int] = Field(default=frozenset(), description="Every flat in the cut")

    @property
    def is_empty(self) -> bool:
        return not self.all_flats


class DeflationCertificate(BaseModel):
    """
    Replayable record of a deflation M|X of M.

    removal_order[i] is re-attached to X ∪ removal_order[:i] through a cut whose
    unique minimal flat is minimal_flat_per_step[i].
    """

    kept_set: int = Field(..., description="The X of M|X")
    removal_order: List[int] = Field(default_factory=list)
    minimal_flat_per_step: List[int] = Field(default_factory=list)

    @property
    def is_trivial(self) -> bool:
        return not self.removal_order
