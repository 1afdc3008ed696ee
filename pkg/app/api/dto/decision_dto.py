from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from app.domain.models.engine import GoalSelection


# Request DTOs
class MatroidRequestDTO(BaseModel):
    """Request DTO carrying a matroid in the text file format."""

    matroid: str = Field(..., description="Matroid text (ELEMENTS / LABELS / BASES | NONBASES | CIRCUITS)")


class DecideRequestDTO(MatroidRequestDTO):
    """Request DTO for a decision run."""

    worker_count: Optional[int] = Field(None, ge=1, description="Worker threads")
    extension_batch: Optional[int] = Field(None, ge=1, description="Extension classes per exhaustion visit")
    goal_selection: Optional[GoalSelection] = Field(None, description="Intermediate-goal heuristic")
    deterministic_seed: Optional[int] = Field(None, description="Seed for worker tie-breaking")
    max_iterations: Optional[int] = Field(None, ge=1, description="Iteration cap")
    time_limit_seconds: Optional[float] = Field(None, gt=0, description="Wall-clock cap")
    max_extension_size: Optional[int] = Field(None, ge=0, description="Largest extension explored")
    include_trace: bool = Field(False, description="Return the step trace")


class AlphaRequestDTO(MatroidRequestDTO):
    """Request DTO for alpha queries."""

    subset: Optional[List[str]] = Field(None, description="Element labels; ['E'] for the ground set")


class DigraphRequestDTO(BaseModel):
    """Request DTO carrying a gammoid representation in the digraph file format."""

    digraph: str = Field(..., description="Digraph text (VERTICES / TARGETS / GROUND / ARCS)")


# Response DTOs
class VerdictDataDTO(BaseModel):
    """Data DTO for a decision."""

    decision: str = Field(..., description="gammoid | notGammoid")
    case: str = Field(..., description="Decisive case i, ii or iii")
    description: str = Field(..., description="One-line verdict")
    witness_key: Optional[str] = Field(None, description="Hex key of the witness")
    certificate: Optional[str] = Field(None, description="Certificate tag of the witness")
    minor: Optional[str] = Field(None, description="Excluded-minor location")
    steps: int = Field(..., description="Trace length")
    tableau: str = Field(..., description="Family sizes of the final tableau")
    trace: Optional[List[str]] = Field(None, description="Trace lines, when requested")


class DecideResponseDTO(BaseModel):
    """Response DTO for a decision run."""

    success: bool = Field(..., description="Operation success status")
    message: str = Field(..., description="Response message")
    data: Optional[VerdictDataDTO] = Field(None, description="Verdict")


class AlphaDataDTO(BaseModel):
    """Data DTO for alpha queries."""

    values: Dict[str, int] = Field(default_factory=dict, description="alpha by flat, flats written as label lists")
    subset_value: Optional[int] = Field(None, description="alpha of the requested subset")
    negative_subset: Optional[str] = Field(None, description="A subset with negative alpha, if any")
    strict: bool = Field(..., description="alpha is nonnegative everywhere")


class AlphaResponseDTO(BaseModel):
    """Response DTO for alpha queries."""

    success: bool = Field(..., description="Operation success status")
    message: str = Field(..., description="Response message")
    data: Optional[AlphaDataDTO] = Field(None, description="Alpha values")


class SboDataDTO(BaseModel):
    """Data DTO for the strong base-orderability check."""

    orderable: bool = Field(..., description="Strongly base-orderable")
    basis_pair: Optional[List[str]] = Field(None, description="Failing pair, or the largest checked pair")
    failing_bijections: int = Field(0, description="Bijections of the failing pair, each with a counterexample")


class SboResponseDTO(BaseModel):
    """Response DTO for the strong base-orderability check."""

    success: bool = Field(..., description="Operation success status")
    message: str = Field(..., description="Response message")
    data: Optional[SboDataDTO] = Field(None, description="Orderability result")


class GammaResponseDTO(BaseModel):
    """Response DTO for the gammoid of a representation."""

    success: bool = Field(..., description="Operation success status")
    message: str = Field(..., description="Response message")
    data: Optional[str] = Field(None, description="Matroid text in BASES form")
