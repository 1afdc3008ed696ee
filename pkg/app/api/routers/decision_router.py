"""
Decision Router.
HTTP endpoints for the decision procedure and its certificate tests.
"""

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool

from app.api.dto.decision_dto import (
    AlphaDataDTO,
    AlphaRequestDTO,
    AlphaResponseDTO,
    DecideRequestDTO,
    DecideResponseDTO,
    DigraphRequestDTO,
    GammaResponseDTO,
    MatroidRequestDTO,
    SboDataDTO,
    SboResponseDTO,
    VerdictDataDTO,
)
from app.api.services.engine_service import engine_service
from app.api.services.invariant_service import invariant_service
from app.api.services.oracle_service import oracle_service
from app.core.exceptions import GammoidException, ResourceExhaustedError, create_http_exception
from app.core.logging import get_logger
from app.domain.models.certificates import OrderabilityVerdict
from app.domain.models.engine import EngineConfig
from app.infrastructure.formats.digraph_format import parse_digraph
from app.infrastructure.formats.matroid_format import dump_matroid, parse_matroid, parse_subset

logger = get_logger(__name__)

# Create router
router = APIRouter()


@router.post("/decide", response_model=DecideResponseDTO)
async def decide(request: DecideRequestDTO) -> DecideResponseDTO:
    """
    Run the decision procedure on a matroid.

    Caps hit before a verdict give success=False with the partial tableau
    summary in the message.

    Args:
        request: Matroid text plus engine overrides

    Returns:
        DecideResponseDTO with the verdict
    """
    try:
        goal = parse_matroid(request.matroid)
        cfg = EngineConfig.from_settings(
            worker_count=request.worker_count,
            extension_batch=request.extension_batch,
            goal_selection=request.goal_selection,
            deterministic_seed=request.deterministic_seed,
            max_iterations=request.max_iterations,
            time_limit_seconds=request.time_limit_seconds,
            max_extension_size=request.max_extension_size,
        )
        verdict, trace, final = await run_in_threadpool(engine_service.decide, goal, cfg)
    except ResourceExhaustedError as e:
        partial = e.tableau.summary() if e.tableau is not None else "no tableau"
        logger.warning("Decision exhausted", reason=e.message)
        return DecideResponseDTO(success=False, message=f"{e.message}; partial tableau: {partial}")
    except GammoidException as e:
        raise create_http_exception(e)

    return DecideResponseDTO(
        success=True,
        message="Decision reached",
        data=VerdictDataDTO(
            decision=verdict.decision.value,
            case=verdict.case.value,
            description=verdict.describe(),
            witness_key=verdict.witness_key,
            certificate=verdict.certificate,
            minor=verdict.minor,
            steps=len(trace.steps),
            tableau=final.summary(),
            trace=trace.lines() if request.include_trace else None,
        ),
    )


@router.post("/alpha", response_model=AlphaResponseDTO)
async def alpha(request: AlphaRequestDTO) -> AlphaResponseDTO:
    """Alpha on every flat, or on one subset."""
    try:
        m = parse_matroid(request.matroid)
        table = invariant_service.alpha_table(m)
        subset_value = None
        if request.subset:
            subset_value = invariant_service.alpha(m, parse_subset(m, request.subset), table)
        negative = invariant_service.alpha_non_negative(m)
    except GammoidException as e:
        raise create_http_exception(e)

    return AlphaResponseDTO(
        success=True,
        message="Alpha computed",
        data=AlphaDataDTO(
            values={m.format(f): a for f, a in table.values.items()},
            subset_value=subset_value,
            negative_subset=m.format(negative) if negative is not None else None,
            strict=negative is None,
        ),
    )


@router.post("/sbo", response_model=SboResponseDTO)
async def sbo(request: MatroidRequestDTO) -> SboResponseDTO:
    """Strong base-orderability check."""
    try:
        m = parse_matroid(request.matroid)
        witness = await run_in_threadpool(invariant_service.strongly_base_orderable, m)
    except GammoidException as e:
        raise create_http_exception(e)

    orderable = witness.verdict == OrderabilityVerdict.ORDERABLE
    return SboResponseDTO(
        success=True,
        message="strongly base-orderable" if orderable else "not strongly base-orderable",
        data=SboDataDTO(
            orderable=orderable,
            basis_pair=[m.format(b) for b in witness.basis_pair] if witness.basis_pair else None,
            failing_bijections=len(witness.failing_subsets),
        ),
    )


@router.post("/gamma", response_model=GammaResponseDTO)
async def gamma(request: DigraphRequestDTO) -> GammaResponseDTO:
    """Gammoid of a digraph representation."""
    try:
        m = oracle_service.gamma(parse_digraph(request.digraph))
    except GammoidException as e:
        raise create_http_exception(e)
    return GammaResponseDTO(success=True, message="Gammoid computed", data=dump_matroid(m))
