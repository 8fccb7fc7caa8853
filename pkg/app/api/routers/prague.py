"""Prague router - certified product representations and lower bounds"""
from fastapi import APIRouter, Query

from app.api.errors import to_http
from app.core.exceptions import PragueLabError
from app.engine.graph_core import sample_gnp
from app.engine.prague_assembler import lower_bounds, prague_upper
from app.engine.rng import Rng
from app.schemas.prague import BlockSummary, LowerBounds, PragueRequest, PragueResponse

router = APIRouter(prefix="/prague", tags=["prague"])


@router.post("/", response_model=PragueResponse)
def create_representation(request: PragueRequest):
    """Sample G(n, p) and return a verified product representation"""
    try:
        g = sample_gnp(request.n, request.p, Rng(request.seed, "graph"))
        outcome = prague_upper(g, request.params, Rng(request.seed, "prague"))
    except PragueLabError as exc:
        raise to_http(exc)
    return PragueResponse(
        d=outcome.d,
        cover_colors=outcome.cover.d,
        extra_coordinate=outcome.representation.extra_coordinate,
        extra_coordinates=outcome.representation.extra_coordinates,
        partition_size=len(outcome.run.partition),
        blocks=[BlockSummary.model_validate(block) for block in outcome.cover.blocks],
        report=outcome.report,
        labels=[list(v) for v in outcome.representation.labels] if request.include_labels else None,
    )


@router.get("/lower-bounds", response_model=LowerBounds)
def read_lower_bounds(
    n: int = Query(..., ge=2),
    p: float = Query(..., gt=0, lt=1),
    eps: float = Query(0.1, gt=0, lt=1),
):
    """Clique cover number and thickness lower bounds for G(n, p)"""
    try:
        return lower_bounds(n, p, eps)
    except PragueLabError as exc:
        raise to_http(exc)
