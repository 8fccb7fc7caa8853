"""Coloring router - random greedy hypergraph edge coloring"""
from fastapi import APIRouter, HTTPException

from app.api.errors import to_http
from app.core.exceptions import PragueLabError
from app.engine.hypergraph_coloring import (
    check_regularity,
    coloring_parameters,
    greedy_color,
    sample_sequence_fixed_m,
    trajectory_audit,
    verify_coloring,
)
from app.engine.rng import Rng
from app.models.hypergraph import Hypergraph
from app.schemas.coloring import ColoringRequest, ColoringResponse, ColoringRunSummary

router = APIRouter(prefix="/coloring", tags=["coloring"])


@router.post("/", response_model=ColoringResponse)
def create_coloring(request: ColoringRequest):
    """Color a random edge sequence and audit its trajectory"""
    if request.edges is None and request.n > 120:
        raise HTTPException(status_code=422, detail="complete hypergraphs are limited to n <= 120")
    try:
        if request.edges is None:
            h = Hypergraph.complete_uniform(request.n, request.r)
        else:
            h = Hypergraph.from_edges(request.n, request.r, request.edges)
        plan = coloring_parameters(h.n, h.r, request.m, request.sigma, gamma=request.gamma,
                                   delta=request.delta, mode=request.mode)
        q = request.q or plan.q
        sequence = sample_sequence_fixed_m(h, plan.sequence_length, Rng(request.seed, "sequence"))
        run = greedy_color(h, sequence[:plan.m0], q, Rng(request.seed, "coloring"))
        snapshots = trajectory_audit(run, h, request.checkpoints, request.sigma,
                                     rng=Rng(request.seed, "trajectory"), horizon=plan.sequence_length)
        regularity = check_regularity(h)
    except PragueLabError as exc:
        raise to_http(exc)
    return ColoringResponse(
        plan=plan,
        regularity=regularity,
        verification=verify_coloring(h, run),
        run=ColoringRunSummary(q=q, m=run.m, failure_index=run.failure_index,
                               colors_used=run.colors_used(), snapshots=snapshots),
    )
