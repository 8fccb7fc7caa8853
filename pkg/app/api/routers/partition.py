"""Partition router - nibble clique partition of G(n, p)"""
from fastapi import APIRouter

from app.api.errors import to_http
from app.core.exceptions import PragueLabError
from app.engine.graph_core import sample_gnp
from app.engine.nibble_partition import partition_records, round_summaries, run_nibble, verify_partition
from app.engine.rng import Rng
from app.schemas.nibble import PartitionRequest, PartitionResponse

router = APIRouter(prefix="/partition", tags=["partition"])


@router.post("/", response_model=PartitionResponse)
def create_partition(request: PartitionRequest):
    """Sample G(n, p), partition it and verify the partition"""
    try:
        g = sample_gnp(request.n, request.p, Rng(request.seed, "graph"))
        run = run_nibble(g, request.params, Rng(request.seed, "partition"), p=request.p)
    except PragueLabError as exc:
        raise to_http(exc)
    return PartitionResponse(
        schedule=run.schedule,
        trivial=run.trivial,
        rounds=round_summaries(run),
        verification=verify_partition(g, run.partition),
        cliques=partition_records(run.partition) if request.include_cliques else None,
    )
