"""Audit router - pseudo-randomness audits of nibble graphs"""
from fastapi import APIRouter

from app.api.errors import to_http
from app.core.exceptions import PragueLabError
from app.engine.graph_core import sample_gnp
from app.engine.pseudo_audit import audit_run
from app.engine.rng import Rng
from app.schemas.audit import AuditReport, AuditRequest

router = APIRouter(prefix="/audit", tags=["audit"])


@router.post("/", response_model=AuditReport)
def create_audit(request: AuditRequest):
    """Replay a partition run and audit the requested rounds"""
    try:
        g = sample_gnp(request.n, request.p, Rng(request.seed, "graph"))
        return audit_run(g, request.params, request.spec, request.seed)
    except PragueLabError as exc:
        raise to_http(exc)
