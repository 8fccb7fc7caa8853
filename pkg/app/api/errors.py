"""Translate engine errors into HTTP errors"""
from fastapi import HTTPException, status

from app.core.exceptions import (
    ColoringFailedError,
    InvalidParameterError,
    InvariantViolationError,
    PragueLabError,
    ScheduleInfeasibleError,
    VerificationError,
)


def to_http(exc: PragueLabError) -> HTTPException:
    if isinstance(exc, InvalidParameterError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    if isinstance(exc, (ScheduleInfeasibleError, ColoringFailedError)):
        return HTTPException(status_code=status.HTTP_409_CONFLICT, detail=str(exc))
    if isinstance(exc, (InvariantViolationError, VerificationError)):
        return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(exc))
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))
