"""Scaling tables over trial records"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Callable, Dict, Iterable, Union

import numpy as np
import pandas as pd

from app.core.exceptions import InvalidParameterError
from app.schemas.experiment import TrialRecord


def _log_base_inv_p(n: float, p: float) -> float:
    if not 0.0 < p < 1.0:
        raise InvalidParameterError(f"normalizer needs 0 < p < 1, got {p}")
    return math.log(n) / math.log(1.0 / p)


NORMALIZERS: Dict[str, Callable[[float, float], float]] = {
    "one": lambda n, p: 1.0,
    "packing": lambda n, p: n * n * p / _log_base_inv_p(n, p) ** 2,
    "thickness": lambda n, p: n * p / _log_base_inv_p(n, p),
}


def summarize_scaling(records: Iterable[TrialRecord], metric: str, normalizer: str = "one") -> pd.DataFrame:
    """metric / normalizer(n, p) per (n, p): mean, std and a 95% normal half-width"""
    records = [r for r in records]
    modes = {r.mode for r in records}
    if len(modes) > 1:
        raise InvalidParameterError(f"records mix modes {sorted(modes)}")
    if normalizer not in NORMALIZERS:
        raise InvalidParameterError(f"unknown normalizer {normalizer!r}; choose from {sorted(NORMALIZERS)}")
    scale = NORMALIZERS[normalizer]
    rows = []
    for r in records:
        value = r.metrics.get(metric)
        if r.status != "ok" or value is None:
            continue
        n, p = r.coords["n"], r.coords.get("p", math.nan)
        rows.append({"n": n, "p": p, "ratio": value / scale(n, p)})
    columns = ["n", "p", "normalizer", "count", "mean_ratio", "std_ratio", "half_width"]
    if not rows:
        return pd.DataFrame(columns=columns)

    frame = pd.DataFrame(rows)
    table = frame.groupby(["n", "p"], sort=True)["ratio"].agg(["count", "mean", "std"]).reset_index()
    table = table.rename(columns={"mean": "mean_ratio", "std": "std_ratio"})
    table["std_ratio"] = table["std_ratio"].where(table["count"] > 1, np.nan)
    table["half_width"] = np.where(table["count"] > 1,
                                   1.96 * table["std_ratio"] / np.sqrt(table["count"]), np.nan)
    table["normalizer"] = normalizer
    return table[columns]


def ratio_growth(table: pd.DataFrame, n_from: int, n_to: int) -> Dict[float, float]:
    """mean_ratio at n_to divided by mean_ratio at n_from, per p"""
    growth = {}
    for p, group in table.groupby("p"):
        low = group.loc[group["n"] == n_from, "mean_ratio"]
        high = group.loc[group["n"] == n_to, "mean_ratio"]
        if len(low) and len(high) and low.iloc[0] > 0:
            growth[float(p)] = float(high.iloc[0] / low.iloc[0])
    return growth


def write_scaling_csv(table: pd.DataFrame, path: Union[str, Path]) -> None:
    table.to_csv(path, index=False, na_rep="n/a")
