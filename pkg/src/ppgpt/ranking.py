"""Similarity-weighted scoring and top-K selection of candidate properties.

Each candidate gets four similarity features: raw-code and summary
similarity on the code side (xRaw, xSummary) and on the property side
(yRaw, ySummary). Its score is the weighted sum of the four, and the
top-K candidates by score go on to verification. The weights can be
refit from scored training records by ordinary least squares.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "FeatureVector",
    "Weights",
    "FitResult",
    "REFERENCE_WEIGHTS",
    "REFERENCE_R2",
    "score",
    "normalize_weights",
    "rank_topk",
    "fit_weights",
    "read_training_records",
]


@dataclass(frozen=True)
class FeatureVector:
    """Similarity features of one candidate against its reference entry."""

    xRaw: float
    xSummary: float
    yRaw: float
    ySummary: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xRaw, self.xSummary, self.yRaw, self.ySummary)


@dataclass(frozen=True)
class Weights:
    """Per-feature weights (alpha, beta, gamma, eta), in feature order."""

    alpha: float
    beta: float
    gamma: float
    eta: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.eta)


#: Default weights, from a previous least-squares calibration run. The
#: underlying scored dataset is not shipped, so these are usable as-is
#: but not reproducible here; refit with fit_weights when labeled data
#: is available. They sum to 0.999, not 1.0; score() takes them raw.
REFERENCE_WEIGHTS = Weights(alpha=0.134, beta=0.556, gamma=0.141, eta=0.168)

#: Coefficient of determination reported for that same calibration run.
REFERENCE_R2 = 0.1294


def score(features: FeatureVector, weights: Weights) -> float:
    """Weighted sum of the four features. Weights are used exactly as
    given: no normalization and no clamping of the result."""
    f = features.as_tuple()
    w = weights.as_tuple()
    if not all(math.isfinite(v) for v in f + w):
        raise ValueError("features and weights must be finite")
    return sum(wi * fi for wi, fi in zip(w, f))


def normalize_weights(weights: Weights) -> Weights:
    """Scale the weights so they sum to one (their ratios are what
    determines a ranking, so this never changes the induced order)."""
    total = sum(weights.as_tuple())
    if total == 0:
        raise ValueError("weights sum to zero; cannot normalize")
    return Weights(*(w / total for w in weights.as_tuple()))


def rank_topk(
    candidates: Sequence[tuple[object, FeatureVector]],
    weights: Weights,
    k: int = 2,
) -> list[tuple[object, FeatureVector, float]]:
    """Top k candidates by score, best first.

    Ties break by candidate id ascending so the outcome is deterministic.
    Fewer than k candidates means all of them are returned.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    scored = [(cand, fv, score(fv, weights)) for cand, fv in candidates]
    scored.sort(key=lambda t: (-t[2], getattr(t[0], "id", str(t[0]))))
    return scored[:k]


_METRIC_KEYS = ("mae", "mse", "rmse", "r2", "mape", "mde")


@dataclass(frozen=True)
class FitResult:
    weights: Weights
    normalized: Weights
    metrics: dict[str, float]


def _regression_metrics(actual: np.ndarray, predicted: np.ndarray) -> dict[str, float]:
    err = actual - predicted
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err**2))
    rmse = math.sqrt(mse)
    ss_res = float(np.sum(err**2))
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    nonzero = actual != 0
    mape = (
        float(np.mean(np.abs(err[nonzero] / actual[nonzero]))) if nonzero.any() else float("nan")
    )
    mde = float(np.mean(err))
    return {"mae": mae, "mse": mse, "rmse": rmse, "r2": r2, "mape": mape, "mde": mde}


def fit_weights(records: Sequence[tuple[FeatureVector, float]]) -> FitResult:
    """Least-squares fit of the four weights, without an intercept.

    records pairs each feature vector with the score it should have
    received. Needs at least four records and features of full column
    rank; otherwise the system is underdetermined and fitting refuses.
    """
    if len(records) < 4:
        raise ValueError(f"need at least 4 training records, got {len(records)}")
    X = np.array([fv.as_tuple() for fv, _ in records], dtype=float)
    y = np.array([actual for _, actual in records], dtype=float)
    if np.linalg.matrix_rank(X) < 4:
        raise ValueError("feature matrix is rank-deficient; weights are not identifiable")
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    weights = Weights(*(float(c) for c in coef))
    predicted = X @ coef
    return FitResult(
        weights=weights,
        normalized=normalize_weights(weights),
        metrics=_regression_metrics(y, predicted),
    )


def read_training_records(path: str) -> list[tuple[FeatureVector, float]]:
    """Read scored training records from a line-delimited JSON file where
    each line holds {xRaw, xSummary, yRaw, ySummary, actual}."""
    records: list[tuple[FeatureVector, float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            try:
                fv = FeatureVector(
                    xRaw=float(obj["xRaw"]),
                    xSummary=float(obj["xSummary"]),
                    yRaw=float(obj["yRaw"]),
                    ySummary=float(obj["ySummary"]),
                )
                actual = float(obj["actual"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(
                    f"{path}:{lineno}: record needs numeric xRaw, xSummary, yRaw, ySummary, actual"
                ) from exc
            records.append((fv, actual))
    return records
