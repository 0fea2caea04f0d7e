"""Evaluation metric: root-mean-square error in ppm."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthMismatch


@dataclass(frozen=True)
class EvaluationBatch:
    """Recorded shifts paired with predictions."""

    y: np.ndarray
    y_hat: np.ndarray

    def __post_init__(self) -> None:
        if np.asarray(self.y).shape != np.asarray(self.y_hat).shape:
            raise LengthMismatch(
                f"{np.asarray(self.y).shape} vs {np.asarray(self.y_hat).shape}"
            )
        if np.asarray(self.y).size < 1:
            raise LengthMismatch("empty evaluation batch")


def rmse(b: EvaluationBatch) -> float:
    """sqrt(sum((y - y_hat)^2) / N)."""
    diff = np.asarray(b.y, dtype=float) - np.asarray(b.y_hat, dtype=float)
    return float(np.sqrt(np.mean(diff * diff)))


def rmse_arrays(y, y_hat) -> float:
    return rmse(EvaluationBatch(y=np.asarray(y), y_hat=np.asarray(y_hat)))
