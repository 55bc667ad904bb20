"""Uniform classifier contract shared by built-in families and the adapter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import EncodedMatrix


class ModelError(ValueError):
    pass


class ColumnMapMismatch(ModelError):
    """Input encoded under a different column layout than at fit time."""


def _as_matrix(x) -> np.ndarray:
    arr = x.matrix if isinstance(x, EncodedMatrix) else np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


@dataclass
class ClassifierHandle:
    """Fitted model plus the encoded-column layout it was trained against.

    predict(x) is predict_proba(x) >= threshold for every built-in family.
    Handles are immutable after fit and safe to share across workers.
    """

    family: str
    model: object
    column_map: tuple
    hyperparams: dict
    seed: int
    threshold: float = 0.5
    scaler: tuple | None = None  # (mean, std) fitted on train, or None
    warnings: list = field(default_factory=list)

    def _check(self, x) -> np.ndarray:
        if isinstance(x, EncodedMatrix) and x.column_map != self.column_map:
            raise ColumnMapMismatch(
                "input column map differs from the one used at fit time"
            )
        arr = _as_matrix(x)
        if arr.shape[1] != len(self.column_map):
            raise ColumnMapMismatch(
                f"expected {len(self.column_map)} columns, got {arr.shape[1]}"
            )
        if self.scaler is not None:
            mean, std = self.scaler
            arr = (arr - mean) / std
        return arr

    def predict_proba(self, x) -> np.ndarray:
        return self.model.predict_proba(self._check(x))

    def predict(self, x) -> np.ndarray:
        return (self.predict_proba(x) >= self.threshold).astype(int)


def make_scaler(matrix: np.ndarray) -> tuple:
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return mean, std
