"""Family dispatch, fitting, and grid-search cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..data import EncodedMatrix
from .base import ClassifierHandle, ModelError, make_scaler
from .logistic import LogisticRegression
from .metrics import auc_score, report_from_scores
from .mlp import MLP
from .tree import DecisionTree

FAMILIES = ("logistic-regression", "decision-tree", "mlp")

# trees see raw feature values; the margin-based families get z-scored inputs
_SCALED = {"logistic-regression": True, "decision-tree": False, "mlp": True}


def _build(family: str, hyperparams: dict):
    if family == "logistic-regression":
        return LogisticRegression(**hyperparams)
    if family == "decision-tree":
        return DecisionTree(**hyperparams)
    if family == "mlp":
        hp = dict(hyperparams)
        if "hidden" in hp:
            hp["hidden"] = tuple(hp["hidden"])
        return MLP(**hp)
    raise ModelError(f"unknown family {family!r}")


def fit(
    family: str,
    hyperparams: dict,
    train: EncodedMatrix,
    labels: np.ndarray,
    seed: int = 0,
) -> ClassifierHandle:
    labels = np.asarray(labels, dtype=int)
    if len(np.unique(labels)) < 2:
        raise ModelError("labels contain one class")
    X = train.matrix
    if not np.isfinite(X).all():
        raise ModelError("training matrix contains non-finite values")
    scaler = make_scaler(X) if _SCALED[family] else None
    if scaler is not None:
        X = (X - scaler[0]) / scaler[1]
    model = _build(family, hyperparams).fit(X, labels, seed=seed)
    warnings = [] if getattr(model, "converged", True) else ["did not converge"]
    return ClassifierHandle(
        family=family,
        model=model,
        column_map=train.column_map,
        hyperparams=dict(hyperparams),
        seed=seed,
        scaler=scaler,
        warnings=warnings,
    )


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    objective: str = "auc"  # auc | f1
    grid: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ModelError("folds must be >= 2")
        if self.objective not in ("auc", "f1"):
            raise ModelError(f"unknown objective {self.objective!r}")
        if not self.grid:
            raise ModelError("grid must be non-empty")

    def cells(self) -> list[dict]:
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in product(*(self.grid[k] for k in keys))]


def kfold_indices(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic shuffled k-fold partition of range(n)."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return [perm[i::folds] for i in range(folds)]


def _fold_score(scores, labels, objective: str) -> float | None:
    if objective == "auc":
        return auc_score(scores, labels)
    return report_from_scores(scores, labels).f1


def grid_search_cv(
    family: str, cv: CvConfig, train: EncodedMatrix, labels: np.ndarray
) -> dict:
    """Pick the grid cell with the best mean fold score; first cell wins ties."""
    labels = np.asarray(labels, dtype=int)
    smallest_class = int(np.bincount(labels, minlength=2).min())
    if cv.folds > smallest_class:
        raise ModelError(
            f"folds={cv.folds} exceeds the smallest class count {smallest_class}"
        )
    fold_idx = kfold_indices(train.n_rows, cv.folds, cv.seed)
    results = []
    for cell in cv.cells():
        scores = []
        skipped = 0
        for i, val_idx in enumerate(fold_idx):
            mask = np.ones(train.n_rows, dtype=bool)
            mask[val_idx] = False
            y_tr, y_val = labels[mask], labels[val_idx]
            if len(np.unique(y_tr)) < 2 or len(np.unique(y_val)) < 2:
                skipped += 1
                continue
            sub = EncodedMatrix(train.matrix[mask], train.column_map, train.schema)
            fold_seed = int(np.random.SeedSequence([cv.seed, i]).generate_state(1)[0])
            handle = fit(family, cell, sub, y_tr, seed=fold_seed)
            s = _fold_score(handle.predict_proba(train.matrix[val_idx]), y_val, cv.objective)
            if s is not None:
                scores.append(s)
        results.append(
            {
                "params": cell,
                "mean_score": float(np.mean(scores)) if scores else None,
                "fold_scores": scores,
                "skipped_folds": skipped,
            }
        )
    scored = [r for r in results if r["mean_score"] is not None]
    if not scored:
        raise ModelError("every grid cell had undefined scores")
    best = max(scored, key=lambda r: r["mean_score"])  # max is stable on ties
    return {"best_params": best["params"], "best_score": best["mean_score"], "cells": results}
