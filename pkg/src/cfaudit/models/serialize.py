"""Self-describing JSON serialization of fitted handles."""

from __future__ import annotations

import json

import numpy as np

from .base import ClassifierHandle, ModelError
from .logistic import LogisticRegression
from .mlp import MLP
from .tree import DecisionTree

_CLASSES = {
    "logistic-regression": LogisticRegression,
    "decision-tree": DecisionTree,
    "mlp": MLP,
}


def save_handle(handle: ClassifierHandle, path: str) -> None:
    if handle.family not in _CLASSES:
        raise ModelError(f"family {handle.family!r} is not serializable")
    doc = {
        "family": handle.family,
        "hyperparams": handle.hyperparams,
        "params": handle.model.get_params(),
        "column_map": [list(c) for c in handle.column_map],
        "seed": handle.seed,
        "threshold": handle.threshold,
        "scaler": None
        if handle.scaler is None
        else {"mean": handle.scaler[0].tolist(), "std": handle.scaler[1].tolist()},
        "warnings": handle.warnings,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)


def load_handle(path: str) -> ClassifierHandle:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    cls = _CLASSES.get(doc["family"])
    if cls is None:
        raise ModelError(f"unknown family {doc['family']!r} in {path}")
    scaler = doc["scaler"]
    return ClassifierHandle(
        family=doc["family"],
        model=cls.from_params(doc["params"]),
        column_map=tuple(tuple(c) for c in doc["column_map"]),
        hyperparams=doc["hyperparams"],
        seed=doc["seed"],
        threshold=doc["threshold"],
        scaler=None
        if scaler is None
        else (np.asarray(scaler["mean"]), np.asarray(scaler["std"])),
        warnings=list(doc.get("warnings", [])),
    )
