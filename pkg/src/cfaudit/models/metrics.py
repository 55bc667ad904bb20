"""Confusion-matrix accuracy metrics and rank-based AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class EvalReport:
    acc: float
    precision: float
    recall: float
    f1: float
    auc: float | None  # None when the test labels are single-class
    tp: int
    fp: int
    tn: int
    fn: int

    def as_dict(self) -> dict:
        return {
            "acc": self.acc,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "confusion": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn},
        }


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float | None:
    """Mann-Whitney AUC: mean rank of positives, ties counted as 1/2."""
    labels = np.asarray(labels, dtype=int)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(np.asarray(scores, dtype=float))
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion_counts(preds: np.ndarray, labels: np.ndarray) -> tuple[int, int, int, int]:
    preds = np.asarray(preds, dtype=int)
    labels = np.asarray(labels, dtype=int)
    tp = int(((preds == 1) & (labels == 1)).sum())
    fp = int(((preds == 1) & (labels == 0)).sum())
    tn = int(((preds == 0) & (labels == 0)).sum())
    fn = int(((preds == 0) & (labels == 1)).sum())
    return tp, fp, tn, fn


def report_from_scores(scores: np.ndarray, labels: np.ndarray, threshold: float = 0.5) -> EvalReport:
    preds = (np.asarray(scores) >= threshold).astype(int)
    tp, fp, tn, fn = confusion_counts(preds, labels)
    total = tp + fp + tn + fn
    acc = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(acc, precision, recall, f1, auc_score(scores, labels), tp, fp, tn, fn)


def evaluate(handle, test, labels) -> EvalReport:
    """Score a fitted handle on held-out data."""
    if getattr(test, "n_rows", len(np.atleast_2d(test))) == 0:
        raise ValueError("test set is empty")
    scores = handle.predict_proba(test)
    return report_from_scores(scores, labels, handle.threshold)
