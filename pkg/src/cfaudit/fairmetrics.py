"""Counterfactual flip metrics and classical group-fairness gaps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cfgen import CounterfactualSet
from .data import encode_rows
from .schema import FeatureSchema


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class FlipRecord:
    """Per-sample flip outcome against the sensitive-feature classifier.

    A record only enters group aggregates when the sensitive classifier got
    the origin right (its prediction matches the true group) and at least
    one counterfactual exists.
    """

    sample_id: int
    true_group: int  # 1 privileged, 0 unprivileged
    origin_pred: int
    member_preds: tuple[int, ...]
    cflips: float | None
    included: bool


@dataclass(frozen=True)
class GroupFlipSummary:
    group: str  # "privileged" | "unprivileged"
    n_samples: int
    mean_cflips: float | None  # None when no record is included

    @property
    def defined(self) -> bool:
        return self.mean_cflips is not None


def cflips_sample(
    sample_id: int,
    true_group: int,
    cf_set: CounterfactualSet,
    f_s,
    schema: FeatureSchema,
) -> FlipRecord:
    """Fraction of counterfactuals whose sensitive prediction differs from
    the origin's. Undefined (and excluded) when the member list is empty."""
    origin_pred = int(f_s.predict(encode_rows([cf_set.origin], schema))[0])
    if not cf_set.members:
        return FlipRecord(sample_id, true_group, origin_pred, (), None, False)
    member_preds = tuple(
        int(p) for p in f_s.predict(encode_rows(list(cf_set.members), schema))
    )
    flips = sum(1 for p in member_preds if p != origin_pred)
    cflips = flips / len(member_preds)
    included = origin_pred == true_group
    return FlipRecord(sample_id, true_group, origin_pred, member_preds, cflips, included)


def cflips_group(records: list[FlipRecord], privileged: bool) -> GroupFlipSummary:
    """Mean CFlips over included records of one group; undefined, never 0,
    when nothing is included."""
    want = 1 if privileged else 0
    vals = [r.cflips for r in records if r.included and r.true_group == want]
    name = "privileged" if privileged else "unprivileged"
    if not vals:
        return GroupFlipSummary(name, 0, None)
    return GroupFlipSummary(name, len(vals), float(np.mean(vals)))


def delta_cflips(priv: GroupFlipSummary, unpriv: GroupFlipSummary) -> float | None:
    """|unprivileged mean - privileged mean| in percentage points."""
    if not priv.defined or not unpriv.defined:
        return None
    return abs(unpriv.mean_cflips - priv.mean_cflips) * 100.0


def ablation_curve(
    records: list[FlipRecord], prefix_lengths: list[int]
) -> dict[str, list[tuple[int, float | None]]]:
    """Group means recomputed on only the first l members of each record."""
    curves: dict[str, list] = {"privileged": [], "unprivileged": []}
    for length in prefix_lengths:
        truncated = []
        for r in records:
            preds = r.member_preds[:length]
            if preds:
                cf = sum(1 for p in preds if p != r.origin_pred) / len(preds)
                truncated.append(
                    FlipRecord(r.sample_id, r.true_group, r.origin_pred, preds, cf, r.included)
                )
            else:
                truncated.append(
                    FlipRecord(r.sample_id, r.true_group, r.origin_pred, (), None, False)
                )
        for privileged in (True, False):
            summary = cflips_group(truncated, privileged)
            curves[summary.group].append((length, summary.mean_cflips))
    return curves


def _rate(preds: np.ndarray, mask: np.ndarray, cell: str) -> float:
    if mask.sum() == 0:
        raise MetricError(f"empty conditioning cell: {cell}")
    return float(preds[mask].mean())


def dsp(preds, groups) -> float:
    """|P(pred=1 | s=1) - P(pred=1 | s=0)|"""
    preds = np.asarray(preds, dtype=int)
    groups = np.asarray(groups, dtype=int)
    return abs(_rate(preds, groups == 1, "s=1") - _rate(preds, groups == 0, "s=0"))


def deo(preds, labels, groups) -> float:
    """|P(pred=1 | s=1, y=1) - P(pred=1 | s=0, y=1)|"""
    preds = np.asarray(preds, dtype=int)
    labels = np.asarray(labels, dtype=int)
    groups = np.asarray(groups, dtype=int)
    return abs(
        _rate(preds, (groups == 1) & (labels == 1), "s=1,y=1")
        - _rate(preds, (groups == 0) & (labels == 1), "s=0,y=1")
    )


def dao(preds, labels, groups) -> float:
    """Half the absolute sum over y of the per-y positive-rate gaps."""
    preds = np.asarray(preds, dtype=int)
    labels = np.asarray(labels, dtype=int)
    groups = np.asarray(groups, dtype=int)
    total = 0.0
    for y in (0, 1):
        total += _rate(preds, (groups == 1) & (labels == y), f"s=1,y={y}") - _rate(
            preds, (groups == 0) & (labels == y), f"s=0,y={y}"
        )
    return abs(total) / 2.0
