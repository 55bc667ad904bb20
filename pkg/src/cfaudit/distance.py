"""Gower-style mixed-type distance used for neighbor search and proximity.

Per feature: numeric/ordinal contribute |a - b| / scale, categorical
contribute 0/1 mismatch; the total is the mean over features. The scale is
the median absolute deviation of the reference (train) column, falling back
to the column range when the MAD is zero; a zero-range column contributes 0.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .schema import CATEGORICAL, NUMERIC, ORDINAL, FeatureSchema


def _mad(values: np.ndarray) -> float:
    med = np.median(values)
    return float(np.median(np.abs(values - med)))


class GowerDistance:
    def __init__(self, schema: FeatureSchema, scales: dict[str, float]):
        self.schema = schema
        self.scales = scales
        self.n_features = len(schema.features)

    @classmethod
    def fit(cls, reference: Dataset) -> "GowerDistance":
        schema = reference.schema
        scales = {}
        for f in schema.features:
            if f.kind == CATEGORICAL:
                continue
            if f.kind == NUMERIC:
                vals = reference.columns[f.name].astype(float)
            else:
                index = {lvl: i for i, lvl in enumerate(f.levels)}
                vals = np.asarray([index[v] for v in reference.columns[f.name]], dtype=float)
            scale = _mad(vals)
            if scale == 0:
                scale = float(vals.max() - vals.min()) if len(vals) else 0.0
            scales[f.name] = scale
        return cls(schema, scales)

    def _numeric_value(self, feature, v) -> float:
        if feature.kind == NUMERIC:
            return float(v)
        return float(feature.levels.index(v))

    def distance(self, a: dict, b: dict) -> float:
        total = 0.0
        for f in self.schema.features:
            if f.kind == CATEGORICAL:
                total += 0.0 if a[f.name] == b[f.name] else 1.0
            else:
                scale = self.scales[f.name]
                if scale > 0:
                    total += abs(self._numeric_value(f, a[f.name]) - self._numeric_value(f, b[f.name])) / scale
        return total / self.n_features

    def to_search_space(self, rows: list[dict]) -> np.ndarray:
        """Map schema-space rows into a matrix where the distance decomposes
        per column: scaled numeric coordinates plus categorical level indices."""
        n = len(rows)
        out = np.zeros((n, self.n_features), dtype=float)
        for j, f in enumerate(self.schema.features):
            if f.kind == CATEGORICAL:
                index = {lvl: i for i, lvl in enumerate(f.levels)}
                out[:, j] = [index[r[f.name]] for r in rows]
            else:
                scale = self.scales[f.name]
                factor = 1.0 / (scale * self.n_features) if scale > 0 else 0.0
                out[:, j] = [self._numeric_value(f, r[f.name]) * factor for r in rows]
        return out

    @property
    def kinds(self) -> np.ndarray:
        """True where the search-space column is categorical (mismatch metric)."""
        return np.array([f.kind == CATEGORICAL for f in self.schema.features])

    def search_distance(self, q: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Distances between one search-space point and many, vectorized."""
        cat = self.kinds
        w = 1.0 / self.n_features
        num_part = np.abs(pts[:, ~cat] - q[~cat]).sum(axis=1)
        cat_part = (pts[:, cat] != q[cat]).sum(axis=1) * w
        return num_part + cat_part
