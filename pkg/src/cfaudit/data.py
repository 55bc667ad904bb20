"""CSV ingestion, one-hot encoding, stratified splits, group statistics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .schema import CATEGORICAL, NUMERIC, ORDINAL, FeatureSchema, GroupSpec


class DataError(ValueError):
    pass


class UndefinedStatistic(DataError):
    """Raised when a statistic's conditioning group is empty."""


@dataclass(frozen=True)
class Dataset:
    """Aligned columns in schema space. Immutable after construction.

    Numeric feature columns are float64 arrays; everything else (ordinal,
    categorical, target, sensitive) is kept as string values.
    """

    schema: FeatureSchema
    columns: dict[str, np.ndarray]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise DataError(f"ragged columns: lengths {sorted(lengths)}")

    def __len__(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    @property
    def n_rows(self) -> int:
        return len(self)

    def row(self, i: int) -> dict:
        return {name: col[i] for name, col in self.columns.items()}

    def feature_row(self, i: int) -> dict:
        return {f.name: self.columns[f.name][i] for f in self.schema.features}

    def target01(self) -> np.ndarray:
        """Binary target vector: 1 where the target equals the positive label."""
        return (self.columns[self.schema.target] == self.schema.positive_label).astype(int)

    def sensitive01(self, group: GroupSpec) -> np.ndarray:
        """1 for privileged, 0 for unprivileged rows of the group column."""
        col = self.columns[group.name]
        return (col == group.privileged).astype(int)

    def subset(self, idx: np.ndarray) -> "Dataset":
        cols = {name: col[idx] for name, col in self.columns.items()}
        return Dataset(self.schema, cols, dict(self.provenance))


@dataclass(frozen=True)
class EncodedMatrix:
    """Model-ready real matrix over feature columns only.

    column_map[j] is (feature name, level) for one-hot indicator columns and
    (feature name, None) for numeric / ordinal pass-through columns.
    """

    matrix: np.ndarray
    column_map: tuple[tuple[str, str | None], ...]
    schema: FeatureSchema

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    def same_map(self, other: "EncodedMatrix") -> bool:
        return self.column_map == other.column_map


def _convert_value(feature, raw: str, row_idx: int):
    if feature.kind == NUMERIC:
        try:
            return float(raw)
        except ValueError:
            raise DataError(
                f"row {row_idx}: unparseable numeric {raw!r} in column {feature.name!r}"
            ) from None
    if raw not in feature.levels:
        raise DataError(
            f"row {row_idx}: value {raw!r} outside declared levels of {feature.name!r}"
        )
    return raw


def load_csv(path: str, schema: FeatureSchema) -> Dataset:
    """Read a CSV under the schema, dropping rows with missing values.

    Missing means an empty field or the schema's sentinel (default "?").
    The drop count lands in provenance["dropped_rows"].
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, no header") from None
        expected = set(schema.columns)
        missing_cols = expected - set(header)
        if missing_cols:
            raise DataError(f"{path}: columns absent from header: {sorted(missing_cols)}")
        col_idx = {name: header.index(name) for name in schema.columns}

        sentinel = schema.missing_sentinel
        kept: list[list] = []
        dropped = 0
        for row_idx, row in enumerate(reader):
            if not row or all(not c.strip() for c in row):
                continue
            raw = {}
            skip = False
            for name, j in col_idx.items():
                if j >= len(row):
                    skip = True
                    break
                v = row[j].strip()
                if v == "" or v == sentinel:
                    skip = True
                    break
                raw[name] = schema.remap.get(name, {}).get(v, v)
            if skip:
                dropped += 1
                continue
            out = []
            for f in schema.features:
                out.append(_convert_value(f, raw[f.name], row_idx))
            out.append(raw[schema.target])
            for g in schema.sensitive:
                out.append(raw[g.name])
            kept.append(out)

    names = schema.columns
    columns: dict[str, np.ndarray] = {}
    for k, name in enumerate(names):
        vals = [r[k] for r in kept]
        f = next((f for f in schema.features if f.name == name), None)
        if f is not None and f.kind == NUMERIC:
            columns[name] = np.asarray(vals, dtype=float)
        else:
            columns[name] = np.asarray(vals, dtype=object)
    provenance = {"source": path, "dropped_rows": dropped, "kept_rows": len(kept)}
    return Dataset(schema, columns, provenance)


def encoded_column_map(schema: FeatureSchema) -> tuple[tuple[str, str | None], ...]:
    cmap: list[tuple[str, str | None]] = []
    for f in schema.features:
        if f.kind == CATEGORICAL:
            cmap.extend((f.name, lvl) for lvl in f.levels)
        else:
            cmap.append((f.name, None))
    return tuple(cmap)


def encode(dataset: Dataset) -> EncodedMatrix:
    """One-hot categoricals, ordinal level index, numeric pass-through."""
    if len(dataset) == 0:
        raise DataError("cannot encode an empty dataset")
    schema = dataset.schema
    cols: list[np.ndarray] = []
    for f in schema.features:
        col = dataset.columns[f.name]
        if f.kind == NUMERIC:
            cols.append(col.astype(float))
        elif f.kind == ORDINAL:
            index = {lvl: i for i, lvl in enumerate(f.levels)}
            cols.append(np.asarray([index[v] for v in col], dtype=float))
        else:
            for lvl in f.levels:
                cols.append((col == lvl).astype(float))
    matrix = np.column_stack(cols)
    return EncodedMatrix(matrix, encoded_column_map(schema), schema)


def encode_rows(rows: list[dict], schema: FeatureSchema) -> np.ndarray:
    """Encode schema-space feature dicts into a matrix (same layout as encode)."""
    out = np.zeros((len(rows), len(encoded_column_map(schema))), dtype=float)
    j = 0
    for f in schema.features:
        if f.kind == NUMERIC:
            out[:, j] = [float(r[f.name]) for r in rows]
            j += 1
        elif f.kind == ORDINAL:
            index = {lvl: i for i, lvl in enumerate(f.levels)}
            out[:, j] = [index[r[f.name]] for r in rows]
            j += 1
        else:
            for lvl in f.levels:
                out[:, j] = [1.0 if r[f.name] == lvl else 0.0 for r in rows]
                j += 1
    return out


def decode_row(encoded: np.ndarray, schema: FeatureSchema) -> dict:
    """Invert encode() for a single row back into schema space."""
    row: dict = {}
    j = 0
    for f in schema.features:
        if f.kind == NUMERIC:
            row[f.name] = float(encoded[j])
            j += 1
        elif f.kind == ORDINAL:
            row[f.name] = f.levels[int(round(encoded[j]))]
            j += 1
        else:
            block = encoded[j : j + len(f.levels)]
            row[f.name] = f.levels[int(np.argmax(block))]
            j += len(f.levels)
    return row


def _stratum_keys(dataset: Dataset) -> np.ndarray:
    parts = [dataset.columns[dataset.schema.target].astype(str)]
    parts.extend(dataset.columns[g.name].astype(str) for g in dataset.schema.sensitive)
    return np.array(["|".join(t) for t in zip(*parts)], dtype=object)


def stratified_split(
    dataset: Dataset, test_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Deterministic hold-out split stratified on target x sensitive labels.

    Total test size is ceil(fraction * n); per-stratum counts are apportioned
    by largest remainder so each stratum keeps its full-dataset proportion.
    Singleton strata trigger a fallback to target-only stratification.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must lie in (0, 1)")
    n = len(dataset)
    keys = _stratum_keys(dataset)
    uniq, counts = np.unique(keys, return_counts=True)
    if (counts < 2).any():
        # target-only fallback keeps the split well-defined
        keys = dataset.columns[dataset.schema.target].astype(str)
        uniq, counts = np.unique(keys, return_counts=True)
        if (counts < 2).any():
            bad = uniq[counts < 2].tolist()
            raise DataError(f"stratum with a single row even on target alone: {bad}")

    n_test_total = math.ceil(test_fraction * n)
    exact = counts * test_fraction
    base = np.floor(exact).astype(int)
    base = np.maximum(base, 1)  # every stratum contributes to both sides
    base = np.minimum(base, counts - 1)
    shortfall = n_test_total - base.sum()
    if shortfall != 0:
        order = np.argsort(-(exact - np.floor(exact)))
        i = 0
        while shortfall != 0 and i < 10 * len(uniq):
            j = order[i % len(uniq)]
            if shortfall > 0 and base[j] < counts[j] - 1:
                base[j] += 1
                shortfall -= 1
            elif shortfall < 0 and base[j] > 1:
                base[j] -= 1
                shortfall += 1
            i += 1

    rng = np.random.default_rng(seed)
    test_mask = np.zeros(n, dtype=bool)
    for j, key in enumerate(uniq):
        idx = np.flatnonzero(keys == key)
        perm = rng.permutation(len(idx))
        test_mask[idx[perm[: base[j]]]] = True
    train = dataset.subset(np.flatnonzero(~test_mask))
    test = dataset.subset(np.flatnonzero(test_mask))
    return train, test


def ex_ante_sp(dataset: Dataset, group: GroupSpec) -> float:
    """Ground-truth positive-rate gap P(y=1 | privileged) - P(y=1 | unprivileged)."""
    y = dataset.target01()
    col = dataset.columns[group.name]
    priv = col == group.privileged
    unpriv = col == group.unprivileged
    if priv.sum() == 0 or unpriv.sum() == 0:
        raise UndefinedStatistic(f"group {group.name!r}: one side is empty")
    return float(y[priv].mean() - y[unpriv].mean())


def group_distribution(dataset: Dataset, group: GroupSpec) -> tuple[float, float]:
    """(P(privileged), P(unprivileged)) among rows carrying either value."""
    col = dataset.columns[group.name]
    n_priv = int((col == group.privileged).sum())
    n_unpriv = int((col == group.unprivileged).sum())
    total = n_priv + n_unpriv
    if total == 0:
        raise UndefinedStatistic(f"group {group.name!r}: no rows with either value")
    return n_priv / total, n_unpriv / total


def sensitive_correlations(dataset: Dataset) -> list[dict]:
    """Pearson and Spearman of every encoded feature column vs each sensitive column.

    Reporting utility for schema pruning; it never drops anything itself.
    """
    from scipy import stats

    enc = encode(dataset)
    out = []
    for g in dataset.schema.sensitive:
        s = dataset.sensitive01(g).astype(float)
        for j, (fname, level) in enumerate(enc.column_map):
            col = enc.matrix[:, j]
            if np.std(col) == 0 or np.std(s) == 0:
                pearson = spearman = float("nan")
            else:
                pearson = float(stats.pearsonr(col, s)[0])
                spearman = float(stats.spearmanr(col, s)[0])
            out.append(
                {
                    "sensitive": g.name,
                    "feature": fname,
                    "level": level,
                    "pearson": pearson,
                    "spearman": spearman,
                }
            )
    return out
