"""Synthetic planted-proxy datasets for desk-scale experiments and tests.

Construction, for proxy strength beta in [0, 1]:
  - hidden group bit s ~ Bernoulli(0.5), column "group" in {priv, unpriv}
  - categorical feature "proxy" equals the group with probability (1+beta)/2
    (levels p1 for the privileged direction, p0 otherwise)
  - numeric "merit" ~ N(0,1), independent of the group
  - extra independent numeric noise columns
  - outcome is positive with probability sigmoid(3*merit + 3*beta*(2p-1)),
    so the ground-truth positive-rate gap (ex-ante statistical parity) grows
    monotonically with beta and vanishes at beta = 0.
"""

from __future__ import annotations

import numpy as np

from .data import Dataset
from .schema import Feature, FeatureSchema, GroupSpec


def synthetic_schema(noise_features: int = 2) -> FeatureSchema:
    features = [
        Feature("proxy", "categorical", ("p0", "p1")),
        Feature("merit", "numeric"),
    ]
    features += [Feature(f"noise{i}", "numeric") for i in range(noise_features)]
    return FeatureSchema(
        features=tuple(features),
        target="outcome",
        positive_label="yes",
        sensitive=(GroupSpec("group", "priv", "unpriv"),),
    )


def generate_synthetic(
    n: int, beta: float, noise_features: int = 2, seed: int = 0
) -> Dataset:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    schema = synthetic_schema(noise_features)
    rng = np.random.default_rng(seed)

    s = rng.integers(0, 2, size=n)  # 1 privileged
    agree = rng.random(n) < (1.0 + beta) / 2.0
    p = np.where(agree, s, 1 - s)
    merit = rng.normal(0.0, 1.0, size=n)
    logit = 3.0 * merit + 3.0 * beta * (2 * p - 1)
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-logit))).astype(int)

    columns = {
        "proxy": np.asarray(["p1" if v else "p0" for v in p], dtype=object),
        "merit": merit,
        "outcome": np.asarray(["yes" if v else "no" for v in y], dtype=object),
        "group": np.asarray(["priv" if v else "unpriv" for v in s], dtype=object),
    }
    for i in range(noise_features):
        columns[f"noise{i}"] = rng.normal(0.0, 1.0, size=n)
    provenance = {"source": "synthetic", "beta": beta, "seed": seed, "n": n}
    return Dataset(schema, columns, provenance)


def write_synthetic_csv(dataset: Dataset, csv_path: str, schema_path: str | None = None):
    """Dump the generated rows as CSV plus a matching YAML schema file."""
    import csv as _csv

    import yaml

    schema = dataset.schema
    names = schema.columns
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(names)
        for i in range(len(dataset)):
            row = dataset.row(i)
            writer.writerow([row[c] for c in names])
    if schema_path:
        doc = {
            "features": [
                {"name": f.name, "kind": f.kind, **({"levels": list(f.levels)} if f.levels else {})}
                for f in schema.features
            ],
            "target": {"name": schema.target, "positive": schema.positive_label},
            "sensitive": [
                {"name": g.name, "privileged": g.privileged, "unprivileged": g.unprivileged}
                for g in schema.sensitive
            ],
        }
        with open(schema_path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(doc, fh, sort_keys=False)
