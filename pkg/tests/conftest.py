import numpy as np
import pytest

from cfaudit.data import Dataset
from cfaudit.schema import Feature, FeatureSchema, GroupSpec


@pytest.fixture
def mixed_schema():
    return FeatureSchema(
        features=(
            Feature("amount", "numeric"),
            Feature("grade", "ordinal", ("low", "mid", "high")),
            Feature("sector", "categorical", ("a", "b", "c")),
        ),
        target="ok",
        positive_label="yes",
        sensitive=(GroupSpec("gender", "male", "female"),),
    )


def make_dataset(schema, n, seed=0):
    """Random dataset conforming to a schema (features + target + sensitive)."""
    rng = np.random.default_rng(seed)
    columns = {}
    for f in schema.features:
        if f.kind == "numeric":
            columns[f.name] = rng.normal(0, 5, size=n)
        else:
            columns[f.name] = np.asarray(
                [f.levels[i] for i in rng.integers(0, len(f.levels), n)], dtype=object
            )
    columns[schema.target] = np.asarray(
        [["no", "yes"][i] for i in rng.integers(0, 2, n)], dtype=object
    )
    for g in schema.sensitive:
        columns[g.name] = np.asarray(
            [[g.unprivileged, g.privileged][i] for i in rng.integers(0, 2, n)], dtype=object
        )
    return Dataset(schema, columns)


@pytest.fixture
def mixed_dataset(mixed_schema):
    return make_dataset(mixed_schema, 200, seed=1)


class FixedClassifier:
    """Stand-in handle: predicts via a supplied function on encoded rows."""

    threshold = 0.5

    def __init__(self, proba_fn):
        self.proba_fn = proba_fn

    def predict_proba(self, x):
        arr = x.matrix if hasattr(x, "matrix") else np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray([self.proba_fn(row) for row in arr], dtype=float)

    def predict(self, x):
        return (self.predict_proba(x) >= self.threshold).astype(int)
