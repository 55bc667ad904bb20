"""Shared helper for the demo scripts."""

import numpy as np


class FnClassifier:
    """Minimal classifier handle: a probability function over encoded rows."""

    threshold = 0.5

    def __init__(self, proba_fn):
        self.proba_fn = proba_fn

    def predict_proba(self, x):
        arr = x.matrix if hasattr(x, "matrix") else np.atleast_2d(np.asarray(x, dtype=float))
        return np.asarray([self.proba_fn(row) for row in arr], dtype=float)

    def predict(self, x):
        return (self.predict_proba(x) >= self.threshold).astype(int)
