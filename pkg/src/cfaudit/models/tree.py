"""CART decision tree with Gini impurity, serializable to plain dicts."""

from __future__ import annotations

import numpy as np


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Exhaustive search over (feature, midpoint) thresholds.

    Zero-gain splits are allowed (XOR-style targets need them); max_depth
    bounds the recursion.
    """
    n = len(y)
    parent = _gini(np.bincount(y, minlength=2))
    best = None
    best_score = parent + 1e-12
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs, ys = X[order, j], y[order]
        left = np.zeros(2)
        right = np.bincount(ys, minlength=2).astype(float)
        for i in range(n - 1):
            left[ys[i]] += 1
            right[ys[i]] -= 1
            if xs[i] == xs[i + 1]:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            score = (nl * _gini(left) + nr * _gini(right)) / n
            if score < best_score:
                best_score = score
                best = (j, (xs[i] + xs[i + 1]) / 2.0)
    return best


def _grow(X, y, depth, max_depth, min_split, min_leaf):
    counts = np.bincount(y, minlength=2)
    proba = counts[1] / counts.sum()
    node = {"n": int(counts.sum()), "proba": float(proba)}
    if depth >= max_depth or counts.sum() < min_split or counts.min() == 0:
        node["leaf"] = True
        return node
    split = _best_split(X, y, min_leaf)
    if split is None:
        node["leaf"] = True
        return node
    j, thr = split
    mask = X[:, j] <= thr
    node.update(
        leaf=False,
        feature=int(j),
        threshold=float(thr),
        left=_grow(X[mask], y[mask], depth + 1, max_depth, min_split, min_leaf),
        right=_grow(X[~mask], y[~mask], depth + 1, max_depth, min_split, min_leaf),
    )
    return node


class DecisionTree:
    def __init__(self, max_depth: int = 8, min_samples_split: int = 2, min_samples_leaf: int = 1):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.root: dict | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "DecisionTree":
        self.root = _grow(
            np.asarray(X, dtype=float),
            np.asarray(y, dtype=int),
            0,
            self.max_depth,
            self.min_samples_split,
            self.min_samples_leaf,
        )
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        for i, row in enumerate(X):
            node = self.root
            while not node["leaf"]:
                node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
            out[i] = node["proba"]
        return out

    def depth(self) -> int:
        def d(node):
            return 0 if node["leaf"] else 1 + max(d(node["left"]), d(node["right"]))

        return d(self.root)

    def get_params(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "tree": self.root,
        }

    @classmethod
    def from_params(cls, params: dict) -> "DecisionTree":
        obj = cls(
            max_depth=params["max_depth"],
            min_samples_split=params["min_samples_split"],
            min_samples_leaf=params["min_samples_leaf"],
        )
        obj.root = params["tree"]
        return obj
