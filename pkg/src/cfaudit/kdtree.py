"""Exact k-nearest-neighbor search over mixed numeric/categorical rows.

The tree lives in the Gower search space (see distance.GowerDistance):
numeric columns are pre-scaled so their L1 difference is the metric
contribution, categorical columns hold level indices with a 0/1-mismatch
contribution. Each node keeps its bounding box, so the lower bound for a
query is exact and the search returns the same distances as a linear scan.
"""

from __future__ import annotations

import heapq

import numpy as np

_LEAF_SIZE = 16


class _Node:
    __slots__ = ("lo", "hi", "idx", "dim", "left", "right")

    def __init__(self, lo, hi, idx=None, dim=-1, left=None, right=None):
        self.lo = lo
        self.hi = hi
        self.idx = idx
        self.dim = dim
        self.left = left
        self.right = right


class KDTree:
    def __init__(self, points: np.ndarray, categorical: np.ndarray, cat_weight: float):
        self.points = np.asarray(points, dtype=float)
        self.categorical = np.asarray(categorical, dtype=bool)
        self.cat_weight = cat_weight
        idx = np.arange(len(self.points))
        self.root = self._build(idx) if len(idx) else None

    def _build(self, idx: np.ndarray) -> _Node:
        pts = self.points[idx]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        if len(idx) <= _LEAF_SIZE:
            return _Node(lo, hi, idx=idx)
        spread = hi - lo
        dim = int(np.argmax(spread))
        if spread[dim] == 0:
            return _Node(lo, hi, idx=idx)
        order = np.argsort(pts[:, dim], kind="stable")
        half = len(idx) // 2
        return _Node(
            lo,
            hi,
            dim=dim,
            left=self._build(idx[order[:half]]),
            right=self._build(idx[order[half:]]),
        )

    def _box_bound(self, q: np.ndarray, node: _Node) -> float:
        below = np.maximum(node.lo - q, 0.0)
        above = np.maximum(q - node.hi, 0.0)
        gap = below + above
        num = gap[~self.categorical].sum()
        # a categorical box can only be pruned when q's level falls outside it
        cat = ((q < node.lo) | (q > node.hi))[self.categorical].sum() * self.cat_weight
        return float(num + cat)

    def _point_dists(self, q: np.ndarray, idx: np.ndarray) -> np.ndarray:
        pts = self.points[idx]
        num = np.abs(pts[:, ~self.categorical] - q[~self.categorical]).sum(axis=1)
        cat = (pts[:, self.categorical] != q[self.categorical]).sum(axis=1) * self.cat_weight
        return num + cat

    def query(self, q: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """k nearest (distances, indices); fewer if the tree is smaller than k."""
        if self.root is None or k <= 0:
            return np.empty(0), np.empty(0, dtype=int)
        q = np.asarray(q, dtype=float)
        heap: list[tuple[float, int]] = []  # max-heap via negated distance

        def visit(node: _Node):
            if len(heap) == k and -heap[0][0] <= self._box_bound(q, node):
                return
            if node.idx is not None:
                for d, i in zip(self._point_dists(q, node.idx), node.idx):
                    if len(heap) < k:
                        heapq.heappush(heap, (-d, int(i)))
                    elif d < -heap[0][0]:
                        heapq.heapreplace(heap, (-d, int(i)))
                return
            children = [node.left, node.right]
            children.sort(key=lambda c: self._box_bound(q, c))
            for child in children:
                visit(child)

        visit(self.root)
        pairs = sorted((-nd, i) for nd, i in heap)
        dists = np.array([p[0] for p in pairs])
        idx = np.array([p[1] for p in pairs], dtype=int)
        return dists, idx
