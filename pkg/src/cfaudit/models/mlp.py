"""Small feed-forward network: ReLU hidden layers, logistic output."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .logistic import _sigmoid


def _shapes(n_in: int, hidden: tuple[int, ...]):
    dims = [n_in, *hidden, 1]
    return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]


def pack(weights: list[np.ndarray], biases: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([w.ravel() for w in weights] + [b.ravel() for b in biases])


def unpack(theta: np.ndarray, n_in: int, hidden: tuple[int, ...]):
    shapes = _shapes(n_in, hidden)
    weights, biases = [], []
    pos = 0
    for r, c in shapes:
        weights.append(theta[pos : pos + r * c].reshape(r, c))
        pos += r * c
    for _, c in shapes:
        biases.append(theta[pos : pos + c])
        pos += c
    return weights, biases


def loss_and_grad(theta, X, y, hidden, l2):
    """Cross-entropy + L2 over all weights, with full backprop gradient."""
    n = X.shape[0]
    weights, biases = unpack(theta, X.shape[1], hidden)
    acts = [X]
    pre = []
    a = X
    for w, b in zip(weights[:-1], biases[:-1]):
        z = a @ w + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        acts.append(a)
    z_out = a @ weights[-1] + biases[-1]
    p = _sigmoid(z_out.ravel())
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    loss += 0.5 * l2 * sum(float((w * w).sum()) for w in weights)

    gw = [None] * len(weights)
    gb = [None] * len(biases)
    delta = ((p - y) / n)[:, None]
    gw[-1] = acts[-1].T @ delta + l2 * weights[-1]
    gb[-1] = delta.sum(axis=0)
    for layer in range(len(weights) - 2, -1, -1):
        delta = (delta @ weights[layer + 1].T) * (pre[layer] > 0)
        gw[layer] = acts[layer].T @ delta + l2 * weights[layer]
        gb[layer] = delta.sum(axis=0)
    return loss, pack(gw, gb)


class MLP:
    def __init__(self, hidden: tuple[int, ...] = (16,), l2: float = 1e-4, max_iter: int = 400):
        if not 1 <= len(hidden) <= 2:
            raise ValueError("one or two hidden layers supported")
        self.hidden = tuple(int(h) for h in hidden)
        self.l2 = l2
        self.max_iter = max_iter
        self.theta: np.ndarray | None = None
        self.n_in: int | None = None
        self.converged = True

    def _init_theta(self, n_in: int, rng: np.random.Generator) -> np.ndarray:
        weights, biases = [], []
        for r, c in _shapes(n_in, self.hidden):
            scale = np.sqrt(2.0 / r)
            weights.append(rng.normal(0.0, scale, size=(r, c)))
            biases.append(np.zeros(c))
        return pack(weights, biases)

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "MLP":
        self.n_in = X.shape[1]
        rng = np.random.default_rng(seed)
        theta0 = self._init_theta(self.n_in, rng)
        res = minimize(
            loss_and_grad,
            theta0,
            args=(X, y.astype(float), self.hidden, self.l2),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.max_iter, "ftol": 1e-12},
        )
        self.theta = res.x
        self.converged = bool(res.success)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        weights, biases = unpack(self.theta, self.n_in, self.hidden)
        a = X
        for w, b in zip(weights[:-1], biases[:-1]):
            a = np.maximum(a @ w + b, 0.0)
        return _sigmoid((a @ weights[-1] + biases[-1]).ravel())

    def get_params(self) -> dict:
        return {
            "hidden": list(self.hidden),
            "l2": self.l2,
            "max_iter": self.max_iter,
            "n_in": self.n_in,
            "theta": self.theta.tolist(),
        }

    @classmethod
    def from_params(cls, params: dict) -> "MLP":
        obj = cls(hidden=tuple(params["hidden"]), l2=params["l2"], max_iter=params["max_iter"])
        obj.n_in = params["n_in"]
        obj.theta = np.asarray(params["theta"], dtype=float)
        return obj
