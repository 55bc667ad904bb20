"""L2-regularized logistic regression trained by quasi-Newton descent."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(w: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean cross-entropy + (l2/2)|w|^2 (bias unpenalized) and its gradient."""
    n = X.shape[0]
    Xb = np.column_stack([X, np.ones(n)])
    z = Xb @ w
    p = _sigmoid(z)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    grad = Xb.T @ (p - y) / n
    reg = np.concatenate([w[:-1], [0.0]])
    return loss + 0.5 * l2 * float(reg @ reg), grad + l2 * reg


class LogisticRegression:
    def __init__(self, l2: float = 1e-4, max_iter: int = 500, tol: float = 1e-10):
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol
        self.weights: np.ndarray | None = None
        self.converged = True

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "LogisticRegression":
        w0 = np.zeros(X.shape[1] + 1)
        res = minimize(
            loss_and_grad,
            w0,
            args=(X, y.astype(float), self.l2),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": self.max_iter, "gtol": 1e-9, "ftol": 1e-14},
        )
        self.weights = res.x
        self.converged = bool(res.success)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = X @ self.weights[:-1] + self.weights[-1]
        return _sigmoid(z)

    def gradient_max_norm(self, X: np.ndarray, y: np.ndarray) -> float:
        """First-order optimality residual at the fitted weights."""
        _, g = loss_and_grad(self.weights, X, y.astype(float), self.l2)
        return float(np.max(np.abs(g)))

    def get_params(self) -> dict:
        return {
            "l2": self.l2,
            "max_iter": self.max_iter,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_params(cls, params: dict) -> "LogisticRegression":
        obj = cls(l2=params["l2"], max_iter=params["max_iter"])
        obj.weights = np.asarray(params["weights"], dtype=float)
        return obj
