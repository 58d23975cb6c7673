"""L2-regularised multinomial logistic regression on sparse count features.

The objective is the summed negative log-likelihood plus ``(l2 / 2) * ||W||^2``;
per-class biases are not penalised. It is minimised with a trust-region Newton-CG method using exact
Hessian-vector products.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from ..exceptions import NonConvergence

__all__ = ["LinearModel", "objective_and_gradient", "hessian_product", "fit_logistic"]


def _unpack(theta, p, c):
    return theta[: p * c].reshape(p, c), theta[p * c :]


def objective_and_gradient(theta, X, Y, l2):
    """Objective value and gradient at the flattened parameters ``theta``.

    ``X`` is ``(n, p)`` (dense or sparse), ``Y`` a one-hot ``(n, c)`` array;
    ``theta`` packs ``W`` (p, c) row-major followed by the ``c`` biases.
    """
    p, c = X.shape[1], Y.shape[1]
    W, b = _unpack(theta, p, c)
    Z = np.asarray(X @ W) + b
    lse = logsumexp(Z, axis=1)
    f = float(np.sum(lse - np.sum(Z * Y, axis=1)) + 0.5 * l2 * np.sum(W * W))
    R = np.exp(Z - lse[:, None]) - Y
    gW = np.asarray(X.T @ R) + l2 * W
    return f, np.concatenate([gW.ravel(), R.sum(axis=0)])


def hessian_product(theta, v, X, Y, l2):
    """Hessian of the objective at ``theta`` times the vector ``v``."""
    p, c = X.shape[1], Y.shape[1]
    W, b = _unpack(theta, p, c)
    V, vb = _unpack(v, p, c)
    P = softmax(np.asarray(X @ W) + b, axis=1)
    U = np.asarray(X @ V) + vb
    R = P * (U - np.sum(P * U, axis=1, keepdims=True))
    hW = np.asarray(X.T @ R) + l2 * V
    return np.concatenate([hW.ravel(), R.sum(axis=0)])


@dataclass
class LinearModel:
    """Per-class weights over a feature vocabulary plus biases."""

    weights: np.ndarray
    bias: np.ndarray
    l2: float = 1.0
    tol: float = 1e-6
    grad_norm: float = float("nan")
    n_iter: int = 0
    converged: bool = True
    objective_trace: list = field(default_factory=list)

    def decision_function(self, X):
        return np.asarray(X @ self.weights) + self.bias

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def predict(self, X):
        return np.argmax(self.decision_function(X), axis=1)


def fit_logistic(X, y, n_classes=None, l2=1.0, tol=1e-6, max_iter=5000, track_objective=False):
    """Fit a :class:`LinearModel` to count features ``X`` and integer labels ``y``.

    Convergence means the max-norm of the gradient is at most ``tol``. When the
    iteration limit is hit first a :class:`NonConvergence` warning carrying the
    final gradient norm is emitted and the model is still returned.
    """
    y = np.asarray(y, dtype=np.int64)
    c = int(n_classes if n_classes is not None else y.max() + 1)
    if c < 2:
        raise ValueError("logistic regression needs at least two classes")
    X = sp.csr_matrix(X, dtype=np.float64) if sp.issparse(X) else np.asarray(X, dtype=np.float64)
    n, p = X.shape
    Y = np.zeros((n, c))
    Y[np.arange(n), y] = 1.0
    theta0 = np.zeros(p * c + c)
    trace = []

    def callback(intermediate_result):
        trace.append(float(intermediate_result.fun))

    res = minimize(
        objective_and_gradient,
        theta0,
        args=(X, Y, l2),
        jac=True,
        hessp=hessian_product,
        method="trust-ncg",
        callback=callback if track_objective else None,
        options={"maxiter": max_iter, "gtol": tol},
    )
    _, grad = objective_and_gradient(res.x, X, Y, l2)
    gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
    W, b = _unpack(res.x, p, c)
    model = LinearModel(W.copy(), b.copy(), l2, tol, gnorm, int(res.nit), gnorm <= tol, trace)
    if not model.converged:
        warnings.warn(NonConvergence("logistic fit did not reach tolerance", gnorm), stacklevel=2)
    return model
