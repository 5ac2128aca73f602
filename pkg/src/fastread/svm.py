"""Linear SVM trained by dual coordinate descent.

Minimizes, over (w, b), the L1-hinge objective

    1/2 (||w||^2 + b^2) + C * sum_i c_i * max(0, 1 - y_i (w.x_i + b))

where c_i is the class weight of example i.  The bias is folded in as a
constant-1 feature, which is why it appears inside the regularizer; at
the feature dimensions used here the difference from an unregularized
bias is negligible.  The dual problem is solved coordinate-wise with a
projected-gradient stopping rule, visiting examples in a freshly
shuffled order each epoch so results are deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap

C_DEFAULT = 1.0
TOL_DEFAULT = 1e-3
MAX_EPOCHS_DEFAULT = 1000


class DegenerateTrainingError(Exception):
    """Training set contains only one class; no separating plane exists."""


@dataclass(frozen=True)
class ClassWeights:
    """Per-class hinge-loss multipliers; both strictly positive."""

    w_relevant: float
    w_irrelevant: float

    def __post_init__(self):
        if self.w_relevant <= 0 or self.w_irrelevant <= 0:
            raise ValueError("class weights must be strictly positive")


def balanced_weights(n_relevant: int, n_irrelevant: int) -> ClassWeights:
    """Inverse-frequency weights scaled so each class contributes n/2.

    weight(class) = n_samples / (2 * n_class), e.g. (10, 30) -> (2.0, 2/3).
    """
    if n_relevant < 1 or n_irrelevant < 1:
        raise ValueError("both classes need at least one example")
    n = n_relevant + n_irrelevant
    return ClassWeights(
        w_relevant=n / (2.0 * n_relevant),
        w_irrelevant=n / (2.0 * n_irrelevant),
    )


@dataclass(frozen=True)
class LinearModel:
    """Immutable trained plane; positive decision scores mean relevant."""

    weights: np.ndarray
    bias: float
    epochs: int = 0

    classes = (-1, +1)

    def decision(self, X) -> np.ndarray:
        X = _as_csr(X)
        if X.shape[1] != self.weights.shape[0]:
            raise ValueError(
                f"feature dimension {X.shape[1]} != model dimension {self.weights.shape[0]}"
            )
        return np.asarray(X @ self.weights).ravel() + self.bias


def decision(model: LinearModel, X) -> np.ndarray:
    return model.decision(X)


def _as_csr(X) -> sparse.csr_matrix:
    if hasattr(X, "matrix"):
        X = X.matrix
    if sparse.issparse(X):
        return X.tocsr()
    return sparse.csr_matrix(np.atleast_2d(np.asarray(X, dtype=np.float64)))


@njit(cache=True)
def _epoch(data, indices, indptr, y, qii, upper, alpha, w, b, order):
    """One pass of dual coordinate descent; returns (pg_max, pg_min, b)."""
    pg_max = -np.inf
    pg_min = np.inf
    for k in range(order.size):
        i = order[k]
        s = b
        for p in range(indptr[i], indptr[i + 1]):
            s += w[indices[p]] * data[p]
        g = y[i] * s - 1.0
        a = alpha[i]
        if a == 0.0:
            pg = min(g, 0.0)
        elif a == upper[i]:
            pg = max(g, 0.0)
        else:
            pg = g
        if pg > pg_max:
            pg_max = pg
        if pg < pg_min:
            pg_min = pg
        if pg != 0.0:
            new = a - g / qii[i]
            if new < 0.0:
                new = 0.0
            elif new > upper[i]:
                new = upper[i]
            d = (new - a) * y[i]
            if d != 0.0:
                alpha[i] = new
                for p in range(indptr[i], indptr[i + 1]):
                    w[indices[p]] += d * data[p]
                b += d
    return pg_max, pg_min, b


def train(
    X,
    y,
    weights: ClassWeights | None = None,
    seed: int = 0,
    C: float = C_DEFAULT,
    tol: float = TOL_DEFAULT,
    max_epochs: int = MAX_EPOCHS_DEFAULT,
    callback: Callable[[int, LinearModel, np.ndarray], None] | None = None,
) -> LinearModel:
    """Fit the plane on labeled rows; labels are -1 (irrelevant) / +1 (relevant).

    Raises :class:`DegenerateTrainingError` when only one class is present,
    in which case callers fall back to random sampling.  ``callback`` (if
    given) receives (epoch, model snapshot, dual coefficient copy) after
    every epoch.
    """
    X = _as_csr(X).astype(np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {y.shape[0]} labels")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DegenerateTrainingError("need at least one example of each class")

    n, dim = X.shape
    cost = np.full(n, C, dtype=np.float64)
    if weights is not None:
        cost[y > 0] *= weights.w_relevant
        cost[y < 0] *= weights.w_irrelevant
    # +1.0 accounts for the constant bias feature
    qii = np.asarray(X.multiply(X).sum(axis=1)).ravel() + 1.0

    alpha = np.zeros(n)
    w = np.zeros(dim)
    b = 0.0
    rng = np.random.default_rng(seed)
    epochs = 0
    for epoch in range(max_epochs):
        order = rng.permutation(n).astype(np.int64)
        pg_max, pg_min, b = _epoch(
            X.data, X.indices, X.indptr, y, qii, cost, alpha, w, b, order
        )
        epochs = epoch + 1
        if callback is not None:
            callback(epoch, LinearModel(weights=w.copy(), bias=b, epochs=epochs), alpha.copy())
        if pg_max - pg_min < tol:
            break
    return LinearModel(weights=w, bias=b, epochs=epochs)


def objective(model: LinearModel, X, y, weights: ClassWeights | None = None, C: float = C_DEFAULT) -> float:
    """Objective value actually minimized (bias included in the regularizer)."""
    X = _as_csr(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    cost = np.full(y.shape[0], C, dtype=np.float64)
    if weights is not None:
        cost[y > 0] *= weights.w_relevant
        cost[y < 0] *= weights.w_irrelevant
    margins = 1.0 - y * model.decision(X)
    hinge = np.maximum(margins, 0.0)
    reg = 0.5 * (float(model.weights @ model.weights) + model.bias**2)
    return reg + float(cost @ hinge)
