"""One-nearest-neighbour classifiers over elastic distances.

:class:`NearestNeighbourClassifier` works with any :class:`DistanceSpec`.
:class:`AdaptiveDTWClassifier` holds an independent and a dependent 1-NN
model and picks one of them per query. The choice compares the score
``S(q) = d_I(q) / d_D(q)`` (ratio of nearest-neighbour distances) with a
threshold chosen by leave-one-out accuracy on the training data: the
independent prediction is used when ``S(q) < threshold``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .budget import checkpoint
from .dtw import DEPENDENT, INDEPENDENT, DistanceSpec, pairwise_distances
from .exceptions import EmptyModel, ShapeMismatch

__all__ = [
    "NearestNeighbourClassifier",
    "AdaptiveDTWClassifier",
    "nearest_neighbours",
    "ratio_score",
    "select_threshold",
]

_CHUNK = 64


def _distances(A, B, spec):
    # row chunks so time budgets can interrupt long distance computations
    if B is None:
        checkpoint()
        return pairwise_distances(A, None, spec)
    out = np.empty((A.shape[0], B.shape[0]))
    for start in range(0, A.shape[0], _CHUNK):
        checkpoint()
        out[start : start + _CHUNK] = pairwise_distances(A[start : start + _CHUNK], B, spec)
    return out


def nearest_neighbours(D, y):
    """Index and distance of the nearest training case for each row of ``D``.

    Ties on distance go to the lowest class index, then the lowest training index.
    """
    D = np.asarray(D, dtype=np.float64)
    y = np.asarray(y)
    idx = np.empty(D.shape[0], dtype=np.int64)
    dist = D.min(axis=1)
    for q in range(D.shape[0]):
        tied = np.flatnonzero(D[q] == dist[q])
        if tied.size == 1:
            idx[q] = tied[0]
        else:
            labels = y[tied]
            idx[q] = tied[labels == labels.min()][0]
    return idx, dist


def _check_fitted_shape(X, shape):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[1:] != shape:
        raise ShapeMismatch(f"expected cases of shape {shape}, got {X.shape[1:]}")
    return X


class NearestNeighbourClassifier(BaseEstimator, ClassifierMixin):
    """1-NN with a DTW/Euclidean distance.

    Parameters
    ----------
    strategy : {"independent", "dependent", "euclidean"}
    window : float
        Warping window as a fraction of the series length; 1.0 is full DTW.
    """

    def __init__(self, strategy=INDEPENDENT, window=1.0):
        self.strategy = strategy
        self.window = window

    @property
    def spec(self):
        return DistanceSpec(self.strategy, self.window)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 3 or X.shape[0] == 0:
            raise EmptyModel("need at least one (d, m) training case")
        self.classes_, self.y_ = np.unique(y, return_inverse=True)
        self.X_ = X
        return self

    def _check(self, X):
        if not hasattr(self, "X_"):
            raise EmptyModel("model is not fitted")
        return _check_fitted_shape(X, self.X_.shape[1:])

    def distances(self, X):
        return _distances(self._check(X), self.X_, self.spec)

    def kneighbors(self, X):
        """Nearest training index and distance for each query."""
        return nearest_neighbours(self.distances(X), self.y_)

    def predict_proba(self, X):
        idx, _ = self.kneighbors(X)
        proba = np.zeros((idx.size, self.classes_.size))
        proba[np.arange(idx.size), self.y_[idx]] = 1.0
        return proba

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


def ratio_score(d_ind, d_dep):
    """``d_I / d_D`` with ``x/0 = inf`` for ``x > 0`` and ``0/0 = 1``."""
    d_ind = np.asarray(d_ind, dtype=np.float64)
    d_dep = np.asarray(d_dep, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = d_ind / d_dep
    s[(d_dep == 0) & (d_ind > 0)] = np.inf
    s[(d_dep == 0) & (d_ind == 0)] = 1.0
    return s


def _use_independent(scores, threshold):
    if np.isposinf(threshold):
        return np.ones(np.shape(scores), dtype=bool)
    return np.asarray(scores) < threshold


def select_threshold(scores, pred_ind, pred_dep, y):
    """Threshold maximising accuracy of the per-case choice rule.

    Candidates are the observed scores plus the sentinels ``0`` (always
    dependent) and ``+inf`` (always independent). Ties go to the largest
    threshold. Returns ``(threshold, accuracy)``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    finite = np.unique(scores[np.isfinite(scores)])
    candidates = np.concatenate([[0.0], finite, [np.inf]])
    best_t, best_acc = None, -1.0
    for t in candidates[::-1]:
        pred = np.where(_use_independent(scores, t), pred_ind, pred_dep)
        acc = float(np.mean(pred == y))
        if acc > best_acc:
            best_t, best_acc = float(t), acc
    return best_t, best_acc


class AdaptiveDTWClassifier(BaseEstimator, ClassifierMixin):
    """Per-query choice between independent and dependent 1-NN DTW.

    Parameters
    ----------
    window : float
        Warping window fraction shared by both strategies.
    threshold : float or None
        Fixed threshold; ``None`` learns it by leave-one-out on the training set.
    score : callable
        ``score(d_I, d_D) -> S``; defaults to :func:`ratio_score`.
    """

    def __init__(self, window=1.0, threshold=None, score=None):
        self.window = window
        self.threshold = threshold
        self.score = score

    def _score(self, d_ind, d_dep):
        return (self.score or ratio_score)(d_ind, d_dep)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 3 or X.shape[0] == 0:
            raise EmptyModel("need at least one (d, m) training case")
        self.independent_ = NearestNeighbourClassifier(INDEPENDENT, self.window).fit(X, y)
        self.dependent_ = NearestNeighbourClassifier(DEPENDENT, self.window).fit(X, y)
        self.classes_ = self.independent_.classes_
        if self.threshold is not None:
            self.threshold_ = float(self.threshold)
            return self
        if X.shape[0] < 2:
            raise EmptyModel("leave-one-out needs at least two training cases")
        yi = self.independent_.y_
        loo = {}
        for name, model in (("ind", self.independent_), ("dep", self.dependent_)):
            D = _distances(X, None, model.spec)
            np.fill_diagonal(D, np.inf)
            idx, dist = nearest_neighbours(D, yi)
            loo[name] = (yi[idx], dist)
        self.loo_scores_ = self._score(loo["ind"][1], loo["dep"][1])
        self.loo_pred_independent_ = loo["ind"][0]
        self.loo_pred_dependent_ = loo["dep"][0]
        self.threshold_, self.loo_accuracy_ = select_threshold(
            self.loo_scores_, loo["ind"][0], loo["dep"][0], yi
        )
        return self

    def predict_proba(self, X):
        if not hasattr(self, "threshold_"):
            raise EmptyModel("model is not fitted")
        idx_i, d_i = self.independent_.kneighbors(X)
        idx_d, d_d = self.dependent_.kneighbors(X)
        use_ind = _use_independent(self._score(d_i, d_d), self.threshold_)
        labels = np.where(use_ind, self.independent_.y_[idx_i], self.dependent_.y_[idx_d])
        proba = np.zeros((labels.size, self.classes_.size))
        proba[np.arange(labels.size), labels] = 1.0
        return proba

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]
