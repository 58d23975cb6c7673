"""Dimension-independent ensembles and trivial baselines.

:class:`DimensionEnsembleClassifier` turns any univariate classifier into a
multivariate one by training one copy per dimension and combining the
members' class distributions, either as a plain mean or weighted by an
estimate of each member's training accuracy raised to the fourth power.

Univariate data are passed to members as ``(n, 1, m)`` arrays, so any
classifier in this package can act as a member.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.model_selection import KFold

from .budget import checkpoint
from .exceptions import BudgetExceeded, EmptyModel, MemberFitError, ShapeMismatch

__all__ = [
    "DimensionEnsembleClassifier",
    "MajorityClassClassifier",
    "RandomClassifier",
    "cv_accuracy",
]

MEAN = "mean"
QUALITY_WEIGHTED = "quality_weighted"


def _expand_proba(member, proba, classes):
    """Align a member's ``predict_proba`` columns with ``classes``."""
    if np.array_equal(member.classes_, classes):
        return proba
    out = np.zeros((proba.shape[0], classes.size))
    cols = np.searchsorted(classes, member.classes_)
    out[:, cols] = proba
    return out


def cv_accuracy(estimator, X, y, n_folds=10, seed=0):
    """Shuffled k-fold cross-validated accuracy (folds capped at ``n``)."""
    n_folds = min(n_folds, len(y))
    if n_folds < 2:
        return 0.0
    correct = 0
    for tr, te in KFold(n_folds, shuffle=True, random_state=seed).split(X):
        model = clone(estimator).fit(X[tr], y[tr])
        correct += int(np.sum(model.predict(X[te]) == y[te]))
    return correct / len(y)


def _with_seed(estimator, seed):
    if "random_state" in estimator.get_params(deep=False):
        estimator.set_params(random_state=seed)
    return estimator


class DimensionEnsembleClassifier(BaseEstimator, ClassifierMixin):
    """One univariate member per dimension, distributions combined.

    Parameters
    ----------
    base_estimator : estimator or callable
        Prototype estimator (cloned per dimension) or a factory
        ``factory(seed) -> estimator``.
    combination : {"mean", "quality_weighted"}
    n_folds : int
        Folds of the cross-validation that estimates member quality when the
        member does not expose ``train_quality_``.
    random_state : int
    """

    def __init__(self, base_estimator=None, combination=MEAN, n_folds=10, random_state=0):
        self.base_estimator = base_estimator
        self.combination = combination
        self.n_folds = n_folds
        self.random_state = random_state

    def _make_member(self, seed):
        base = self.base_estimator
        if base is None:
            from .nn import NearestNeighbourClassifier

            base = NearestNeighbourClassifier()
        if isinstance(base, BaseEstimator):
            return _with_seed(clone(base), seed)
        return base(seed)

    def fit(self, X, y):
        if self.combination not in (MEAN, QUALITY_WEIGHTED):
            raise ValueError(f"unknown combination {self.combination!r}")
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 3 or X.shape[0] == 0:
            raise EmptyModel("need at least one (d, m) training case")
        d = X.shape[1]
        self.classes_ = np.unique(y)
        seeds = np.random.SeedSequence(self.random_state).generate_state(d)
        self.members_ = []
        quality = np.ones(d)
        for k in range(d):
            checkpoint()
            Xk = X[:, k : k + 1, :]
            member = self._make_member(int(seeds[k]))
            try:
                member.fit(Xk, y)
                if self.combination == QUALITY_WEIGHTED:
                    q = getattr(member, "train_quality_", None)
                    if q is None:
                        q = cv_accuracy(member, Xk, y, self.n_folds, int(seeds[k]))
                    quality[k] = q
            except (MemberFitError, BudgetExceeded):
                raise
            except Exception as exc:
                raise MemberFitError(k, exc) from exc
            self.members_.append(member)
        if self.combination == QUALITY_WEIGHTED:
            w = quality**4
            self.train_quality_per_dimension_ = quality
        else:
            w = np.ones(d)
        self.weights_ = w / w.sum() if w.sum() > 0 else np.full(d, 1.0 / d)
        self.shape_ = X.shape[1:]
        return self

    def predict_proba(self, X):
        if not hasattr(self, "members_"):
            raise EmptyModel("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[1:] != self.shape_:
            raise ShapeMismatch(f"expected cases of shape {self.shape_}, got {X.shape[1:]}")
        out = np.zeros((X.shape[0], self.classes_.size))
        for k, (member, w) in enumerate(zip(self.members_, self.weights_)):
            if w == 0:
                continue
            proba = member.predict_proba(X[:, k : k + 1, :])
            out += w * _expand_proba(member, proba, self.classes_)
        return out

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class MajorityClassClassifier(BaseEstimator, ClassifierMixin):
    """Always predicts the most frequent training class (lowest on ties)."""

    def fit(self, X, y):
        self.classes_, counts = np.unique(np.asarray(y), return_counts=True)
        if self.classes_.size == 0:
            raise EmptyModel("no training labels")
        self.majority_ = int(np.argmax(counts))
        return self

    def predict_proba(self, X):
        proba = np.zeros((len(X), self.classes_.size))
        proba[:, self.majority_] = 1.0
        return proba

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class RandomClassifier(BaseEstimator, ClassifierMixin):
    """Uniform random guessing over the training classes, seeded.

    Each prediction is a one-hot draw; ``expected_accuracy_`` is ``1 / c``.
    """

    def __init__(self, random_state=0):
        self.random_state = random_state

    def fit(self, X, y):
        self.classes_ = np.unique(np.asarray(y))
        if self.classes_.size == 0:
            raise EmptyModel("no training labels")
        self.expected_accuracy_ = 1.0 / self.classes_.size
        return self

    def predict_proba(self, X):
        rng = np.random.default_rng(self.random_state)
        draws = rng.integers(0, self.classes_.size, size=len(X))
        proba = np.zeros((len(X), self.classes_.size))
        proba[np.arange(len(X)), draws] = 1.0
        return proba

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]
