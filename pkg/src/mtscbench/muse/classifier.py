"""WEASEL+MUSE dictionary classifier.

Every dimension (and, optionally, its first-difference series) is turned into
SFA words for every window length from ``min_window`` to ``w_max``. Word
counts form a sparse bag-of-words histogram per case, keyed by
``(dimension, window, word, derivative)``. Features passing a chi-squared
filter feed an L2-regularised multinomial logistic model.
"""

from __future__ import annotations

import csv
import json
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin

from ..budget import checkpoint
from ..exceptions import EmptyModel, ShapeMismatch
from .logistic import LinearModel, fit_logistic
from .sfa import SfaTransform, fit_sfa, word_string

__all__ = ["FeatureKey", "MUSE", "chi2_scores", "chi2_filter"]

FORMAT_NAME = "mtscbench.muse"
FORMAT_VERSION = 1


class FeatureKey(NamedTuple):
    dimension: int
    window: int
    word: str
    derivative: bool


def chi2_scores(H, y, n_classes=None):
    """Chi-squared statistic of each column of the count matrix ``H``.

    Observed per-class column totals are compared with totals expected when
    the feature is independent of the class (column total times class prior),
    summed over classes.
    """
    H = sp.csr_matrix(H, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    c = int(n_classes if n_classes is not None else y.max() + 1)
    Y = sp.csr_matrix((np.ones(y.size), (y, np.arange(y.size))), shape=(c, y.size))
    observed = np.asarray((Y @ H).todense())
    prior = np.bincount(y, minlength=c) / y.size
    expected = prior[:, None] * np.asarray(H.sum(axis=0)).ravel()[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return terms.sum(axis=0)


def chi2_filter(H, y, threshold=2.0, n_classes=None):
    """Column indices of observed features whose statistic is at least ``threshold``."""
    scores = chi2_scores(H, y, n_classes)
    present = np.asarray(sp.csr_matrix(H).sum(axis=0)).ravel() > 0
    return np.flatnonzero(present & (scores >= threshold))


class MUSE(BaseEstimator, ClassifierMixin):
    """Multivariate bag-of-SFA-words classifier.

    Parameters
    ----------
    word_length : int
        Fourier components kept per window, one symbol each.
    alphabet_size : int
    min_window, max_window : int
        Window lengths range over ``min_window .. min(m, max_window)``.
    drop_mean : bool
        Discard the DFT mean coefficient.
    norm_std : bool
        Divide each window by its standard deviation before the DFT.
    derivatives : bool
        Also use the first-difference series of each dimension.
    chi2_threshold : float
    l2, tol, max_iter
        Logistic regression penalty, gradient tolerance and iteration cap.
    """

    def __init__(self, word_length=4, alphabet_size=4, min_window=4, max_window=350,
                 drop_mean=True, norm_std=False, derivatives=True, chi2_threshold=2.0,
                 l2=1.0, tol=1e-6, max_iter=5000):
        self.word_length = word_length
        self.alphabet_size = alphabet_size
        self.min_window = min_window
        self.max_window = max_window
        self.drop_mean = drop_mean
        self.norm_std = norm_std
        self.derivatives = derivatives
        self.chi2_threshold = chi2_threshold
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter

    # sources are (dimension, derivative) pairs
    def _sources(self, X):
        for k in range(X.shape[1]):
            yield k, False, X[:, k, :]
            if self.derivatives:
                yield k, True, np.diff(X[:, k, :], axis=1)

    def _check_X(self, X, fitted=True):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2 and fitted:
            X = X[None]
        if X.ndim != 3:
            raise ShapeMismatch(f"expected (n, d, m) cases, got shape {X.shape}")
        if fitted and X.shape[1:] != self.shape_:
            raise ShapeMismatch(f"expected cases of shape {self.shape_}, got {X.shape[1:]}")
        return X

    def _counts(self, words, offset, n_words, n):
        flat = (np.arange(n)[:, None] * n_words + words).ravel()
        counts = np.bincount(flat, minlength=n * n_words)
        nz = np.flatnonzero(counts)
        rows, cols = np.divmod(nz, n_words)
        return rows, cols + offset, counts[nz]

    def fit(self, X, y):
        X = self._check_X(X, fitted=False)
        y = np.asarray(y)
        if X.shape[0] == 0:
            raise EmptyModel("need at least one training case")
        self.classes_, yi = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise ValueError("MUSE needs at least two classes")
        n = X.shape[0]
        self.shape_ = X.shape[1:]
        self.transforms_ = []
        offsets = [0]
        rows, cols, vals = [], [], []
        for k, deriv, S in self._sources(X):
            w_max = min(S.shape[1], self.max_window)
            for w in range(self.min_window, w_max + 1):
                checkpoint()
                t, words = fit_sfa(S, yi, w, self.word_length, self.alphabet_size, k, deriv,
                                   self.drop_mean, self.norm_std)
                r, c, v = self._counts(words, offsets[-1], t.n_words, n)
                rows.append(r)
                cols.append(c)
                vals.append(v)
                self.transforms_.append(t)
                offsets.append(offsets[-1] + t.n_words)
        if not self.transforms_:
            raise ShapeMismatch(f"series too short for window length {self.min_window}")
        self.offsets_ = np.array(offsets)
        H = sp.csr_matrix(
            (np.concatenate(vals).astype(np.float64), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, offsets[-1]),
        )
        self.vocabulary_ids_ = chi2_filter(H, yi, self.chi2_threshold, self.classes_.size)
        self.model_ = fit_logistic(H[:, self.vocabulary_ids_], yi, self.classes_.size,
                                   self.l2, self.tol, self.max_iter)
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise EmptyModel("model is not fitted")

    def _histograms(self, X):
        """Sparse ``(n, total key space)`` word counts under the fitted transforms."""
        n = X.shape[0]
        series = {(k, d): S for k, d, S in self._sources(X)}
        rows, cols, vals = [], [], []
        for t, off in zip(self.transforms_, self.offsets_):
            checkpoint()
            words = t.words(series[(t.dimension, t.derivative)])
            r, c, v = self._counts(words, off, t.n_words, n)
            rows.append(r)
            cols.append(c)
            vals.append(v)
        return sp.csr_matrix(
            (np.concatenate(vals).astype(np.float64), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, self.offsets_[-1]),
        )

    def feature_key(self, feature_id):
        """Decode a global feature id into its :class:`FeatureKey`."""
        ti = int(np.searchsorted(self.offsets_, feature_id, side="right") - 1)
        t = self.transforms_[ti]
        word = word_string(int(feature_id - self.offsets_[ti]), t.word_length, t.alphabet_size)
        return FeatureKey(t.dimension, t.window, word, t.derivative)

    @property
    def vocabulary_(self):
        """Ordered mapping feature key -> design-matrix column."""
        self._check_fitted()
        return {self.feature_key(f): i for i, f in enumerate(self.vocabulary_ids_)}

    def transform_case(self, case):
        """Word histogram of one ``(d, m)`` case as ``{FeatureKey: count}``."""
        self._check_fitted()
        H = self._histograms(self._check_X(case)).tocoo()
        return {self.feature_key(f): int(v) for f, v in zip(H.col, H.data)}

    def transform(self, X):
        """Design matrix over the fitted vocabulary; unseen features are dropped."""
        self._check_fitted()
        return self._histograms(self._check_X(X))[:, self.vocabulary_ids_]

    def predict_proba(self, X):
        return self.model_.predict_proba(self.transform(X))

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]

    def dump_histograms(self, X, path):
        """Write per-case histograms as CSV rows ``case,key,count``."""
        self._check_fitted()
        H = self._histograms(self._check_X(X)).tocoo()
        order = np.lexsort((H.col, H.row))
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["case", "key", "count"])
            for i in order:
                key = self.feature_key(H.col[i])
                tag = f"{key.dimension}:{key.window}:{key.word}:{'d' if key.derivative else 'r'}"
                out.writerow([int(H.row[i]), tag, int(H.data[i])])

    def to_dict(self, provenance=None):
        self._check_fitted()
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "shape": list(self.shape_),
            "provenance": provenance or {},
            "transforms": [
                {
                    "dimension": t.dimension,
                    "derivative": t.derivative,
                    "window": t.window,
                    "components": t.components.tolist(),
                    "breakpoints": t.breakpoints.tolist(),
                }
                for t in self.transforms_
            ],
            "vocabulary": self.vocabulary_ids_.tolist(),
            "weights": self.model_.weights.tolist(),
            "bias": self.model_.bias.tolist(),
        }

    def save(self, path, provenance=None):
        with open(path, "w") as fh:
            json.dump(self.to_dict(provenance), fh)

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != FORMAT_NAME:
            raise ValueError(f"not a MUSE model file: {d.get('format')!r}")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported MUSE format version {d.get('version')}")
        model = cls(**d["params"])
        model.classes_ = np.array(d["classes"])
        model.shape_ = tuple(d["shape"])
        model.transforms_ = [
            SfaTransform(t["dimension"], t["derivative"], t["window"],
                         np.array(t["components"], dtype=np.int64),
                         np.array(t["breakpoints"], dtype=np.float64),
                         model.alphabet_size, model.drop_mean, model.norm_std)
            for t in d["transforms"]
        ]
        model.offsets_ = np.concatenate([[0], np.cumsum([t.n_words for t in model.transforms_])])
        model.vocabulary_ids_ = np.array(d["vocabulary"], dtype=np.int64)
        model.model_ = LinearModel(np.array(d["weights"]).reshape(-1, len(d["classes"])),
                                   np.array(d["bias"]), model.l2, model.tol)
        model.provenance_ = d.get("provenance", {})
        return model

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
