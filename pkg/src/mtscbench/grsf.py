"""Generalized random shapelet forest.

Each tree is grown on a bootstrap sample. At every internal node one
dimension is drawn at random and ``n_shapelets`` candidate shapelets are cut
from randomly chosen in-node cases of that dimension (random length in
``[min_length, max_length]``, random start). The candidate/threshold pair
with the largest entropy reduction is kept; cases whose shapelet distance is
``<= threshold`` go left. Growth stops when a node is pure or holds fewer
than three cases. The forest averages the leaf class distributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .budget import checkpoint
from .exceptions import EmptyModel, InvalidLengthBounds, ShapeMismatch, ShapeletTooLong

__all__ = [
    "Shapelet",
    "ShapeletTreeNode",
    "RandomShapeletForest",
    "shapelet_distance",
    "shapelet_distances",
    "best_split",
    "information_gain",
    "sample_shapelet",
    "build_tree",
    "tree_predict_proba",
]

FORMAT_NAME = "mtscbench.shapelet-forest"
FORMAT_VERSION = 1
MIN_SPLIT = 3


@numba.njit(cache=True, nogil=True)
def _min_dist_raw(series, s):
    n, m = series.shape
    L = s.shape[0]
    out = np.empty(n)
    for c in range(n):
        best = np.inf
        for j in range(m - L + 1):
            acc = 0.0
            for i in range(L):
                diff = s[i] - series[c, j + i]
                acc += diff * diff
                if acc >= best:
                    break
            if acc < best:
                best = acc
        out[c] = best / L
    return out


@numba.njit(cache=True, nogil=True)
def _min_dist_znorm(series, s):
    n, m = series.shape
    L = s.shape[0]
    mu = s.mean()
    sd = s.std()
    zs = (s - mu) / sd if sd > 1e-8 else np.zeros(L)
    out = np.empty(n)
    for c in range(n):
        best = np.inf
        for j in range(m - L + 1):
            w = series[c, j : j + L]
            wm = w.mean()
            ws = w.std()
            acc = 0.0
            for i in range(L):
                zw = (w[i] - wm) / ws if ws > 1e-8 else 0.0
                diff = zs[i] - zw
                acc += diff * diff
            if acc / L < best:
                best = acc / L
        out[c] = best
    return out


@dataclass(frozen=True)
class Shapelet:
    dimension: int
    values: np.ndarray
    case: int = -1
    start: int = -1

    @property
    def length(self):
        return self.values.shape[0]


def shapelet_distances(shapelet: Shapelet, X, znorm=False) -> np.ndarray:
    """Minimum length-normalised squared distance of ``shapelet`` to each case of X (n, d, m)."""
    X = np.asarray(X, dtype=np.float64)
    if shapelet.length > X.shape[2]:
        raise ShapeletTooLong(f"shapelet of length {shapelet.length} exceeds m={X.shape[2]}")
    series = np.ascontiguousarray(X[:, shapelet.dimension, :])
    s = np.ascontiguousarray(shapelet.values, dtype=np.float64)
    return (_min_dist_znorm if znorm else _min_dist_raw)(series, s)


def shapelet_distance(shapelet: Shapelet, case, znorm=False) -> float:
    case = np.asarray(case, dtype=np.float64)
    return float(shapelet_distances(shapelet, case[None], znorm)[0])


def _entropy(counts):
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logs).sum(axis=-1)


def information_gain(parent_counts, left_counts, right_counts) -> float:
    parent = np.asarray(parent_counts, dtype=np.float64)
    left = np.asarray(left_counts, dtype=np.float64)
    right = np.asarray(right_counts, dtype=np.float64)
    n = parent.sum()
    return float(
        _entropy(parent) - left.sum() / n * _entropy(left) - right.sum() / n * _entropy(right)
    )


def best_split(dist, y, n_classes):
    """Best midpoint threshold on ``dist`` by information gain.

    Returns ``(gain, threshold)``; ``(-inf, nan)`` when every distance is equal.
    Ties keep the smallest threshold.
    """
    dist = np.asarray(dist, dtype=np.float64)
    order = np.argsort(dist, kind="stable")
    ds = dist[order]
    ys = np.asarray(y)[order]
    valid = np.flatnonzero(ds[:-1] < ds[1:])
    if valid.size == 0:
        return -np.inf, np.nan
    onehot = np.zeros((ys.size, n_classes))
    onehot[np.arange(ys.size), ys] = 1.0
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    left = cum[valid]
    right = total - left
    n = ys.size
    nl = (valid + 1) / n
    gains = _entropy(total) - nl * _entropy(left) - (1 - nl) * _entropy(right)
    i = int(np.argmax(gains))
    pos = valid[i]
    return float(gains[i]), float((ds[pos] + ds[pos + 1]) / 2)


def sample_shapelet(X, cases, dimension, min_length, max_length, rng) -> Shapelet:
    """Cut a random shapelet of ``dimension`` from one of ``cases``.

    The length is uniform on ``[min_length, max_length]``; the 0-based start is
    uniform on ``[0, m - L - 1]`` (``0`` when ``L == m``).
    """
    m = X.shape[2]
    case = int(cases[rng.integers(len(cases))])
    length = int(rng.integers(min_length, max_length + 1))
    start = int(rng.integers(0, max(m - length, 1)))
    values = np.array(X[case, dimension, start : start + length])
    return Shapelet(dimension, values, case, start)


@dataclass
class ShapeletTreeNode:
    distribution: np.ndarray | None = None
    shapelet: Shapelet | None = None
    threshold: float = math.nan
    left: "ShapeletTreeNode | None" = None
    right: "ShapeletTreeNode | None" = None
    n_cases: int = 0
    gain: float = math.nan
    candidate_gains: list = field(default_factory=list)

    @property
    def is_leaf(self):
        return self.shapelet is None

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend((node.right, node.left))

    def to_dict(self):
        if self.is_leaf:
            return {"n": self.n_cases, "leaf": self.distribution.tolist()}
        s = self.shapelet
        return {
            "n": self.n_cases,
            "gain": self.gain,
            "threshold": self.threshold,
            "dimension": s.dimension,
            "case": s.case,
            "start": s.start,
            "values": s.values.tolist(),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        if "leaf" in d:
            return cls(distribution=np.array(d["leaf"]), n_cases=d["n"])
        shp = Shapelet(d["dimension"], np.array(d["values"]), d["case"], d["start"])
        return cls(
            shapelet=shp,
            threshold=d["threshold"],
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
            n_cases=d["n"],
            gain=d["gain"],
        )


def _leaf(y, n_classes):
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    return ShapeletTreeNode(distribution=counts / counts.sum(), n_cases=int(y.size))


def build_tree(X, y, n_classes, min_length, max_length, n_shapelets, rng, znorm=False):
    """Grow one random shapelet tree on (X, y); ``y`` holds class indices."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, d, m = X.shape
    if n < 1:
        raise EmptyModel("cannot grow a tree on an empty sample")
    if not 1 <= min_length <= max_length <= m:
        raise InvalidLengthBounds(f"need 1 <= l <= u <= m, got l={min_length} u={max_length} m={m}")
    root = ShapeletTreeNode()
    stack = [(root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        yi = y[idx]
        node.n_cases = int(idx.size)
        if idx.size < MIN_SPLIT or np.all(yi == yi[0]):
            node.distribution = _leaf(yi, n_classes).distribution
            continue
        dim = int(rng.integers(d))
        best = (-np.inf, np.nan, None, None)
        gains = []
        for _ in range(n_shapelets):
            shp = sample_shapelet(X, idx, dim, min_length, max_length, rng)
            dist = shapelet_distances(shp, X[idx], znorm)
            gain, t = best_split(dist, yi, n_classes)
            gains.append(gain)
            if gain > best[0]:
                best = (gain, t, shp, dist)
        gain, t, shp, dist = best
        if shp is None:
            node.distribution = _leaf(yi, n_classes).distribution
            continue
        node.shapelet, node.threshold, node.gain = shp, t, gain
        node.candidate_gains = gains
        node.left, node.right = ShapeletTreeNode(), ShapeletTreeNode()
        go_left = dist <= t
        stack.append((node.right, idx[~go_left]))
        stack.append((node.left, idx[go_left]))
    return root


def tree_predict_proba(root: ShapeletTreeNode, X, znorm=False) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    n_classes = None
    out = None
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            if out is None:
                n_classes = node.distribution.size
                out = np.zeros((X.shape[0], n_classes))
            out[idx] = node.distribution
            continue
        dist = shapelet_distances(node.shapelet, X[idx], znorm)
        go_left = dist <= node.threshold
        stack.append((node.right, idx[~go_left]))
        stack.append((node.left, idx[go_left]))
    return out


def default_length_bounds(m, lower=0.025, upper=0.7):
    lo = max(1, math.ceil(lower * m))
    hi = min(m, max(lo, math.ceil(upper * m)))
    return lo, hi


class RandomShapeletForest(BaseEstimator, ClassifierMixin):
    """Bagged ensemble of random shapelet trees.

    Parameters
    ----------
    n_estimators : int
        Number of trees ``p``.
    n_shapelets : int
        Candidate shapelets sampled per node ``r``.
    min_length, max_length : int or None
        Shapelet length bounds; ``None`` uses 2.5% and 70% of the series length.
    znorm : bool
        Compare z-normalised shapelets and windows instead of raw values.
    random_state : int
    """

    def __init__(
        self,
        n_estimators=100,
        n_shapelets=10,
        min_length=None,
        max_length=None,
        znorm=False,
        random_state=0,
    ):
        self.n_estimators = n_estimators
        self.n_shapelets = n_shapelets
        self.min_length = min_length
        self.max_length = max_length
        self.znorm = znorm
        self.random_state = random_state

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3 or X.shape[0] == 0:
            raise EmptyModel("need at least one (d, m) training case")
        if self.n_estimators < 1 or self.n_shapelets < 1:
            raise ValueError("n_estimators and n_shapelets must be positive")
        self.classes_, yi = np.unique(np.asarray(y), return_inverse=True)
        n, _, m = X.shape
        lo, hi = default_length_bounds(m)
        self.min_length_ = self.min_length or lo
        self.max_length_ = self.max_length or max(hi, self.min_length_)
        if not 1 <= self.min_length_ <= self.max_length_ <= m:
            raise InvalidLengthBounds(
                f"need 1 <= l <= u <= m, got l={self.min_length_} u={self.max_length_} m={m}"
            )
        seqs = np.random.SeedSequence(self.random_state).spawn(self.n_estimators)
        self.trees_ = []
        self.bootstrap_indices_ = []
        for seq in seqs:
            checkpoint()
            rng = np.random.default_rng(seq)
            boot = rng.integers(0, n, size=n)
            tree = build_tree(
                X[boot],
                yi[boot],
                self.classes_.size,
                self.min_length_,
                self.max_length_,
                self.n_shapelets,
                rng,
                self.znorm,
            )
            self.trees_.append(tree)
            self.bootstrap_indices_.append(boot)
        self.shape_ = X.shape[1:]
        return self

    def predict_proba(self, X):
        if not hasattr(self, "trees_"):
            raise EmptyModel("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[1:] != self.shape_:
            raise ShapeMismatch(f"expected cases of shape {self.shape_}, got {X.shape[1:]}")
        out = np.zeros((X.shape[0], self.classes_.size))
        for tree in self.trees_:
            out += tree_predict_proba(tree, X, self.znorm)
        return out / len(self.trees_)

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]

    # -- persistence ---------------------------------------------------------

    def to_dict(self, provenance=None):
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "shape": list(self.shape_),
            "length_bounds": [self.min_length_, self.max_length_],
            "provenance": provenance or {},
            "trees": [t.to_dict() for t in self.trees_],
        }

    def save(self, path, provenance=None):
        with open(path, "w") as fh:
            json.dump(self.to_dict(provenance), fh)

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != FORMAT_NAME:
            raise ValueError(f"not a shapelet forest file: {d.get('format')!r}")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported forest format version {d.get('version')}")
        forest = cls(**d["params"])
        forest.classes_ = np.array(d["classes"])
        forest.shape_ = tuple(d["shape"])
        forest.min_length_, forest.max_length_ = d["length_bounds"]
        forest.trees_ = [ShapeletTreeNode.from_dict(t) for t in d["trees"]]
        forest.provenance_ = d.get("provenance", {})
        return forest

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
