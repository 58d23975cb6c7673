"""Accuracy metrics and multi-classifier, multi-dataset comparisons.

Classifiers are ranked per dataset (1 = most accurate, mid-ranks for ties),
compared pairwise with the two-sided Wilcoxon signed-rank test, and grouped
into cliques of classifiers that are not significantly different after a
Holm step-down correction.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm, rankdata

from .exceptions import EmptyPredictions, IncompleteTable, TooFewPairs

__all__ = [
    "accuracy",
    "balanced_accuracy",
    "ResultsTable",
    "average_ranks",
    "wilcoxon_signed_rank",
    "pairwise_pvalues",
    "holm_reject",
    "holm_thresholds",
    "holm_cliques",
    "CliqueReport",
    "compare",
    "win_loss",
]

EXACT_MAX_N = 20
MIN_PAIRS = 5


def _pair(y_true, y_pred):
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.size == 0:
        raise EmptyPredictions("no predictions to score")
    if y_true.shape != y_pred.shape:
        raise ValueError("true and predicted labels differ in length")
    return y_true, y_pred


def accuracy(y_true, y_pred):
    """Fraction of predictions equal to the true label."""
    y_true, y_pred = _pair(y_true, y_pred)
    return float(np.mean(y_true == y_pred))


def balanced_accuracy(y_true, y_pred):
    """Unweighted mean of per-class recall over the classes present in ``y_true``."""
    y_true, y_pred = _pair(y_true, y_pred)
    recalls = [np.mean(y_pred[y_true == c] == c) for c in np.unique(y_true)]
    return float(np.mean(recalls))


@dataclass(frozen=True)
class ResultsTable:
    """Accuracy of each classifier (rows) on each dataset (columns)."""

    classifiers: tuple
    datasets: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.classifiers), len(self.datasets)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.classifiers)} classifiers x {len(self.datasets)} datasets"
            )
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "values", values)

    @property
    def is_complete(self):
        return bool(np.all(np.isfinite(self.values)))

    def row(self, classifier):
        return self.values[self.classifiers.index(classifier)]

    def select(self, classifiers=None, datasets=None):
        ci = [self.classifiers.index(c) for c in (classifiers or self.classifiers)]
        di = [self.datasets.index(d) for d in (datasets or self.datasets)]
        return ResultsTable(
            tuple(self.classifiers[i] for i in ci),
            tuple(self.datasets[j] for j in di),
            self.values[np.ix_(ci, di)],
        )

    def complete_classifiers(self):
        """Restrict to classifiers with a value on every dataset."""
        keep = [c for c, r in zip(self.classifiers, self.values) if np.all(np.isfinite(r))]
        return self.select(classifiers=keep)

    def complete_datasets(self):
        """Restrict to datasets every classifier has a value for."""
        keep = [d for d, col in zip(self.datasets, self.values.T) if np.all(np.isfinite(col))]
        return self.select(datasets=keep)

    def to_csv(self, stream=None):
        """Write as CSV: header ``classifier,<dataset codes>``; empty cells are missing."""
        out = stream or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["classifier", *self.datasets])
        for name, row in zip(self.classifiers, self.values):
            w.writerow([name, *("" if not np.isfinite(v) else repr(float(v)) for v in row)])
        return out.getvalue() if stream is None else None

    @classmethod
    def from_csv(cls, stream):
        if isinstance(stream, str):
            stream = io.StringIO(stream)
        rows = [r for r in csv.reader(stream) if r]
        if not rows:
            raise ValueError("empty results CSV")
        header, body = rows[0], rows[1:]
        datasets = tuple(h.strip() for h in header[1:])
        names, values = [], []
        for r in body:
            if len(r) != len(header):
                raise ValueError(f"row for {r[0]!r} has {len(r) - 1} cells, expected {len(datasets)}")
            names.append(r[0].strip())
            values.append([float(v) if v.strip() else np.nan for v in r[1:]])
        return cls(tuple(names), datasets, np.array(values, dtype=np.float64).reshape(len(names), -1))


def average_ranks(table):
    """Mean rank of each classifier over datasets; rank 1 is the most accurate."""
    if not table.is_complete:
        raise IncompleteTable("ranks need a value for every classifier on every dataset")
    ranks = rankdata(-table.values, axis=0, method="average")
    return ranks.mean(axis=1)


def _exact_p(abs_ranks2, w2):
    """Two-sided exact p from doubled (integer) ranks and doubled W+."""
    total = int(abs_ranks2.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in abs_ranks2:
        r = int(r)
        counts[r:] = counts[r:] + counts[: total + 1 - r].copy()
    sums = np.arange(total + 1)
    observed = abs(2 * w2 - total)
    extreme = np.abs(2 * sums - total) >= observed
    return float(counts[extreme].sum() / counts.sum())


def wilcoxon_signed_rank(x, y, exact_max_n=EXACT_MAX_N):
    """Two-sided Wilcoxon signed-rank p-value for paired samples.

    Zero differences are discarded and tied absolute differences share
    mid-ranks. With at most ``exact_max_n`` pairs the p-value is
    ``P(|W+ - mu| >= |w+ - mu|)`` under the exact sign-flip distribution;
    otherwise a tie-corrected normal approximation with continuity
    correction is used.
    """
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    d = d[d != 0]
    n = d.size
    if n < MIN_PAIRS:
        raise TooFewPairs(f"{n} non-zero differences, need at least {MIN_PAIRS}")
    ranks = rankdata(np.abs(d), method="average")
    w_plus = ranks[d > 0].sum()
    if n <= exact_max_n:
        r2 = np.rint(2 * ranks).astype(np.int64)
        return _exact_p(r2, int(round(2 * w_plus)))
    mu = n * (n + 1) / 4
    _, t = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - np.sum(t**3 - t) / 48
    z = max(abs(w_plus - mu) - 0.5, 0.0) / math.sqrt(var)
    return float(min(1.0, 2 * norm.sf(z)))


def pairwise_pvalues(table):
    """Symmetric matrix of Wilcoxon p-values (1 on the diagonal and for identical rows)."""
    k = len(table.classifiers)
    P = np.ones((k, k))
    for i, j in itertools.combinations(range(k), 2):
        try:
            p = wilcoxon_signed_rank(table.values[i], table.values[j])
        except TooFewPairs:
            p = 1.0
        P[i, j] = P[j, i] = p
    return P


def holm_reject(pvalues, alpha=0.05):
    """Holm step-down decisions for a 1-D array of p-values (True = rejected)."""
    p = np.asarray(pvalues, dtype=np.float64)
    h = p.size
    reject = np.zeros(h, dtype=bool)
    for step, idx in enumerate(np.argsort(p, kind="stable")):
        if p[idx] > alpha / (h - step):
            break
        reject[idx] = True
    return reject


def holm_thresholds(h, alpha=0.05):
    """Step-down thresholds ``alpha / (h - i + 1)`` for ``i = 1..h``."""
    return alpha / (h - np.arange(h))


@dataclass(frozen=True)
class CliqueReport:
    """Outcome of a multiple-comparison analysis.

    ``order`` lists classifier indices by increasing average rank; cliques
    are tuples of classifier names in that order.
    """

    classifiers: tuple
    ranks: np.ndarray
    pvalues: np.ndarray
    rejected: np.ndarray
    alpha: float
    family: str
    cliques: tuple

    @property
    def order(self):
        return np.argsort(self.ranks, kind="stable")

    def is_different(self, a, b):
        i, j = self.classifiers.index(a), self.classifiers.index(b)
        return bool(self.rejected[i, j])

    def in_same_clique(self, names):
        names = set(names)
        return any(names <= set(c) for c in self.cliques)

    def to_csv(self, stream=None):
        """Ranks, pairwise p-values, decisions and clique membership as CSV."""
        out = stream or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["section", "a", "b", "value"])
        for i in self.order:
            w.writerow(["rank", self.classifiers[i], "", repr(float(self.ranks[i]))])
        for i, j in itertools.combinations(range(len(self.classifiers)), 2):
            a, b = self.classifiers[i], self.classifiers[j]
            w.writerow(["pvalue", a, b, repr(float(self.pvalues[i, j]))])
            w.writerow(["rejected", a, b, int(self.rejected[i, j])])
        for ci, clique in enumerate(self.cliques):
            for name in clique:
                w.writerow(["clique", ci, name, ""])
        return out.getvalue() if stream is None else None


def _decisions(P, alpha, family):
    k = P.shape[0]
    R = np.zeros((k, k), dtype=bool)
    pairs = list(itertools.combinations(range(k), 2))
    if not pairs:
        return R
    if family == "global":
        rej = holm_reject([P[i, j] for i, j in pairs], alpha)
        for (i, j), r in zip(pairs, rej):
            R[i, j] = R[j, i] = r
    elif family == "per_classifier":
        # a pair counts as different only when both classifiers' families reject it
        votes = np.zeros((k, k), dtype=int)
        for i in range(k):
            others = [j for j in range(k) if j != i]
            for j, r in zip(others, holm_reject(P[i, others], alpha)):
                votes[i, j] += r
                votes[j, i] += r
        R = votes == 2
    elif family == "none":
        R = P <= alpha
        np.fill_diagonal(R, False)
    else:
        raise ValueError(f"unknown Holm family {family!r}")
    return R


def _cliques(order, rejected, names):
    """Maximal runs of consecutive (rank-ordered) classifiers with no rejected pair."""
    order = list(order)
    runs = []
    for start in range(len(order)):
        end = start
        while end + 1 < len(order) and not any(rejected[order[end + 1], order[t]] for t in range(start, end + 1)):
            end += 1
        runs.append((start, end))
    maximal = [r for r in runs if not any(o != r and o[0] <= r[0] and r[1] <= o[1] for o in runs)]
    return tuple(tuple(names[order[t]] for t in range(a, b + 1)) for a, b in maximal)


def holm_cliques(pvalues, ranks, classifiers=None, alpha=0.05, family="global"):
    """Holm-corrected pairwise decisions and cliques.

    Parameters
    ----------
    pvalues : (k, k) array
        Symmetric pairwise p-values.
    ranks : (k,) array
        Average ranks, used to order classifiers.
    family : {"global", "per_classifier", "none"}
        ``"global"`` corrects all ``k(k-1)/2`` hypotheses together.
        ``"per_classifier"`` corrects each classifier's ``k-1`` comparisons
        separately and declares a pair different only when both sides reject.
        ``"none"`` applies no correction (each pair tested at ``alpha``).
    """
    P = np.asarray(pvalues, dtype=np.float64)
    ranks = np.asarray(ranks, dtype=np.float64)
    k = P.shape[0]
    if P.shape != (k, k) or not np.allclose(P, P.T):
        raise ValueError("p-value matrix must be square and symmetric")
    names = tuple(classifiers) if classifiers is not None else tuple(str(i) for i in range(k))
    R = _decisions(P, alpha, family)
    order = np.argsort(ranks, kind="stable")
    return CliqueReport(names, ranks, P, R, alpha, family, _cliques(order, R, names))


def compare(table, alpha=0.05, family="global"):
    """Ranks, pairwise tests and cliques for a complete :class:`ResultsTable`."""
    ranks = average_ranks(table)
    return holm_cliques(pairwise_pvalues(table), ranks, table.classifiers, alpha, family)


def win_loss(a, b):
    """``(wins, losses, ties)`` of accuracies ``a`` against ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return int(np.sum(a > b)), int(np.sum(a < b)), int(np.sum(a == b))
