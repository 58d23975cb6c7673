"""Windowed dynamic time warping for univariate and multivariate series.

All distances accumulate squared differences and are returned without a
square root. The warping window is a Sakoe-Chiba band: with window fraction
``r`` and series length ``m`` a cell ``(i, j)`` is admissible iff
``|i - j| < max(ceil(r * m), 1)``. Hence ``r = 1`` is unconstrained DTW and
``r = 0`` only admits the diagonal (lock-step squared Euclidean).

Multivariate cases are ``(d, m)`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import DimensionMismatch, LengthMismatch

__all__ = [
    "DistanceSpec",
    "window_width",
    "dtw_univariate",
    "dtw_independent",
    "dtw_dependent",
    "euclidean_dependent",
    "dtw_cost_matrix",
    "pairwise_distances",
]

INDEPENDENT = "independent"
DEPENDENT = "dependent"
EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class DistanceSpec:
    strategy: str = INDEPENDENT
    window: float = 1.0

    def __post_init__(self):
        if self.strategy not in (INDEPENDENT, DEPENDENT, EUCLIDEAN):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not 0.0 <= self.window <= 1.0:
            raise ValueError("window fraction must lie in [0, 1]")

    def __call__(self, a, b):
        if self.strategy == INDEPENDENT:
            return dtw_independent(a, b, self.window)
        if self.strategy == DEPENDENT:
            return dtw_dependent(a, b, self.window)
        return euclidean_dependent(a, b)


def window_width(m: int, r: float) -> int:
    if not 0.0 <= r <= 1.0:
        raise ValueError("window fraction must lie in [0, 1]")
    return max(int(math.ceil(r * m)), 1)


# -- kernels -------------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _dtw_1d(a, b, w):
    # rows/columns shifted by one; index 0 is the +inf boundary (0 at the origin)
    m = a.shape[0]
    inf = np.inf
    prev = np.full(m + 1, inf)
    curr = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, m + 1):
        lo = max(1, i - w + 1)
        hi = min(m, i + w - 1)
        curr[lo - 1] = inf
        ai = a[i - 1]
        left = inf
        for j in range(lo, hi + 1):
            diff = ai - b[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if left < best:
                best = left
            left = diff * diff + best
            curr[j] = left
        if hi < m:
            curr[hi + 1] = inf
        prev, curr = curr, prev
    return prev[m]


@numba.njit(cache=True, nogil=True)
def _dtw_kernel(a, b, w):
    """DTW over (d, m) cases with pointwise cost summed over the d rows."""
    d, m = a.shape
    if d == 1:
        return _dtw_1d(a[0], b[0], w)
    at = np.ascontiguousarray(a.T)
    bt = np.ascontiguousarray(b.T)
    inf = np.inf
    prev = np.full(m + 1, inf)
    curr = np.full(m + 1, inf)
    prev[0] = 0.0
    for i in range(1, m + 1):
        lo = max(1, i - w + 1)
        hi = min(m, i + w - 1)
        curr[lo - 1] = inf
        left = inf
        for j in range(lo, hi + 1):
            cost = 0.0
            for k in range(d):
                diff = at[i - 1, k] - bt[j - 1, k]
                cost += diff * diff
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if left < best:
                best = left
            left = cost + best
            curr[j] = left
        if hi < m:
            curr[hi + 1] = inf
        prev, curr = curr, prev
    return prev[m]


@numba.njit(cache=True, nogil=True)
def _dtw_independent_kernel(a, b, w):
    d = a.shape[0]
    total = 0.0
    for k in range(d):
        total += _dtw_1d(a[k], b[k], w)
    return total


@numba.njit(cache=True, nogil=True)
def _full_matrix_kernel(a, b, w):
    d, m = a.shape
    D = np.full((m, m), np.inf)
    for i in range(m):
        for j in range(max(0, i - w + 1), min(m, i + w)):
            cost = 0.0
            for k in range(d):
                diff = a[k, i] - b[k, j]
                cost += diff * diff
            if i == 0 and j == 0:
                D[i, j] = cost
                continue
            best = np.inf
            if i > 0:
                best = min(best, D[i - 1, j])
            if j > 0:
                best = min(best, D[i, j - 1])
            if i > 0 and j > 0:
                best = min(best, D[i - 1, j - 1])
            D[i, j] = cost + best
    return D


@numba.njit(cache=True, nogil=True)
def _euclidean_kernel(a, b):
    total = 0.0
    d, m = a.shape
    for k in range(d):
        for i in range(m):
            diff = a[k, i] - b[k, i]
            total += diff * diff
    return total


@numba.njit(cache=True, parallel=True)
def _pairwise_kernel(A, B, w, mode, symmetric):
    # mode: 0 independent, 1 dependent, 2 euclidean
    n, nb = A.shape[0], B.shape[0]
    out = np.zeros((n, nb))
    for i in numba.prange(n):
        start = i + 1 if symmetric else 0
        for j in range(start, nb):
            if mode == 0:
                v = _dtw_independent_kernel(A[i], B[j], w)
            elif mode == 1:
                v = _dtw_kernel(A[i], B[j], w)
            else:
                v = _euclidean_kernel(A[i], B[j])
            out[i, j] = v
    if symmetric:
        for i in range(n):
            for j in range(i + 1, nb):
                out[j, i] = out[i, j]
    return out


# -- public API ----------------------------------------------------------------

def _as_pair(a, b, multivariate):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if multivariate:
        if a.ndim == 1:
            a = a[None, :]
        if b.ndim == 1:
            b = b[None, :]
        if a.ndim != 2 or b.ndim != 2:
            raise DimensionMismatch("cases must be (d, m) arrays")
        if a.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"{a.shape[0]} vs {b.shape[0]} dimensions")
    elif a.ndim != 1 or b.ndim != 1:
        raise LengthMismatch("univariate DTW expects 1-d sequences")
    if a.shape[-1] != b.shape[-1]:
        raise LengthMismatch(f"series lengths {a.shape[-1]} and {b.shape[-1]} differ")
    if a.shape[-1] < 1:
        raise LengthMismatch("series must be non-empty")
    return a, b


def dtw_univariate(a, b, r: float = 1.0) -> float:
    a, b = _as_pair(a, b, multivariate=False)
    return float(_dtw_kernel(a[None, :], b[None, :], window_width(a.size, r)))


def dtw_independent(a, b, r: float = 1.0) -> float:
    """Sum of per-dimension DTW distances."""
    a, b = _as_pair(a, b, multivariate=True)
    return float(_dtw_independent_kernel(a, b, window_width(a.shape[1], r)))


def dtw_dependent(a, b, r: float = 1.0) -> float:
    """Single DTW whose pointwise cost is the squared distance between d-vectors."""
    a, b = _as_pair(a, b, multivariate=True)
    return float(_dtw_kernel(a, b, window_width(a.shape[1], r)))


def euclidean_dependent(a, b) -> float:
    a, b = _as_pair(a, b, multivariate=True)
    return float(_euclidean_kernel(a, b))


def dtw_cost_matrix(a, b, r: float = 1.0) -> np.ndarray:
    """Full accumulated-cost matrix (dependent cost); +inf outside the band.

    Quadratic memory: meant for debugging and small inputs.
    """
    a, b = _as_pair(a, b, multivariate=True)
    return _full_matrix_kernel(a, b, window_width(a.shape[1], r))


_MODES = {INDEPENDENT: 0, DEPENDENT: 1, EUCLIDEAN: 2}


def pairwise_distances(A, B=None, spec: DistanceSpec = DistanceSpec()) -> np.ndarray:
    """Distance matrix between the cases of ``A`` (n, d, m) and ``B`` (nb, d, m).

    With ``B=None`` the symmetric train-train matrix is computed once per pair
    and has a zero diagonal.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    symmetric = B is None
    B = A if symmetric else np.ascontiguousarray(B, dtype=np.float64)
    if A.ndim != 3 or B.ndim != 3:
        raise DimensionMismatch("expected (n, d, m) arrays")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} vs {B.shape[1]} dimensions")
    if A.shape[2] != B.shape[2]:
        raise LengthMismatch(f"series lengths {A.shape[2]} and {B.shape[2]} differ")
    w = window_width(A.shape[2], spec.window)
    return _pairwise_kernel(A, B, w, _MODES[spec.strategy], symmetric)
