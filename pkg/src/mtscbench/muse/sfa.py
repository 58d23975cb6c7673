"""Symbolic Fourier approximation building blocks.

Sliding-window DFT, ANOVA-F ranking of the real/imaginary Fourier components,
information-gain binning of the selected components (MCB) and word encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import WindowTooLong

__all__ = [
    "SfaTransform",
    "windowed_dft",
    "fourier_components",
    "anova_f",
    "anova_select",
    "ig_binning",
    "mcb_fit",
    "symbolise",
    "encode_words",
    "fit_sfa",
]


def windowed_dft(series, w, drop_mean=True, norm_std=False):
    """DFT coefficients of every length-``w`` sliding window.

    ``series`` is ``(m,)`` or ``(n, m)``. Returns complex coefficients of shape
    ``(..., m - w + 1, n_coef)``: the first ``ceil(w / 2)`` coefficients,
    without coefficient 0 when ``drop_mean`` is set.
    """
    series = np.asarray(series, dtype=np.float64)
    m = series.shape[-1]
    if w < 1 or w > m:
        raise WindowTooLong(f"window length {w} not in [1, {m}]")
    windows = sliding_window_view(series, w, axis=-1)
    if norm_std:
        sd = windows.std(axis=-1, keepdims=True)
        windows = windows / np.where(sd > 1e-8, sd, 1.0)
    coefs = np.fft.rfft(windows, axis=-1)[..., : math.ceil(w / 2)]
    return coefs[..., 1:] if drop_mean else coefs


def fourier_components(coefs):
    """Interleave real and imaginary parts: ``(..., k) complex -> (..., 2k) real``."""
    out = np.empty(coefs.shape[:-1] + (2 * coefs.shape[-1],))
    out[..., 0::2] = coefs.real
    out[..., 1::2] = coefs.imag
    return out


def anova_f(values, labels):
    """One-way ANOVA F statistic of each column of ``values`` (N, p).

    Constant columns give 0; zero within-class variance with non-zero
    between-class variance gives ``inf``.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    classes, inv = np.unique(labels, return_inverse=True)
    c = classes.size
    if c < 2:
        raise ValueError("ANOVA needs at least two classes")
    N = values.shape[0]
    counts = np.bincount(inv, minlength=c).astype(np.float64)
    grand = values.mean(axis=0)
    onehot = np.zeros((c, N))
    onehot[inv, np.arange(N)] = 1.0
    sums = onehot @ values
    means = sums / counts[:, None]
    ss_between = (counts[:, None] * (means - grand) ** 2).sum(axis=0)
    ss_within = ((values - means[inv]) ** 2).sum(axis=0)
    df_b, df_w = c - 1, N - c
    # relative tolerance so float noise on constant columns does not count as signal
    scale = np.maximum((values**2).sum(axis=0), 1e-300)
    ss_between = np.where(ss_between <= 1e-12 * scale, 0.0, ss_between)
    ss_within = np.where(ss_within <= 1e-12 * scale, 0.0, ss_within)
    F = np.zeros(values.shape[1])
    pos_b = ss_between > 0
    zero_w = ss_within == 0
    F[pos_b & zero_w] = np.inf
    ok = pos_b & ~zero_w & (df_w > 0)
    F[ok] = (ss_between[ok] / df_b) / (ss_within[ok] / df_w)
    return F


def anova_select(values, labels, n_select):
    """Indices of the ``n_select`` columns with the largest F (lower index wins ties)."""
    F = anova_f(values, labels)
    order = np.argsort(-F, kind="stable")
    return order[: min(n_select, F.size)]


_TIE = 1e-12


@njit(cache=True)
def _entropy(counts, total):
    if total == 0:
        return 0.0
    h = 0.0
    for v in counts:
        if v > 0:
            p = v / total
            h -= p * np.log2(p)
    return h


@njit(cache=True)
def _best_cut(sv, labels, start, stop, n_classes, n_total):
    """Best split of the sorted segment ``[start, stop)``.

    Returns ``(weighted_gain, position, imbalance)`` where position ``p`` puts
    ``[start, p]`` on the left; position -1 when the segment holds one
    distinct value. Gains within ``_TIE`` count as equal and the more
    balanced cut wins, then the leftmost.
    """
    total = np.zeros(n_classes)
    for i in range(start, stop):
        total[labels[i]] += 1.0
    n = stop - start
    h_parent = _entropy(total, n)
    left = np.zeros(n_classes)
    right = total.copy()
    best_gain, best_pos, best_imb = -np.inf, -1, n + 1
    for i in range(start, stop - 1):
        left[labels[i]] += 1.0
        right[labels[i]] -= 1.0
        if sv[i] == sv[i + 1]:
            continue
        nl = i - start + 1
        gain = h_parent - (nl * _entropy(left, nl) + (n - nl) * _entropy(right, n - nl)) / n
        gain *= n / n_total
        imb = abs(2 * nl - n)
        if gain > best_gain + _TIE or (abs(gain - best_gain) <= _TIE and imb < best_imb):
            best_gain, best_pos, best_imb = gain, i, imb
    return best_gain, best_pos, best_imb


def ig_binning(values, labels, n_bins):
    """Information-gain breakpoints for one component.

    Greedy binary splitting: each step applies the single cut (over all
    current bins) that most reduces class entropy, preferring balanced cuts on
    ties, until ``n_bins`` bins exist. Cuts are midpoints between adjacent
    distinct values; missing cuts are padded with ``+inf``.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    if n_bins < 2:
        raise ValueError("need at least two bins")
    order = np.argsort(values, kind="stable")
    sv = values[order]
    classes, inv = np.unique(labels[order], return_inverse=True)
    inv = inv.astype(np.int64)
    segments = [(0, sv.size)]
    cuts = []
    while len(cuts) < n_bins - 1:
        best = None
        for si, (a, b) in enumerate(segments):
            gain, pos, imb = _best_cut(sv, inv, a, b, classes.size, sv.size)
            if pos < 0:
                continue
            if best is None or gain > best[0] + _TIE or (abs(gain - best[0]) <= _TIE and imb < best[2]):
                best = (gain, pos, imb, si)
        if best is None:
            break
        _, pos, _, si = best
        a, b = segments.pop(si)
        segments[si:si] = [(a, pos + 1), (pos + 1, b)]
        cuts.append((sv[pos] + sv[pos + 1]) / 2)
    cuts = sorted(cuts) + [np.inf] * (n_bins - 1 - len(cuts))
    return np.array(cuts)


def mcb_fit(values, labels, n_bins):
    """Breakpoint matrix ``(p, n_bins - 1)`` for the columns of ``values``."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    return np.stack([ig_binning(values[:, j], labels, n_bins) for j in range(values.shape[1])])


def symbolise(values, breakpoints):
    """Symbol per value: the number of breakpoints strictly below it."""
    values = np.asarray(values, dtype=np.float64)
    out = np.empty(values.shape, dtype=np.int64)
    for j in range(breakpoints.shape[0]):
        out[..., j] = np.searchsorted(breakpoints[j], values[..., j], side="left")
    return out


def encode_words(symbols, alphabet_size):
    """Pack ``(..., l)`` symbols into integers, first symbol most significant."""
    symbols = np.asarray(symbols, dtype=np.int64)
    words = np.zeros(symbols.shape[:-1], dtype=np.int64)
    for j in range(symbols.shape[-1]):
        words = words * alphabet_size + symbols[..., j]
    return words


def word_string(word, word_length, alphabet_size):
    letters = []
    for _ in range(word_length):
        word, s = divmod(word, alphabet_size)
        letters.append(chr(ord("a") + s))
    return "".join(reversed(letters))


@dataclass(frozen=True)
class SfaTransform:
    """A fitted SFA transform for one (source series, window length) pair."""

    dimension: int
    derivative: bool
    window: int
    components: np.ndarray
    breakpoints: np.ndarray
    alphabet_size: int
    drop_mean: bool = True
    norm_std: bool = False

    @property
    def word_length(self):
        return self.components.size

    @property
    def n_words(self):
        return self.alphabet_size**self.word_length

    def words(self, series):
        """Word index of every sliding window: ``(n, m)`` -> ``(n, m - w + 1)``."""
        comps = fourier_components(windowed_dft(series, self.window, self.drop_mean, self.norm_std))
        return encode_words(symbolise(comps[..., self.components], self.breakpoints), self.alphabet_size)


def fit_sfa(series, labels, window, word_length, alphabet_size, dimension=0,
            derivative=False, drop_mean=True, norm_std=False):
    """Fit coefficient selection and breakpoints on all windows of ``series`` (n, m)."""
    series = np.asarray(series, dtype=np.float64)
    comps = fourier_components(windowed_dft(series, window, drop_mean, norm_std))
    n, nw, p = comps.shape
    flat = comps.reshape(n * nw, p)
    win_labels = np.repeat(np.asarray(labels), nw)
    sel = anova_select(flat, win_labels, word_length)
    B = mcb_fit(flat[:, sel], win_labels, alphabet_size)
    transform = SfaTransform(dimension, derivative, window, sel, B, alphabet_size, drop_mean, norm_std)
    words = encode_words(symbolise(comps[..., sel], B), alphabet_size)
    return transform, words
