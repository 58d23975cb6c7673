"""Classifier registry keyed by short names.

Names: ``DTW_I``, ``DTW_D``, ``DTW_A``, ``ED_D``, ``gRSF``, ``MUSE``,
``Majority``, ``Random`` and ``IndepEnsemble(<name>)``, which wraps any other
registered classifier as a per-dimension member.
"""

from __future__ import annotations

import re

from ..dtw import DEPENDENT, EUCLIDEAN, INDEPENDENT
from ..ensemble import DimensionEnsembleClassifier, MajorityClassClassifier, RandomClassifier
from ..grsf import RandomShapeletForest, default_length_bounds
from ..muse import MUSE
from ..nn import AdaptiveDTWClassifier, NearestNeighbourClassifier

__all__ = ["UnknownClassifier", "make_classifier", "estimate_memory", "available"]

_ENSEMBLE = re.compile(r"^IndepEnsemble\((?P<base>.+)\)$")


class UnknownClassifier(KeyError):
    pass


def _seeded(cls):
    def factory(params, seed):
        return cls(**{"random_state": seed, **params})

    return factory


_FACTORIES = {
    "DTW_I": lambda p, s: NearestNeighbourClassifier(INDEPENDENT, **p),
    "DTW_D": lambda p, s: NearestNeighbourClassifier(DEPENDENT, **p),
    "ED_D": lambda p, s: NearestNeighbourClassifier(EUCLIDEAN, **{**p, "window": 0.0}),
    "DTW_A": lambda p, s: AdaptiveDTWClassifier(**p),
    "gRSF": _seeded(RandomShapeletForest),
    "MUSE": lambda p, s: MUSE(**p),
    "Majority": lambda p, s: MajorityClassClassifier(**p),
    "Random": _seeded(RandomClassifier),
}


def available():
    return sorted(_FACTORIES) + ["IndepEnsemble(<name>)"]


def make_classifier(name, params=None, seed=0):
    """Build a classifier instance from its registry name.

    For ``IndepEnsemble(<base>)``, the keys ``combination`` and ``n_folds``
    of ``params`` configure the ensemble and ``base_params`` the members.
    """
    params = dict(params or {})
    m = _ENSEMBLE.match(name)
    if m:
        base = m.group("base").strip()
        base_params = params.pop("base_params", {})
        make_classifier(base, base_params, seed)  # fail early on unknown names

        def factory(member_seed):
            return make_classifier(base, base_params, member_seed)

        return DimensionEnsembleClassifier(factory, random_state=seed, **params)
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise UnknownClassifier(f"unknown classifier {name!r}; choose from {available()}") from None
    try:
        return factory(params, seed)
    except TypeError as exc:
        raise UnknownClassifier(f"bad parameters for {name}: {exc}") from None


def estimate_memory(name, params, n_train, n_test, d, m):
    """Rough peak memory in bytes for fitting and predicting.

    Only used as a pre-flight check against a memory budget.
    """
    params = dict(params or {})
    data = 8 * (n_train + n_test) * d * m
    m_ens = _ENSEMBLE.match(name)
    if m_ens:
        return data + estimate_memory(m_ens.group("base").strip(), params.get("base_params"), n_train, n_test, 1, m)
    if name in ("DTW_I", "DTW_D", "ED_D", "DTW_A"):
        dist = 8 * max(n_test, 64) * n_train * (2 if name == "DTW_A" else 1)
        loo = 8 * n_train * n_train * 2 if name == "DTW_A" else 0
        return data + dist + loo + 16 * (m + 1) * 64
    if name == "gRSF":
        lo, hi = default_length_bounds(m)
        return data + 8 * n_train * params.get("n_estimators", 100) + 64 * hi * n_train
    if name == "MUSE":
        w_max = min(m, params.get("max_window", 350))
        n_windows = sum(m - w + 1 for w in range(params.get("min_window", 4), w_max + 1))
        sources = d * (2 if params.get("derivatives", True) else 1)
        alphabet = params.get("alphabet_size", 4) ** params.get("word_length", 4)
        # sparse histogram entries, bounded by windows and by the key space
        nnz = n_train * sources * min(n_windows, alphabet * max(w_max - 3, 1))
        dft = 8 * 3 * n_train * (m - w_max + 1) * w_max
        return data + 24 * nnz + dft
    return data

