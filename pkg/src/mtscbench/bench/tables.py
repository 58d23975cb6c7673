"""Assemble results tables from run records and summarise them."""

from __future__ import annotations

import hashlib
from collections import defaultdict
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..exceptions import MissingRuns
from ..stats import ResultsTable
from .runner import OK, SUFFIX, read_record

__all__ = ["assemble_table", "summarise_table", "DatasetSummaryRow"]


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def assemble_table(run_dir, classifiers=None, datasets=None, complete_only=False):
    """Build a :class:`ResultsTable` from the ``ok`` records under ``run_dir``.

    Each cell is the accuracy recomputed from the stored predictions,
    averaged over the records (seeds or resamples) for that cell.

    Returns ``(table, manifest)``; the manifest lists the records used per
    cell with their checksums, and the datasets dropped by ``complete_only``.

    Raises
    ------
    FileNotFoundError
        If ``run_dir`` does not exist.
    MissingRuns
        If there are no successful records at all, or a requested cell has
        none and ``complete_only`` is off.
    """
    if not Path(run_dir).is_dir():
        raise FileNotFoundError(f"run directory {run_dir} does not exist")
    cells = defaultdict(list)
    for path in sorted(Path(run_dir).rglob(f"*{SUFFIX}")):
        if path.name.startswith(".tmp-"):
            continue
        rec = read_record(path)
        if rec.status != OK:
            continue
        code = rec.metadata.get("code", rec.metadata["dataset"])
        cells[(rec.metadata["classifier"], code)].append((path, rec.recomputed_accuracy()))
    if not cells:
        raise MissingRuns(f"no successful run records under {run_dir}")
    found_c = sorted({c for c, _ in cells})
    found_d = sorted({d for _, d in cells})
    classifiers = list(classifiers) if classifiers else found_c
    datasets = list(datasets) if datasets else found_d
    missing = [(c, d) for c in classifiers for d in datasets if (c, d) not in cells]
    dropped = []
    if missing:
        if not complete_only:
            listed = ", ".join(f"{c}/{d}" for c, d in missing[:10])
            raise MissingRuns(f"{len(missing)} cells have no successful run: {listed}")
        dropped = sorted({d for _, d in missing})
        datasets = [d for d in datasets if d not in dropped]
    values = np.array(
        [[np.mean([a for _, a in cells[(c, d)]]) for d in datasets] for c in classifiers],
        dtype=np.float64,
    ).reshape(len(classifiers), len(datasets))
    manifest = {
        "run_dir": str(run_dir),
        "classifiers": classifiers,
        "datasets": datasets,
        "dropped_datasets": dropped,
        "cells": {
            f"{c}/{d}": [{"file": str(p), "sha256": _sha256(p), "accuracy": a} for p, a in cells[(c, d)]]
            for c in classifiers
            for d in datasets
        },
    }
    return ResultsTable(tuple(classifiers), tuple(datasets), values), manifest


class DatasetSummaryRow(NamedTuple):
    dataset: str
    best: str
    best_accuracy: float
    baseline: float
    margin: float
    weak: bool
    beaten_by: tuple


def summarise_table(table, baseline="Default", margin=0.15):
    """Per-dataset best classifier and baseline comparison.

    ``beaten_by`` lists the classifiers more accurate than the baseline row.
    A dataset is flagged ``weak`` when even the best classifier improves on
    the baseline by less than ``margin``. Missing cells are ignored.
    """
    if baseline not in table.classifiers:
        raise ValueError(f"baseline row {baseline!r} not in table")
    base = table.row(baseline)
    others = [c for c in table.classifiers if c != baseline]
    rows = []
    for j, ds in enumerate(table.datasets):
        accs = {c: table.row(c)[j] for c in others if np.isfinite(table.row(c)[j])}
        if not accs:
            continue
        best = max(accs, key=lambda c: (accs[c], -others.index(c)))
        gap = accs[best] - base[j]
        beaten = tuple(c for c in others if c in accs and accs[c] > base[j])
        rows.append(DatasetSummaryRow(ds, best, accs[best], base[j], gap, bool(gap < margin), beaten))
    return rows
