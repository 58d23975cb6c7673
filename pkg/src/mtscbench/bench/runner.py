"""Run classifier x dataset experiments and persist their records.

A record file holds three JSON header lines (metadata, parameters, summary)
followed by one CSV row per test case: true class index, predicted class
index, then the class distribution. Accuracy can be recomputed from the rows
alone, and everything except the timing fields is a function of the
configuration.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import tempfile
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..archive import code_for, load_dataset_path
from ..budget import time_budget
from ..dataset_io import normalise_per_dimension, stratified_resample
from ..exceptions import BudgetExceeded, ClassTooSmall, TsFormatError
from ..stats import accuracy, balanced_accuracy
from .config import ClassifierSpec, ConfigError, ExperimentConfig
from .registry import UnknownClassifier, estimate_memory, make_classifier

__all__ = ["RunRecord", "run_experiment", "run_config", "read_record", "record_path"]

log = logging.getLogger(__name__)

OK, TIMEOUT, RESOURCE_ABORT, ERROR = "ok", "timeout", "resource_abort", "error"
STATUSES = (OK, TIMEOUT, RESOURCE_ABORT, ERROR)
SUFFIX = ".run"


@dataclass
class RunRecord:
    metadata: dict
    params: dict
    summary: dict
    y_true: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    y_pred: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    proba: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    path: Path | None = None

    @property
    def status(self):
        return self.summary["status"]

    def recomputed_accuracy(self):
        return accuracy(self.y_true, self.y_pred)

    def body(self):
        """Prediction rows as CSV text."""
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        for t, p, dist in zip(self.y_true, self.y_pred, self.proba):
            w.writerow([int(t), int(p), *(repr(float(v)) for v in dist)])
        return out.getvalue()

    def dumps(self):
        head = [json.dumps(x, sort_keys=True) for x in (self.metadata, self.params, self.summary)]
        return "\n".join(head) + "\n" + self.body()


def read_record(path):
    """Parse a record file written by :func:`run_experiment`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 3:
        raise ValueError(f"{path}: truncated record")
    meta, params, summary = (json.loads(x) for x in lines[:3])
    rows = [r for r in csv.reader(lines[3:]) if r]
    c = len(meta.get("classes", []))
    y_true = np.array([int(r[0]) for r in rows], dtype=np.int64)
    y_pred = np.array([int(r[1]) for r in rows], dtype=np.int64)
    proba = np.array([[float(v) for v in r[2:]] for r in rows], dtype=np.float64).reshape(len(rows), c)
    return RunRecord(meta, params, summary, y_true, y_pred, proba)


def _safe(name):
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", name).strip("-")


def record_path(output_dir, dataset_code, classifier, seed, resample_seed):
    fname = f"{_safe(classifier)}__seed{seed}__resample{resample_seed}{SUFFIX}"
    return Path(output_dir) / _safe(dataset_code) / fname


def _write_atomic(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=SUFFIX)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(params):
    out = {}
    for k, v in sorted(params.items()):
        if v is None or isinstance(v, (bool, int, float, str)):
            out[k] = v
        elif isinstance(v, (list, tuple, dict)):
            out[k] = json.loads(json.dumps(v, default=str))
        elif callable(v):
            out[k] = "<callable>"
        else:
            out[k] = str(v)
    return out


def run_experiment(dataset, spec, resample_seed=0, normalise=False, time_budget_s=None,
                   memory_budget=None, output_dir=None):
    """Fit on the training split, predict the test split and write a record.

    Failures never raise: they are reported through ``summary["status"]``
    (``timeout``, ``resource_abort`` or ``error``) and ``summary["error_kind"]``
    (``data``, ``config`` or ``classifier``). Partial predictions of a timed-out
    run are discarded.
    """
    if isinstance(spec, str):
        spec = ClassifierSpec(spec)
    meta = {
        "dataset": str(dataset),
        "classifier": spec.name,
        "seed": spec.seed,
        "resample_seed": resample_seed,
        "normalise": bool(normalise),
        "version": __version__,
    }
    summary = {"status": ERROR}
    params = dict(spec.params)
    record = RunRecord(meta, params, summary)
    try:
        train, test = load_dataset_path(dataset)
        train, test = stratified_resample(train, test, resample_seed)
    except (OSError, TsFormatError, ClassTooSmall, ValueError) as exc:
        summary.update(error_kind="data", message=f"{type(exc).__name__}: {exc}")
        return _finish(record, output_dir, str(dataset))
    meta.update(dataset=train.name, code=code_for(train.name), classes=list(train.class_labels))
    if normalise:
        train, test = normalise_per_dimension(train), normalise_per_dimension(test)
    try:
        clf = make_classifier(spec.name, spec.params, spec.seed)
    except UnknownClassifier as exc:
        summary.update(error_kind="config", message=str(exc.args[0]))
        return _finish(record, output_dir, meta["code"])
    record.params = _jsonable(clf.get_params(deep=False))
    need = estimate_memory(spec.name, spec.params, train.n_cases, test.n_cases,
                           train.n_dimensions, train.series_length)
    summary["memory_estimate"] = int(need)
    if memory_budget is not None and need > memory_budget:
        summary.update(status=RESOURCE_ABORT, message=f"estimated {need} bytes exceeds budget {memory_budget}")
        return _finish(record, output_dir, meta["code"])
    try:
        with time_budget(time_budget_s):
            t0 = time.perf_counter()
            clf.fit(train.X, train.y)
            t1 = time.perf_counter()
            proba = _aligned_proba(clf, test.X, train.n_classes)
            t2 = time.perf_counter()
    except BudgetExceeded:
        summary.update(status=TIMEOUT, message=f"time budget of {time_budget_s}s exhausted")
        return _finish(record, output_dir, meta["code"])
    except MemoryError as exc:
        summary.update(status=RESOURCE_ABORT, message=f"MemoryError: {exc}")
        return _finish(record, output_dir, meta["code"])
    except Exception as exc:
        log.debug("classifier failure\n%s", traceback.format_exc())
        summary.update(error_kind="classifier", message=f"{type(exc).__name__}: {exc}")
        return _finish(record, output_dir, meta["code"])
    record.y_true = test.y.astype(np.int64)
    record.y_pred = np.argmax(proba, axis=1).astype(np.int64)
    record.proba = proba
    summary.update(
        status=OK,
        accuracy=accuracy(record.y_true, record.y_pred),
        balanced_accuracy=balanced_accuracy(record.y_true, record.y_pred),
        fit_time=round(t1 - t0, 6),
        predict_time=round(t2 - t1, 6),
        n_test=int(test.n_cases),
    )
    return _finish(record, output_dir, meta["code"])


def _aligned_proba(clf, X, n_classes):
    """Class distribution over all dataset classes (training may miss some)."""
    proba = np.asarray(clf.predict_proba(X), dtype=np.float64)
    classes = np.asarray(clf.classes_)
    if proba.shape[1] == n_classes and np.array_equal(classes, np.arange(n_classes)):
        return proba
    out = np.zeros((proba.shape[0], n_classes))
    out[:, classes.astype(np.int64)] = proba
    return out


def _finish(record, output_dir, code):
    if output_dir is not None:
        m = record.metadata
        path = record_path(output_dir, code, m["classifier"], m["seed"], m["resample_seed"])
        _write_atomic(path, record.dumps())
        record.path = path
    return record


def _run_one(args):
    return run_experiment(*args)


def run_config(config: ExperimentConfig):
    """Run every (dataset, classifier) pair of ``config``; returns the records."""
    if not isinstance(config, ExperimentConfig):
        raise ConfigError("expected an ExperimentConfig")
    jobs = [
        (ds, spec, config.resample_seed, config.normalise, config.time_budget_seconds,
         config.memory_budget_bytes, config.output_dir)
        for ds in config.datasets
        for spec in config.classifiers
    ]
    if config.workers == 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(_run_one, jobs))
