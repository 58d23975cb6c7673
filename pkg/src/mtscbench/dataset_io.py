"""Reading, writing and preprocessing of UEA-style ``.ts`` multivariate datasets.

A dataset is held as a single ``(n_cases, n_dimensions, series_length)``
float64 array, so the ``m`` observations of dimension ``k`` of a case are
contiguous. Class labels are kept as an ordered tuple in header order and
cases store the integer position of their label in that tuple.
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

import numpy as np

from .exceptions import (
    ClassTooSmall,
    DimensionCountMismatch,
    MalformedHeader,
    NonNumericValue,
    RaggedSeries,
    TsFormatError,
    UnknownClassLabel,
)

__all__ = [
    "Case",
    "MultivariateDataset",
    "DatasetSummary",
    "parse_ts",
    "read_ts",
    "write_ts",
    "normalise_per_dimension",
    "stratified_resample",
    "summarise",
]

logger = logging.getLogger(__name__)


class Case(NamedTuple):
    dimensions: np.ndarray  # (d, m)
    label: int


class DatasetSummary(NamedTuple):
    train_size: int
    test_size: int
    num_series: int
    series_length: int
    classes: int


@dataclass(frozen=True, eq=False)
class MultivariateDataset:
    """Immutable labelled collection of equal-length multivariate series."""

    name: str
    X: np.ndarray
    y: np.ndarray
    class_labels: tuple = field(default=())

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, order="C", copy=True)
        y = np.array(self.y, dtype=np.int64, copy=True)
        if X.ndim != 3:
            raise ValueError(f"X must have shape (n, d, m), got {X.shape}")
        n, d, m = X.shape
        if d < 1 or m < 1:
            raise ValueError("need at least one dimension and one observation")
        if y.shape != (n,):
            raise ValueError(f"y must have shape ({n},), got {y.shape}")
        labels = tuple(str(lab) for lab in self.class_labels)
        if len(labels) < 2:
            raise ValueError("need at least two class labels")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate class labels in {labels}")
        if n and (y.min() < 0 or y.max() >= len(labels)):
            raise ValueError("label index outside the class label set")
        if not np.all(np.isfinite(X)):
            raise ValueError("observations must be finite")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "class_labels", labels)

    @property
    def n_cases(self) -> int:
        return self.X.shape[0]

    @property
    def n_dimensions(self) -> int:
        return self.X.shape[1]

    @property
    def series_length(self) -> int:
        return self.X.shape[2]

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def __len__(self):
        return self.n_cases

    def __getitem__(self, i) -> Case:
        return Case(self.X[i], int(self.y[i]))

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def subset(self, index, name=None) -> "MultivariateDataset":
        index = np.asarray(index)
        return MultivariateDataset(
            name or self.name, self.X[index], self.y[index], self.class_labels
        )

    def dimension(self, k) -> "MultivariateDataset":
        """Univariate projection onto dimension ``k`` (shape ``(n, 1, m)``)."""
        return MultivariateDataset(
            f"{self.name}[{k}]", self.X[:, k : k + 1, :], self.y, self.class_labels
        )


def summarise(train: MultivariateDataset, test: MultivariateDataset) -> DatasetSummary:
    if (train.n_dimensions, train.series_length) != (
        test.n_dimensions,
        test.series_length,
    ):
        raise ValueError("train and test shapes disagree")
    return DatasetSummary(
        train.n_cases,
        test.n_cases,
        train.n_dimensions,
        train.series_length,
        len(set(train.class_labels) | set(test.class_labels)),
    )


# -- parsing -----------------------------------------------------------------

_BOOL_DIRECTIVES = {"timestamps", "missing", "univariate", "equallength"}


def _parse_bool(value, lineno):
    v = value.strip().lower()
    if v == "true":
        return True
    if v == "false":
        return False
    raise MalformedHeader("expected true/false", lineno, value)


def _lines(source):
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    elif isinstance(source, str):
        source = io.StringIO(source)
    for raw in source:
        if isinstance(raw, (bytes, bytearray)):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise TsFormatError(f"undecodable bytes: {exc.reason}") from None
        yield raw


def parse_ts(source: IO | str | bytes, name: str | None = None) -> MultivariateDataset:
    """Parse a ``.ts`` document into a validated :class:`MultivariateDataset`.

    ``source`` may be a text or binary stream, or the document itself as
    ``str``/``bytes``. Every failure raises a subclass of
    :class:`~mtscbench.exceptions.TsFormatError` naming the line.
    """
    header: dict = {}
    labels: list[str] | None = None
    in_data = False
    rows: list[np.ndarray] = []
    ys: list[int] = []
    d = m = None
    label_index: dict = {}
    lineno = 0

    for lineno, raw in enumerate(_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not in_data:
            if not line.startswith("@"):
                raise MalformedHeader("data before @data directive", lineno, line[:20])
            key, _, value = line[1:].partition(" ")
            key = key.lower()
            value = value.strip()
            if key == "data":
                if value:
                    raise MalformedHeader("unexpected text after @data", lineno, value)
                d, m, labels = _check_header(header, labels, lineno)
                label_index = {lab: i for i, lab in enumerate(labels)}
                in_data = True
            elif key in _BOOL_DIRECTIVES:
                header[key] = _parse_bool(value, lineno)
            elif key == "problemname":
                header[key] = value
            elif key in ("dimensions", "serieslength"):
                try:
                    header[key] = int(value)
                except ValueError:
                    raise MalformedHeader(f"@{key} needs an integer", lineno, value) from None
                if header[key] < 1:
                    raise MalformedHeader(f"@{key} must be positive", lineno, value)
            elif key == "classlabel":
                parts = value.split()
                if not parts:
                    raise MalformedHeader("@classLabel needs true/false", lineno)
                if not _parse_bool(parts[0], lineno):
                    raise MalformedHeader("unlabelled data is not supported", lineno, value)
                labels = parts[1:]
            elif key == "targetlabel":
                raise MalformedHeader("regression targets are not supported", lineno, key)
            else:
                logger.debug("ignoring unknown directive @%s on line %d", key, lineno)
            continue

        body, sep, label = line.rpartition(":")
        if not sep:
            raise DimensionCountMismatch(f"expected {d} dimensions and a label", lineno, line[:20])
        label = label.strip()
        fields = body.split(":")
        if len(fields) != d:
            raise DimensionCountMismatch(
                f"expected {d} dimensions, found {len(fields)}", lineno, str(len(fields))
            )
        if label not in label_index:
            raise UnknownClassLabel("label not declared in @classLabel", lineno, label)
        row = np.empty((d, m), dtype=np.float64)
        for k, dim in enumerate(fields):
            tokens = dim.split(",")
            if len(tokens) != m:
                raise RaggedSeries(
                    f"dimension {k} has {len(tokens)} observations, expected {m}",
                    lineno,
                    str(len(tokens)),
                )
            try:
                vals = np.array(tokens, dtype=np.float64)
            except ValueError:
                vals = None
            if vals is None or not np.all(np.isfinite(vals)):
                bad = _first_bad_token(tokens)
                raise NonNumericValue(f"bad observation in dimension {k}", lineno, bad)
            row[k] = vals
        rows.append(row)
        ys.append(label_index[label])

    if not in_data:
        raise MalformedHeader("missing @data directive", lineno or None)
    if not rows:
        raise MalformedHeader("no cases after @data", lineno)
    ds_name = name or header.get("problemname") or "unnamed"
    return MultivariateDataset(ds_name, np.stack(rows), np.array(ys), tuple(labels))


def _first_bad_token(tokens):
    for tok in tokens:
        try:
            if np.isfinite(float(tok)):
                continue
        except ValueError:
            pass
        return tok.strip()
    return None


def _check_header(header, labels, lineno):
    if header.get("timestamps"):
        raise MalformedHeader("timestamped series are not supported", lineno, "@timeStamps")
    if header.get("equallength") is False:
        raise MalformedHeader("unequal-length series are not supported", lineno, "@equalLength")
    if labels is None:
        raise MalformedHeader("missing @classLabel directive", lineno)
    if len(labels) < 2:
        raise MalformedHeader("need at least two class labels", lineno)
    if len(set(labels)) != len(labels):
        raise MalformedHeader("duplicate class labels", lineno)
    univariate = header.get("univariate")
    d = header.get("dimensions")
    if d is None:
        if univariate:
            d = 1
        else:
            raise MalformedHeader("missing @dimensions (or @univariate true)", lineno)
    elif univariate and d != 1:
        raise MalformedHeader("@univariate true contradicts @dimensions", lineno, str(d))
    m = header.get("serieslength")
    if m is None:
        raise MalformedHeader("missing @seriesLength", lineno)
    return d, m, labels


def read_ts(path: str | os.PathLike, name: str | None = None) -> MultivariateDataset:
    with open(path, "rb") as fh:
        return parse_ts(fh, name=name)


def write_ts(ds: MultivariateDataset, stream: IO[str], precision: int | None = None):
    """Write ``ds`` in ``.ts`` format.

    With ``precision=None`` values are written with ``repr`` and round-trip
    exactly; otherwise ``precision`` significant digits are kept.
    """
    fmt = repr if precision is None else (lambda v: f"{v:.{precision}g}")
    stream.write(f"@problemName {ds.name}\n")
    stream.write("@timeStamps false\n@missing false\n")
    stream.write(f"@univariate {'true' if ds.n_dimensions == 1 else 'false'}\n")
    stream.write(f"@dimensions {ds.n_dimensions}\n")
    stream.write(f"@equalLength true\n@seriesLength {ds.series_length}\n")
    stream.write(f"@classLabel true {' '.join(ds.class_labels)}\n@data\n")
    for x, y in zip(ds.X, ds.y):
        dims = ":".join(",".join(fmt(float(v)) for v in row) for row in x)
        stream.write(f"{dims}:{ds.class_labels[y]}\n")


# -- preprocessing -----------------------------------------------------------

def normalise_per_dimension(ds: MultivariateDataset) -> MultivariateDataset:
    """Z-normalise every dimension of every case independently.

    Uses the population standard deviation; constant dimensions become zeros.
    """
    X = ds.X
    mean = X.mean(axis=2, keepdims=True)
    centred = X - mean
    std = np.sqrt(np.mean(centred**2, axis=2, keepdims=True))
    # tolerance scales with magnitude so float noise on a constant row stays "constant"
    scale = np.maximum(np.abs(mean), 1.0)
    const = std <= 1e-12 * scale
    out = np.divide(centred, std, out=np.zeros_like(centred), where=~const)
    return MultivariateDataset(ds.name, out, ds.y, ds.class_labels)


def stratified_resample(
    train: MultivariateDataset, test: MultivariateDataset, seed: int
) -> tuple[MultivariateDataset, MultivariateDataset]:
    """Redraw a train/test split with the same per-class counts as the default.

    Seed 0 returns the default split unchanged.
    """
    if train.class_labels != test.class_labels:
        raise ValueError("train and test declare different class labels")
    c = train.n_classes
    n_train = np.bincount(train.y, minlength=c)
    n_test = np.bincount(test.y, minlength=c)
    absent = np.flatnonzero((n_train == 0) & (n_test > 0))
    if absent.size:
        raise ClassTooSmall(
            f"classes {[train.class_labels[i] for i in absent]} have no training cases"
        )
    if seed == 0:
        return train, test
    X = np.concatenate([train.X, test.X])
    y = np.concatenate([train.y, test.y])
    rng = np.random.default_rng(seed)
    tr_idx, te_idx = [], []
    for cls in range(c):
        members = np.flatnonzero(y == cls)
        rng.shuffle(members)
        tr_idx.append(members[: n_train[cls]])
        te_idx.append(members[n_train[cls] :])
    tr = np.sort(np.concatenate(tr_idx))
    te = np.sort(np.concatenate(te_idx))
    return (
        MultivariateDataset(train.name, X[tr], y[tr], train.class_labels),
        MultivariateDataset(test.name, X[te], y[te], test.class_labels),
    )


def iter_cases(ds: MultivariateDataset) -> Iterable[Case]:
    for i in range(ds.n_cases):
        yield ds[i]
