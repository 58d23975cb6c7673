"""Metadata for the 26 equal-length UEA multivariate problems and a loader.

Archive files are looked up under a data root laid out like the archive
distribution (``<root>/<Name>/<Name>_TRAIN.ts``); a flat
``<root>/<Name>_TRAIN.ts`` layout is accepted too. The root defaults to the
``MTSC_DATA_ROOT`` environment variable.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import NamedTuple

from .dataset_io import DatasetSummary, MultivariateDataset, read_ts

DATA_ROOT_ENV = "MTSC_DATA_ROOT"


class ArchiveProblem(NamedTuple):
    code: str
    name: str
    summary: DatasetSummary


def _p(code, name, *vals):
    return ArchiveProblem(code, name, DatasetSummary(*vals))


# code, name, train size, test size, dimensions, length, classes
PROBLEMS = (
    _p("AWR", "ArticularyWordRecognition", 275, 300, 9, 144, 25),
    _p("AF", "AtrialFibrillation", 15, 15, 2, 640, 3),
    _p("BM", "BasicMotions", 40, 40, 6, 100, 4),
    _p("CR", "Cricket", 108, 72, 6, 1197, 12),
    _p("DDG", "DuckDuckGeese", 50, 50, 1345, 270, 5),
    _p("EW", "EigenWorms", 128, 131, 6, 17984, 5),
    _p("EP", "Epilepsy", 137, 138, 3, 206, 4),
    _p("EC", "EthanolConcentration", 261, 263, 3, 1751, 4),
    _p("ER", "ERing", 30, 270, 4, 65, 6),
    _p("FD", "FaceDetection", 5890, 3524, 144, 62, 2),
    _p("FM", "FingerMovements", 316, 100, 28, 50, 2),
    _p("HMD", "HandMovementDirection", 160, 74, 10, 400, 4),
    _p("HW", "Handwriting", 150, 850, 3, 152, 26),
    _p("HB", "Heartbeat", 204, 205, 61, 405, 2),
    _p("LIB", "Libras", 180, 180, 2, 45, 15),
    _p("LSST", "LSST", 2459, 2466, 6, 36, 14),
    _p("MI", "MotorImagery", 278, 100, 64, 3000, 2),
    _p("NATO", "NATOPS", 180, 180, 24, 51, 6),
    _p("PD", "PenDigits", 7494, 3498, 2, 8, 10),
    _p("PEMS", "PEMS-SF", 267, 173, 963, 144, 7),
    _p("PS", "PhonemeSpectra", 3315, 3353, 11, 217, 39),
    _p("RS", "RacketSports", 151, 152, 6, 30, 4),
    _p("SRS1", "SelfRegulationSCP1", 268, 293, 6, 896, 2),
    _p("SRS2", "SelfRegulationSCP2", 200, 180, 7, 1152, 2),
    _p("SWJ", "StandWalkJump", 12, 15, 4, 2500, 3),
    _p("UW", "UWaveGestureLibrary", 120, 320, 3, 315, 8),
)

BY_CODE = {p.code: p for p in PROBLEMS}
BY_NAME = {p.name: p for p in PROBLEMS}


def lookup(name_or_code: str) -> ArchiveProblem | None:
    return BY_CODE.get(name_or_code) or BY_NAME.get(name_or_code)


def code_for(name: str) -> str:
    p = lookup(name)
    return p.code if p else name


def data_root(root=None) -> Path | None:
    root = root or os.environ.get(DATA_ROOT_ENV)
    return Path(root) if root else None


def find_split(name: str, split: str, root=None) -> Path:
    """Return the path to ``<name>_<split>.ts`` under the data root."""
    p = lookup(name)
    name = p.name if p else name
    base = data_root(root)
    if base is None:
        raise FileNotFoundError(
            f"no data root given and ${DATA_ROOT_ENV} is unset (looking for {name})"
        )
    fname = f"{name}_{split.upper()}.ts"
    for cand in (base / name / fname, base / fname):
        if cand.is_file():
            return cand
    raise FileNotFoundError(f"{fname} not found under {base}")


def load_problem(name: str, root=None) -> tuple[MultivariateDataset, MultivariateDataset]:
    """Load the default train/test split of an archive problem."""
    train = read_ts(find_split(name, "TRAIN", root))
    test = read_ts(find_split(name, "TEST", root))
    if train.class_labels != test.class_labels:
        raise ValueError(
            f"{name}: train and test declare different labels "
            f"{train.class_labels} vs {test.class_labels}"
        )
    return train, test


def load_dataset_path(path) -> tuple[MultivariateDataset, MultivariateDataset]:
    """Load a split given either a problem directory or a ``*_TRAIN.ts`` path."""
    path = Path(path)
    if path.is_dir():
        name = path.name
        return load_problem(name, root=path.parent)
    if path.name.upper().endswith("_TRAIN.TS"):
        stem = path.name[: -len("_TRAIN.ts")]
        return read_ts(path), read_ts(path.with_name(f"{stem}_TEST.ts"))
    return load_problem(str(path))
