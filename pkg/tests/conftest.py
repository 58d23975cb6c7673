import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mtscbench.archive import DATA_ROOT_ENV
from mtscbench.dataset_io import read_ts

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def basic_motions():
    base = DATA / "BasicMotions"
    return read_ts(base / "BasicMotions_TRAIN.ts"), read_ts(base / "BasicMotions_TEST.ts")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_root(monkeypatch):
    monkeypatch.setenv(DATA_ROOT_ENV, str(DATA))
    return DATA


def archive_roots():
    """Directories searched for archive problems: $MTSC_DATA_ROOT, then the bundled data."""
    roots = []
    if os.environ.get(DATA_ROOT_ENV):
        roots.append(Path(os.environ[DATA_ROOT_ENV]))
    roots.append(DATA)
    return roots


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one acceptance line and fail the test when it did not pass."""

    def record(criterion, ok, detail):
        _VERDICTS.append((criterion, bool(ok), detail))
        if not ok:
            pytest.fail(f"{criterion}: {detail}", pytrace=False)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in _VERDICTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
    n_pass = sum(ok for _, ok, _ in _VERDICTS)
    terminalreporter.write_line(f"{n_pass}/{len(_VERDICTS)} acceptance checks passed")
