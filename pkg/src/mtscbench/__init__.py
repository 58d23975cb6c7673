"""Multivariate time series classification and benchmarking."""

import os

# numba's default layer probes TBB first and warns on the old TBB shipped in
# many images; workqueue is always available
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

__version__ = "0.1.0"
