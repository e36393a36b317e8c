"""Numeric kernels for token-list similarity.

The hot loop of the whole pipeline is scoring one token list against
another: build the word-by-word cosine grid, take the best match per
source token, average. Tokens arrive as integer handles so the kernel
never touches strings:

``ids``   interned token ids; two tokens are the same word iff ids match.
``rows``  row index into the unit-normalized embedding matrix, -1 if the
          word is out of vocabulary.

Word score: 1.0 for identical ids, 0.0 when either side is out of
vocabulary (and the ids differ), otherwise the dot product of the two
unit vectors. Negative cosines are kept as-is.

Two interchangeable implementations are provided. The numba one is
compiled on first use; the numpy one is pure vectorized code. Selection
is driven by the GUIREUSE_BACKEND environment variable ("numba",
"numpy", or unset for auto).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _best_match_mean_numba(ids_a, rows_a, ids_b, rows_b, matrix):
    na = ids_a.shape[0]
    nb = ids_b.shape[0]
    if na == 0 or nb == 0:
        return 0.0
    dim = matrix.shape[1]
    total = 0.0
    for i in range(na):
        best = -2.0
        for j in range(nb):
            if ids_a[i] == ids_b[j]:
                s = 1.0
            elif rows_a[i] < 0 or rows_b[j] < 0:
                s = 0.0
            else:
                acc = 0.0
                ra = rows_a[i]
                rb = rows_b[j]
                for k in range(dim):
                    acc += matrix[ra, k] * matrix[rb, k]
                s = acc
            if s > best:
                best = s
        total += best
    return total / na


def _best_match_mean_numpy(ids_a, rows_a, ids_b, rows_b, matrix):
    na = ids_a.shape[0]
    nb = ids_b.shape[0]
    if na == 0 or nb == 0:
        return 0.0
    # cosine grid for in-vocabulary pairs, zeros elsewhere
    safe_a = np.where(rows_a < 0, 0, rows_a)
    safe_b = np.where(rows_b < 0, 0, rows_b)
    grid = matrix[safe_a] @ matrix[safe_b].T
    oov = (rows_a[:, None] < 0) | (rows_b[None, :] < 0)
    grid = np.where(oov, 0.0, grid)
    grid = np.where(ids_a[:, None] == ids_b[None, :], 1.0, grid)
    return float(grid.max(axis=1).mean())


def _pick_backend() -> str:
    requested = os.environ.get("GUIREUSE_BACKEND", "").strip().lower()
    if requested in ("numba", "numpy"):
        if requested == "numba" and not HAS_NUMBA:
            raise ImportError("GUIREUSE_BACKEND=numba but numba is not installed")
        return requested
    return "numba" if HAS_NUMBA else "numpy"


BACKEND = _pick_backend()

if BACKEND == "numba":
    best_match_mean = _best_match_mean_numba
else:
    best_match_mean = _best_match_mean_numpy


def backend_name() -> str:
    """Name of the implementation selected at import time."""
    return BACKEND


def warm_up() -> None:
    """Trigger JIT compilation so later calls are not charged for it."""
    ids = np.array([0, 1], dtype=np.int64)
    rows = np.array([0, -1], dtype=np.int64)
    m = np.eye(2, dtype=np.float64)
    best_match_mean(ids, rows, ids, rows, m)
