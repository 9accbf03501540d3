"""Pure numpy/scipy versions of the compiled kernels (same signatures)."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def sparse_apply(state: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                 vals: np.ndarray, k_out: int) -> np.ndarray:
    L, k_in, R = state.shape
    op = sp.csr_matrix((vals, (rows, cols)), shape=(k_out, k_in))
    flat = np.ascontiguousarray(state.transpose(1, 0, 2)).reshape(k_in, L * R)
    out = op @ flat
    return np.ascontiguousarray(np.asarray(out).reshape(k_out, L, R).transpose(1, 0, 2))


def _digit_sums(count: int, width: int, d: int) -> np.ndarray:
    idx = np.arange(count, dtype=np.int64)
    total = np.zeros(count, dtype=np.int64)
    for _ in range(width):
        total += idx % d
        idx //= d
    return total


def xspider_coo(m: int, n: int, j: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    s_in = _digit_sums(d ** n, n, d)
    s_out = _digit_sums(d ** m, m, d)
    keep = (s_out[:, None] + (j % d) - s_in[None, :]) % d == 0
    rows, cols = np.nonzero(keep)
    order = np.lexsort((rows, cols))
    return rows[order].astype(np.int64), cols[order].astype(np.int64)
