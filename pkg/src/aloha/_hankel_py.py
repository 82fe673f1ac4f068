"""Pure NumPy lifting kernels.

Used when the compiled ``_hankel_ext`` module is unavailable, or when
``ALOHA_PURE_PYTHON=1`` is set.  Semantics match the compiled kernels exactly.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def index_map(n1, m1, p1, q1):
    """Flat grid index of every entry of a single-coil block-Hankel lift.

    Row ``ib*(n1-p1+1) + a``, column ``jb*p1 + b`` reads grid ``[a+b, ib+jb]``.
    """
    a = np.arange(n1 - p1 + 1)
    b = np.arange(p1)
    ib = np.arange(m1 - q1 + 1)
    jb = np.arange(q1)
    r_a = a[None, :, None, None]
    r_ib = ib[:, None, None, None]
    c_jb = jb[None, None, :, None]
    c_b = b[None, None, None, :]
    idx = (r_a + c_b) * m1 + (r_ib + c_jb)
    idx = idx.reshape((m1 - q1 + 1) * (n1 - p1 + 1), q1 * p1)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=64)
def multiplicity(n1, m1, p1, q1):
    idx = index_map(n1, m1, p1, q1)
    counts = np.bincount(idx.ravel(), minlength=n1 * m1).astype(np.float64)
    counts.setflags(write=False)
    return counts


def lift(grid, p1, q1, stacked):
    coils, n1, m1 = grid.shape
    idx = index_map(n1, m1, p1, q1)
    flat = np.ascontiguousarray(grid, dtype=np.complex128).reshape(coils, -1)
    blocks = [flat[c][idx] for c in range(coils)]
    if coils == 1:
        return blocks[0]
    return np.vstack(blocks) if stacked else np.hstack(blocks)


def _split(mat, coils, rows, cols, stacked):
    if stacked:
        return [mat[c * rows:(c + 1) * rows] for c in range(coils)]
    return [mat[:, c * cols:(c + 1) * cols] for c in range(coils)]


def adjoint(mat, coils, n1, m1, p1, q1, stacked):
    """Scatter-add every lifted entry back onto its grid location."""
    idx = index_map(n1, m1, p1, q1)
    rows, cols = idx.shape
    out = np.empty((coils, n1 * m1), dtype=np.complex128)
    flat_idx = idx.ravel()
    for c, block in enumerate(_split(mat, coils, rows, cols, stacked)):
        block = np.ascontiguousarray(block).ravel()
        out[c] = np.bincount(flat_idx, weights=block.real, minlength=n1 * m1)
        out[c] += 1j * np.bincount(flat_idx, weights=block.imag, minlength=n1 * m1)
    return out.reshape(coils, n1, m1)


def unlift(mat, coils, n1, m1, p1, q1, stacked):
    counts = multiplicity(n1, m1, p1, q1).reshape(n1, m1)
    return adjoint(mat, coils, n1, m1, p1, q1, stacked) / counts
