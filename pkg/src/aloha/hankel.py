"""Lifting between spectral grids and (block-)Hankel matrices.

A 2-D grid ``F`` of shape ``(n1, m1)`` lifted with a ``(p1, q1)`` window gives
a block-Hankel matrix whose block rows run over ``m1 - q1 + 1`` column-window
positions and whose blocks are ``(n1 - p1 + 1) x p1`` Hankel matrices of the
grid columns.  One-dimensional data is the special case ``m1 = q1 = 1``.

Multi-coil data is lifted per coil and concatenated side by side (default) or
stacked vertically (kept only for the concatenation ablation).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from aloha import kernels

SIDE_BY_SIDE = "side-by-side"
STACKED = "stacked"


@dataclass(frozen=True)
class HankelLift:
    """Lifting configuration: grid extent, filter window and coil layout."""

    grid_dims: tuple
    window: tuple
    coils: int = 1
    direction: str = SIDE_BY_SIDE

    def __post_init__(self):
        dims = tuple(int(d) for d in self.grid_dims)
        win = tuple(int(w) for w in self.window)
        if len(dims) not in (1, 2) or len(win) != len(dims):
            raise ValueError(f"grid_dims {dims} and window {win} must both be 1-D or 2-D")
        for d, w in zip(dims, win):
            if not 1 <= w <= d:
                raise ValueError(f"window {win} does not fit grid {dims}")
        if self.coils < 1:
            raise ValueError("coils must be >= 1")
        if self.direction not in (SIDE_BY_SIDE, STACKED):
            raise ValueError(f"unknown concatenation direction {self.direction!r}")
        object.__setattr__(self, "grid_dims", dims)
        object.__setattr__(self, "window", win)

    @property
    def dims2(self):
        return self.grid_dims if len(self.grid_dims) == 2 else (self.grid_dims[0], 1)

    @property
    def window2(self):
        return self.window if len(self.window) == 2 else (self.window[0], 1)

    @property
    def block_shape(self):
        """Shape of the lift of a single coil."""
        (n1, m1), (p1, q1) = self.dims2, self.window2
        return (n1 - p1 + 1) * (m1 - q1 + 1), p1 * q1

    @property
    def shape(self):
        rows, cols = self.block_shape
        if self.direction == STACKED:
            return rows * self.coils, cols
        return rows, cols * self.coils

    @property
    def _stacked(self):
        return self.direction == STACKED

    def _as_coil_grid(self, data):
        data = np.asarray(data, dtype=np.complex128)
        n1, m1 = self.dims2
        expected = (self.coils,) + self.grid_dims
        if data.shape == self.grid_dims and self.coils == 1:
            data = data[None]
        elif data.shape != expected:
            raise ValueError(f"grid of shape {data.shape} does not match lift {expected}")
        return data.reshape(self.coils, n1, m1)

    def _as_output(self, grid):
        if self.coils == 1:
            return grid[0].reshape(self.grid_dims)
        return grid.reshape((self.coils,) + self.grid_dims)

    def lift(self, data):
        """Dense lifted matrix of ``data`` (grid, or coils x grid)."""
        p1, q1 = self.window2
        return kernels.lift(self._as_coil_grid(data), p1, q1, self._stacked)

    def adjoint(self, mat):
        """True adjoint: every matrix entry summed onto its grid location."""
        mat = self._check_matrix(mat)
        (n1, m1), (p1, q1) = self.dims2, self.window2
        return self._as_output(kernels.adjoint(mat, self.coils, n1, m1, p1, q1, self._stacked))

    def unlift(self, mat):
        """Averaging pseudo-inverse of :meth:`lift`."""
        mat = self._check_matrix(mat)
        (n1, m1), (p1, q1) = self.dims2, self.window2
        return self._as_output(kernels.unlift(mat, self.coils, n1, m1, p1, q1, self._stacked))

    def multiplicity(self):
        """Number of lifted entries drawn from each grid location (one coil)."""
        (n1, m1), (p1, q1) = self.dims2, self.window2
        ci = np.minimum.reduce([np.arange(n1), n1 - 1 - np.arange(n1),
                                np.full(n1, p1 - 1), np.full(n1, n1 - p1)]) + 1
        cj = np.minimum.reduce([np.arange(m1), m1 - 1 - np.arange(m1),
                                np.full(m1, q1 - 1), np.full(m1, m1 - q1)]) + 1
        return np.outer(ci, cj).astype(float).reshape(self.grid_dims)

    def _check_matrix(self, mat):
        mat = np.asarray(mat, dtype=np.complex128)
        if mat.shape != self.shape:
            raise ValueError(f"matrix shape {mat.shape} does not match lift shape {self.shape}")
        return mat


@dataclass(frozen=True)
class LiftedMatrix:
    entries: np.ndarray
    lift: HankelLift

    @property
    def shape(self):
        return self.entries.shape


def lift_1d(data, kappa):
    data = np.asarray(data, dtype=np.complex128)
    if data.ndim != 1:
        raise ValueError("lift_1d expects a vector")
    if not 1 <= kappa <= data.shape[0]:
        raise ValueError(f"window {kappa} exceeds data length {data.shape[0]}")
    cfg = HankelLift((data.shape[0],), (kappa,))
    return LiftedMatrix(cfg.lift(data), cfg)


def lift_2d(data, window):
    data = np.asarray(data, dtype=np.complex128)
    if data.ndim != 2:
        raise ValueError("lift_2d expects a 2-D grid")
    cfg = HankelLift(data.shape, tuple(window))
    return LiftedMatrix(cfg.lift(data), cfg)


def concat_coils(lifts: Sequence[LiftedMatrix], direction=SIDE_BY_SIDE):
    """Concatenate per-coil lifts side by side (default) or stacked."""
    lifts = list(lifts)
    if not lifts:
        raise ValueError("no lifts to concatenate")
    if direction not in (SIDE_BY_SIDE, STACKED):
        raise ValueError(f"unknown concatenation direction {direction!r}")
    first = lifts[0]
    for other in lifts[1:]:
        if other.shape != first.shape or other.lift != first.lift:
            raise ValueError("all coil lifts must share shape and lift configuration")
    if len(lifts) == 1:
        return first
    cfg = HankelLift(first.lift.grid_dims, first.lift.window, len(lifts), direction)
    blocks = [lm.entries for lm in lifts]
    entries = np.vstack(blocks) if direction == STACKED else np.hstack(blocks)
    return LiftedMatrix(entries, cfg)


def unlift(matrix: LiftedMatrix):
    return matrix.lift.unlift(matrix.entries)
