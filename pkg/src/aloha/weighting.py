"""Haar-wavelet k-space weights for the pyramid scales.

Grids are stored DC-centred: index ``i`` of an axis of extent ``e`` holds
frequency index ``i - e // 2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NULL_EPS = 1e-12
WEIGHT = "weight"
UNWEIGHT = "unweight"


class CenterBlockTooSmall(ValueError):
    """A spectral null of the weight has no acquired sample to restore it from."""


def haar_weight(omega, s):
    """Scale-``s`` Haar weight ``2^{-s/2} psi0(2^s omega)``; zero at DC."""
    w = (2.0 ** s) * np.asarray(omega, dtype=float)
    # np.sinc(x) = sin(pi x) / (pi x), so sinc(w / 4pi) = sin(w/4) / (w/4)
    val = (1j * w / 2) * np.sinc(w / (4 * np.pi)) ** 2 * np.exp(-1j * w / 2)
    return val / np.sqrt(2.0 ** s)


def scale_extent(n1, s):
    """Centre-crop extent kept at scale ``s``: ``n1 / 2^s`` rounded down to even."""
    e = int(n1) // (2 ** s)
    return e - (e % 2) if e > 2 else e


def center_slice(n1, extent):
    start = n1 // 2 - extent // 2
    return slice(start, start + extent)


@dataclass(frozen=True)
class WeightSpectrum:
    scale: int
    axis: int
    values: np.ndarray
    null_set: tuple

    @property
    def extent(self):
        return len(self.values)

    @classmethod
    def ones(cls, extent, axis):
        return cls(0, axis, np.ones(extent, dtype=complex), ())


def build_weights(n1, s, axis=0):
    """Conjugated Haar weights sampled at ``omega = n pi / n1`` on the scale-``s`` crop."""
    extent = scale_extent(n1, s)
    if s < 0 or extent < 2:
        raise ValueError(f"scale {s} is too deep for a grid extent of {n1}")
    n = np.arange(extent) - extent // 2
    values = np.conj(haar_weight(n * np.pi / n1, s))
    mag = np.abs(values)
    nulls = tuple(int(i) for i in np.flatnonzero(mag < NULL_EPS * mag.max()))
    values.setflags(write=False)
    return WeightSpectrum(s, axis, values, nulls)


def _along(values, axis, ndim):
    shape = [1] * ndim
    shape[axis] = len(values)
    return np.reshape(values, shape)


def apply_weight(grid, weights, mode=WEIGHT, known=None, known_mask=None):
    """Multiply (``weight``) or divide (``unweight``) ``grid`` along each weight's axis.

    In ``unweight`` mode, entries on a spectral null of any axis are copied
    from ``known`` instead of divided; ``known_mask`` marks where ``known`` is
    valid and defaults to everywhere ``known`` is given.
    """
    if isinstance(weights, WeightSpectrum):
        weights = [weights]
    out = np.array(grid, dtype=np.complex128, copy=True)
    if mode == WEIGHT:
        for w in weights:
            out *= _along(w.values, w.axis, out.ndim)
        return out
    if mode != UNWEIGHT:
        raise ValueError(f"unknown mode {mode!r}")

    null = np.zeros(out.shape, dtype=bool)
    for w in weights:
        if out.shape[w.axis] != w.extent:
            raise ValueError(f"weight extent {w.extent} does not match axis {w.axis} of {out.shape}")
        safe = np.array(w.values, copy=True)
        is_null = np.zeros(w.extent, dtype=bool)
        is_null[list(w.null_set)] = True
        safe[is_null] = 1.0
        out /= _along(safe, w.axis, out.ndim)
        null |= _along(is_null, w.axis, out.ndim)
    if null.any():
        if known is None:
            raise CenterBlockTooSmall("spectral nulls present but no acquired values were retained")
        known = np.broadcast_to(np.asarray(known, dtype=np.complex128), out.shape)
        valid = (np.ones(out.shape, dtype=bool) if known_mask is None
                 else np.broadcast_to(np.asarray(known_mask, dtype=bool), out.shape))
        missing = null & ~valid
        if missing.any():
            raise CenterBlockTooSmall(
                f"{int(missing.sum())} spectral-null samples were not acquired; "
                "enlarge the fully sampled centre block")
        out[null] = known[null]
    return out
