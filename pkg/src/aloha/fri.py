"""Periodic Dirac streams, their spectra and annihilating filters.

These are the exact finite-rate-of-innovation objects every rank and recovery
test is checked against.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from aloha.hankel import lift_1d


@dataclass(frozen=True)
class DiracStream:
    """``k`` Diracs at ``positions`` in ``[0, period)`` with complex ``amplitudes``."""

    positions: tuple
    amplitudes: tuple
    period: int

    def __post_init__(self):
        pos = tuple(float(x) for x in np.atleast_1d(self.positions))
        amp = tuple(complex(c) for c in np.atleast_1d(self.amplitudes))
        if len(pos) == 0:
            raise ValueError("a Dirac stream needs at least one Dirac")
        if len(pos) != len(amp):
            raise ValueError("positions and amplitudes differ in length")
        if int(self.period) != self.period or self.period <= 0:
            raise ValueError("period must be a positive integer")
        if any(not 0 <= x < self.period for x in pos):
            raise ValueError(f"positions must lie in [0, {self.period})")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "period", int(self.period))

    @property
    def k(self):
        return len(self.positions)

    @property
    def cardinal(self):
        """True when every knot sits on the integer grid."""
        return all(float(x).is_integer() for x in self.positions)

    @property
    def roots(self):
        return np.exp(-2j * np.pi * np.asarray(self.positions) / self.period)

    @classmethod
    def random(cls, rng, k, period, cardinal=False, min_separation=1.0):
        """Seeded stream with well separated knots and amplitudes of modulus >= 0.5."""
        if cardinal:
            pos = np.sort(rng.choice(period, size=k, replace=False)).astype(float)
        else:
            for _ in range(1000):
                pos = np.sort(rng.uniform(0, period, size=k))
                gaps = np.diff(np.concatenate([pos, [pos[0] + period]]))
                if k == 1 or gaps.min() >= min_separation:
                    break
            else:
                raise ValueError("could not place knots with the requested separation")
        amp = rng.uniform(0.5, 1.5, size=k) * np.exp(2j * np.pi * rng.uniform(size=k))
        return cls(tuple(pos), tuple(amp), period)


@dataclass(frozen=True)
class AnnihilatingFilter:
    taps: np.ndarray

    @property
    def length(self):
        return len(self.taps)

    def extend(self, extra_taps):
        """Longer annihilating filter obtained by convolving with ``extra_taps``."""
        return AnnihilatingFilter(np.convolve(self.taps, np.asarray(extra_taps, dtype=complex)))


def dirac_spectrum(stream: DiracStream, samples=None):
    """``sum_j c_j exp(-2i pi m x_j / n1)`` for each ``m`` in ``samples``."""
    n1 = stream.period
    m = np.arange(n1) if samples is None else np.asarray(samples)
    if m.size and (m.min() < 0 or m.max() > n1 - 1):
        raise ValueError(f"sample indices must lie in [0, {n1 - 1}]")
    x = np.asarray(stream.positions)
    c = np.asarray(stream.amplitudes)
    return np.exp(-2j * np.pi * np.outer(m, x) / n1) @ c


def minimal_annihilating_filter(stream: DiracStream):
    """Coefficients of ``prod_j (1 - z_j z^-1)``; ``taps[0] == 1``."""
    return AnnihilatingFilter(np.poly(stream.roots).astype(complex))


def annihilation_residual(spectrum, filt: AnnihilatingFilter):
    """Worst boundary-free convolution output relative to ``max |spectrum|``."""
    y = np.asarray(spectrum, dtype=complex)
    if y.shape[0] < filt.length:
        raise ValueError("spectrum is shorter than the filter")
    scale = np.abs(y).max()
    if scale == 0:
        return 0.0
    conv = np.convolve(y, filt.taps, mode="valid")
    return float(np.abs(conv).max() / scale)


def vandermonde_factors(stream: DiracStream, kappa):
    """``(L, D, R)`` with ``L @ D @ R.T`` equal to the ``kappa``-window lift."""
    n1, k = stream.period, stream.k
    if not 1 <= kappa <= n1 or n1 - kappa + 1 < k + 1:
        raise ValueError(f"need n1 - kappa + 1 >= k + 1 (n1={n1}, kappa={kappa}, k={k})")
    z = stream.roots
    if np.min(np.abs(z[:, None] - z[None, :]) + np.eye(k) * 10) < 1e-12:
        raise ValueError("coinciding roots make the Vandermonde factors degenerate")
    L = z[None, :] ** np.arange(n1 - kappa + 1)[:, None]
    R = z[None, :] ** np.arange(kappa)[:, None]
    D = np.diag(np.asarray(stream.amplitudes))
    return L, D, R


def lifted_spectrum(stream: DiracStream, kappa):
    return lift_1d(dirac_spectrum(stream), kappa).entries


def numerical_rank(matrix, rel_tol=1e-8):
    """Singular values above ``rel_tol * sigma_1``."""
    s = np.linalg.svd(np.asarray(matrix), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))
