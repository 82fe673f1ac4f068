"""Synthetic phantoms, coil fields, undersampling masks and error metrics.

All spectra are DC-centred (``fftshift`` layout) and use the unitary DFT so
that k-space NMSE equals image-domain NMSE.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DIRAC_IMAGE = "dirac-image"
PIECEWISE_CONSTANT = "piecewise-constant"
DYNAMIC_CINE_TOY = "dynamic-cine-toy"


def fft_c(img, axes=None):
    """Unitary, DC-centred forward DFT."""
    axes = tuple(range(img.ndim)) if axes is None else tuple(axes)
    shifted = np.fft.ifftshift(img, axes=axes)
    return np.fft.fftshift(np.fft.fftn(shifted, axes=axes, norm="ortho"), axes=axes)


def ifft_c(ksp, axes=None):
    axes = tuple(range(ksp.ndim)) if axes is None else tuple(axes)
    shifted = np.fft.ifftshift(ksp, axes=axes)
    return np.fft.fftshift(np.fft.ifftn(shifted, axes=axes, norm="ortho"), axes=axes)


def centered_freqs(n):
    return np.arange(n) - n // 2


@dataclass(frozen=True)
class Phantom:
    """A synthetic object.

    ``dirac-image``: ``params = {"positions": [(x, y), ...], "amplitudes": [...]}``
    with positions relative to the image centre.
    ``piecewise-constant``: ``params = {"rects": [(x0, x1, y0, y1, value), ...]}``
    in pixel units, half-open; ``jumps`` counts the jumps along each axis.
    ``dynamic-cine-toy``: ``dims = (nx, ny, frames)``; ``params["model"]`` is
    ``"disk"`` (see ``cine_toy``) or ``"kt-sparse"`` (see ``kt_sparse_toy``).
    """

    kind: str
    dims: tuple
    params: dict = field(default_factory=dict)

    @property
    def jumps(self):
        if self.kind != PIECEWISE_CONSTANT:
            return None
        img = rasterize(self)
        return int(np.count_nonzero(np.diff(img, axis=0, prepend=0)))


def shepp_like(n, m=None):
    """Nested rectangles: a piecewise-constant test object with few jumps per axis."""
    m = n if m is None else m
    sx, sy = n / 64.0, m / 64.0

    def r(x0, x1, y0, y1, v):
        return (int(round(x0 * sx)), int(round(x1 * sx)), int(round(y0 * sy)), int(round(y1 * sy)), v)

    rects = [
        r(12, 52, 14, 50, 1.0),
        r(18, 30, 20, 34, -0.5),
        r(34, 46, 22, 30, 0.6),
        r(36, 42, 38, 46, -0.8),
        r(22, 27, 40, 45, 0.4),
    ]
    return Phantom(PIECEWISE_CONSTANT, (n, m), {"rects": rects})


def cine_toy(n=32, m=64, frames=16):
    """Disk whose radius follows one temporal harmonic, over a static rectangle."""
    return Phantom(DYNAMIC_CINE_TOY, (n, m, frames), {
        "model": "disk",
        "background": [(4, n - 4, 8, m - 8, 0.6)],
        "center": (n / 2.0, m / 2.0),
        "radius": 0.25 * min(n, m),
        "amplitude": 0.08 * min(n, m),
        "value": 1.0,
        "harmonics": (1,),
    })


def _disk_frames(phantom, supersample=8):
    n, m, nt = phantom.dims
    p = phantom.params
    bg = _rect_image((n, m), p.get("background", []))
    off = (np.arange(supersample) + 0.5) / supersample
    xs = (np.arange(n)[:, None] + off[None, :]).ravel()
    ys = (np.arange(m)[:, None] + off[None, :]).ravel()
    cx, cy = p["center"]
    d2 = (xs[:, None] - cx) ** 2 + (ys[None, :] - cy) ** 2
    out = np.empty((n, m, nt))
    for t in range(nt):
        phase = 2 * np.pi * t / nt
        rad = p["radius"] + p["amplitude"] * sum(np.cos(h * phase) for h in p["harmonics"])
        cover = (d2 <= rad ** 2).astype(float)
        cover = cover.reshape(n, supersample, m, supersample).mean(axis=(1, 3))
        out[..., t] = bg + p["value"] * cover
    return out


def kt_sparse_toy(nx=8, ny=64, frames=16, seed=0):
    """k-t oracle built where it is sparse: boxes along ``y`` whose intensities carry a
    few temporal harmonics.

    In the Haar-weighted domain each box is a pair of opposite Diracs at its
    edges, so per readout position ``x`` the weighted ``ky``-``t`` plane is
    ``sum_j a_j(x) (e^{-2i pi ky u_j / ny} - e^{-2i pi ky v_j / ny}) g_j(t)``
    with ``g_j`` a short sum of ``exp(2i pi h t / frames)``.  The k-space data
    is that plane divided by the scale-0 weight; the ``ky = 0`` null line holds
    the ``ky -> 0`` limit of that ratio.
    """
    rng = np.random.default_rng(seed)
    edges = np.array([[0.20, 0.42], [0.48, 0.62], [0.70, 0.85]]) * ny
    harmonics = ((0,), (0, 1, -1), (0, 2))
    shift = rng.uniform(-2, 2, size=(nx,) + edges.shape)
    amps = rng.uniform(0.5, 1.5, size=(nx, len(edges)))
    coefs = [rng.uniform(0.3, 1.0, len(h)) * np.exp(2j * np.pi * rng.uniform(size=len(h)))
             for h in harmonics]
    for c in coefs:
        c[0] = 1.0
    return Phantom(DYNAMIC_CINE_TOY, (nx, ny, frames), {
        "model": "kt-sparse",
        "edges": edges[None] + shift,
        "amplitudes": amps,
        "harmonics": harmonics,
        "coefs": coefs,
    })


def _kt_sparse_hybrid(phantom, coils=None):
    """``(coils, x, ky, t)`` hybrid-space data of the k-t oracle (DC-centred ``ky``)."""
    from aloha.weighting import build_weights

    nx, ny, nt = phantom.dims
    p = phantom.params
    w = build_weights(ny, 0).values
    nulls = np.abs(w) == 0
    ky = centered_freqs(ny)[:, None]
    t = np.arange(nt)[None, :]
    n_coils = 1 if coils is None else len(coils)
    out = np.zeros((n_coils, nx, ny, nt), dtype=complex)
    for x in range(nx):
        for j, (u, v) in enumerate(p["edges"][x]):
            g = sum(c * np.exp(2j * np.pi * h * t / nt)
                    for h, c in zip(p["harmonics"][j], p["coefs"][j]))
            pair = np.exp(-2j * np.pi * ky * u / ny) - np.exp(-2j * np.pi * ky * v / ny)
            safe = np.where(nulls[:, None], 1.0, w[:, None])
            atom = p["amplitudes"][x, j] * np.where(nulls[:, None], -4.0 * (v - u), pair / safe) * g
            for i in range(n_coils):
                gain = 1.0 if coils is None else coils[i][x, int((u + v) / 2) % ny]
                out[i, x] += gain * atom
    return out


def _rect_image(dims, rects):
    img = np.zeros(dims, dtype=float)
    for x0, x1, y0, y1, v in rects:
        img[x0:x1, y0:y1] += v
    return img


def rasterize(phantom: Phantom):
    """Image-domain samples of ``phantom`` (``dims``, frames last for cine)."""
    if phantom.kind == PIECEWISE_CONSTANT:
        return _rect_image(phantom.dims, phantom.params["rects"])
    if phantom.kind == DYNAMIC_CINE_TOY:
        if phantom.params.get("model") == "kt-sparse":
            # complex image series (x, y, t)
            return ifft_c(_kt_sparse_hybrid(phantom)[0], axes=(1,))
        return _disk_frames(phantom)
    if phantom.kind == DIRAC_IMAGE:
        raise ValueError("Dirac images have no raster; use phantom_kspace")
    raise ValueError(f"unknown phantom kind {phantom.kind!r}")


def dirac_image_kspace(dims, positions, amplitudes):
    """Exact centred spectrum of 2-D Diracs (positions relative to the image centre)."""
    n1, m1 = dims
    kx = centered_freqs(n1)[:, None, None]
    ky = centered_freqs(m1)[None, :, None]
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    amp = np.asarray(amplitudes, dtype=complex)
    ph = np.exp(-2j * np.pi * (kx * pos[:, 0] / n1 + ky * pos[:, 1] / m1))
    return (ph * amp).sum(axis=-1) / np.sqrt(n1 * m1)


def coil_fields(n_coils, dims, seed=0, strength=0.9):
    """Smooth, nonvanishing complex sensitivities: first-order 2-D polynomials.

    ``|1 + a x + b y + c x y| >= 1 - strength > 0`` on ``[-1, 1]^2``.
    """
    rng = np.random.default_rng(seed)
    n1, m1 = dims[:2]
    x = np.linspace(-1, 1, n1)[:, None]
    y = np.linspace(-1, 1, m1)[None, :]
    fields = []
    for _ in range(n_coils):
        coef = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        coef *= strength / np.abs(coef).sum()
        phase0 = np.exp(2j * np.pi * rng.uniform())
        fields.append(phase0 * (1 + coef[0] * x + coef[1] * y + coef[2] * x * y))
    return np.array(fields)


def phantom_kspace(phantom: Phantom, coils=None):
    """Centred unitary spectrum of ``phantom``; per-coil spectra of ``s_i f`` if ``coils``.

    Cine phantoms transform the spatial axes only (frames stay in time).  For
    the k-t sparse oracle, ``(r, nx, ny)`` coil fields are sampled at each box
    centre so every coil shares the oracle's structure.
    """
    if phantom.kind == DIRAC_IMAGE:
        if coils is not None:
            raise ValueError("coil fields are defined on rasterized phantoms only")
        return dirac_image_kspace(phantom.dims, phantom.params["positions"],
                                  phantom.params["amplitudes"])
    if phantom.kind == DYNAMIC_CINE_TOY and phantom.params.get("model") == "kt-sparse":
        ksp = fft_c(_kt_sparse_hybrid(phantom, coils), axes=(1,))
        return ksp[0] if coils is None else ksp
    img = rasterize(phantom)
    spatial = (0, 1)
    if coils is None:
        return fft_c(img.astype(complex), axes=spatial)
    coils = np.asarray(coils)
    if phantom.kind == DYNAMIC_CINE_TOY:
        return fft_c(coils[..., None] * img[None], axes=(1, 2))
    return fft_c(coils * img[None], axes=(1, 2))


def step_spectrum_closed_form(n, start, width):
    """Non-centred DFT (``np.fft`` convention) of a unit step on ``[start, start + width)``."""
    k = np.arange(n)
    z = np.exp(-2j * np.pi * k / n)
    out = np.empty(n, dtype=complex)
    out[0] = width
    nz = k != 0
    out[nz] = z[nz] ** start * (1 - z[nz] ** width) / (1 - z[nz])
    return out


@dataclass(frozen=True)
class MaskSpec:
    """Variable-density Gaussian mask request.

    ``sigma`` is the Gaussian std per axis in units of the axis extent
    (``None`` for uniform density along that axis); ``center`` is the fully
    sampled centre block extent per axis.
    """

    accel: float
    center: tuple
    sigma: tuple = (0.25, 0.25)
    seed: int = 0


def make_mask(spec: MaskSpec, dims):
    dims = tuple(int(d) for d in dims)
    if spec.accel < 1:
        raise ValueError("acceleration must be >= 1")
    if len(spec.center) != len(dims) or any(c > d or c < 0 for c, d in zip(spec.center, dims)):
        raise ValueError(f"centre block {spec.center} does not fit {dims}")
    total = int(round(np.prod(dims) / spec.accel))
    mask = np.zeros(dims, dtype=bool)
    mask[tuple(slice(d // 2 - c // 2, d // 2 - c // 2 + c) for c, d in zip(spec.center, dims))] = True
    n_center = int(mask.sum())
    if n_center > total:
        raise ValueError(f"centre block ({n_center} samples) exceeds the budget of {total} at R={spec.accel}")
    if spec.accel == 1:
        return np.ones(dims, dtype=bool)
    sigma = tuple(spec.sigma) if len(spec.sigma) == len(dims) else (spec.sigma[0],) * len(dims)
    logp = np.zeros(dims)
    for ax, (d, s) in enumerate(zip(dims, sigma)):
        if s is None:
            continue
        u = centered_freqs(d) / d
        shape = [1] * len(dims)
        shape[ax] = d
        logp = logp - (u / s).reshape(shape) ** 2 / 2
    p = np.exp(logp).ravel()
    free = ~mask.ravel()
    p = np.where(free, p, 0.0)
    rng = np.random.default_rng(spec.seed)
    picks = rng.choice(p.size, size=total - n_center, replace=False, p=p / p.sum())
    flat = mask.ravel()
    flat[picks] = True
    return flat.reshape(dims)


def line_mask(spec: MaskSpec, n_lines, n_frames):
    """k-t mask: per frame, whole phase-encoding lines drawn with Gaussian density.

    Returns a ``(n_lines, n_frames)`` boolean array; ``spec.center[0]`` lines
    around DC are acquired in every frame.
    """
    rng = np.random.default_rng(spec.seed)
    per_frame = int(round(n_lines / spec.accel))
    c = spec.center[0]
    if c > per_frame:
        raise ValueError("centre lines exceed the per-frame budget")
    mask = np.zeros((n_lines, n_frames), dtype=bool)
    mask[n_lines // 2 - c // 2: n_lines // 2 - c // 2 + c] = True
    u = centered_freqs(n_lines) / n_lines
    base = np.exp(-(u / spec.sigma[0]) ** 2 / 2)
    for t in range(n_frames):
        p = np.where(mask[:, t], 0.0, base)
        picks = rng.choice(n_lines, size=per_frame - c, replace=False, p=p / p.sum())
        mask[picks, t] = True
    return mask


def nmse(x, y):
    """``||x - y||^2 / ||y||^2``."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {y.shape}")
    den = np.vdot(y, y).real
    if den == 0:
        raise ValueError("reference has zero energy")
    d = x - y
    return float(np.vdot(d, d).real / den)


def singular_spectrum(matrix):
    return np.linalg.svd(np.asarray(matrix), compute_uv=False)


def zero_filled(acquired, mask):
    out = np.array(acquired, dtype=complex, copy=True)
    out[..., ~np.asarray(mask, dtype=bool)] = 0
    return out
