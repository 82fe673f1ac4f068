"""Pyramidal reconstructions for static k-space grids and dynamic k-t data.

Each scale ``s`` (fine to coarse) crops the DC-centred region of extent
``n / 2^s``, weights it with the scale-``s`` Haar spectrum, completes the
lifted matrix (LMaFit + ADMM, warm-started from the current estimate),
unweights, and writes the interpolated values back at non-acquired locations.
Static grids are weighted and solved along x and then along y; k-t data is
weighted along ``ky`` only and the time axis is lifted unweighted.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from aloha.hankel import SIDE_BY_SIDE, STACKED, HankelLift
from aloha.sampling import fft_c, ifft_c, nmse, zero_filled
from aloha.solver import (MU_DYNAMIC, MU_STATIC, TOLS_MULTI_OR_DYNAMIC,
                          TOLS_STATIC_SINGLE, complete)
from aloha.weighting import (UNWEIGHT, WEIGHT, CenterBlockTooSmall, apply_weight,
                             build_weights, center_slice, scale_extent)

log = logging.getLogger(__name__)

STATIC = "static-2d"
DYNAMIC = "dynamic-kt"
SINGLE = "single"


class PlanError(ValueError):
    """A reconstruction plan that cannot be applied to the given data."""


@dataclass(frozen=True)
class ReconPlan:
    mode: str = STATIC
    pyramid_levels: int = 3
    window: tuple = (23, 23)
    tolerances: tuple = TOLS_STATIC_SINGLE
    mu: float = MU_STATIC
    coil_mode: str = SINGLE
    weighting: bool = True
    delta: float = 0.0
    max_iters: int = 500
    admm_tol: float = 1e-6
    lmafit_iters: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "window", tuple(int(w) for w in self.window))
        object.__setattr__(self, "tolerances", tuple(float(t) for t in self.tolerances))
        if self.mode not in (STATIC, DYNAMIC):
            raise PlanError(f"unknown mode {self.mode!r}")
        if self.coil_mode not in (SINGLE, SIDE_BY_SIDE, STACKED):
            raise PlanError(f"unknown coil mode {self.coil_mode!r}")
        if self.pyramid_levels < 0:
            raise PlanError("pyramid_levels must be >= 0")
        if len(self.window) != 2 or min(self.window) < 1:
            raise PlanError(f"filter window must be two positive sizes, got {self.window}")
        if len(self.tolerances) != self.n_scales:
            raise PlanError(f"expected {self.n_scales} LMaFit tolerances, got {len(self.tolerances)}")
        if any(t <= 0 for t in self.tolerances) or self.mu <= 0 or self.delta < 0:
            raise PlanError("tolerances and mu must be positive, delta non-negative")

    @property
    def n_scales(self):
        """Scales actually solved; 0 and 1 both mean a single scale (no pyramid)."""
        return max(1, self.pyramid_levels)

    @property
    def direction(self):
        return STACKED if self.coil_mode == STACKED else SIDE_BY_SIDE

    @classmethod
    def static_single_coil(cls, **kw):
        return cls(**{"mode": STATIC, "pyramid_levels": 3, "window": (23, 23),
                      "tolerances": TOLS_STATIC_SINGLE, "mu": MU_STATIC, **kw})

    @classmethod
    def static_multicoil(cls, **kw):
        return cls(**{"mode": STATIC, "pyramid_levels": 3, "window": (7, 7),
                      "tolerances": TOLS_MULTI_OR_DYNAMIC, "mu": MU_STATIC,
                      "coil_mode": SIDE_BY_SIDE, **kw})

    @classmethod
    def dynamic(cls, **kw):
        return cls(**{"mode": DYNAMIC, "pyramid_levels": 3, "window": (17, 5),
                      "tolerances": TOLS_MULTI_OR_DYNAMIC, "mu": MU_DYNAMIC, **kw})

    def depth_violation(self, dims):
        """Description of the first scale breaking ``n/2^s - p + 1 >= p``, else ``None``.

        ``dims`` are the two lifted axes; for k-t data only the first is cropped.
        """
        cropped = (True, True) if self.mode == STATIC else (True, False)
        for s in range(self.n_scales):
            for ax, (n, p, crop) in enumerate(zip(dims, self.window, cropped)):
                e = scale_extent(n, s) if crop else n
                if e - p + 1 < p:
                    return (f"scale {s} axis {ax}: extent {e} - filter {p} + 1 = {e - p + 1} "
                            f"< {p}; the lifted matrix must have at least as many rows as "
                            f"columns (reduce --levels or the filter size)")
        return None

    def validate(self, dims):
        msg = self.depth_violation(dims)
        if msg:
            raise PlanError(msg)

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d["tolerances"] = list(self.tolerances)
        d["n_scales"] = self.n_scales
        return d


@dataclass
class ReconResult:
    grid: np.ndarray
    reports: list = field(default_factory=list)
    nmse: float | None = None
    zero_filled_nmse: float | None = None

    def to_dict(self):
        return {"nmse": self.nmse, "zero_filled_nmse": self.zero_filled_nmse,
                "scales": self.reports}


def max_levels(dims, window, mode=STATIC, cap=3):
    """Deepest pyramid (at most ``cap``) allowed by the row-count rule."""
    best = 1
    for levels in range(1, cap + 1):
        plan = ReconPlan(mode=mode, pyramid_levels=levels, window=window,
                         tolerances=(1e-2,) * levels)
        if plan.depth_violation(dims) is None:
            best = levels
    return best


def _as_coils(grid, spatial_ndim):
    grid = np.asarray(grid, dtype=np.complex128)
    if grid.ndim == spatial_ndim:
        return grid[None], True
    if grid.ndim == spatial_ndim + 1:
        return grid, False
    raise PlanError(f"expected {spatial_ndim}-D grid or coils x grid, got shape {grid.shape}")


def _solve_plane(plane, acquired, mask, plan, scale, axis_weights, report_sink, label,
                 strict_nulls):
    """Complete one cropped ``(coils, a, b)`` plane, sequentially over ``axis_weights``.

    ``axis_weights`` holds a ``WeightSpectrum`` per solve (``None`` = unweighted).
    """
    coils = plane.shape[0]
    lift = HankelLift(plane.shape[1:], plan.window, coils, plan.direction)
    est = plane.copy()
    for w in axis_weights:
        weighted = apply_weight(est, [w], WEIGHT) if w is not None else est
        out, rep = complete(
            weighted, mask, lift, plan.tolerances[scale], mu=plan.mu, warm=weighted,
            lmafit_iters=plan.lmafit_iters, max_iters=plan.max_iters, tol=plan.admm_tol,
            delta=plan.delta, seed=plan.seed + scale)
        out = out.reshape(est.shape)
        if w is not None:
            if strict_nulls:
                out = apply_weight(out, [w], UNWEIGHT, known=acquired, known_mask=mask)
            else:
                out = apply_weight(out, [w], UNWEIGHT, known=est)
        if plan.delta == 0:
            out[..., mask] = acquired[..., mask]
        est = out
        entry = {"scale": scale, "axis": None if w is None else int(w.axis), "plane": label}
        entry.update(rep.as_dict())
        report_sink.append(entry)
    return est


def reconstruct_static(acquired, mask, plan: ReconPlan, reference=None):
    """Pyramidal ALOHA on a DC-centred ``(n1, m1)`` grid or ``(coils, n1, m1)`` stack."""
    if plan.mode != STATIC:
        raise PlanError("reconstruct_static needs a static-2d plan")
    data, squeeze = _as_coils(acquired, 2)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != data.shape[1:]:
        raise PlanError(f"mask shape {mask.shape} does not match grid {data.shape[1:]}")
    if plan.coil_mode == SINGLE and data.shape[0] > 1:
        raise PlanError("multi-coil data needs coil_mode side-by-side or stacked")
    n1, m1 = mask.shape
    plan.validate((n1, m1))
    if plan.weighting and not mask[n1 // 2, m1 // 2]:
        raise CenterBlockTooSmall("the DC sample must be acquired for weighted reconstruction")

    acq = zero_filled(data, mask)
    est = acq.copy()
    reports = []
    if not mask.all():
        for s in range(plan.n_scales):
            ex, ey = scale_extent(n1, s), scale_extent(m1, s)
            region = (slice(None), center_slice(n1, ex), center_slice(m1, ey))
            sub_mask = mask[region[1:]]
            if sub_mask.all():
                continue
            if plan.weighting:
                weights = [build_weights(n1, s, axis=-2), build_weights(m1, s, axis=-1)]
            else:
                weights = [None, None]
            log.info("static scale %d: region %dx%d", s, ex, ey)
            sub = _solve_plane(est[region], acq[region], sub_mask, plan, s, weights, reports,
                               label=None, strict_nulls=False)
            est[region] = np.where(sub_mask, acq[region], sub)
    return _finish(est, data, mask, reports, squeeze, reference)


def reconstruct_dynamic(acquired, mask, plan: ReconPlan, reference=None):
    """ALOHA on k-t data ``(nx, ny, nt)`` or ``(coils, nx, ny, nt)`` with a ``(ny, nt)`` mask.

    The readout axis ``kx`` must be fully sampled; every readout position's
    ``ky``-``t`` plane is completed independently.
    """
    if plan.mode != DYNAMIC:
        raise PlanError("reconstruct_dynamic needs a dynamic-kt plan")
    data, squeeze = _as_coils(acquired, 3)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != data.shape[2:]:
        raise PlanError(f"mask shape {mask.shape} does not match the ky-t extent {data.shape[2:]}")
    if plan.coil_mode == SINGLE and data.shape[0] > 1:
        raise PlanError("multi-coil data needs coil_mode side-by-side or stacked")
    ny, nt = mask.shape
    plan.validate((ny, nt))

    acq = zero_filled(data, mask)
    hybrid = ifft_c(acq, axes=(1,))
    out = hybrid.copy()
    reports = []
    if not mask.all():
        for x in range(hybrid.shape[1]):
            plane = hybrid[:, x]
            if not np.any(plane[..., mask]):
                continue
            est = plane.copy()
            for s in range(plan.n_scales):
                e = scale_extent(ny, s)
                region = (slice(None), center_slice(ny, e), slice(None))
                sub_mask = mask[region[1:]]
                if sub_mask.all():
                    continue
                weights = [build_weights(ny, s, axis=-2) if plan.weighting else None]
                sub = _solve_plane(est[region], plane[region], sub_mask, plan, s, weights,
                                   reports, label=x, strict_nulls=True)
                est[region] = np.where(sub_mask, plane[region], sub)
            out[:, x] = est
    result = fft_c(out, axes=(1,))
    # restore acquired samples bit-exactly after the round trip through the readout FFT
    if plan.delta == 0:
        result[..., mask] = acq[..., mask]
    return _finish(result, data, mask, reports, squeeze, reference)


def reconstruct_multicoil(acquired, mask, plan: ReconPlan, reference=None):
    """Static or dynamic reconstruction of per-coil grids sharing one mask."""
    data = np.asarray(acquired)
    spatial = 2 if plan.mode == STATIC else 3
    if data.ndim != spatial + 1:
        raise PlanError(f"expected coils x {spatial}-D grids, got shape {data.shape}")
    if data.shape[0] == 1 and plan.coil_mode != SINGLE:
        plan = _replace(plan, coil_mode=SINGLE)
    elif data.shape[0] > 1 and plan.coil_mode == SINGLE:
        plan = _replace(plan, coil_mode=SIDE_BY_SIDE)
    fn = reconstruct_static if plan.mode == STATIC else reconstruct_dynamic
    return fn(data, mask, plan, reference=reference)


def reconstruct(acquired, mask, plan: ReconPlan, reference=None):
    fn = reconstruct_static if plan.mode == STATIC else reconstruct_dynamic
    return fn(acquired, mask, plan, reference=reference)


def rss(grids, axes):
    """Root-sum-of-squares coil combination of per-coil spectra (image domain)."""
    imgs = ifft_c(np.asarray(grids), axes=axes)
    return np.sqrt((np.abs(imgs) ** 2).sum(axis=0))


def _replace(plan, **kw):
    d = asdict(plan)
    d.update(kw)
    return ReconPlan(**d)


def _finish(est, data, mask, reports, squeeze, reference):
    grid = est[0] if squeeze else est
    res = ReconResult(grid, reports)
    if reference is not None:
        ref = np.asarray(reference)
        res.nmse = nmse(grid, ref)
        zf = zero_filled(data, mask)
        res.zero_filled_nmse = nmse(zf[0] if squeeze else zf, ref)
    return res
