"""Command-line driver: ``aloha recon|synth|mask|nmse|svplot``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 solver divergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict

import numpy as np

from aloha import io, kernels
from aloha.hankel import SIDE_BY_SIDE, STACKED, HankelLift
from aloha.pipeline import DYNAMIC, STATIC, PlanError, ReconPlan, reconstruct
from aloha.sampling import (MaskSpec, cine_toy, coil_fields, kt_sparse_toy, dirac_image_kspace, line_mask,
                            make_mask, nmse, phantom_kspace, shepp_like, singular_spectrum)
from aloha.solver import SolverDivergence
from aloha.weighting import CenterBlockTooSmall, apply_weight, build_weights

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 2, 3, 4

log = logging.getLogger("aloha")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _dims(text, n=None):
    try:
        dims = tuple(int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected sizes like 64x64, got {text!r}")
    if any(d < 1 for d in dims) or (n is not None and len(dims) != n):
        raise argparse.ArgumentTypeError(f"bad size spec {text!r}")
    return dims


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _canonical(grid: io.GridFile, mode):
    """Reorder a grid file to ``(coils, kx, ky[, t])``; returns data and the permutation."""
    want = ("coil", "kx", "ky") + (("t",) if mode == DYNAMIC else ())
    roles = grid.roles
    if "coil" not in roles:
        roles = ("coil",) + roles
        data = grid.data[None]
    else:
        data = grid.data
    if sorted(roles) != sorted(want):
        raise DataError(f"{mode} reconstruction needs axes {want[1:]} (+coil), file has {grid.roles}")
    perm = [roles.index(r) for r in want]
    return np.transpose(data, perm), perm, roles


def _restore(data, perm, roles, had_coil):
    out = np.transpose(data, np.argsort(perm))
    return out if had_coil else out[0]


def _plan_from_args(args, coils):
    mode = STATIC if args.mode == "static" else DYNAMIC
    if mode == DYNAMIC:
        plan_kw = asdict(ReconPlan.dynamic())
    elif coils > 1:
        plan_kw = asdict(ReconPlan.static_multicoil())
    else:
        plan_kw = asdict(ReconPlan.static_single_coil())
    plan_kw["coil_mode"] = (STACKED if args.stacked_coils else SIDE_BY_SIDE) if coils > 1 else "single"
    if args.stacked_coils and coils == 1:
        raise UsageError("--stacked-coils needs multi-coil input")
    if args.levels is not None:
        plan_kw["pyramid_levels"] = args.levels
    n_scales = max(1, plan_kw["pyramid_levels"])
    if args.filter is not None:
        plan_kw["window"] = args.filter
    if args.mu is not None:
        plan_kw["mu"] = args.mu
    if args.tol is not None:
        plan_kw["tolerances"] = args.tol
    else:
        tols = tuple(plan_kw["tolerances"])
        plan_kw["tolerances"] = (tols + (tols[-1] / 10,) * n_scales)[:n_scales]
    plan_kw.update(delta=args.delta, weighting=not args.no_weighting, seed=args.seed)
    if args.max_iters is not None:
        plan_kw["max_iters"] = args.max_iters
    try:
        return ReconPlan(**plan_kw)
    except PlanError as exc:
        raise UsageError(str(exc))


def cmd_recon(args):
    grid = io.read_grid(args.input)
    mask = io.read_mask(args.mask)
    mode = STATIC if args.mode == "static" else DYNAMIC
    data, perm, roles = _canonical(grid, mode)
    coils = data.shape[0]
    if args.coils is not None and args.coils != coils:
        raise DataError(f"--coils {args.coils} but the input holds {coils} coil(s)")
    plan = _plan_from_args(args, coils)
    lifted_dims = data.shape[2:] if mode == DYNAMIC else data.shape[1:]
    if mask.shape != lifted_dims:
        raise DataError(f"mask shape {mask.shape} does not match the grid's {lifted_dims}")
    msg = plan.depth_violation(lifted_dims)
    if msg:
        raise UsageError(f"pyramid-depth rule violated: {msg}")
    reference = None
    if args.reference:
        ref_data, _, _ = _canonical(io.read_grid(args.reference), mode)
        if ref_data.shape != data.shape:
            raise DataError(f"reference shape {ref_data.shape} does not match input {data.shape}")
        reference = ref_data if coils > 1 else ref_data[0]
    acquired = data if coils > 1 else data[0]
    t0 = time.perf_counter()
    result = reconstruct(acquired, mask, plan, reference=reference)
    elapsed = time.perf_counter() - t0
    out = result.grid if coils > 1 else result.grid[None]
    io.write_grid(args.output, io.GridFile(_restore(out, perm, roles, "coil" in grid.roles), grid.roles))
    report = {
        "input": args.input,
        "mask": args.mask,
        "output": args.output,
        "reference": args.reference,
        "plan": plan.to_dict(),
        "backend": kernels.BACKEND,
        "runtime_s": elapsed,
        "nmse": result.nmse,
        "zero_filled_nmse": result.zero_filled_nmse,
        "scales": result.reports,
    }
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report, fh, indent=1)
    if result.nmse is not None:
        print(f"nmse {result.nmse:.6e} (zero-filled {result.zero_filled_nmse:.6e})")
    return EXIT_OK


def cmd_synth(args):
    rng = np.random.default_rng(args.seed)
    fields = None
    if args.kind == "piecewise-constant":
        dims = args.dims or (64, 64)
        if len(dims) != 2:
            raise UsageError("piecewise-constant phantoms are 2-D")
        ph = shepp_like(*dims)
        if args.coils > 1:
            fields = coil_fields(args.coils, dims, seed=args.seed)
        data = phantom_kspace(ph, fields)
    elif args.kind == "dirac":
        dims = args.dims or (64, 64)
        if len(dims) != 2:
            raise UsageError("Dirac images are 2-D")
        if args.coils > 1:
            raise UsageError("Dirac images are single-coil")
        pos = np.column_stack([rng.uniform(-d / 2, d / 2, args.k) for d in dims])
        amp = rng.uniform(0.5, 1.5, args.k) * np.exp(2j * np.pi * rng.uniform(size=args.k))
        data = dirac_image_kspace(dims, pos, amp)
    else:
        dims = args.dims or ((32, 64, 16) if args.kind == "cine" else (8, 64, 16))
        if len(dims) != 3:
            raise UsageError("cine phantoms are NXxNYxNT")
        ph = cine_toy(*dims) if args.kind == "cine" else kt_sparse_toy(*dims, seed=args.seed)
        if args.coils > 1:
            fields = coil_fields(args.coils, dims[:2], seed=args.seed)
        data = phantom_kspace(ph, fields)
    roles = io.default_roles(data.ndim, coils=fields is not None)
    io.write_grid(args.output, io.GridFile(data, roles))
    return EXIT_OK


def cmd_mask(args):
    center = args.center
    if args.lines:
        if len(args.dims) != 2:
            raise UsageError("line masks take --dims NYxNT")
        spec = MaskSpec(args.accel, (center[0],), sigma=(args.sigma,), seed=args.seed)
        try:
            mask = line_mask(spec, *args.dims)
        except ValueError as exc:
            raise UsageError(str(exc))
    else:
        if len(center) != len(args.dims):
            raise UsageError("--center must have as many sizes as --dims")
        spec = MaskSpec(args.accel, center, sigma=(args.sigma,) * len(args.dims), seed=args.seed)
        try:
            mask = make_mask(spec, args.dims)
        except ValueError as exc:
            raise UsageError(str(exc))
    io.write_mask(args.output, mask)
    return EXIT_OK


def cmd_nmse(args):
    a, b = io.read_grid(args.estimate), io.read_grid(args.reference)
    if a.data.shape != b.data.shape:
        raise DataError(f"shape mismatch {a.data.shape} vs {b.data.shape}")
    print(f"{nmse(a.data, b.data):.17g}")
    return EXIT_OK


def _svplot_matrix(grid, window, scale):
    data = grid.data
    if "t" in grid.roles:
        raise DataError("svplot lifts static grids only; extract a k-t plane first")
    if "coil" in grid.roles:
        data = np.moveaxis(data, grid.roles.index("coil"), 0)
    else:
        data = data[None]
    dims = data.shape[1:]
    window = window or tuple(max(1, d // 2) for d in dims)
    if len(window) != len(dims):
        raise UsageError(f"--filter needs {len(dims)} sizes for a {len(dims)}-D grid")
    if scale is not None:
        data = apply_weight(data, [build_weights(d, scale, axis=ax + 1) for ax, d in enumerate(dims)])
    try:
        lift = HankelLift(dims, window, data.shape[0])
    except ValueError as exc:
        raise UsageError(str(exc))
    return lift.lift(data)


def cmd_svplot(args):
    grid = io.read_grid(args.input)
    sv = singular_spectrum(_svplot_matrix(grid, args.filter, args.weight_scale))
    with open(args.csv, "w") as fh:
        fh.write("index,singular_value,normalized\n")
        for i, s in enumerate(sv):
            fh.write(f"{i + 1},{s:.17g},{s / sv[0] if sv[0] > 0 else 0.0:.17g}\n")
    if args.png or args.error_map:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    if args.png:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.semilogy(np.arange(1, sv.size + 1), np.maximum(sv / max(sv[0], 1e-300), 1e-18), ".-")
        ax.set_xlabel("index")
        ax.set_ylabel("normalized singular value")
        fig.tight_layout()
        fig.savefig(args.png, dpi=100)
        plt.close(fig)
    if args.error_map:
        if not args.reference:
            raise UsageError("--error-map needs --reference")
        ref = io.read_grid(args.reference)
        if ref.data.shape != grid.data.shape:
            raise DataError(f"reference shape {ref.data.shape} does not match {grid.data.shape}")
        from aloha.sampling import ifft_c
        axes = [i for i, r in enumerate(grid.roles) if r in ("kx", "ky")]
        err = np.abs(ifft_c(grid.data - ref.data, axes=axes))
        if "coil" in grid.roles:
            err = np.sqrt((err ** 2).sum(axis=grid.roles.index("coil")))
        fig, ax = plt.subplots(figsize=(4, 4))
        im = ax.imshow(err if err.ndim == 2 else err.reshape(err.shape[0], -1), cmap="magma")
        fig.colorbar(im, ax=ax)
        fig.savefig(args.error_map, dpi=100)
        plt.close(fig)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="aloha", description="Annihilating-filter low-rank Hankel completion")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("recon", help="complete an undersampled grid")
    r.add_argument("--input", required=True)
    r.add_argument("--mask", required=True)
    r.add_argument("--mode", choices=("static", "dynamic"), default="static")
    r.add_argument("--coils", type=int, help="expected coil count (checked against the file)")
    r.add_argument("--levels", type=int, help="pyramid levels S (0 and 1 mean single scale)")
    r.add_argument("--filter", type=lambda s: _dims(s, 2), help="annihilating filter size p1xq1")
    r.add_argument("--mu", type=float)
    r.add_argument("--tol", type=_floats, help="LMaFit tolerances t0,t1,... (one per scale)")
    r.add_argument("--delta", type=float, default=0.0, help="data-fidelity radius (0 = exact)")
    r.add_argument("--no-weighting", action="store_true")
    r.add_argument("--stacked-coils", action="store_true")
    r.add_argument("--max-iters", type=int)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--output", required=True)
    r.add_argument("--report")
    r.add_argument("--reference")
    r.set_defaults(func=cmd_recon)

    s = sub.add_parser("synth", help="write a synthetic k-space grid")
    s.add_argument("--kind", choices=("piecewise-constant", "dirac", "cine", "kt-sparse"), default="piecewise-constant")
    s.add_argument("--dims", type=_dims)
    s.add_argument("--coils", type=int, default=1)
    s.add_argument("--k", type=int, default=4, help="number of Diracs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_synth)

    m = sub.add_parser("mask", help="write an undersampling mask")
    m.add_argument("--dims", type=_dims, required=True)
    m.add_argument("--accel", type=float, required=True)
    m.add_argument("--center", type=_dims, required=True)
    m.add_argument("--sigma", type=float, default=0.25)
    m.add_argument("--lines", action="store_true", help="k-t line mask; --dims NYxNT, --center lines")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--output", required=True)
    m.set_defaults(func=cmd_mask)

    n = sub.add_parser("nmse", help="print ||a - b||^2 / ||b||^2")
    n.add_argument("estimate")
    n.add_argument("reference")
    n.set_defaults(func=cmd_nmse)

    v = sub.add_parser("svplot", help="singular values of a grid's lift (CSV + PNG)")
    v.add_argument("--input", required=True)
    v.add_argument("--filter", type=_dims)
    v.add_argument("--weight-scale", type=int, help="apply the scale-s Haar weight first")
    v.add_argument("--csv", required=True)
    v.add_argument("--png")
    v.add_argument("--error-map", help="PNG of |image error| against --reference")
    v.add_argument("--reference")
    v.set_defaults(func=cmd_svplot)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"aloha: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, io.FormatError, CenterBlockTooSmall, FileNotFoundError) as exc:
        print(f"aloha: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PlanError as exc:
        print(f"aloha: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SolverDivergence as exc:
        print(f"aloha: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
