"""Command-line front end: ``tomo-bss <subcommand> ...``.

Exit codes: 0 on success, 2 for usage, configuration or malformed-input
errors, 3 for runtime data errors (for example a flat periodogram).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .covariance import sample_covariance, sign_covariance
from .errors import InvalidInputError, TomoBSSError
from .geometry import steering_vector
from .estimation import angular_bias, periodogram
from .experiments import (KINDS, emit_figure_data, read_rows, run_experiment, spec_from_dict,
                          truth_order)
from .io import load_scene, load_simulation_config, read_matrix, save_simulation_config, write_matrix
from .kernels import KernelSpec
from .separation import estimate_model_order, separate_scatterers
from .simulation import draw_stack

logger = logging.getLogger("tomobss")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3


class UsageError(Exception):
    """Bad command-line values that argparse cannot catch by itself."""


def parse_grid(text):
    """``"1,1.5,2"`` or an inclusive range ``"start:stop:step"``."""
    if text is None:
        return None
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None


def _read_json(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _dump(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _kernel_from_args(args):
    if args.kernel == "linear":
        return KernelSpec.linear()
    if args.kernel == "poly":
        return KernelSpec.polynomial(args.order)
    return KernelSpec.gaussian(beta=args.beta, sigma=args.sigma)


def _common(p, kernel=True):
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--seed", type=int, help="base seed (unsigned 64-bit)")
    p.add_argument("--out", help="output path")
    if kernel:
        p.add_argument("--kernel", choices=("gaussian", "poly", "linear"), default="gaussian")
        p.add_argument("--beta", type=float, default=5.0, help="Gaussian bandwidth multiplier")
        p.add_argument("--sigma", type=float, help="fixed Gaussian bandwidth (overrides --beta)")
        p.add_argument("--order", type=float, default=1.3, help="polynomial kernel order")
        p.add_argument("--kmax", type=int, default=2, help="maximum number of scatterers")
        p.add_argument("--threshold", type=float, help="intensity stopping threshold")
        p.add_argument("--robust", action="store_true", help="use the sign covariance matrix")
        p.add_argument("--no-center", action="store_true", help="disable all centering")
        p.add_argument("--refine-peak", action="store_true", help="quadratic periodogram refinement")


def build_parser():
    parser = argparse.ArgumentParser(prog="tomo-bss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one observation stack from a scene")
    _common(p, kernel=False)
    p.add_argument("--looks", type=int)
    p.add_argument("--noise-power", type=float)
    p.add_argument("--covariance", action="store_true", help="also write the sample covariance")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("separate", help="separate scatterers in a stack or covariance file")
    p.add_argument("input", help="binary matrix: N x M stack or N x N covariance")
    _common(p)
    p.add_argument("--input-kind", choices=("auto", "stack", "covariance"), default="auto")
    p.add_argument("--looks", type=int, help="looks behind a covariance input (enables order selection)")
    p.add_argument("--fixed-order", action="store_true", help="skip model-order selection")
    p.set_defaults(func=cmd_separate)

    for kind in KINDS[:4]:
        p = sub.add_parser(kind, help=f"Monte Carlo {kind.split('-')[1]} sweep")
        _common(p)
        p.add_argument("--runs", type=int)
        p.add_argument("--grid", help="values as 'a,b,c' or 'start:stop:step'")
        p.add_argument("--estimators", help="comma list of pca, kpca-gaussian, kpca-poly")
        p.add_argument("--looks", type=int)
        p.add_argument("--ratio", type=float, help="amplitude ratio of the brighter scatterer")
        p.add_argument("--distance", type=float, help="separation in Rayleigh resolutions")
        if kind != "sweep-snr":
            p.add_argument("--msnr", type=float, help="looks x SNR in dB (default noise-free)")
        p.set_defaults(func=cmd_sweep, kind=kind)

    p = sub.add_parser("figure-data", help="collect sweep CSVs into per-figure tables")
    p.add_argument("--results", default=".", help="directory holding sweep CSVs")
    p.add_argument("--out", help="output directory (default: results directory)")
    p.add_argument("--config", help="scene JSON supplying the geometry")
    p.add_argument("--seed", type=int, help="accepted for interface uniformity; unused")
    p.set_defaults(func=cmd_figure_data)
    return parser


def cmd_simulate(args):
    cfg = load_simulation_config(_read_json(args.config), seed=args.seed, looks=args.looks,
                                 noise_power=args.noise_power)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    G = draw_stack(cfg)
    write_matrix(os.path.join(out, "stack.bin"), G)
    if args.covariance:
        write_matrix(os.path.join(out, "covariance.bin"), sample_covariance(G))
    save_simulation_config(os.path.join(out, "scene.json"), cfg)
    logger.info("wrote %d x %d stack to %s", G.shape[0], G.shape[1], out)
    return EXIT_OK


def cmd_separate(args):
    doc = _read_json(args.config)
    geom, truth = load_scene(doc)
    A = read_matrix(args.input)
    N = geom.n_images
    if A.shape[0] != N:
        raise UsageError(f"{args.input} has {A.shape[0]} rows but the geometry has {N} images")
    kind = args.input_kind
    if kind == "auto":
        kind = "covariance" if A.shape == (N, N) and np.allclose(A, A.conj().T) else "stack"
    if kind == "covariance" and A.shape != (N, N):
        raise UsageError(f"covariance input must be {N} x {N}, got {A.shape}")
    looks = A.shape[1] if kind == "stack" else args.looks
    if kind == "stack":
        C = sign_covariance(A) if args.robust else sample_covariance(A)
    else:
        C = A
    if args.kmax < 1:
        raise UsageError("--kmax must be >= 1")
    kernel = _kernel_from_args(args)
    k = args.kmax
    notes = []
    if looks and not args.fixed_order:
        k = estimate_model_order(C, looks, k_max=args.kmax)
        notes.append(f"model order {k} selected from {looks} looks")
    threshold = args.threshold if args.threshold is not None else 0.05
    out = {"input": kind, "n_images": N, "looks": looks,
           "covariance": "sign" if (kind == "stack" and args.robust) else "sample",
           "kernel": kernel.describe(), "model_order": k, "estimates": []}
    if k == 0:
        notes.append("no signal: empty estimate list")
        out.update(residual_trace=float(np.real(np.trace(C))), stop="no-signal")
    else:
        res = separate_scatterers(C, kernel, k, threshold, "none" if args.no_center else None)
        out.update(residual_trace=res.residual_trace, stop=res.diagnostics.get("stop"),
                   overdeflated=res.diagnostics.get("overdeflated", 0))
        order = truth_order(truth) if truth else []
        truth_vecs = [truth[i] for i in order]
        for i, (y, p) in enumerate(zip(res.steering, res.intensities)):
            pk = periodogram(y, geom, refine=args.refine_peak)
            est = {"intensity": float(p), "phases_rad": np.angle(y).tolist(),
                   "elevation_m": pk.elevation, "peak_coherence": pk.coherence}
            if i < len(truth_vecs):
                t = truth_vecs[i]
                est["truth_elevation_m"] = t.elevation
                est["bias_deg"] = angular_bias(y, steering_vector(geom, t))
                est["elevation_error_m"] = pk.elevation - t.elevation
            out["estimates"].append(est)
        if not res.steering.shape[0]:
            notes.append("no signal above threshold: empty estimate list")
    out["notes"] = notes
    for n in notes:
        print(f"tomo-bss: {n}", file=sys.stderr)
    _dump(out, args.out)
    return EXIT_OK


def cmd_sweep(args):
    doc = _read_json(args.config)
    if doc.get("experiment", args.kind) != args.kind:
        raise UsageError(f"config is for {doc['experiment']!r}, not {args.kind!r}")
    estimators = args.estimators.split(",") if args.estimators else None
    if estimators is None and args.kind == "sweep-kernel" and "estimators" not in doc:
        estimators = ["kpca-poly"] if args.kernel == "poly" else ["kpca-gaussian"]
    if estimators is None and "estimators" not in doc and args.kind != "sweep-kernel":
        estimators = ["pca", "kpca-poly" if args.kernel == "poly" else "kpca-gaussian"]
    spec = spec_from_dict(
        doc, args.kind, seed=args.seed, looks=args.looks, runs=args.runs, out=args.out or ".",
        grid=parse_grid(args.grid), estimators=estimators, amplitude_ratio=args.ratio,
        distance_rayleigh=args.distance, msnr_db=getattr(args, "msnr", None), beta=args.beta,
        sigma=args.sigma, order=args.order, k_max=args.kmax, stop_threshold=args.threshold,
        center="none" if args.no_center else None, robust=args.robust or None)
    rows = run_experiment(spec)
    flagged = sum(int(r["flagged"]) for r in rows)
    logger.info("%s: %d rows written to %s", spec.kind, len(rows), spec.out)
    if flagged:
        print(f"tomo-bss: {flagged} row(s) flagged for failure rate above 50%", file=sys.stderr)
    return EXIT_OK


def cmd_figure_data(args):
    geom = load_scene(_read_json(args.config))[0] if args.config else None
    rows = []
    for kind in KINDS:
        path = os.path.join(args.results, f"{kind}.csv")
        if os.path.exists(path):
            rows.extend(read_rows(path))
    paths = emit_figure_data(rows, args.out or args.results, geom)
    for fig, path in paths.items():
        logger.info("%s -> %s", fig, path)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, InvalidInputError) as exc:
        print(f"tomo-bss: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"tomo-bss: error: {exc.filename}: file not found", file=sys.stderr)
        return EXIT_USAGE
    except TomoBSSError as exc:
        print(f"tomo-bss: runtime error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
