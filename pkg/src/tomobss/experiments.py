"""Seeded simulation studies: parameter sweeps over two-scatterer layover scenes.

Each grid point runs every requested estimator on the same Monte Carlo stacks
and produces one row per (estimator, scatterer).  Rows echo the grid-point
parameters, so a results CSV is readable without its JSON sidecar.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .covariance import sample_covariance, sign_covariance
from .errors import InvalidInputError
from .estimation import angular_bias, per_baseline_phase_bias
from .geometry import ScattererParams, model_covariance, rayleigh_resolution, steering_vector
from .kernels import KernelSpec
from .separation import kpca_dominant, pca_separate, separate_scatterers
from .simulation import SimulationConfig, monte_carlo

logger = logging.getLogger(__name__)

KINDS = ("sweep-amplitude", "sweep-distance", "sweep-snr", "sweep-kernel", "single-scene")
ESTIMATORS = ("pca", "kpca-gaussian", "kpca-poly")
GRID_PARAM = {"sweep-amplitude": "amplitude_ratio", "sweep-distance": "distance_rayleigh",
              "sweep-snr": "msnr_db", "sweep-kernel": "kernel_param", "single-scene": "none"}
DEFAULT_GRIDS = {
    "sweep-amplitude": [1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0],
    "sweep-distance": [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0],
    "sweep-snr": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
    "sweep-kernel": [1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.75, 2.0, 2.5],
    "single-scene": [0.0],
}
FLAG_FAILURE_RATE = 0.5

COLUMNS = ["experiment", "grid_param", "grid_value", "estimator", "amplitude_ratio",
           "distance_rayleigh", "msnr_db", "looks", "noise_power", "kernel_param", "scatterer",
           "true_angle_deg", "mean_bias_deg", "std_bias_deg", "mean_relative_bias",
           "mean_coherence", "runs", "failures", "flagged"]


@dataclass
class ExperimentSpec:
    """A fully resolved simulation study.

    ``base`` supplies geometry, looks, noise and seed.  The two-scatterer sweeps
    place the first scatterer at ``first_elevation`` with amplitude
    ``amplitude_ratio`` and the second, with unit amplitude, ``distance_rayleigh``
    Rayleigh resolutions above it.  ``single-scene`` uses ``base.scatterers``.
    The ratio defaults to 1.2 for ``sweep-kernel`` and 1 otherwise.
    For ``sweep-snr`` the signal-to-noise ratio is ``sum(amplitude^2) / (N * noise)``
    and the grid is ``looks * SNR`` in dB.
    """

    kind: str
    base: SimulationConfig = field(default_factory=SimulationConfig)
    grid: tuple = ()
    estimators: tuple = ("pca", "kpca-gaussian")
    runs: int = 200
    out: Optional[str] = None
    amplitude_ratio: Optional[float] = None
    distance_rayleigh: float = 1.0
    msnr_db: Optional[float] = None
    first_elevation: float = 40.0
    beta: float = 5.0
    sigma: Optional[float] = None
    order: float = 1.3
    k_max: int = 2
    stop_threshold: float = 0.0
    center: Optional[str] = None
    robust: bool = False
    threads: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown experiment {self.kind!r}; expected one of {KINDS}")
        if self.amplitude_ratio is None:
            self.amplitude_ratio = 1.2 if self.kind == "sweep-kernel" else 1.0
        self.grid = tuple(float(x) for x in (self.grid or DEFAULT_GRIDS[self.kind]))
        self.estimators = tuple(self.estimators)
        if not self.grid:
            raise InvalidInputError("grid is empty")
        if not self.estimators:
            raise InvalidInputError("no estimators requested")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad:
            raise InvalidInputError(f"unknown estimator(s) {bad}; expected a subset of {ESTIMATORS}")
        if int(self.runs) < 1:
            raise InvalidInputError("runs must be >= 1")
        self.runs = int(self.runs)
        if self.kind == "sweep-kernel" and "pca" in self.estimators:
            raise InvalidInputError("sweep-kernel only accepts kpca estimators")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["base"] = self.base.to_dict()
        d["grid"] = list(self.grid)
        d["estimators"] = list(self.estimators)
        return d


def grid_seed(seed: int, index: int) -> int:
    """Seed for grid point ``index``; all estimators at that point share it."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(0x67726964, int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def two_scatterer_scene(first_elevation, amplitude_ratio, distance, geom):
    rho = rayleigh_resolution(geom)
    return (ScattererParams(first_elevation, amplitude_ratio),
            ScattererParams(first_elevation + distance * rho, 1.0))


def noise_for_msnr(scatterers, n_images, looks, msnr_db):
    """Noise power giving ``looks * SNR = msnr_db`` with SNR = sum(sigma_k^2) / (N noise)."""
    snr = 10 ** (msnr_db / 10) / looks
    return sum(s.intensity for s in scatterers) / (n_images * snr)


def truth_order(scatterers):
    """Indices sorted by descending intensity, ties to the lower elevation."""
    return sorted(range(len(scatterers)), key=lambda k: (-scatterers[k].intensity, scatterers[k].elevation))


def make_estimator(name, spec: ExperimentSpec, kernel_param=None, dominant_only=False):
    """Stack -> steering estimates (brightest first) for Monte Carlo use."""
    covariance = sign_covariance if spec.robust else sample_covariance
    k_max = spec.k_max
    if name == "pca":
        return lambda G: list(pca_separate(covariance(G), k_max)[0])
    if name == "kpca-gaussian":
        beta = kernel_param if kernel_param is not None else spec.beta
        sigma = None if kernel_param is not None else spec.sigma
        kernel = KernelSpec.gaussian(beta=beta, sigma=sigma)
    else:
        kernel = KernelSpec.polynomial(kernel_param if kernel_param is not None else spec.order)
    if dominant_only:
        return lambda G: [kpca_dominant(covariance(G), kernel, center=spec.center).steering]
    return lambda G: list(separate_scatterers(covariance(G), kernel, k_max, spec.stop_threshold,
                                              spec.center).steering)


def _scene(spec: ExperimentSpec, value):
    base = spec.base
    geom = base.geometry
    ratio, dist, msnr, looks = spec.amplitude_ratio, spec.distance_rayleigh, spec.msnr_db, base.looks
    if spec.kind == "single-scene":
        scatterers = base.scatterers
        if not scatterers:
            raise InvalidInputError("single-scene needs scatterers in the base config")
    else:
        if spec.kind == "sweep-amplitude":
            ratio = value
        elif spec.kind == "sweep-distance":
            dist = value
        elif spec.kind == "sweep-snr":
            msnr = value
        scatterers = two_scatterer_scene(spec.first_elevation, ratio, dist, geom)
    noise = base.noise_power
    if msnr is not None:
        noise = noise_for_msnr(scatterers, geom.n_images, looks, msnr)
    params = {"amplitude_ratio": ratio if spec.kind != "single-scene" else math.nan,
              "distance_rayleigh": dist if spec.kind != "single-scene" else math.nan,
              "msnr_db": msnr if msnr is not None else math.nan,
              "looks": looks, "noise_power": noise,
              "kernel_param": value if spec.kind == "sweep-kernel" else math.nan}
    return scatterers, noise, params


def run_experiment(spec: ExperimentSpec, write=True):
    """Run all grid points and estimators; return the result rows.

    With ``write`` and ``spec.out`` set, ``<out>/<kind>.csv`` and a JSON sidecar
    with the resolved spec are written.
    """
    rows = []
    for gi, value in enumerate(spec.grid):
        scatterers, noise, params = _scene(spec, value)
        order = truth_order(scatterers)
        cfg = spec.base.replace(scatterers=tuple(scatterers[k] for k in order), noise_power=noise,
                                seed=grid_seed(spec.base.seed, gi))
        truth = cfg.steering_vectors()
        n_truth = 1 if spec.kind == "sweep-kernel" else len(truth)
        truth = truth[:n_truth]
        for name in spec.estimators:
            kp = value if spec.kind == "sweep-kernel" else None
            run_spec = replace(spec, k_max=len(scatterers)) if spec.kind == "single-scene" else spec
            est = make_estimator(name, run_spec, kp, dominant_only=spec.kind == "sweep-kernel")
            summary = monte_carlo(cfg, spec.runs, est, truth, spec.threads)
            flagged = summary.failure_rate > FLAG_FAILURE_RATE
            if flagged:
                logger.warning("%s at %s=%g: %d/%d runs failed", name, GRID_PARAM[spec.kind], value,
                               summary.failures, summary.runs)
            all_truth = cfg.steering_vectors()
            for k in range(n_truth):
                angle = (angular_bias(all_truth[1 - k], all_truth[k]) if len(all_truth) == 2
                         else math.nan)
                mean = float(summary.mean_bias[k])
                rows.append({
                    "experiment": spec.kind, "grid_param": GRID_PARAM[spec.kind], "grid_value": value,
                    "estimator": name, **params, "scatterer": k + 1, "true_angle_deg": angle,
                    "mean_bias_deg": mean, "std_bias_deg": float(summary.std_bias[k]),
                    "mean_relative_bias": mean / angle if angle and angle > 0 else math.nan,
                    "mean_coherence": float(summary.mean_coherence[k]),
                    "runs": summary.runs, "failures": summary.failures, "flagged": int(flagged),
                })
    if write and spec.out:
        os.makedirs(spec.out, exist_ok=True)
        write_rows(os.path.join(spec.out, f"{spec.kind}.csv"), rows, COLUMNS)
        with open(os.path.join(spec.out, f"{spec.kind}.json"), "w") as fh:
            json.dump(spec.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in columns])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- figure analogues -------------------------------------------------------

FIGURES = {
    "fig3": ["alpha", "baseline_m", "bias_first_deg", "bias_second_deg"],
    "fig5": ["amplitude_ratio", "estimator", "scatterer", "mean_bias_deg", "std_bias_deg"],
    "fig6": ["distance_rayleigh", "estimator", "scatterer", "mean_bias_deg", "std_bias_deg",
             "true_angle_deg", "mean_relative_bias"],
    "fig7": ["msnr_db", "amplitude_ratio", "estimator", "scatterer", "mean_bias_deg", "std_bias_deg"],
    "fig9": ["estimator", "kernel_param", "mean_coherence", "mean_bias_deg"],
}
_SOURCE = {"fig5": "sweep-amplitude", "fig6": "sweep-distance", "fig7": "sweep-snr", "fig9": "sweep-kernel"}


def figure3_rows(geom=None, alphas=(1.2, 2.0), first_elevation=40.0, second_elevation=80.0):
    """Per-baseline phase bias of the two leading eigenvectors of the exact covariance."""
    from .geometry import default_geometry
    geom = geom or default_geometry()
    rows = []
    for alpha in alphas:
        sc = (ScattererParams(first_elevation, alpha), ScattererParams(second_elevation, 1.0))
        U, _ = pca_separate(model_covariance(geom, sc), 2)
        b1 = per_baseline_phase_bias(U[0], steering_vector(geom, sc[0]))
        b2 = per_baseline_phase_bias(U[1], steering_vector(geom, sc[1]))
        for B, x1, x2 in zip(geom.baselines, b1, b2):
            rows.append({"alpha": float(alpha), "baseline_m": B, "bias_first_deg": float(x1),
                         "bias_second_deg": float(x2)})
    return rows


def emit_figure_data(rows, out_dir, geom=None):
    """Write one CSV per figure analogue; return {figure: path}.

    ``rows`` are result rows from any mix of experiments; figures without
    matching rows get a header-only CSV.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for fig, cols in FIGURES.items():
        if fig == "fig3":
            sel = figure3_rows(geom)
        else:
            sel = [r for r in rows if r.get("experiment") == _SOURCE[fig]]
        path = os.path.join(out_dir, f"{fig}.csv")
        write_rows(path, sel, cols)
        paths[fig] = path
    return paths


_SPEC_KEYS = {"grid", "estimators", "runs", "out", "amplitude_ratio", "distance_rayleigh", "msnr_db",
              "first_elevation", "beta", "sigma", "order", "k_max", "stop_threshold", "center",
              "robust", "threads"}


def spec_from_dict(doc, kind=None, **overrides):
    """Build an :class:`ExperimentSpec` from a JSON-style dict.

    The optional ``"scene"`` entry is a simulation config (geometry, scatterers,
    noise, looks, seed).  ``looks`` and ``seed`` may also appear at top level.
    Non-``None`` keyword overrides win over the document.
    """
    from .io import load_simulation_config

    doc = dict(doc or {})
    kind = kind or doc.get("experiment")
    if kind is None:
        raise InvalidInputError("experiment kind is not set")
    unknown = set(doc) - _SPEC_KEYS - {"experiment", "scene", "looks", "seed"}
    if unknown:
        raise InvalidInputError(f"unknown experiment keys: {sorted(unknown)}")
    looks = overrides.pop("looks", None) or doc.get("looks")
    if looks is None and kind == "sweep-snr":
        looks = 100
    seed = overrides.pop("seed", None)
    if seed is None:
        seed = doc.get("seed")
    base = load_simulation_config(doc.get("scene", {}), looks=looks, seed=seed)
    kw = {k: doc[k] for k in _SPEC_KEYS if k in doc}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    if kind == "sweep-snr" and kw.get("msnr_db") is not None:
        raise InvalidInputError("msnr_db is the swept parameter of sweep-snr")
    return ExperimentSpec(kind=kind, base=base, **kw)
