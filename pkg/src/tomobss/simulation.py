"""Swerling-II observation stacks and a seeded Monte Carlo harness."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._validation import check_positive
from .errors import InvalidInputError
from .estimation import angular_bias, ensemble_coherence
from .geometry import AcquisitionGeometry, ScattererParams, default_geometry, steering_vector

logger = logging.getLogger(__name__)

THREADS_ENV = "TOMO_BSS_THREADS"


@dataclass(frozen=True)
class SimulationConfig:
    """Scene and sampling parameters for one observation stack."""

    geometry: AcquisitionGeometry = field(default_factory=default_geometry)
    scatterers: tuple = ()
    noise_power: float = 0.0
    looks: int = 900
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(
            s if isinstance(s, ScattererParams) else ScattererParams(**s) for s in self.scatterers))
        object.__setattr__(self, "noise_power", check_positive(self.noise_power, "noise_power", allow_zero=True))
        if int(self.looks) < 1:
            raise InvalidInputError(f"looks must be >= 1, got {self.looks}")
        object.__setattr__(self, "looks", int(self.looks))
        seed = int(self.seed)
        if not 0 <= seed < 2 ** 64:
            raise InvalidInputError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", seed)

    def replace(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)

    def steering_vectors(self) -> list:
        return [steering_vector(self.geometry, s) for s in self.scatterers]

    def to_dict(self) -> dict:
        out = self.geometry.to_dict()
        out.update({"scatterers": [s.to_dict() for s in self.scatterers],
                    "noise_power": self.noise_power, "looks": self.looks, "seed": self.seed})
        return out


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Independent generator for Monte Carlo run ``run`` under base ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(run),)))


def _cn(rng, shape, power):
    # CN(0, power) as (x + jy) * sqrt(power / 2)
    z = rng.standard_normal((2,) + shape)
    return (z[0] + 1j * z[1]) * np.sqrt(power / 2)


def draw_stack(config: SimulationConfig, rng=None) -> np.ndarray:
    """Draw an (N, M) stack: ``sum_k gamma_k r_k + noise`` per column.

    With unit-norm steering vectors the expected covariance is exactly
    ``model_covariance(geometry, scatterers, noise_power)``.

    Amplitudes ``gamma_k`` are independent CN(0, amplitude_k^2) per look; noise is
    CN(0, noise_power I).  Without ``rng`` the stack depends only on ``config.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    N, M = config.geometry.n_images, config.looks
    K = len(config.scatterers)
    gammas = _cn(rng, (K, M), 1.0)
    noise = _cn(rng, (N, M), config.noise_power)
    G = noise
    if K:
        R = np.column_stack(config.steering_vectors())
        amps = np.array([s.amplitude for s in config.scatterers])
        G = G + R @ (amps[:, None] * gammas)
    return G


@dataclass
class MonteCarloSummary:
    """Per-scatterer angular bias statistics over Monte Carlo runs (degrees)."""

    mean_bias: np.ndarray
    std_bias: np.ndarray
    runs: int
    failures: int
    biases: np.ndarray
    coherences: np.ndarray

    @property
    def mean_coherence(self) -> np.ndarray:
        return _nanmean(self.coherences)

    @property
    def failure_rate(self) -> float:
        return self.failures / self.runs


def _nanmean(a):
    a = np.asarray(a, dtype=float)
    ok = ~np.isnan(a)
    n = ok.sum(axis=0)
    s = np.where(ok, a, 0.0).sum(axis=0)
    return np.where(n > 0, s / np.maximum(n, 1), np.nan)


def _nanstd(a):
    a = np.asarray(a, dtype=float)
    m = _nanmean(a)
    ok = ~np.isnan(a)
    n = ok.sum(axis=0)
    s = np.where(ok, (a - m) ** 2, 0.0).sum(axis=0)
    return np.where(n > 0, np.sqrt(s / np.maximum(n, 1)), np.nan)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def monte_carlo(config: SimulationConfig, runs: int, estimator: Callable[[np.ndarray], Sequence],
                truth: Sequence, threads=None) -> MonteCarloSummary:
    """Repeat draw -> estimate -> score ``runs`` times.

    ``estimator`` maps an (N, M) stack to steering estimates ordered brightest
    first; estimate k is scored against ``truth[k]``.  A run whose estimator
    raises or returns too few estimates counts as a failure.  Results do not
    depend on ``threads`` or on execution order.
    """
    runs = int(runs)
    if runs < 1:
        raise InvalidInputError("runs must be >= 1")
    truth = [np.asarray(t) for t in truth]
    K = len(truth)

    def one(run):
        G = draw_stack(config, run_rng(config.seed, run))
        try:
            est = list(estimator(G))
        except Exception as exc:  # counted, not fatal
            logger.debug("run %d: estimator failed: %s", run, exc)
            return None
        if len(est) < K:
            return None
        return ([angular_bias(est[k], truth[k]) for k in range(K)],
                [ensemble_coherence(est[k], truth[k]) for k in range(K)])

    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(one, range(runs)))
    else:
        outcomes = [one(r) for r in range(runs)]

    biases = np.full((runs, K), np.nan)
    cohs = np.full((runs, K), np.nan)
    failures = 0
    for r, out in enumerate(outcomes):
        if out is None:
            failures += 1
            continue
        biases[r], cohs[r] = out
    return MonteCarloSummary(_nanmean(biases), _nanstd(biases), runs, failures, biases, cohs)
