"""Elevation estimation from steering estimates, and quality metrics."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_vector
from .errors import InvalidInputError, NoPeakError, UndefinedRatioError
from .geometry import AcquisitionGeometry, ambiguity_height, rayleigh_resolution, steering_matrix

DEFAULT_MAX_POINTS = 1_000_000


def _axis(lo, hi, step, name):
    if not (np.isfinite(lo) and np.isfinite(hi) and np.isfinite(step)):
        raise InvalidInputError(f"{name} grid bounds must be finite")
    if step <= 0:
        raise InvalidInputError(f"{name} step must be > 0, got {step}")
    if hi < lo:
        raise InvalidInputError(f"{name} range is empty ({lo} > {hi})")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass(frozen=True)
class DeformationAxis:
    """A searched motion coefficient: LOS motion ``p * basis[n]`` at image n."""

    basis: tuple
    start: float
    stop: float
    step: float

    def values(self):
        return _axis(self.start, self.stop, self.step, "deformation")


@dataclass(frozen=True)
class PeriodogramGrid:
    """Search grid over elevation (m) and, optionally, motion coefficients."""

    s_min: float
    s_max: float
    step: float
    deformation: tuple = field(default_factory=tuple)
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        axes = tuple(a if isinstance(a, DeformationAxis) else DeformationAxis(*a)
                     for a in self.deformation)
        object.__setattr__(self, "deformation", axes)
        if self.size > self.max_points:
            raise InvalidInputError(f"grid has {self.size} points, cap is {self.max_points}")

    @property
    def elevations(self) -> np.ndarray:
        return _axis(self.s_min, self.s_max, self.step, "elevation")

    @property
    def shape(self) -> tuple:
        return (len(self.elevations),) + tuple(len(a.values()) for a in self.deformation)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @classmethod
    def default(cls, geom: AcquisitionGeometry, step=None):
        """One ambiguity interval centred on zero, sampled at 1/100 of the Rayleigh resolution."""
        half = ambiguity_height(geom) / 2
        step = step or rayleigh_resolution(geom) / 100
        n = int(np.floor(half / step))
        return cls(-n * step, n * step, step)


@dataclass
class PeriodogramResult:
    elevation: float
    deformation: tuple
    coherence: float
    profile: Optional[np.ndarray] = None


def _candidates(geom, grid):
    s = grid.elevations
    if not grid.deformation:
        return steering_matrix(geom, s), s[:, None]
    coords = np.array(list(itertools.product(s, *[a.values() for a in grid.deformation])))
    N = geom.n_images
    disp = np.zeros((len(coords), N))
    for i, axis in enumerate(grid.deformation):
        basis = np.asarray(axis.basis, dtype=float)
        if basis.size != N:
            raise InvalidInputError(f"deformation basis has {basis.size} values, expected {N}")
        disp += np.outer(coords[:, i + 1], basis)
    return steering_matrix(geom, coords[:, 0], disp), coords


def periodogram(r_hat, geom: AcquisitionGeometry, grid: Optional[PeriodogramGrid] = None,
                refine=False, return_profile=False):
    """Grid search for the elevation (and motion) that best explains ``r_hat``.

    The coherence ``|r(s, p)^H r_hat| / ||r_hat||`` is maximised; exact ties go to
    the smallest elevation, then the smallest motion coefficients.  With
    ``refine`` a three-point parabola through the elevation neighbours of the
    peak refines the elevation between nodes.
    """
    grid = grid or PeriodogramGrid.default(geom)
    r_hat = check_vector(r_hat, "r_hat", n=geom.n_images)
    nrm = np.linalg.norm(r_hat)
    if nrm == 0:
        raise InvalidInputError("r_hat is the zero vector")
    A, coords = _candidates(geom, grid)
    coh = np.abs(A.conj().T @ (r_hat / nrm))
    if coh.max() - coh.min() < 1e-12:
        raise NoPeakError("periodogram profile is flat")
    best = int(np.flatnonzero(coh >= coh.max() - 1e-12)[0])
    s_hat = float(coords[best, 0])
    profile = coh.reshape(grid.shape)
    if refine:
        idx = np.unravel_index(best, grid.shape)
        i = idx[0]
        if 0 < i < grid.shape[0] - 1:
            line = profile[(slice(None),) + tuple(idx[1:])]
            ym, y0, yp = line[i - 1], line[i], line[i + 1]
            denom = ym - 2 * y0 + yp
            if denom < 0:
                s_hat += 0.5 * (ym - yp) / denom * grid.step
    return PeriodogramResult(s_hat, tuple(float(x) for x in coords[best, 1:]), float(coh[best]),
                             profile if return_profile else None)


def write_profile_csv(path, geom, grid, r_hat):
    """Write the full periodogram profile as CSV: ``s_m, [p_1, ...], coherence``."""
    A, coords = _candidates(geom, grid)
    r_hat = check_vector(r_hat, "r_hat", n=geom.n_images)
    coh = np.abs(A.conj().T @ (r_hat / np.linalg.norm(r_hat)))
    header = ["s_m"] + [f"p_{i + 1}" for i in range(len(grid.deformation))] + ["coherence"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for c, v in zip(coords, coh):
            w.writerow([repr(float(x)) for x in c] + [repr(float(v))])


def angular_bias(r_hat, r):
    """Angle ``arccos |r_hat^H r|`` in degrees between the normalized vectors.

    Evaluated as ``atan2(sin, cos)`` with the sine taken from the component of
    ``r_hat`` orthogonal to ``r``, which stays accurate for tiny angles.
    """
    r_hat = check_vector(r_hat, "r_hat")
    r = check_vector(r, "r", n=r_hat.size)
    a, b = np.linalg.norm(r_hat), np.linalg.norm(r)
    if a == 0 or b == 0:
        raise InvalidInputError("angular_bias of a zero vector")
    u, v = r_hat / a, r / b
    inner = np.vdot(v, u)
    sin = np.linalg.norm(u - inner * v)
    return float(np.degrees(np.arctan2(sin, abs(inner))))


def relative_angular_bias(r_hat, r_true, r_other):
    """Bias of ``r_hat`` relative to the angle between the two true steering vectors."""
    denom = angular_bias(r_other, r_true)
    if denom < 1e-12:
        raise UndefinedRatioError("true steering vectors coincide")
    return angular_bias(r_hat, r_true) / denom


def ensemble_coherence(y, r):
    """``|y_bar^H r_bar| / N`` of the unit-modulus (phase only) versions of y and r."""
    y = check_vector(y, "y")
    r = check_vector(r, "r", n=y.size)
    yb = np.exp(1j * np.angle(y))
    rb = np.exp(1j * np.angle(r))
    return float(min(1.0, abs(np.vdot(yb, rb)) / y.size))


def wrap_degrees(x):
    """Wrap angles in degrees to (-180, 180]."""
    x = np.asarray(x, dtype=float)
    return x - 360.0 * np.ceil((x - 180.0) / 360.0)


def per_baseline_phase_bias(r_hat, r):
    """Per-image phase error of ``r_hat`` against ``r`` in degrees, common offset removed.

    The offset is chosen so that the wrapped differences have zero mean.
    """
    r_hat = check_vector(r_hat, "r_hat")
    r = check_vector(r, "r", n=r_hat.size)
    z = np.exp(1j * np.angle(r_hat * np.conj(r)))
    m = z.mean()
    if abs(m) > 0:
        z = z * np.conj(m) / abs(m)
    d = np.degrees(np.angle(z))
    return wrap_degrees(d - d.mean())
