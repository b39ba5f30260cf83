"""Multibaseline acquisition geometry, steering vectors and the coherent covariance model.

Phase convention: an image at perpendicular baseline ``B_n`` sees a scatterer at
elevation ``s`` with phase ``-4*pi*B_n*s/(wavelength*range)``; line-of-sight motion
``d_n`` adds ``-4*pi*d_n/wavelength``.  Steering vectors are stored with unit
Euclidean norm, i.e. every entry has modulus ``1/sqrt(N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._validation import check_positive
from .errors import DegenerateGeometryError, InvalidInputError

#: Default simulation geometry: nine images, baselines -200..200 m and a
#: wavelength-range product of 21840 m^2, which gives a 27.3 m Rayleigh resolution.
DEFAULT_N_IMAGES = 9
DEFAULT_BASELINE_SPAN = 200.0
DEFAULT_WAVELENGTH = 0.031
DEFAULT_RANGE = 704516.0


@dataclass(frozen=True)
class AcquisitionGeometry:
    """Perpendicular baselines (m), radar wavelength (m) and slant range (m)."""

    baselines: tuple
    wavelength: float
    range: float

    def __post_init__(self):
        b = np.asarray(self.baselines, dtype=float).ravel()
        if b.size < 2:
            raise InvalidInputError("at least two baselines are required")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("baselines must be finite")
        object.__setattr__(self, "baselines", tuple(float(x) for x in b))
        object.__setattr__(self, "wavelength", check_positive(self.wavelength, "wavelength"))
        object.__setattr__(self, "range", check_positive(self.range, "range"))
        if np.ptp(b) == 0:
            raise DegenerateGeometryError("baselines are all identical (zero aperture)")

    @property
    def n_images(self) -> int:
        return len(self.baselines)

    @property
    def baseline_array(self) -> np.ndarray:
        return np.asarray(self.baselines)

    @property
    def aperture(self) -> float:
        return float(np.ptp(self.baselines))

    @property
    def elevation_frequencies(self) -> np.ndarray:
        """Phase per metre of elevation for each image, ``4*pi*B_n/(wavelength*range)``."""
        return 4 * np.pi * self.baseline_array / (self.wavelength * self.range)

    @classmethod
    def uniform(cls, n_images=DEFAULT_N_IMAGES, span=DEFAULT_BASELINE_SPAN,
                wavelength=DEFAULT_WAVELENGTH, range_=DEFAULT_RANGE):
        """Equally spaced baselines over ``[-span, span]``."""
        return cls(tuple(np.linspace(-span, span, n_images)), wavelength, range_)

    def to_dict(self) -> dict:
        return {"baselines_m": list(self.baselines), "wavelength_m": self.wavelength,
                "range_m": self.range}


def default_geometry() -> AcquisitionGeometry:
    return AcquisitionGeometry.uniform()


@dataclass(frozen=True)
class DeformationTerm:
    """One motion-model term: ``coefficient * basis[n]`` metres of LOS motion at image n.

    For a linear rate, ``coefficient`` is in m/year and ``basis`` holds the
    per-image time offsets in years.
    """

    coefficient: float
    basis: tuple

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float).ravel()
        if not np.isfinite(self.coefficient) or not np.all(np.isfinite(basis)):
            raise InvalidInputError("deformation terms must be finite")
        object.__setattr__(self, "coefficient", float(self.coefficient))
        object.__setattr__(self, "basis", tuple(float(x) for x in basis))


@dataclass(frozen=True)
class ScattererParams:
    """A single scatterer: elevation (m), linear amplitude and optional motion terms."""

    elevation: float
    amplitude: float = 1.0
    deformation: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not np.isfinite(self.elevation):
            raise InvalidInputError(f"elevation must be finite, got {self.elevation}")
        object.__setattr__(self, "elevation", float(self.elevation))
        object.__setattr__(self, "amplitude", check_positive(self.amplitude, "amplitude", allow_zero=True))
        terms = tuple(t if isinstance(t, DeformationTerm) else DeformationTerm(*t)
                      for t in self.deformation)
        object.__setattr__(self, "deformation", terms)

    @property
    def intensity(self) -> float:
        return self.amplitude ** 2

    def displacement(self, n_images: int) -> np.ndarray:
        d = np.zeros(n_images)
        for term in self.deformation:
            if len(term.basis) != n_images:
                raise InvalidInputError(
                    f"deformation basis has {len(term.basis)} values, expected {n_images}")
            d += term.coefficient * np.asarray(term.basis)
        return d

    def to_dict(self) -> dict:
        out = {"elevation_m": self.elevation, "amplitude": self.amplitude}
        if self.deformation:
            out["deformation"] = [{"coefficient": t.coefficient, "basis": list(t.basis)}
                                  for t in self.deformation]
        return out


def steering_vector(geom: AcquisitionGeometry, scatterer) -> np.ndarray:
    """Unit-norm steering vector of ``scatterer`` (a ScattererParams or an elevation)."""
    if not isinstance(scatterer, ScattererParams):
        scatterer = ScattererParams(float(scatterer))
    N = geom.n_images
    phase = geom.elevation_frequencies * scatterer.elevation
    if scatterer.deformation:
        phase = phase + 4 * np.pi * scatterer.displacement(N) / geom.wavelength
    return np.exp(-1j * phase) / np.sqrt(N)


def steering_matrix(geom: AcquisitionGeometry, elevations, displacements=None) -> np.ndarray:
    """Stack of steering vectors, shape (N, L), for L elevations.

    ``displacements`` optionally gives the LOS motion per candidate, shape (L, N).
    """
    s = np.atleast_1d(np.asarray(elevations, dtype=float))
    phase = np.outer(geom.elevation_frequencies, s)
    if displacements is not None:
        phase = phase + 4 * np.pi * np.asarray(displacements, dtype=float).T / geom.wavelength
    return np.exp(-1j * phase) / np.sqrt(geom.n_images)


def rayleigh_resolution(geom: AcquisitionGeometry) -> float:
    """Elevation resolution ``wavelength*range / (2*aperture)`` in metres."""
    if geom.aperture <= 0:
        raise DegenerateGeometryError("zero baseline aperture")
    return geom.wavelength * geom.range / (2 * geom.aperture)


def ambiguity_height(geom: AcquisitionGeometry) -> float:
    """Elevation period of the steering manifold for the mean baseline spacing.

    Exact for uniformly spaced baselines; a nominal value otherwise.
    """
    spacing = geom.aperture / (geom.n_images - 1)
    return geom.wavelength * geom.range / (2 * spacing)


def model_covariance(geom: AcquisitionGeometry, scatterers: Sequence[ScattererParams],
                     noise_power: float = 0.0) -> np.ndarray:
    """Fully coherent covariance ``sum_k sigma_k^2 r_k r_k^H + noise_power * I``."""
    noise_power = check_positive(noise_power, "noise_power", allow_zero=True)
    if not scatterers and noise_power == 0:
        raise InvalidInputError("need at least one scatterer or positive noise power")
    N = geom.n_images
    C = noise_power * np.eye(N, dtype=np.complex128)
    for sc in scatterers:
        r = steering_vector(geom, sc)
        C += sc.intensity * np.outer(r, r.conj())
    return 0.5 * (C + C.conj().T)

