"""Blind separation of layovered scatterers from a multibaseline covariance matrix.

The dominant scatterer is extracted by kernel PCA over the columns of the
covariance matrix, its intensity is measured with a Rayleigh quotient, and its
rank-one contribution is deflated before the next extraction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ._validation import check_hermitian, check_vector
from .covariance import center_columns, center_kernel, hermitian
from .errors import DegenerateInputError, InvalidInputError, NoSignalError
from .kernels import KernelSpec, kernel_matrix

logger = logging.getLogger(__name__)

#: Centering modes for kpca_dominant.  "input" subtracts the mean column of the
#: covariance matrix before the kernel is evaluated; "kernel" centres the Gram
#: matrix in feature space; "both" does both; "none" does neither.
CENTER_MODES = ("input", "kernel", "both", "none")
#: "preimage" back-projects the dominant kernel component onto the (centred)
#: covariance columns; "kernel" takes the phase of the kernel projection K v / sqrt(s).
PROJECTIONS = ("preimage", "kernel")

DEFAULT_STOP_THRESHOLD = 0.05
NO_SIGNAL_RTOL = 1e-12


def amplitude_drop(y):
    """Keep only the phase of each entry, scaled to unit Euclidean norm."""
    y = check_vector(y, "y")
    return np.exp(1j * np.angle(y)) / np.sqrt(y.size)


def _fix_phase_first_nonzero(V):
    V = V.copy()
    for k in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, k]) > 1e-14 * np.abs(V[:, k]).max())
        if nz.size:
            a = V[nz[0], k]
            V[:, k] *= np.conj(a) / abs(a)
    return V


def _fix_phase_largest(v):
    i = int(np.argmax(np.abs(v)))
    a = v[i]
    return v * (np.conj(a) / abs(a)) if abs(a) > 0 else v


def pca_components(C):
    """Eigen-decomposition of a Hermitian matrix, sorted by descending eigenvalue.

    Each eigenvector is rotated so that its first non-negligible entry is real
    and positive.

    Returns
    -------
    vectors : ndarray, shape (N, N)
        Orthonormal eigenvectors in columns.
    values : ndarray, shape (N,)
        Real eigenvalues, descending.
    """
    C = check_hermitian(C)
    w, U = np.linalg.eigh(C)
    order = np.argsort(w)[::-1]
    return _fix_phase_first_nonzero(U[:, order]), w[order]


@dataclass
class KernelComponent:
    """Dominant kernel principal component and its steering estimate."""

    steering: np.ndarray
    weights: np.ndarray
    eigenvalue: float
    projection: np.ndarray
    info: dict = field(default_factory=dict)


def default_center(kernel: KernelSpec) -> str:
    """Centering used when none is requested.

    The polynomial kernel's constant offset makes the all-ones vector the leading
    eigenvector of its uncentred Gram matrix, and the centred columns map that
    vector to zero, so its Gram matrix is centred as well.
    """
    return "both" if kernel.kind == "polynomial" else "input"


def kpca_dominant(C, kernel: Optional[KernelSpec] = None, center=None, projection="preimage"):
    """Extract the steering vector of the currently dominant scatterer.

    The columns of ``C`` (optionally mean-removed) are mapped through ``kernel``;
    the top eigenvector ``v`` of the kernel matrix with eigenvalue ``s`` weights the
    columns, ``y = X v / sqrt(s)``, and the amplitude-dropped ``y`` is the estimate.
    With ``projection="kernel"`` the projection ``K v / sqrt(s)`` is used instead,
    which only carries phase information for complex kernels (linear, polynomial).

    Raises
    ------
    NoSignalError
        If the kernel spectrum has no significant component.
    """
    kernel = kernel or KernelSpec()
    center = center or default_center(kernel)
    if center not in CENTER_MODES:
        raise InvalidInputError(f"center must be one of {CENTER_MODES}, got {center!r}")
    if projection not in PROJECTIONS:
        raise InvalidInputError(f"projection must be one of {PROJECTIONS}, got {projection!r}")
    C = check_hermitian(C)
    X = center_columns(C) if center in ("input", "both") else C
    try:
        K, info = kernel_matrix(X, kernel, return_info=True)
    except DegenerateInputError as exc:
        raise NoSignalError(str(exc)) from exc
    scale = float(np.abs(np.trace(K)))
    if center in ("kernel", "both"):
        K = center_kernel(K)
    s, V = np.linalg.eigh(K)
    s1, v1 = float(s[-1]), _fix_phase_largest(V[:, -1])
    if not s1 > NO_SIGNAL_RTOL * scale:
        raise NoSignalError(f"top kernel eigenvalue {s1:.3g} is negligible")
    if projection == "preimage":
        y = X @ v1 / np.sqrt(s1)
    else:
        y = K @ v1 / np.sqrt(s1)
    if not np.any(np.abs(y) > 0):
        raise NoSignalError("dominant component projects to zero")
    info["center"] = center
    info["projection"] = projection
    return KernelComponent(amplitude_drop(y), v1, s1, y, info)


def rayleigh_intensity(C, y, per_image=False):
    """Intensity of the scatterer with phase vector ``y`` by a Rayleigh quotient.

    Returns ``y^H C y / (y^H y)``, clipped at zero: for ``C = sigma^2 r r^H`` and
    ``y`` in phase with ``r`` this is ``sigma^2``, so deflating with the unit-norm
    ``y`` cancels the scatterer exactly.  ``per_image=True`` returns that value
    divided by N, which is the intensity attached to the unit-modulus vector.
    """
    C = check_hermitian(C)
    y = check_vector(y, "y", n=C.shape[0])
    norm2 = float(np.vdot(y, y).real)
    if norm2 == 0:
        raise InvalidInputError("y is the zero vector")
    q = max(float(np.vdot(y, C @ y).real) / norm2, 0.0)
    return q / C.shape[0] if per_image else q


def deflate(C, y, intensity):
    """Remove ``intensity * u u^H`` from ``C``, with ``u = y / ||y||``."""
    C = check_hermitian(C)
    y = check_vector(y, "y", n=C.shape[0])
    u = y / np.linalg.norm(y)
    return hermitian(C - intensity * np.outer(u, u.conj()))


def overdeflated(C_before, C_after) -> bool:
    """True when deflation left an eigenvalue below -0.1 * trace(C_before)."""
    tr = float(np.trace(C_before).real)
    return tr > 0 and np.linalg.eigvalsh(C_after)[0] < -0.1 * tr


class Reestimate(NamedTuple):
    intensity1: float
    intensity2: float
    converged: bool
    iterations: int


def reestimate_two(C, r1, r2, max_iters=100, tol=1e-10):
    """Refine two intensities by alternating Rayleigh quotients.

    Each step re-measures one scatterer on ``C`` minus the other's current
    contribution.  Identical directions make the system singular; that case is
    reported as not converged.
    """
    C = check_hermitian(C)
    u1 = check_vector(r1, "r1", n=C.shape[0])
    u2 = check_vector(r2, "r2", n=C.shape[0])
    u1 = u1 / np.linalg.norm(u1)
    u2 = u2 / np.linalg.norm(u2)
    q1 = float(np.vdot(u1, C @ u1).real)
    q2 = float(np.vdot(u2, C @ u2).real)
    rho2 = abs(np.vdot(u1, u2)) ** 2
    s1, s2 = max(q1, 0.0), 0.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        new1 = max(q1 - s2 * rho2, 0.0)
        new2 = max(q2 - new1 * rho2, 0.0)
        change = max(abs(new1 - s1), abs(new2 - s2))
        s1, s2 = new1, new2
        if change <= tol * max(1.0, abs(q1) + abs(q2)):
            converged = True
            break
    if 1 - rho2 ** 2 < 1e-12:
        converged = False
    return Reestimate(s1, s2, converged, it)


@dataclass
class SeparationResult:
    """Ordered scatterer estimates.

    Attributes
    ----------
    steering : ndarray, shape (K, N)
        Unit-norm, constant-modulus steering estimates, brightest first.
    intensities : ndarray, shape (K,)
        Rayleigh-quotient intensities, descending.
    residual : ndarray, shape (N, N)
        Covariance left after all deflations.
    iterations : int
        Number of kernel PCA extractions attempted.
    diagnostics : dict
    """

    steering: np.ndarray
    intensities: np.ndarray
    residual: np.ndarray
    iterations: int
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.intensities)

    @property
    def residual_trace(self) -> float:
        return float(np.trace(self.residual).real)


def separate_scatterers(C, kernel: Optional[KernelSpec] = None, k_max=2,
                        stop_threshold=DEFAULT_STOP_THRESHOLD, center=None,
                        projection="preimage", reestimate=False):
    """Sequentially extract up to ``k_max`` scatterers from covariance ``C``.

    Extraction stops early when an intensity falls below
    ``stop_threshold * trace(C) / N``.  Deflations that leave a strongly
    negative eigenvalue are counted in ``diagnostics["overdeflated"]``.
    """
    if int(k_max) < 1:
        raise InvalidInputError(f"k_max must be >= 1, got {k_max}")
    C0 = check_hermitian(C)
    N = C0.shape[0]
    floor = stop_threshold * float(np.trace(C0).real) / N
    work = C0.copy()
    vectors, intensities = [], []
    kernel = kernel or KernelSpec()
    center = center or default_center(kernel)
    diag = {"stop": "k_max", "kernel": kernel.describe(), "center": center, "overdeflated": 0}
    iterations = 0
    while len(vectors) < int(k_max):
        iterations += 1
        try:
            comp = kpca_dominant(work, kernel, center=center, projection=projection)
        except NoSignalError as exc:
            diag["stop"] = "no-signal"
            diag["message"] = str(exc)
            break
        sigma2 = rayleigh_intensity(work, comp.steering)
        if sigma2 < floor:
            diag["stop"] = "threshold"
            break
        vectors.append(comp.steering)
        intensities.append(sigma2)
        updated = deflate(work, comp.steering, sigma2)
        if overdeflated(work, updated):
            diag["overdeflated"] += 1
            logger.debug("deflation %d left a strongly negative eigenvalue", len(vectors))
        work = updated

    if reestimate and len(vectors) == 2:
        re = reestimate_two(C0, vectors[0], vectors[1])
        diag["reestimate_converged"] = re.converged
        intensities = [re.intensity1, re.intensity2]
        work = C0 - sum(s * np.outer(v, v.conj()) for s, v in zip(intensities, vectors))
        work = hermitian(work)

    order = sorted(range(len(intensities)), key=lambda k: -intensities[k])
    steering = np.array([vectors[k] for k in order]).reshape(len(order), N)
    return SeparationResult(steering, np.array([intensities[k] for k in order]),
                            work, iterations, diag)


def pca_separate(C, n_components=2):
    """PCA baseline: the leading eigenvectors (unnormalized phases) and eigenvalues."""
    U, w = pca_components(C)
    return U[:, :n_components].T.copy(), w[:n_components].copy()


def estimate_model_order(C, n_looks, k_max=None):
    """Number of scatterers by the eigenvalue minimum description length rule."""
    C = check_hermitian(C)
    N = C.shape[0]
    M = int(n_looks)
    if M < 1:
        raise InvalidInputError("n_looks must be >= 1")
    lam = np.sort(np.linalg.eigvalsh(C))[::-1]
    tr = float(np.trace(C).real)
    floor = 1e-15 * tr if tr > 0 else 1e-300
    if lam[-1] < 0:
        logger.debug("estimate_model_order: clamping negative eigenvalues")
    lam = np.maximum(lam, floor)
    mdl = np.empty(N)
    for k in range(N):
        tail = lam[k:]
        log_ratio = np.mean(np.log(tail)) - np.log(np.mean(tail))
        mdl[k] = -M * (N - k) * log_ratio + 0.5 * k * (2 * N - k) * np.log(M)
    k = int(np.argmin(mdl))
    if k_max is not None:
        k = min(k, int(k_max))
    return k
