"""scikit-learn compatible wrappers.

Estimators follow the scikit-learn convention that ``X`` has shape
(n_samples, n_images): each row is one look, i.e. ``X = G.T`` for a stack ``G``.
With ``covariance="precomputed"`` the (N, N) covariance matrix is passed instead.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_hermitian, check_stack, check_vector
from .covariance import sample_covariance, sign_covariance
from .errors import InvalidInputError
from .estimation import PeriodogramGrid, periodogram
from .kernels import KernelSpec
from .separation import (DEFAULT_STOP_THRESHOLD, estimate_model_order, pca_separate,
                         separate_scatterers)

COVARIANCES = ("sample", "sign", "precomputed")


def _covariance(X, kind):
    if kind not in COVARIANCES:
        raise InvalidInputError(f"covariance must be one of {COVARIANCES}, got {kind!r}")
    if kind == "precomputed":
        return check_hermitian(X), None
    G = check_stack(X, "X").T
    C = sign_covariance(G) if kind == "sign" else sample_covariance(G)
    return C, G.shape[1]


class _SeparationMixin(TransformerMixin):
    def _check_fitted(self):
        if not hasattr(self, "steering_vectors_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet")

    def transform(self, X):
        """Least-squares scatterer amplitudes per look, shape (n_samples, K).

        Each look is modelled as ``sum_k a_k y_k`` with the unit-norm steering
        estimates ``y_k``, the same convention as the simulator.
        """
        self._check_fitted()
        X = check_stack(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(f"X has {X.shape[1]} images, expected {self.n_features_in_}")
        R = self.steering_vectors_.T
        if R.shape[1] == 0:
            return np.zeros((X.shape[0], 0), dtype=np.complex128)
        return np.linalg.lstsq(R, X.T, rcond=None)[0].T


class KernelScattererSeparation(_SeparationMixin, BaseEstimator):
    """Sequential kernel-PCA scatterer separation with covariance deflation.

    Parameters
    ----------
    kernel : {"gaussian", "polynomial", "linear"}
    beta : float
        Bandwidth factor for the data-driven Gaussian bandwidth.
    sigma : float or None
        Explicit Gaussian bandwidth; overrides ``beta``.
    order : float
        Polynomial kernel order.
    n_scatterers : int or "mdl"
        Maximum number of scatterers.  "mdl" estimates it from the stack (capped
        by ``max_scatterers``).
    stop_threshold : float
        Stop when an intensity drops below this fraction of ``trace(C) / N``.
    center : {"input", "kernel", "both", "none"} or None
        None picks the kernel's default centering.
    projection : {"preimage", "kernel"}
    covariance : {"sample", "sign", "precomputed"}
    reestimate : bool
        Alternating intensity refinement when exactly two scatterers are found.

    Attributes
    ----------
    steering_vectors_ : ndarray, shape (K, N)
    intensities_ : ndarray, shape (K,)
    covariance_ : ndarray, shape (N, N)
    result_ : SeparationResult
    n_features_in_ : int
    """

    def __init__(self, kernel="gaussian", beta=5.0, sigma=None, order=1.3, n_scatterers=2,
                 max_scatterers=4, stop_threshold=DEFAULT_STOP_THRESHOLD, center=None,
                 projection="preimage", covariance="sample", reestimate=False):
        self.kernel = kernel
        self.beta = beta
        self.sigma = sigma
        self.order = order
        self.n_scatterers = n_scatterers
        self.max_scatterers = max_scatterers
        self.stop_threshold = stop_threshold
        self.center = center
        self.projection = projection
        self.covariance = covariance
        self.reestimate = reestimate

    def kernel_spec(self):
        return KernelSpec(self.kernel, order=self.order, sigma=self.sigma, beta=self.beta)

    def fit(self, X, y=None):
        C, M = _covariance(X, self.covariance)
        k_max = self.n_scatterers
        if k_max == "mdl":
            if M is None:
                raise InvalidInputError("n_scatterers='mdl' needs samples, not a precomputed covariance")
            k_max = estimate_model_order(C, M, self.max_scatterers)
        self.n_features_in_ = C.shape[0]
        self.covariance_ = C
        if int(k_max) < 1:
            self.result_ = None
            self.steering_vectors_ = np.zeros((0, C.shape[0]), dtype=np.complex128)
            self.intensities_ = np.zeros(0)
            return self
        self.result_ = separate_scatterers(C, self.kernel_spec(), int(k_max), self.stop_threshold,
                                           self.center, self.projection, self.reestimate)
        self.steering_vectors_ = self.result_.steering
        self.intensities_ = self.result_.intensities
        return self


class PCASeparation(_SeparationMixin, BaseEstimator):
    """Eigenvector baseline: the leading eigenvectors of the covariance matrix."""

    def __init__(self, n_scatterers=2, covariance="sample"):
        self.n_scatterers = n_scatterers
        self.covariance = covariance

    def fit(self, X, y=None):
        C, _ = _covariance(X, self.covariance)
        self.n_features_in_ = C.shape[0]
        self.covariance_ = C
        self.steering_vectors_, self.intensities_ = pca_separate(C, int(self.n_scatterers))
        return self


class PeriodogramElevation(BaseEstimator):
    """Elevation of each steering vector by periodogram search.

    ``predict`` takes steering vectors with shape (K, N) and returns K elevations.
    """

    def __init__(self, geometry=None, grid=None, refine=False):
        self.geometry = geometry
        self.grid = grid
        self.refine = refine

    def fit(self, X=None, y=None):
        if self.geometry is None:
            raise InvalidInputError("PeriodogramElevation needs a geometry")
        self.grid_ = self.grid or PeriodogramGrid.default(self.geometry)
        return self

    def predict(self, X):
        if not hasattr(self, "grid_"):
            self.fit()
        X = np.atleast_2d(np.asarray(X))
        self.coherence_ = []
        out = []
        for r in X:
            res = periodogram(check_vector(r), self.geometry, self.grid_, refine=self.refine)
            out.append(res.elevation)
            self.coherence_.append(res.coherence)
        return np.array(out)
