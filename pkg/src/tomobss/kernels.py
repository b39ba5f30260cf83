"""Kernel functions on the columns of a covariance matrix."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._validation import check_stack
from .errors import DegenerateInputError, InvalidInputError

logger = logging.getLogger(__name__)

KINDS = ("linear", "polynomial", "gaussian")
_ALIASES = {"poly": "polynomial", "gauss": "gaussian", "rbf": "gaussian"}

DEFAULT_BETA = 5.0
DEFAULT_ORDER = 1.3


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and its parameter.

    ``polynomial`` uses ``order``; ``gaussian`` uses an explicit ``sigma`` when
    given and otherwise the data-driven bandwidth ``beta * mean_j min_i ||c_i - c_j||``.
    """

    kind: str = "gaussian"
    order: float = DEFAULT_ORDER
    sigma: Optional[float] = None
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise InvalidInputError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "polynomial" and not (np.isfinite(self.order) and self.order > 0):
            raise InvalidInputError(f"polynomial order must be > 0, got {self.order}")
        if kind == "gaussian":
            if self.sigma is not None and not (np.isfinite(self.sigma) and self.sigma > 0):
                raise InvalidInputError(f"gaussian sigma must be > 0, got {self.sigma}")
            if not (np.isfinite(self.beta) and self.beta > 0):
                raise InvalidInputError(f"gaussian beta must be > 0, got {self.beta}")

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def polynomial(cls, order=DEFAULT_ORDER):
        return cls("polynomial", order=order)

    @classmethod
    def gaussian(cls, beta=DEFAULT_BETA, sigma=None):
        return cls("gaussian", sigma=sigma, beta=beta)

    def describe(self) -> str:
        if self.kind == "polynomial":
            return f"polynomial(d={self.order:g})"
        if self.kind == "gaussian":
            return f"gaussian(sigma={self.sigma:g})" if self.sigma else f"gaussian(beta={self.beta:g})"
        return "linear"


def _as_real_points(C):
    # columns of C as points in R^{2N}
    return np.vstack([C.real, C.imag]).T


def column_distances(C):
    """Euclidean distances between the columns of ``C``, shape (N, N)."""
    C = check_stack(C)
    return squareform(pdist(_as_real_points(C)))


def estimate_gaussian_sigma(C, beta=DEFAULT_BETA):
    """Bandwidth ``beta * mean_j(min_{i != j} ||c_i - c_j||)`` over the columns of ``C``."""
    C = check_stack(C)
    if C.shape[1] < 2:
        raise InvalidInputError("need at least two columns to estimate a bandwidth")
    if not (np.isfinite(beta) and beta > 0):
        raise InvalidInputError(f"beta must be > 0, got {beta}")
    D = column_distances(C)
    np.fill_diagonal(D, np.inf)
    sigma = beta * float(D.min(axis=0).mean())
    if not sigma > 0:
        raise DegenerateInputError("all columns coincide; supply an explicit sigma")
    return sigma


def kernel_matrix(C, kernel: KernelSpec, return_info=False):
    """Kernel (Gram) matrix ``K[i, j] = kappa(c_i, c_j)`` of the columns of ``C``.

    Non-integer polynomial powers use the principal branch; only the upper
    triangle is evaluated and mirrored, so ``K`` is exactly Hermitian.
    """
    C = check_stack(C)
    info = {"kind": kernel.kind}
    if kernel.kind == "linear":
        K = C.conj().T @ C
    elif kernel.kind == "polynomial":
        base = C.conj().T @ C + 1.0
        iu = np.triu_indices(base.shape[0])
        b = base[iu]
        on_cut = (np.abs(b.imag) <= 1e-15 * np.abs(b)) & (b.real < 0)
        info["branch_cut_pairs"] = int(on_cut.sum())
        if on_cut.any():
            logger.debug("polynomial kernel: %d base(s) on the negative real axis", on_cut.sum())
        upper = np.zeros_like(base)
        upper[iu] = np.power(b, kernel.order)
        K = upper + np.triu(upper, 1).conj().T
        K[np.diag_indices_from(K)] = K.diagonal().real
    else:
        sigma = kernel.sigma if kernel.sigma is not None else estimate_gaussian_sigma(C, kernel.beta)
        info["sigma"] = sigma
        D2 = squareform(pdist(_as_real_points(C), "sqeuclidean"))
        K = np.exp(-D2 / (2 * sigma * sigma))
    K = 0.5 * (K + K.conj().T)
    return (K, info) if return_info else K
