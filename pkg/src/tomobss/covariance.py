"""Covariance estimators and centering operators."""

import logging

import numpy as np

from ._validation import check_square, check_stack
from .errors import DegenerateInputError

logger = logging.getLogger(__name__)

#: Columns with a smaller Euclidean norm are treated as dead pixels by the SCM.
ZERO_NORM = 1e-300


def hermitian(C):
    """Return ``(C + C^H) / 2``."""
    C = np.asarray(C)
    return 0.5 * (C + C.conj().T)


def sample_covariance(G):
    """Sample covariance ``G G^H / M`` of an (N, M) stack."""
    G = check_stack(G)
    return hermitian(G @ G.conj().T / G.shape[1])


def sign_covariance(G, return_dropped=False):
    """Sign covariance matrix: the mean outer product of norm-normalized columns.

    Columns with norm below ``ZERO_NORM`` are skipped; the divisor stays M, so the
    trace equals the fraction of kept columns.  The estimate is invariant to any
    per-column complex gain.

    Parameters
    ----------
    G : array_like, shape (N, M)
    return_dropped : bool
        Also return the number of skipped columns.
    """
    G = check_stack(G)
    norms = np.linalg.norm(G, axis=0)
    keep = norms >= ZERO_NORM
    dropped = int(G.shape[1] - keep.sum())
    if not keep.any():
        raise DegenerateInputError("all columns have zero norm")
    if dropped:
        logger.warning("sign_covariance: skipped %d zero-norm column(s)", dropped)
    U = G[:, keep] / norms[keep]
    C = hermitian(U @ U.conj().T / G.shape[1])
    return (C, dropped) if return_dropped else C


def center_kernel(K):
    """Feature-space centering ``H K H`` with ``H = I - J/N``."""
    K = check_square(K, "K")
    row = K.mean(axis=0, keepdims=True)
    col = K.mean(axis=1, keepdims=True)
    return hermitian(K - row - col + K.mean())


def center_columns(C):
    """Subtract the mean column, i.e. centre the N columns of ``C`` as data points."""
    C = check_stack(C)
    return C - C.mean(axis=1, keepdims=True)
