"""Input validation helpers for complex-valued arrays.

scikit-learn's ``check_array`` rejects complex input, so the estimators here
use these instead.
"""

import numpy as np

from .errors import InvalidInputError

HERMITIAN_RTOL = 1e-12


def check_stack(G, name="G"):
    """Return ``G`` as a finite complex 2-D array of shape (N, M) with M >= 1."""
    G = np.asarray(G)
    if G.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {G.shape}")
    if G.shape[0] < 1 or G.shape[1] < 1:
        raise InvalidInputError(f"{name} is empty (shape {G.shape})")
    G = G.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(G)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return G


def check_vector(v, name="vector", n=None):
    v = np.asarray(v)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 1-D array, got shape {v.shape}")
    if n is not None and v.size != n:
        raise InvalidInputError(f"{name} has length {v.size}, expected {n}")
    v = v.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return v


def check_square(C, name="C"):
    C = check_stack(C, name)
    if C.shape[0] != C.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {C.shape}")
    return C


def check_hermitian(C, name="C", rtol=HERMITIAN_RTOL):
    """Validate Hermitian symmetry within ``rtol`` (relative Frobenius) and symmetrize."""
    C = check_square(C, name)
    scale = np.linalg.norm(C)
    if np.linalg.norm(C - C.conj().T) > rtol * max(scale, np.finfo(float).tiny):
        raise InvalidInputError(f"{name} is not Hermitian")
    return 0.5 * (C + C.conj().T)


def check_positive(x, name, allow_zero=False):
    x = float(x)
    if not np.isfinite(x) or x < 0 or (x == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise InvalidInputError(f"{name} must be finite and {bound}, got {x}")
    return x
