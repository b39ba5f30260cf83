"""File formats: binary complex matrices and JSON scene configurations.

Binary matrix layout: two little-endian uint64 counts (rows N, columns M)
followed by N*M complex values, row-major, each stored as little-endian
float64 real part then float64 imaginary part.
"""

import json
import os

import numpy as np

from .errors import InvalidInputError
from .geometry import AcquisitionGeometry, DeformationTerm, ScattererParams, default_geometry
from .simulation import SimulationConfig

_HEADER = np.dtype("<u8")
_BODY = np.dtype("<c16")


def write_matrix(path, A):
    A = np.ascontiguousarray(np.asarray(A, dtype=np.complex128))
    if A.ndim != 2:
        raise InvalidInputError(f"expected a 2-D matrix, got shape {A.shape}")
    with open(path, "wb") as fh:
        fh.write(np.array(A.shape, dtype=_HEADER).tobytes())
        fh.write(A.astype(_BODY, copy=False).tobytes(order="C"))


def read_matrix(path):
    """Read a matrix written by :func:`write_matrix`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16:
        raise InvalidInputError(f"{path}: truncated header")
    n, m = (int(x) for x in np.frombuffer(raw[:16], dtype=_HEADER))
    if n < 1 or m < 1 or len(raw) != 16 + 16 * n * m:
        raise InvalidInputError(f"{path}: size does not match header ({n} x {m})")
    return np.frombuffer(raw[16:], dtype=_BODY).reshape(n, m).astype(np.complex128)


def _load(src):
    if isinstance(src, dict):
        return src
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            try:
                return json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"{src}: invalid JSON ({exc})") from exc
    raise InvalidInputError(f"cannot load a config from {type(src).__name__}")


def geometry_from_dict(doc):
    if "baselines_m" not in doc:
        return default_geometry()
    try:
        return AcquisitionGeometry(tuple(doc["baselines_m"]), float(doc["wavelength_m"]),
                                   float(doc["range_m"]))
    except KeyError as exc:
        raise InvalidInputError(f"geometry is missing field {exc}") from exc


def scatterer_from_dict(doc):
    try:
        terms = tuple(DeformationTerm(float(t["coefficient"]), tuple(t["basis"]))
                      for t in doc.get("deformation") or ())
        return ScattererParams(float(doc["elevation_m"]), float(doc.get("amplitude", 1.0)), terms)
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"bad scatterer entry {doc!r}") from exc


def load_scene(src):
    """Geometry and scatterer list from a JSON document or dict."""
    doc = _load(src)
    return geometry_from_dict(doc), [scatterer_from_dict(s) for s in doc.get("scatterers", [])]


def load_simulation_config(src, **overrides):
    doc = _load(src)
    geom, scatterers = load_scene(doc)
    kw = {"geometry": geom, "scatterers": tuple(scatterers),
          "noise_power": float(doc.get("noise_power", 0.0)),
          "looks": int(doc.get("looks", 900)), "seed": int(doc.get("seed", 0))}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SimulationConfig(**kw)


def save_simulation_config(path, config):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")
