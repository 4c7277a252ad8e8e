"""JSON encoding for the package's value types.

Floats are written with 17 significant digits (``%.16e``) so every value
round-trips exactly and a parse/rewrite cycle reproduces the same bytes.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .geom import Ellipsoid, HPolytope, Simplex
from .john import JohnCertificate


def _encode(obj) -> str:
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(x)  # Infinity / NaN; non-standard but parseable by json
        return format(x, ".16e")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(to_json(obj))


def to_json(obj):
    if isinstance(obj, Simplex):
        return {"dim": obj.dim, "vertices": obj.vertices}
    if isinstance(obj, HPolytope):
        return {"dim": obj.dim, "normals": obj.normals, "offsets": obj.offsets}
    if isinstance(obj, Ellipsoid):
        return {"center": obj.center, "shape": obj.shape}
    if isinstance(obj, JohnCertificate):
        return {
            "dim": obj.dim,
            "contacts": obj.contact_points,
            "weights": obj.weights,
            "residual_a": obj.residual_a,
            "residual_b": obj.residual_b,
        }
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


def simplex_from_json(d) -> Simplex:
    s = Simplex(d["vertices"])
    if "dim" in d and int(d["dim"]) != s.dim:
        raise ValueError(f"dim field {d['dim']} disagrees with vertices of length {s.dim}")
    return s


def polytope_from_json(d) -> HPolytope:
    p = HPolytope.normalized(d["normals"], d["offsets"])
    if "dim" in d and int(d["dim"]) != p.dim:
        raise ValueError(f"dim field {d['dim']} disagrees with normals of length {p.dim}")
    return p


def ellipsoid_from_json(d) -> Ellipsoid:
    return Ellipsoid(d["center"], d["shape"])


def certificate_from_json(d) -> JohnCertificate:
    return JohnCertificate(d["contacts"], d["weights"], float(d["residual_a"]), float(d["residual_b"]))


def body_from_json(d):
    """Simplex or HPolytope, chosen by which fields are present."""
    if "vertices" in d:
        return simplex_from_json(d)
    if "normals" in d:
        return polytope_from_json(d)
    raise ValueError("expected a Simplex (vertices) or HPolytope (normals, offsets) object")


def load(path):
    return json.loads(Path(path).read_text())


def write(path, obj, **extra):
    d = to_json(obj)
    if extra:
        d = {**d, **extra}
    text = _encode(d) + "\n"
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)
    return text
