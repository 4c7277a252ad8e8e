"""John ellipsoids of simplices and H-polytopes.

Submodules: ``geom`` (bodies and affine maps), ``mvie`` (maximum-volume
inscribed ellipsoid), ``john`` (decompositions of the identity),
``blcheck`` (lift, integral and volume bound), ``suites`` and ``cli``.
"""
from .errors import (
    CertificateError,
    ConditioningError,
    DegenerateError,
    InfeasibleError,
    JohnGaugeError,
    UnboundedError,
)
from .geom import AffineMap, BarycentricCoords, Ellipsoid, HPolytope, Simplex, regular_simplex
from .john import JohnCertificate, certificate_for, regular_certificate
from .mvie import SolverConfig, SolverReport, analytic_simplex_john, max_volume_ellipsoid

__version__ = "0.1.0"

__all__ = [
    "AffineMap", "BarycentricCoords", "CertificateError", "ConditioningError", "DegenerateError",
    "Ellipsoid", "HPolytope", "InfeasibleError", "JohnCertificate", "JohnGaugeError", "Simplex",
    "SolverConfig", "SolverReport", "UnboundedError", "analytic_simplex_john", "certificate_for",
    "max_volume_ellipsoid", "regular_certificate", "regular_simplex",
]
