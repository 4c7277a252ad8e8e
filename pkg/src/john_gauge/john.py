"""John decompositions of the identity.

A certificate is a set of unit contact vectors ``u_i`` with positive weights
``c_i`` such that ``sum c_i u_i u_i^T = I`` and ``sum c_i u_i = 0``; it exists
exactly when the unit ball is the maximal ellipsoid of the body.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import nnls

from . import geom, mvie
from .errors import CertificateError, DegenerateError
from .geom import Ellipsoid, HPolytope, Simplex

CONTACT_TOL = 1e-7
WEIGHT_RESIDUAL_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class JohnCertificate:
    contact_points: np.ndarray
    weights: np.ndarray
    residual_a: float
    residual_b: float

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.contact_points, dtype=float))
        c = np.asarray(self.weights, dtype=float).reshape(-1)
        if u.shape[0] != c.size:
            raise ValueError("one weight per contact point is required")
        if u.shape[0] < u.shape[1] + 1:
            raise CertificateError(f"need at least n+1 = {u.shape[1] + 1} contacts, got {u.shape[0]}")
        if np.any(c <= 0):
            raise CertificateError("weights must be strictly positive")
        if np.any(np.abs(np.linalg.norm(u, axis=1) - 1) > 1e-10):
            raise CertificateError("contact points must be unit vectors")
        for name, arr in (("contact_points", u), ("weights", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_contacts(cls, contacts, weights) -> "JohnCertificate":
        ra, rb = decomposition_residuals(contacts, weights)
        return cls(contacts, weights, ra, rb)

    @property
    def dim(self) -> int:
        return self.contact_points.shape[1]

    @property
    def weight_sum(self) -> float:
        return float(self.weights.sum())

    def passes(self, tol: float = 1e-7) -> bool:
        return self.residual_a <= tol and self.residual_b <= tol


class DecompositionCheck(NamedTuple):
    residual_a: float
    residual_b: float
    max_reconstruction_error: float


def decomposition_residuals(contacts, weights) -> tuple[float, float]:
    u = np.asarray(contacts, dtype=float)
    c = np.asarray(weights, dtype=float)
    n = u.shape[1]
    ra = np.linalg.norm((u.T * c) @ u - np.eye(n))
    rb = np.linalg.norm(c @ u)
    return float(ra), float(rb)


def reconstruction_errors(contacts, weights, xs) -> tuple[float, float]:
    """Worst errors of ``x = sum c<x,u>u`` and ``|x|^2 = sum c<x,u>^2`` over the rows of ``xs``."""
    u = np.asarray(contacts, dtype=float)
    c = np.asarray(weights, dtype=float)
    proj = xs @ u.T
    vec = np.linalg.norm(xs - (proj * c) @ u, axis=1).max()
    norm = np.abs(np.sum(xs**2, axis=1) - (proj**2) @ c).max()
    return float(vec), float(norm)


def verify_decomposition(contacts, weights, trials: int = 100, seed=0) -> DecompositionCheck:
    u = np.asarray(contacts, dtype=float)
    c = np.asarray(weights, dtype=float)
    if u.shape[0] != c.size:
        raise ValueError("contacts and weights differ in length")
    ra, rb = decomposition_residuals(u, c)
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((trials, u.shape[1]))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    vec, norm = reconstruction_errors(u, c, xs)
    return DecompositionCheck(ra, rb, max(vec, norm))


# --------------------------------------------------------------------------
# extracting a certificate from a polytope

def normalize_to_unit_john(p: HPolytope, e: Ellipsoid) -> HPolytope:
    """Image of ``p`` under ``x -> E^{-1}(x - c)``, which sends ``e`` to the unit ball."""
    if np.linalg.cond(e.shape) > 1e12:
        raise DegenerateError("ellipsoid shape is numerically singular")
    ea = p.normals @ e.shape  # rows are (E a_i)^T since E is symmetric
    scale = np.linalg.norm(ea, axis=1)
    return HPolytope.normalized(ea / scale[:, None], (p.offsets - p.normals @ e.center) / scale)


def contact_points(p: HPolytope, tol: float = CONTACT_TOL) -> np.ndarray:
    """Normals of the facets touching the inscribed unit ball."""
    if np.any(p.offsets < 1 - tol):
        raise CertificateError("unit ball is not contained in the polytope")
    touching = p.offsets - 1 <= tol
    if touching.sum() < p.dim + 1:
        raise CertificateError(
            f"only {touching.sum()} facets touch the unit ball; a John configuration needs {p.dim + 1}"
        )
    return p.normals[touching]


def _stacked_system(u):
    m, n = u.shape
    rows, cols = np.triu_indices(n)
    # off-diagonal equations weighted by sqrt(2) so the residual is the Frobenius norm
    w = np.where(rows == cols, 1.0, math.sqrt(2.0))
    a_mat = np.vstack([(u[:, rows] * u[:, cols] * w).T, u.T])
    rhs = np.concatenate([(rows == cols).astype(float), np.zeros(n)])
    return a_mat, rhs


def solve_weights(contacts, tol: float = WEIGHT_RESIDUAL_TOL) -> np.ndarray:
    """Nonnegative weights making the contacts a decomposition of the identity."""
    u = np.atleast_2d(np.asarray(contacts, dtype=float))
    m, n = u.shape
    if m < n + 1 or np.linalg.matrix_rank(u) < n:
        raise CertificateError(f"{m} contacts spanning rank {np.linalg.matrix_rank(u)} cannot resolve I_{n}")
    a_mat, rhs = _stacked_system(u)
    c, resid = nnls(a_mat, rhs)
    if resid > tol:
        raise CertificateError(
            f"no nonnegative decomposition of the identity (residual {resid:.3e} > {tol:.0e})"
        )
    return c


def certificate_for(
    p: HPolytope,
    e: Ellipsoid | None = None,
    cfg: mvie.SolverConfig | None = None,
    tol_contact: float = CONTACT_TOL,
) -> JohnCertificate:
    """Solve for the John ellipsoid (unless given), normalize, and certify."""
    if e is None:
        e, _ = mvie.max_volume_ellipsoid(p, cfg)
    unit = normalize_to_unit_john(p, e)
    u = contact_points(unit, tol_contact)
    c = solve_weights(u)
    keep = c > 1e-12
    return JohnCertificate.from_contacts(u[keep], c[keep])


def simplex_certificate(s: Simplex) -> JohnCertificate:
    """Certificate from the exact John ellipsoid of a simplex."""
    return certificate_for(geom.to_halfspaces(s), mvie.analytic_simplex_john(s))


def regular_certificate(n: int) -> JohnCertificate:
    u = geom.to_halfspaces(geom.regular_simplex(n)).normals
    c = np.full(n + 1, n / (n + 1))
    return JohnCertificate.from_contacts(u, c)


# --------------------------------------------------------------------------
# the Gram system for the regular simplex

def gram_matrix(contacts) -> np.ndarray:
    u = np.asarray(contacts, dtype=float)
    return u @ u.T


def regular_gram(n: int) -> np.ndarray:
    d = np.full((n + 1, n + 1), -1.0 / n)
    np.fill_diagonal(d, 1.0)
    return d


def solve_alpha(d, beta, atol: float = 1e-10) -> np.ndarray:
    """Coefficients alpha = n/(n+1) * beta solving ``D alpha = beta`` for zero-sum beta.

    ``D`` has the all-ones vector as its kernel, so beta must be orthogonal to it.
    """
    d = np.asarray(d, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = d.shape[0] - 1
    if abs(beta.sum()) > atol:
        raise ValueError(f"beta must sum to zero (sum = {beta.sum():.3e}); the system is inconsistent")
    alpha = n / (n + 1) * beta
    resid = np.abs(d @ alpha - beta).max()
    if resid > atol:
        raise ArithmeticError(f"D alpha differs from beta by {resid:.3e}")
    return alpha


# --------------------------------------------------------------------------
# ball iff regular

class BallRegularVerdict(NamedTuple):
    is_ball: bool
    is_regular: bool
    agree: bool


def john_ball_iff_regular(
    s: Simplex,
    tol_ball: float = 1e-6,
    tol_reg: float = 1e-6,
    engine: str = "analytic",
    cfg: mvie.SolverConfig | None = None,
) -> BallRegularVerdict:
    if engine == "analytic":
        e = mvie.analytic_simplex_john(s)
    elif engine == "numeric":
        e, _ = mvie.max_volume_ellipsoid(geom.to_halfspaces(s), cfg)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    ball = mvie.is_ball(e, tol_ball)
    regular = geom.is_regular(s, tol_reg)
    return BallRegularVerdict(ball, regular, ball == regular)
