"""Brascamp-Lieb volume bound for simplices with a John-position insphere.

A simplex certificate ``(u_i, c_i)`` in R^n is lifted to unit vectors
``v_i = sqrt(n/(n+1)) (-u_i, 1/sqrt(n))`` with weights ``d_i = (n+1)/n c_i``,
which decompose the identity of R^{n+1}. With one-sided exponential
densities the integrand ``F(x) = prod f(<v_i, x>)^{d_i}`` lives on a cone
whose slice at height ``r`` is ``(r / sqrt(n)) K`` for
``K = {y : <y, u_i> <= 1}``; integrating slices yields the bound on ``Vol(K)``.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from . import geom
from .errors import CertificateError
from .geom import HPolytope
from .john import JohnCertificate

EXPONENTIAL = "exponential"
GAUSSIAN = "gaussian"
MONTE_CARLO = "monte_carlo"
PRODUCT_QUADRATURE = "product_quadrature"

CHUNK = 1 << 16
PROPOSAL_DILATION = 1.25
SUPPORT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class BLSystem:
    """Unit vectors (rows of ``vectors``) with positive weights."""

    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        d = np.asarray(self.weights, dtype=float).reshape(-1)
        if v.shape[0] != d.size:
            raise ValueError("one weight per vector is required")
        if np.any(np.abs(np.linalg.norm(v, axis=1) - 1) > 1e-12):
            raise ValueError("vectors must have unit norm")
        if np.any(d <= 0):
            raise ValueError("weights must be positive")
        for name, arr in (("vectors", v), ("weights", d)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def isotropy_residual(self) -> float:
        v, d = self.vectors, self.weights
        return float(np.linalg.norm((v.T * d) @ v - np.eye(self.dim)))

    @property
    def is_simplex_lift(self) -> bool:
        m, k = self.vectors.shape
        return m == k and k >= 2 and np.allclose(self.vectors[:, -1], 1 / math.sqrt(k), atol=1e-12)

    def base_normals(self) -> np.ndarray:
        """Recover the facet normals ``u_i`` of a lifted simplex system."""
        if not self.is_simplex_lift:
            raise ValueError("not the lift of a simplex certificate")
        n = self.dim - 1
        return -math.sqrt((n + 1) / n) * self.vectors[:, :-1]

    def section_polytope(self) -> HPolytope:
        """``K = {y : <y, u_i> <= 1}``, the slice of the support cone at height sqrt(n)."""
        u = self.base_normals()
        return HPolytope.normalized(u, np.ones(len(u)))


class IntegralEstimate(NamedTuple):
    value: float
    std_error: float
    samples: int
    method: str

    @property
    def variance_warning(self) -> bool:
        return self.std_error > abs(self.value)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "samples": self.samples,
            "method": self.method,
        }


class OrthonormalityCheck(NamedTuple):
    is_orthonormal: bool
    max_offdiag: float
    implied_uu: float


# --------------------------------------------------------------------------
# lift

def lift_vectors(contacts, weights) -> tuple[np.ndarray, np.ndarray]:
    u = np.atleast_2d(np.asarray(contacts, dtype=float))
    c = np.asarray(weights, dtype=float)
    n = u.shape[1]
    scale = math.sqrt(n / (n + 1))
    v = scale * np.hstack([-u, np.full((u.shape[0], 1), 1 / math.sqrt(n))])
    # |v_i| = 1 holds algebraically; renormalize away the last-ulp drift
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v, (n + 1) / n * c


def lift(cert: JohnCertificate, check: bool = True, tol: float = 1e-8) -> BLSystem:
    """Lift a simplex certificate (m = n+1) to an identity decomposition of R^{n+1}.

    ``check=False`` skips the certificate and isotropy checks so that
    perturbed configurations can be examined as negative controls.
    """
    m, n = cert.contact_points.shape
    if m != n + 1:
        raise CertificateError(f"lift needs exactly n+1 = {n + 1} contacts, got {m}")
    if check and (cert.residual_a > tol or cert.residual_b > tol):
        raise CertificateError(
            f"certificate residuals ({cert.residual_a:.2e}, {cert.residual_b:.2e}) exceed {tol:.0e}"
        )
    sys = BLSystem(*lift_vectors(cert.contact_points, cert.weights))
    # the lift cannot be more isotropic than the certificate is a decomposition
    limit = max(1e-10, 10 * (cert.residual_a + cert.residual_b))
    if check and sys.isotropy_residual > limit:
        raise CertificateError(
            f"lifted system is not isotropic (residual {sys.isotropy_residual:.2e} > {limit:.1e})"
        )
    return sys


# --------------------------------------------------------------------------
# integrand and closed forms

def bl_integrand(sys: BLSystem, x, density: str = EXPONENTIAL) -> np.ndarray:
    """``prod_i f(<v_i, x>)^{d_i}`` for each row of ``x`` (or a single point)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    t = xs @ sys.vectors.T
    if density == EXPONENTIAL:
        # points on a supporting hyperplane count as inside despite rounding
        floor = -SUPPORT_RTOL * np.linalg.norm(xs, axis=1)
        out = np.where(np.all(t >= floor[:, None], axis=1), np.exp(-(t @ sys.weights)), 0.0)
    elif density == GAUSSIAN:
        # f(t) = exp(-pi t^2) integrates to one
        out = np.exp(-math.pi * ((t * t) @ sys.weights))
    else:
        raise ValueError(f"unknown density {density!r}")
    return out[0] if single else out


def volume_bound(n: int) -> float:
    """sqrt(n^n (n+1)^(n+1)) / n!, the volume of the regular simplex with unit insphere."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if n <= 20:
        return math.sqrt(n**n * (n + 1) ** (n + 1)) / math.factorial(n)
    return math.exp(_log_bound(n))


def _log_bound(n):
    return 0.5 * (n * math.log(n) + (n + 1) * math.log(n + 1)) - math.lgamma(n + 1)


def closed_form_integral(vol_k: float, n: int) -> float:
    """Integral of F for a section body of volume ``vol_k``: Vol(K) n! / sqrt(n^n (n+1)^(n+1))."""
    if vol_k <= 0:
        return 0.0
    return math.exp(math.log(vol_k) - _log_bound(n))


def slab_section_value(r: float, vol_k: float, n: int) -> float:
    """Integral of F over the hyperplane at height ``r``."""
    if r < 0:
        raise ValueError("height must be nonnegative")
    return math.exp(-math.sqrt(n + 1) * r) * (r / math.sqrt(n)) ** n * vol_k


def slab_quadrature(vol_k: float, n: int, upper: float | None = None) -> float:
    """1-D quadrature of the slab values over [0, upper] (default 40/sqrt(n+1))."""
    upper = 40 / math.sqrt(n + 1) if upper is None else upper
    peak = n / math.sqrt(n + 1)
    val, _ = integrate.quad(
        slab_section_value, 0.0, upper, args=(vol_k, n), points=[peak], epsabs=0, epsrel=1e-13, limit=200
    )
    return val


def _row_integral(v, d, y, r):
    """Exact integral over x of F(x, y, r) for a 3-D system: F is one exponential on an interval."""
    lin = v[:, 1] * y + v[:, 2] * r  # t_i = v_i0 x + lin_i >= 0
    lo, hi = -math.inf, math.inf
    for a, c in zip(v[:, 0], lin):
        if abs(a) <= 1e-15:
            if c < 0:
                return 0.0
        elif a > 0:
            lo = max(lo, -c / a)
        else:
            hi = min(hi, -c / a)
    if not hi > lo:
        return 0.0
    slope = float(d @ v[:, 0])
    offset = float(d @ lin)
    width = hi - lo
    if abs(slope) * width < 1e-12:
        return math.exp(-(slope * lo + offset)) * width
    return math.exp(-(slope * lo + offset)) * -math.expm1(-slope * width) / slope


def section_integral(sys: BLSystem, r: float) -> tuple[float, float]:
    """Integral of F over the plane at height ``r`` for n = 2, with quad's error estimate.

    Rows are integrated exactly; the outer integral is adaptive with
    breakpoints where pairs of support lines cross.
    """
    if sys.dim != 3:
        raise ValueError("section quadrature is implemented for n = 2")
    v, d = sys.vectors, sys.weights
    ys = []
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            m = v[[i, j], :2]
            if abs(np.linalg.det(m)) > 1e-14:
                ys.append(np.linalg.solve(m, -v[[i, j], 2] * r)[1])
    if not ys or r == 0:
        return 0.0, 0.0
    lo, hi = min(ys), max(ys)
    if hi <= lo:
        return 0.0, 0.0
    inner = sorted(set(y for y in ys if lo < y < hi))
    val, err = integrate.quad(
        lambda y: _row_integral(v, d, y, r), lo, hi, points=inner or None, epsabs=0, epsrel=1e-11, limit=200
    )
    return float(val), float(err)


# --------------------------------------------------------------------------
# estimators

def _thread_count():
    try:
        return max(1, int(os.environ.get("JOHN_GAUGE_THREADS", "1")))
    except ValueError:
        return 1


def _slab_chunk(sys, k_verts, centroid, log_prop_vol, seq, count, density):
    rng = np.random.default_rng(seq)
    n = sys.dim - 1
    rate = math.sqrt(n + 1)
    r = rng.gamma(n + 1, 1 / rate, size=count)
    bary = rng.exponential(size=(count, n + 1))
    bary /= bary.sum(axis=1, keepdims=True)
    y = centroid + PROPOSAL_DILATION * (bary @ k_verts - centroid)
    y *= (r / math.sqrt(n))[:, None]
    x = np.column_stack([y, r])
    f = bl_integrand(sys, x, density)
    # proposal density: Gamma(n+1, rate) in r times uniform on the dilated, scaled section
    log_pr = (n + 1) * math.log(rate) + n * np.log(r) - rate * r - math.lgamma(n + 1)
    log_q = -(n * np.log(r / math.sqrt(n)) + log_prop_vol)
    w = f * np.exp(-(log_pr + log_q))
    return w.sum(), (w * w).sum()


def _gauss_chunk(sys, seq, count, density):
    rng = np.random.default_rng(seq)
    k = sys.dim
    sigma = 1 / math.sqrt(math.pi)
    x = sigma * rng.standard_normal((count, k))
    log_q = -0.5 * np.sum(x * x, axis=1) / sigma**2 - k * math.log(sigma * math.sqrt(2 * math.pi))
    w = bl_integrand(sys, x, density) * np.exp(-log_q)
    return w.sum(), (w * w).sum()


def estimate_integral(sys: BLSystem, samples: int = 10**6, seed=0, density: str = EXPONENTIAL) -> IntegralEstimate:
    """Monte Carlo estimate of the integral of F over R^{dim}.

    Lifted simplex systems with exponential densities are sampled slab by
    slab: height from the Gamma(n+1) law with rate sqrt(n+1), then a point
    uniform in a 25% dilation of the scaled section, so the estimator sees
    both the value of F on the section and its vanishing just outside.
    Other inputs use a Gaussian proposal. Samples are split into fixed
    chunks with independently spawned seeds and combined in order, so the
    result does not depend on JOHN_GAUGE_THREADS.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    if density == EXPONENTIAL and sys.is_simplex_lift:
        k_verts = geom.vertices_from_halfspaces(sys.section_polytope())
        centroid = k_verts.mean(axis=0)
        n = sys.dim - 1
        vol = abs(np.linalg.det(k_verts[1:] - k_verts[0])) / math.factorial(n)
        log_prop_vol = math.log(vol) + n * math.log(PROPOSAL_DILATION)

        def job(args):
            return _slab_chunk(sys, k_verts, centroid, log_prop_vol, *args, density)
    else:
        def job(args):
            return _gauss_chunk(sys, *args, density)

    work = list(zip(seqs, sizes))
    threads = min(_thread_count(), len(work))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(job, work))
    else:
        parts = [job(w) for w in work]

    s1 = s2 = 0.0
    for a, b in parts:
        s1 += a
        s2 += b
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0)
    return IntegralEstimate(float(mean), float(math.sqrt(var / samples)), samples, MONTE_CARLO)


def quadrature_integral(sys: BLSystem, nodes: int = 24) -> IntegralEstimate:
    """Deterministic product rule for n = 2: Gauss-Laguerre in height, iterated quadrature per section.

    ``std_error`` is the sum of the section error estimates plus the change
    against a rule with half as many height nodes.
    """
    rate = math.sqrt(sys.dim)

    def total(k):
        r_nodes, r_weights = special.roots_laguerre(k)
        acc = err = 0.0
        for x, w in zip(r_nodes, r_weights):
            r = x / rate
            val, e = section_integral(sys, r)
            acc += w / rate * math.exp(x) * val
            err += w / rate * math.exp(x) * e
        return acc, err

    fine, err = total(nodes)
    coarse, _ = total(nodes // 2)
    return IntegralEstimate(float(fine), float(err + abs(fine - coarse)), nodes, PRODUCT_QUADRATURE)


# --------------------------------------------------------------------------
# equality case

def equality_orthonormality_check(sys: BLSystem, tol: float = 1e-6) -> OrthonormalityCheck:
    """Are the lifted vectors orthonormal, and what <u_i, u_j> does that imply?

    ``<v_i, v_j> = n/(n+1) (<u_i, u_j> + 1/n)``, so orthogonality pins the
    base normals to the regular value ``<u_i, u_j> = -1/n``.
    """
    g = sys.vectors @ sys.vectors.T
    off = g[~np.eye(len(g), dtype=bool)]
    max_off = float(np.abs(off).max()) if off.size else 0.0
    n = sys.dim - 1
    implied = float(np.mean((n + 1) / n * off - 1 / n)) if off.size else math.nan
    return OrthonormalityCheck(max_off <= tol, max_off, implied)
