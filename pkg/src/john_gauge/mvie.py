"""Maximum-volume inscribed ellipsoids.

The numeric solver maximizes ``log det L`` over lower-triangular ``L`` with
positive diagonal and centers ``c`` subject to the second-order-cone
constraints ``|L^T a_i| <= b_i - <a_i, c>``; the ellipsoid is
``{c + L y : |y| <= 1}``, reported with the symmetric shape ``(L L^T)^{1/2}``.
A primal log-barrier with damped Newton centering steps drives the duality
gap below ``tol_kkt``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import nnls

from . import geom
from .errors import DegenerateError, InfeasibleError, UnboundedError
from .geom import Ellipsoid, HPolytope, Simplex

logger = logging.getLogger(__name__)

CONVERGED = "converged"
MAX_ITERS = "max_iters"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

CENTERING_EPS = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    tol_kkt: float = 1e-9
    max_newton_iters: int = 200
    barrier_shrink: float = 0.2
    degeneracy_floor: float = 1e-10

    def __post_init__(self):
        if not (self.tol_kkt > 0 and self.max_newton_iters > 0 and self.degeneracy_floor > 0):
            raise ValueError("solver tolerances and iteration caps must be positive")
        if not 0 < self.barrier_shrink < 1:
            raise ValueError("barrier_shrink must lie strictly inside (0, 1)")


@dataclass
class SolverReport:
    iterations: int
    final_kkt_residual: float
    log_volume: float
    status: str

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "kkt": self.final_kkt_residual,
            "log_volume": self.log_volume,
            "status": self.status,
        }

    @classmethod
    def from_json(cls, obj) -> "SolverReport":
        return cls(int(obj["iterations"]), float(obj["kkt"]), float(obj["log_volume"]), obj["status"])

    as_dict = asdict


# --------------------------------------------------------------------------
# boundedness and the inscribed ball

def is_bounded(p: HPolytope, tol: float = 1e-9) -> bool:
    """Farkas test: bounded iff every +-e_k is a nonnegative combination of the normals."""
    a = p.normals
    if np.linalg.matrix_rank(a) < p.dim:
        return False
    for k in range(p.dim):
        for sign in (1.0, -1.0):
            target = np.zeros(p.dim)
            target[k] = sign
            _, resid = nnls(a.T, target)
            if resid > tol:
                return False
    return True


def _newton_lp(g, h, f, z, tol, max_iter=500):
    """Minimize f.z over {g z <= h} from a strictly feasible z by the barrier method.

    Returns (z, gap, iterations). Raises UnboundedError if a recession
    direction with decreasing objective is found.
    """
    m = g.shape[0]
    scale = 1.0 + np.abs(h).max() + np.abs(z).max()
    t = 1.0
    iters = 0
    while True:
        best_dec, stalled = math.inf, 0
        while iters < max_iter:
            slack = h - g @ z
            d = g / slack[:, None]
            grad = t * f + d.sum(axis=0)
            step = _newton_direction(d.T @ d, grad)
            iters += 1
            dec = -grad @ step
            gs = g @ step
            if f @ step < 0 and np.all(gs <= 1e-14 * np.linalg.norm(step)):
                raise UnboundedError("linear program is unbounded")
            if dec / 2 <= CENTERING_EPS:
                break
            if dec < best_dec:
                best_dec, stalled = dec, 0
            elif dec < 1e-6:
                stalled += 1
                if stalled >= 3:
                    break
            alpha = 1.0
            pos = gs > 0
            if np.any(pos):
                alpha = min(1.0, 0.99 * np.min(slack[pos] / gs[pos]))
            if dec >= 0.1:
                phi0 = t * f @ z - np.log(slack).sum()
                while alpha > 1e-16:
                    zn = z + alpha * step
                    if t * f @ zn - np.log(h - g @ zn).sum() <= phi0 - 0.01 * alpha * dec:
                        break
                    alpha *= 0.5
            z = z + alpha * step
            if np.abs(z).max() > 1e12 * scale:
                raise UnboundedError("linear program is unbounded")
        if m / t <= tol or iters >= max_iter:
            return z, m / t, iters
        t *= 10.0


def chebyshev_ball(p: HPolytope, tol: float = 1e-12, floor: float = 1e-10) -> Ellipsoid:
    """Largest ball inside ``p`` (maximize r subject to <a_i, c> + r <= b_i)."""
    n = p.dim
    if np.linalg.matrix_rank(p.normals) < n:
        raise UnboundedError("normals do not span the space; the inscribed ball is unbounded")
    g = np.hstack([p.normals, np.ones((len(p), 1))])
    f = np.zeros(n + 1)
    f[-1] = -1.0
    z0 = np.zeros(n + 1)
    z0[-1] = p.offsets.min() - 1.0
    scale = max(1.0, np.abs(p.offsets).max())
    z, gap, _ = _newton_lp(g, p.offsets, f, z0, tol * scale)
    r = z[-1]
    if not r > floor * scale:
        raise InfeasibleError(f"polytope has empty interior (inscribed radius {r:.3e})")
    return Ellipsoid.ball(n, r, z[:-1])


# --------------------------------------------------------------------------
# maximum-volume inscribed ellipsoid

class _Problem:
    """Gradient and Hessian of t*(-sum log L_kk) + sum -log(s_i^2 - |w_i|^2)."""

    def __init__(self, p: HPolytope):
        self.a = p.normals
        self.b = p.offsets
        n = p.dim
        self.n = n
        self.rows, self.cols = np.tril_indices(n)
        self.p = self.rows.size
        self.diag = np.flatnonzero(self.rows == self.cols)
        # w_i = L^T a_i is linear in the packed entries of L: w[i, k] = sum_idx W[i, k, idx] l[idx]
        m = self.a.shape[0]
        w = np.zeros((m, n, self.p))
        w[:, self.cols, np.arange(self.p)] = self.a[:, self.rows]
        self.wmap = w

    def unpack(self, x):
        n = self.n
        lower = np.zeros((n, n))
        lower[self.rows, self.cols] = x[n:]
        return x[:n], lower

    def pack(self, c, lower):
        return np.concatenate([c, lower[self.rows, self.cols]])

    def parts(self, x):
        c = x[: self.n]
        s = self.b - self.a @ c
        w = np.einsum("ikp,p->ik", self.wmap, x[self.n :])
        q = s * s - np.einsum("ik,ik->i", w, w)
        return s, w, q

    def feasible(self, x):
        s, _, q = self.parts(x)
        return bool(np.all(s > 0) and np.all(q > 0) and np.all(x[self.n + self.diag] > 0))

    def value(self, x, t):
        s, _, q = self.parts(x)
        return -t * np.log(x[self.n + self.diag]).sum() - np.log(q).sum()

    def derivatives(self, x, t):
        n, a, wm = self.n, self.a, self.wmap
        s, w, q = self.parts(x)
        ldiag = x[n + self.diag]

        grad = np.empty(n + self.p)
        grad[:n] = (2 * s / q) @ a
        grad[n:] = np.einsum("ikp,ik->p", wm, 2 * w / q[:, None])
        grad[n + self.diag] -= t / ldiag

        h_ss = -2 / q + 4 * s * s / q**2
        ww = wm.transpose(0, 2, 1) @ w[:, :, None]  # (m, p, 1): W_i^T w_i
        ww = ww[:, :, 0]
        hess = np.empty((n + self.p, n + self.p))
        hess[:n, :n] = (a * h_ss[:, None]).T @ a
        # cross term: -a_i (H_sw W_i) with H_sw = -4 s w^T / q^2
        h_cl = np.einsum("i,ik,ip->kp", 4 * s / q**2, a, ww)
        hess[:n, n:] = h_cl
        hess[n:, :n] = h_cl.T
        h_ll = np.einsum("i,ikp,ikr->pr", 2 / q, wm, wm)
        h_ll += np.einsum("i,ip,ir->pr", 4 / q**2, ww, ww)
        h_ll[self.diag, self.diag] += t / ldiag**2
        hess[n:, n:] = h_ll
        return grad, hess


def _newton_direction(hess, grad):
    # scale to unit diagonal; the barrier Hessian is badly scaled near the boundary
    d = 1.0 / np.sqrt(np.abs(np.diag(hess)))
    hs = hess * d[:, None] * d[None, :]
    try:
        factor = scipy.linalg.cho_factor(hs, check_finite=False)
        return -d * scipy.linalg.cho_solve(factor, d * grad, check_finite=False)
    except np.linalg.LinAlgError:
        return -d * np.linalg.lstsq(hs, d * grad, rcond=None)[0]


def _check_polytope(p: HPolytope, cfg: SolverConfig):
    if not is_bounded(p):
        raise UnboundedError(
            "polytope is unbounded; no maximal ellipsoid exists",
            SolverReport(0, math.inf, math.inf, UNBOUNDED),
        )
    try:
        ball = chebyshev_ball(p, floor=cfg.degeneracy_floor)
    except InfeasibleError as exc:
        raise InfeasibleError(str(exc), SolverReport(0, math.inf, -math.inf, INFEASIBLE)) from exc
    return ball


def max_volume_ellipsoid(p: HPolytope, cfg: SolverConfig | None = None) -> tuple[Ellipsoid, SolverReport]:
    """Maximum-volume ellipsoid inscribed in a bounded polytope with nonempty interior.

    Raises UnboundedError / InfeasibleError for bodies without a maximal
    ellipsoid. When the Newton budget runs out the best strictly feasible
    iterate is returned with status ``max_iters``.
    """
    cfg = cfg or SolverConfig()
    ball = _check_polytope(p, cfg)
    n = p.dim
    # work in coordinates where the Chebyshev ball is the unit ball: slacks then
    # stay O(1) instead of cancelling for small bodies far from the origin
    c0, radius = ball.center, ball.shape[0, 0]
    prob = _Problem(HPolytope(p.normals, (p.offsets - p.normals @ c0) / radius))
    x = prob.pack(np.zeros(n), (1 - 1e-3) * np.eye(n))

    m = len(p)
    degree = 2.0 * m
    t = 1.0
    iters = 0
    status = None
    kkt = math.inf
    while status is None:
        dec = math.inf
        phase_iters = 0
        best_dec, stalled = math.inf, 0
        while True:
            grad, hess = prob.derivatives(x, t)
            step = _newton_direction(hess, grad)
            dec = max(float(-grad @ step), 0.0)
            if dec / 2 <= CENTERING_EPS:
                break
            # rounding floor: the decrement stopped shrinking in the quadratic region
            if dec < best_dec:
                best_dec, stalled = dec, 0
            elif dec < 1e-6:
                stalled += 1
                if stalled >= 3:
                    break
            if phase_iters >= cfg.max_newton_iters:
                status = MAX_ITERS
                break
            iters += 1
            phase_iters += 1
            # inside the quadratic region a full step is safe; value comparisons
            # there are below rounding noise once t is large
            pure = dec < 0.1
            phi0 = None if pure else prob.value(x, t)
            alpha = 1.0
            while alpha > 1e-16:
                xn = x + alpha * step
                if prob.feasible(xn) and (
                    pure or prob.value(xn, t) <= phi0 - 0.01 * alpha * dec
                ):
                    break
                alpha *= 0.5
            else:
                # no progress possible at this barrier weight
                break
            x = xn
        # stationarity of the Lagrangian (scaled by 1/t) and the duality gap
        kkt = max(degree / t, math.sqrt(dec) / t)
        if status is None and degree / t <= cfg.tol_kkt:
            status = CONVERGED if kkt <= cfg.tol_kkt else MAX_ITERS
        elif status is None:
            t /= cfg.barrier_shrink

    c, lower = prob.unpack(x)
    if np.any(np.diag(lower) <= 0):
        raise DegenerateError("solver produced a singular shape factor")
    e = Ellipsoid(c0 + radius * c, radius * geom.psd_sqrt(lower @ lower.T))
    report = SolverReport(iters, kkt, e.log_volume, status)
    logger.debug("mvie: %s after %d Newton steps, kkt %.2e", status, iters, kkt)
    return e, report


# --------------------------------------------------------------------------
# closed form for simplices

def analytic_simplex_john(s: Simplex) -> Ellipsoid:
    """John ellipsoid of a simplex: the image of the unit insphere of the regular simplex."""
    reference = geom.regular_simplex(s.dim)
    return geom.apply(geom.affine_map_between(reference, s), Ellipsoid.ball(s.dim))


def is_ball(e: Ellipsoid, tol: float = 1e-6) -> bool:
    lam = np.linalg.eigvalsh(e.shape)
    return bool((lam[-1] - lam[0]) / lam[-1] <= tol)
