"""Simplex and polytope geometry.

Simplices are stored by their vertices (one row per vertex), polytopes by
unit outward normals and offsets, ellipsoids as ``{center + shape @ y : |y| <= 1}``
with a symmetric positive-definite ``shape``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DegenerateError

DEGENERACY_RTOL = 1e-10
MAX_REJECTIONS = 1000


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _edge_matrix(vertices):
    return vertices[1:] - vertices[0]


def _check_nondegenerate(vertices):
    n = vertices.shape[1]
    edges = _edge_matrix(vertices)
    det = abs(np.linalg.det(edges))
    max_edge = max(
        np.linalg.norm(vertices[i] - vertices[j])
        for i, j in itertools.combinations(range(n + 1), 2)
    )
    if not det >= DEGENERACY_RTOL * max_edge**n:
        raise DegenerateError(
            f"simplex is degenerate: |det| = {det:.3e} below "
            f"{DEGENERACY_RTOL:.0e} * (max edge {max_edge:.3e})^{n}"
        )
    return det


@dataclass(frozen=True, eq=False)
class Simplex:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        n = v.shape[1]
        if n < 1 or v.shape[0] != n + 1:
            raise ValueError(f"a simplex in R^n needs n+1 vertices of length n, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        _check_nondegenerate(v)
        object.__setattr__(self, "vertices", _frozen(v))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def transformed(self, linear, shift=None) -> "Simplex":
        linear = np.asarray(linear, dtype=float)
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        return Simplex(self.vertices @ linear.T + shift)


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Body ``{x : normals @ x <= offsets}`` with unit-norm rows in ``normals``."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise ValueError(f"{a.shape[0]} normals but {b.shape[0]} offsets")
        norms = np.linalg.norm(a, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("normals must have unit Euclidean norm (use HPolytope.normalized)")
        object.__setattr__(self, "normals", _frozen(a))
        object.__setattr__(self, "offsets", _frozen(b))

    @classmethod
    def normalized(cls, normals, offsets) -> "HPolytope":
        """Build from arbitrary nonzero normals, rescaling each row to unit norm."""
        a = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).reshape(-1)
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero normal vector")
        # rows already unit to within rounding are kept bit-for-bit
        scale = np.where(np.abs(norms - 1.0) <= 1e-12, 1.0, norms)
        return cls(a / scale[:, None], b / scale)

    @classmethod
    def cube(cls, n: int, half_width: float = 1.0) -> "HPolytope":
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.full(2 * n, float(half_width)))

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def __len__(self):
        return self.normals.shape[0]

    def slack(self, x) -> np.ndarray:
        return self.offsets - self.normals @ np.asarray(x, dtype=float)

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.slack(x) >= -tol))

    def transformed(self, linear, shift=None) -> "HPolytope":
        """Image of the body under ``x -> linear @ x + shift``."""
        linear = np.asarray(linear, dtype=float)
        shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        # a.x <= b  with  x = T^{-1}(y - s)  becomes  (T^{-T} a).y <= b + (T^{-T} a).s
        a_new = np.linalg.solve(linear.T, self.normals.T).T
        return HPolytope.normalized(a_new, self.offsets + a_new @ shift)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        e = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if e.shape != (c.size, c.size):
            raise ValueError(f"shape must be {c.size}x{c.size}, got {e.shape}")
        e = 0.5 * (e + e.T)
        if np.linalg.eigvalsh(e)[0] <= 0:
            raise ValueError("ellipsoid shape must be positive definite")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "shape", _frozen(e))

    @classmethod
    def ball(cls, n: int, radius: float = 1.0, center=None) -> "Ellipsoid":
        c = np.zeros(n) if center is None else center
        return cls(c, radius * np.eye(n))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def semi_axes(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.shape)

    @property
    def log_volume(self) -> float:
        return float(np.linalg.slogdet(self.shape)[1] + log_unit_ball_volume(self.dim))

    @property
    def volume(self) -> float:
        return math.exp(self.log_volume)

    def support(self, direction) -> float:
        """max of <direction, x> over the ellipsoid."""
        d = np.asarray(direction, dtype=float)
        return float(d @ self.center + np.linalg.norm(self.shape @ d))

    def boundary_point(self, direction) -> np.ndarray:
        """Point of the ellipsoid where the outward normal is ``direction``."""
        d = np.asarray(direction, dtype=float)
        ed = self.shape @ d
        return self.center + self.shape @ ed / np.linalg.norm(ed)


@dataclass(frozen=True, eq=False)
class BarycentricCoords:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"barycentric weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def inside(self) -> bool:
        return bool(np.all(self.weights >= 0))

    def ratio(self) -> np.ndarray:
        """Representative of the volume ratio scaled so the smallest nonzero |entry| is 1."""
        nz = np.abs(self.weights[self.weights != 0])
        return self.weights / nz.min()


@dataclass(frozen=True, eq=False)
class AffineMap:
    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        t = np.atleast_2d(np.asarray(self.linear, dtype=float))
        s = np.asarray(self.shift, dtype=float).reshape(-1)
        if t.shape != (s.size, s.size):
            raise ValueError("linear part must be square and match the shift")
        sv = np.linalg.svd(t, compute_uv=False)
        if not sv[-1] > 1e-13 * sv[0]:
            raise DegenerateError("affine map is not invertible")
        object.__setattr__(self, "linear", _frozen(t))
        object.__setattr__(self, "shift", _frozen(s))

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.linear.T + self.shift

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.shift)


def log_unit_ball_volume(n: int) -> float:
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1)


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a symmetric positive semidefinite matrix."""
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.T


# --------------------------------------------------------------------------
# construction

def regular_simplex(n: int) -> Simplex:
    """Regular simplex centred at the origin with the unit ball as its insphere.

    Vertex 1 is ``n * e_1``; the remaining vertices form a regular
    (n-1)-simplex in the hyperplane ``x_1 = -1``. Circumradius is ``n``.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return Simplex(_regular_vertices(n, float(n)))


def _regular_vertices(n, circumradius):
    if n == 1:
        return np.array([[circumradius], [-circumradius]])
    verts = np.zeros((n + 1, n))
    verts[0, 0] = circumradius
    verts[1:, 0] = -circumradius / n
    rho = circumradius * math.sqrt(1.0 - 1.0 / n**2)
    verts[1:, 1:] = _regular_vertices(n - 1, rho)
    return verts


def random_simplex(n: int, seed, min_det: float = 1e-3) -> Simplex:
    """Simplex with vertices i.i.d. uniform on [-1, 1]^n, rejected until |det| >= min_det."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REJECTIONS):
        v = rng.uniform(-1.0, 1.0, size=(n + 1, n))
        if abs(np.linalg.det(_edge_matrix(v))) < min_det:
            continue
        try:
            return Simplex(v)
        except DegenerateError:
            continue
    raise ConditioningError(
        f"no simplex with |det| >= {min_det} after {MAX_REJECTIONS} draws (n={n})"
    )


def unit_right_triangle() -> Simplex:
    return Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


# --------------------------------------------------------------------------
# measurements

def _barycentric_system(s: Simplex) -> np.ndarray:
    """Inverse of the lifted vertex matrix; row i gives lambda_i(x) = row . (x, 1)."""
    m = np.vstack([s.vertices.T, np.ones(s.dim + 1)])
    return np.linalg.inv(m)


def to_halfspaces(s: Simplex) -> HPolytope:
    """H-representation; facet i is the one opposite vertex i."""
    inv = _barycentric_system(s)
    g, h = inv[:, :-1], inv[:, -1]
    scale = np.linalg.norm(g, axis=1)
    return HPolytope(-g / scale[:, None], h / scale)


def vertices_from_halfspaces(p: HPolytope) -> np.ndarray:
    """Vertices of a simplex given as n+1 halfspaces; vertex i avoids facet i."""
    n = p.dim
    if len(p) != n + 1:
        raise ValueError("vertex recovery is only defined for simplices (n+1 facets)")
    out = np.empty((n + 1, n))
    for i in range(n + 1):
        rows = [j for j in range(n + 1) if j != i]
        out[i] = np.linalg.solve(p.normals[rows], p.offsets[rows])
    return out


def volume(s: Simplex) -> float:
    return abs(np.linalg.det(_edge_matrix(s.vertices))) / math.factorial(s.dim)


def _simplex_content(points) -> float:
    """k-dimensional volume of the k-simplex spanned by k+1 points in any ambient dimension."""
    points = np.asarray(points, dtype=float)
    k = points.shape[0] - 1
    if k == 0:
        return 1.0
    e = points[1:] - points[0]
    gram = e @ e.T
    return math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(k)


def _facet_vertices(s: Simplex, i: int) -> np.ndarray:
    return np.delete(s.vertices, i, axis=0)


def _check_index(s, i):
    if not 0 <= i <= s.dim:
        raise IndexError(f"facet index {i} out of range for a {s.dim}-simplex")


def facet_area(s: Simplex, i: int) -> float:
    """(n-1)-volume of the facet opposite vertex ``i`` (0-based); 1 for n = 1."""
    _check_index(s, i)
    return _simplex_content(_facet_vertices(s, i))


def dihedral_cos(s: Simplex, i: int, j: int, atol: float = 1e-9) -> float:
    """Cosine of the dihedral angle between facets i and j.

    Computed from the normals as ``-<u_i, u_j>`` and cross-checked in
    magnitude against the area ratio of facet j projected onto the
    hyperplane of facet i.
    """
    _check_index(s, i)
    _check_index(s, j)
    if i == j:
        raise ValueError("dihedral angle needs two distinct facets")
    h = to_halfspaces(s)
    ui, bi = h.normals[i], h.offsets[i]
    from_normals = -float(ui @ h.normals[j])

    fj = _facet_vertices(s, j)
    projected = fj - np.outer(fj @ ui - bi, ui)
    from_areas = _simplex_content(projected) / _simplex_content(fj)
    if abs(abs(from_normals) - from_areas) > atol:
        raise ArithmeticError(
            f"dihedral cosine mismatch: normals give {from_normals!r}, areas give {from_areas!r}"
        )
    return from_normals


def barycentric(s: Simplex, m) -> BarycentricCoords:
    """Signed-volume ratios V_i / V, normalized to sum to one."""
    m = np.asarray(m, dtype=float)
    n = s.dim
    lifted = np.vstack([s.vertices.T, np.ones(n + 1)])
    total = np.linalg.det(lifted)
    w = np.empty(n + 1)
    for i in range(n + 1):
        sub = lifted.copy()
        sub[:-1, i] = m
        w[i] = np.linalg.det(sub) / total
    # det ratios sum to 1 only up to rounding; fold the defect back in
    return BarycentricCoords(w / w.sum())


def from_barycentric(s: Simplex, w) -> np.ndarray:
    if not isinstance(w, BarycentricCoords):
        w = BarycentricCoords(w)
    return w.weights @ s.vertices


def incenter(s: Simplex) -> tuple[np.ndarray, float]:
    areas = np.array([facet_area(s, i) for i in range(s.dim + 1)])
    center = areas @ s.vertices / areas.sum()
    radius = s.dim * volume(s) / areas.sum()
    return center, radius


def insphere_tangent_points(s: Simplex) -> np.ndarray:
    """Row i is the foot of the perpendicular from the incenter to facet i."""
    center, _ = incenter(s)
    h = to_halfspaces(s)
    dist = h.offsets - h.normals @ center
    return center + dist[:, None] * h.normals


def edge_lengths(s: Simplex) -> np.ndarray:
    v = s.vertices
    return np.array(
        [np.linalg.norm(v[i] - v[j]) for i, j in itertools.combinations(range(s.dim + 1), 2)]
    )


def edge_spread(s: Simplex) -> float:
    e = edge_lengths(s)
    return float((e.max() - e.min()) / e.max())


def is_regular(s: Simplex, tol: float = 1e-6) -> bool:
    return edge_spread(s) <= tol


def circumcenter(s: Simplex) -> tuple[np.ndarray, float]:
    v = s.vertices
    e = _edge_matrix(v)
    rhs = 0.5 * (np.sum(v[1:] ** 2, axis=1) - np.sum(v[0] ** 2))
    c = np.linalg.solve(e, rhs)
    return c, float(np.linalg.norm(v[0] - c))


# --------------------------------------------------------------------------
# affine maps

def affine_map_between(src: Simplex, dst: Simplex) -> AffineMap:
    """The unique affine map sending vertex i of ``src`` to vertex i of ``dst``."""
    if src.dim != dst.dim:
        raise ValueError("simplices must share a dimension")
    es, ed = _edge_matrix(src.vertices), _edge_matrix(dst.vertices)
    # rows: T @ es[k] = ed[k]  =>  T = (es^{-1} ed)^T
    linear = np.linalg.solve(es, ed).T
    shift = dst.vertices[0] - linear @ src.vertices[0]
    return AffineMap(linear, shift)


def apply(map_: AffineMap, e: Ellipsoid) -> Ellipsoid:
    t = map_.linear
    te = t @ e.shape
    return Ellipsoid(t @ e.center + map_.shift, psd_sqrt(te @ te.T))


def random_rotation(n: int, rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_regular_simplex(n: int, seed) -> Simplex:
    """Regular simplex in general position: random rotation, scale in [0.5, 2], shift in [-1, 1]^n."""
    rng = np.random.default_rng(seed)
    base = regular_simplex(n)
    scale = rng.uniform(0.5, 2.0)
    return base.transformed(scale * random_rotation(n, rng), rng.uniform(-1, 1, n))
