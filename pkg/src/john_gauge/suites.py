"""Validation suites: the ball-iff-regular classifier and the volume-bound checks.

Each suite returns a :class:`SuiteReport` whose per-case records are plain
dicts in case order, so the serialized report is byte-for-byte reproducible.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import blcheck, geom, john, mvie
from .geom import Simplex

EXCLUSION_BAND = (1e-6, 1e-3)


@dataclass
class SuiteReport:
    name: str
    cases: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for c in self.cases if c["pass"])

    @property
    def failed(self) -> int:
        return len(self.cases) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> dict:
        resid = [c["residual"] for c in self.cases if "residual" in c]
        return {
            "suite": self.name,
            "cases": len(self.cases),
            "pass": self.passed,
            "fail": self.failed,
            "max_residual": max(resid) if resid else 0.0,
        }

    def lines(self) -> list:
        from .serialize import _encode

        out = [_encode(c) for c in self.cases]
        out.append(_encode({"summary": self.summary()}))
        return out


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("JOHN_GAUGE_THREADS", "1")))
    except ValueError:
        return 1


def _run_cases(fn, jobs, timing=False):
    def timed(job):
        t0 = time.perf_counter()
        rec = fn(job)
        if timing:
            rec["wall_time"] = time.perf_counter() - t0
        return rec

    threads = min(thread_count(), max(len(jobs), 1))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(timed, jobs))
    return [timed(j) for j in jobs]


def case_seeds(seed, count) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def classifier_corpus_simplex(n: int, seed: int, min_det: float = 1e-2, max_tries: int = 100) -> Simplex:
    """Random simplex outside the ambiguous edge-spread band (1e-6, 1e-3)."""
    for k in range(max_tries):
        s = geom.random_simplex(n, [seed, k], min_det)
        spread = geom.edge_spread(s)
        if not EXCLUSION_BAND[0] < spread < EXCLUSION_BAND[1]:
            return s
    raise RuntimeError("could not draw a simplex outside the exclusion band")


# --------------------------------------------------------------------------
# ball iff regular

def theorem3_suite(
    dim: int,
    trials: int,
    seed: int = 0,
    tol_ball: float = 1e-6,
    tol_reg: float = 1e-6,
    engine: str = "analytic",
    regular_only: bool = False,
    min_det: float = 1e-2,
    cfg: mvie.SolverConfig | None = None,
    timing: bool = False,
) -> SuiteReport:
    """Ball verdict vs regularity verdict on random simplices plus one regular one.

    With ``regular_only`` every case is a regular simplex in general position.
    """
    seeds = case_seeds(seed, trials + (0 if regular_only else 1))
    if regular_only:
        jobs = [("regular", s) for s in seeds]
    else:
        jobs = [("random", s) for s in seeds[:-1]] + [("regular", seeds[-1])]

    def one(job):
        kind, s_seed = job
        s = geom.random_regular_simplex(dim, s_seed) if kind == "regular" else classifier_corpus_simplex(dim, s_seed, min_det)
        e = mvie.analytic_simplex_john(s) if engine == "analytic" else None
        verdict = john.john_ball_iff_regular(s, tol_ball, tol_reg, engine, cfg)
        if e is None:
            e, _ = mvie.max_volume_ellipsoid(geom.to_halfspaces(s), cfg)
        lam = np.linalg.eigvalsh(e.shape)
        return {
            "kind": kind,
            "dim": dim,
            "seed": s_seed,
            "edge_spread": geom.edge_spread(s),
            "axis_spread": float((lam[-1] - lam[0]) / lam[-1]),
            "is_ball": verdict.is_ball,
            "is_regular": verdict.is_regular,
            "agree": verdict.agree,
            "pass": verdict.agree,
        }

    records = _run_cases(one, jobs, timing)
    for i, r in enumerate(records):
        r["case"] = i
        r["residual"] = r["axis_spread"] if r["kind"] == "regular" else 0.0
    return SuiteReport("theorem3", [{"case": r.pop("case"), **r} for r in records])


# --------------------------------------------------------------------------
# lift, integral bound and equality case

def inscribed_normalized(s: Simplex):
    """Facet normals after moving the inscribed ball of ``s`` to the unit ball (unit normals are unchanged)."""
    return geom.to_halfspaces(s).normals


def _bl_case(label, source: Simplex | None, cert, samples, seed, tol_ortho):
    n = cert.dim
    sys = blcheck.lift(cert)
    k = sys.section_polytope()
    k_simplex = Simplex(geom.vertices_from_halfspaces(k))
    vol_k = geom.volume(k_simplex)
    bound = blcheck.volume_bound(n)
    closed = blcheck.closed_form_integral(vol_k, n)
    est = blcheck.estimate_integral(sys, samples, seed)
    ortho = blcheck.equality_orthonormality_check(sys, tol_ortho)
    k_regular = geom.is_regular(k_simplex, 1e-6)
    rec = {
        "kind": label,
        "dim": n,
        "seed": seed,
        "isotropy_residual": sys.isotropy_residual,
        "estimate": est.value,
        "std_error": est.std_error,
        "closed_form": closed,
        "volume": vol_k,
        "volume_bound": bound,
        "is_orthonormal": ortho.is_orthonormal,
        "max_offdiag": ortho.max_offdiag,
        "implied_uu": ortho.implied_uu,
        "section_regular": k_regular,
        "variance_warning": est.variance_warning,
    }
    checks = [
        sys.isotropy_residual <= 1e-10,
        est.value <= 1 + 3 * est.std_error,
        abs(est.value - closed) <= 3 * est.std_error,
        vol_k <= bound * (1 + 1e-9),
        ortho.is_orthonormal == k_regular,
    ]
    if ortho.is_orthonormal:
        checks.append(abs(ortho.implied_uu + 1 / n) <= 1e-9)
    if label == "regular":
        checks.append(abs(est.value - 1) <= 0.01)
    if source is not None:
        # the source's own facet normals (inscribed ball normalized) lift to an
        # orthonormal family exactly when the source is regular
        u = inscribed_normalized(source)
        v, _ = blcheck.lift_vectors(u, np.full(n + 1, n / (n + 1)))
        inscribed = blcheck.equality_orthonormality_check(blcheck.BLSystem(v, np.ones(n + 1)), tol_ortho)
        rec["source_regular"] = geom.is_regular(source, 1e-6)
        rec["inscribed_orthonormal"] = inscribed.is_orthonormal
        checks.append(inscribed.is_orthonormal == rec["source_regular"])
    rec["residual"] = sys.isotropy_residual
    rec["pass"] = all(checks)
    return rec


def bl_suite(
    dim: int,
    samples: int = 10**6,
    seed: int = 0,
    trials: int = 3,
    tol_ortho: float = 1e-6,
    min_det: float = 1e-2,
    timing: bool = False,
) -> SuiteReport:
    """Lift, isotropy, Monte Carlo integral vs closed form, volume bound, orthonormality.

    Case 0 is the regular certificate; the rest are random simplices
    normalized by their John ellipsoid.
    """
    seeds = case_seeds(seed, trials + 1)
    jobs = [("regular", None, seeds[0])] + [("random", dim, s) for s in seeds[1:]]

    def one(job):
        kind, _, s_seed = job
        if kind == "regular":
            return _bl_case(kind, None, john.regular_certificate(dim), samples, s_seed, tol_ortho)
        s = classifier_corpus_simplex(dim, s_seed, min_det)
        return _bl_case(kind, s, john.simplex_certificate(s), samples, s_seed, tol_ortho)

    records = _run_cases(one, jobs, timing)
    return SuiteReport("blsuite", [{"case": i, **r} for i, r in enumerate(records)])
