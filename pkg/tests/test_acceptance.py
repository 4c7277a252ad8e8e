"""Acceptance criteria, one test (and one PASS/FAIL line) each."""
import itertools
import math
import time

import numpy as np

from john_gauge import blcheck, geom, john, mvie, suites
from john_gauge.geom import HPolytope, Simplex

DIMS_CLASSIFIER = range(2, 7)


def classifier_corpus():
    """200 random simplices (edge spread outside the exclusion band) and 2 regular ones per n = 2..6."""
    out = []
    for n in DIMS_CLASSIFIER:
        out += [("random", suites.classifier_corpus_simplex(n, 1000 * n + k)) for k in range(200)]
        out += [("regular", geom.random_regular_simplex(n, [n, k])) for k in range(2)]
    return out


def unit_circumradius(s: Simplex) -> Simplex:
    c, r = geom.circumcenter(s)
    return s.transformed(np.eye(s.dim) / r, -c / r)


def john_normalized(s: Simplex) -> Simplex:
    e = mvie.analytic_simplex_john(s)
    einv = np.linalg.inv(e.shape)
    return Simplex((s.vertices - e.center) @ einv.T)


# --------------------------------------------------------------------------

def test_c1_regular_certificate(verdict):
    t0 = time.perf_counter()
    worst_w = worst_r = worst_rec = 0.0
    exact = True
    rng = np.random.default_rng(1)
    for n in range(1, 9):
        cert = john.regular_certificate(n)
        exact &= bool(np.all(cert.weights == n / (n + 1)))
        worst_r = max(worst_r, cert.residual_a, cert.residual_b)
        xs = rng.standard_normal((100, n))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        worst_rec = max(worst_rec, *john.reconstruction_errors(cert.contact_points, cert.weights, xs))
        worst_w = max(worst_w, np.abs(cert.weights - n / (n + 1)).max())
    elapsed = time.perf_counter() - t0
    ok = exact and worst_r <= 1e-12 and worst_rec <= 1e-10 and elapsed < 1.0
    verdict(
        "C1 regular certificate n=1..8",
        ok,
        f"weights exact={exact}, max residual {worst_r:.1e}, reconstruction {worst_rec:.1e}, {elapsed:.2f}s",
    )
    assert ok


def test_c2_solver_vs_oracle(verdict):
    t0 = time.perf_counter()
    worst_c = worst_s = 0.0
    statuses = []
    for n in (2, 3, 4, 5):
        for k in range(100):
            s = unit_circumradius(geom.random_simplex(n, [n, k]))
            oracle = mvie.analytic_simplex_john(s)
            e, rep = mvie.max_volume_ellipsoid(geom.to_halfspaces(s))
            statuses.append(rep.status)
            worst_c = max(worst_c, np.abs(e.center - oracle.center).max())
            worst_s = max(worst_s, np.linalg.norm(e.shape - oracle.shape) / np.linalg.norm(oracle.shape))
    elapsed = time.perf_counter() - t0
    conv = statuses.count(mvie.CONVERGED)
    ok = worst_c <= 1e-6 and worst_s <= 1e-5 and conv == len(statuses) and elapsed < 60
    verdict(
        "C2 solver vs oracle, 400 simplices",
        ok,
        f"center {worst_c:.1e}, shape {worst_s:.1e}, converged {conv}/{len(statuses)}, {elapsed:.1f}s",
    )
    assert ok


def test_c3_classifier(verdict):
    corpus = classifier_corpus()
    t0 = time.perf_counter()
    disagree = 0
    min_spread = math.inf
    for kind, s in corpus:
        v = john.john_ball_iff_regular(s, 1e-6, 1e-6, engine="analytic")
        disagree += not v.agree
        if kind == "random":
            min_spread = min(min_spread, geom.edge_spread(s))
        else:
            disagree += not (v.is_ball and v.is_regular)
    elapsed = time.perf_counter() - t0
    n_rand = sum(k == "random" for k, _ in corpus)
    ok = disagree == 0 and n_rand == 1000 and min_spread >= 1e-3 and elapsed < 30
    verdict(
        "C3 ball iff regular",
        ok,
        f"{n_rand} random + {len(corpus) - n_rand} regular, {disagree} disagreements, "
        f"min random spread {min_spread:.1e}, {elapsed:.2f}s",
    )
    assert ok


def test_c4_volume_bound(verdict):
    bound_err = max(
        abs(blcheck.volume_bound(n) / geom.volume(geom.regular_simplex(n)) - 1) for n in range(1, 11)
    )
    desk = (
        math.isclose(blcheck.volume_bound(2), 5.1961524, abs_tol=5e-8)
        and math.isclose(blcheck.volume_bound(3), 13.8564065, abs_tol=5e-8)
    )
    over = 0
    near_bad = 0
    worst_gap = 0.0
    count = 0
    for kind, s in classifier_corpus():
        if kind != "random":
            continue
        k = john_normalized(s)
        n = k.dim
        vol, b = geom.volume(k), blcheck.volume_bound(n)
        over += vol > b * (1 + 1e-9)
        # closeness to the bound is only allowed for (numerically) regular bodies
        near_bad += abs(vol - b) <= 1e-6 * b and geom.edge_spread(k) > 1e-6
        worst_gap = max(worst_gap, abs(vol / b - 1))
        count += 1
    ok = bound_err <= 1e-10 and desk and over == 0 and near_bad == 0
    verdict(
        "C4 volume bound",
        ok,
        f"bound vs regular volume {bound_err:.1e}, {count} normalized simplices: {over} above bound, "
        f"{near_bad} near-bound non-regular; every normalized simplex is regular (max |vol/bound-1| {worst_gap:.1e})",
    )
    assert ok


def test_c5_lift_and_integral(verdict):
    t0 = time.perf_counter()
    cases = []
    for n in (2, 3, 4):
        cases += suites.bl_suite(n, samples=10**6, seed=500 + n, trials=2).cases
    elapsed = time.perf_counter() - t0
    iso = max(c["isotropy_residual"] for c in cases)
    upper = all(c["estimate"] <= 1 + 3 * c["std_error"] for c in cases)
    reg = [c for c in cases if c["kind"] == "regular"]
    rnd = [c for c in cases if c["kind"] == "random"]
    reg_ok = all(abs(c["estimate"] - 1) <= 0.01 for c in reg)
    rnd_ok = all(abs(c["estimate"] - c["closed_form"]) <= 3 * c["std_error"] for c in rnd)
    worst_reg = max(abs(c["estimate"] - 1) for c in reg)
    worst_z = max(abs(c["estimate"] - c["closed_form"]) / c["std_error"] for c in rnd)
    ok = iso <= 1e-10 and upper and reg_ok and rnd_ok and elapsed < 120
    verdict(
        "C5 lift and integral bound, n=2..4",
        ok,
        f"isotropy {iso:.1e}, value<=1+3se {upper}, regular |est-1| <= {worst_reg:.4f}, "
        f"random |est-closed|/se <= {worst_z:.2f}, {elapsed:.1f}s",
    )
    assert ok


def test_c6_slab_formula(verdict):
    worst = 0.0
    for n in range(1, 9):
        for frac in (1.0, 0.37):
            vol = frac * blcheck.volume_bound(n)
            closed = blcheck.closed_form_integral(vol, n)
            worst = max(worst, abs(blcheck.slab_quadrature(vol, n) - closed) / closed)
    sys = blcheck.lift(john.regular_certificate(2))
    val, _ = blcheck.section_integral(sys, math.sqrt(2))
    formula = 3 * math.sqrt(3) * math.exp(-math.sqrt(6))
    rel = abs(val - formula) / formula
    rel_quoted = abs(val - 0.44794) / 0.44794
    ok = worst <= 1e-8 and rel <= 0.005 and rel_quoted <= 0.005
    verdict(
        "C6 slab formula",
        ok,
        f"1-D quadrature max rel err {worst:.1e}; section at r=sqrt2 {val:.6f} vs 3sqrt3 e^-sqrt6 = {formula:.6f} "
        f"(rel {rel:.1e}; vs quoted 0.44794 rel {rel_quoted:.1e})",
    )
    assert ok


def test_c7_orthonormality(verdict):
    mismatches = 0
    john_mismatch = 0
    worst_uu = 0.0
    n_ortho = 0
    for kind, s in classifier_corpus():
        n = s.dim
        regular = geom.is_regular(s, 1e-6)
        # source normals with the inscribed ball as unit ball, lifted with the regular weights
        v, _ = blcheck.lift_vectors(suites.inscribed_normalized(s), np.full(n + 1, n / (n + 1)))
        chk = blcheck.equality_orthonormality_check(blcheck.BLSystem(v, np.ones(n + 1)), 1e-6)
        mismatches += chk.is_orthonormal != regular
        if chk.is_orthonormal:
            n_ortho += 1
            worst_uu = max(worst_uu, abs(chk.implied_uu + 1 / n))
        # certificate of the John-normalized body
        sys = blcheck.lift(john.simplex_certificate(s))
        jchk = blcheck.equality_orthonormality_check(sys, 1e-6)
        k = Simplex(geom.vertices_from_halfspaces(sys.section_polytope()))
        john_mismatch += jchk.is_orthonormal != geom.is_regular(k, 1e-6)
        if jchk.is_orthonormal:
            worst_uu = max(worst_uu, abs(jchk.implied_uu + 1 / n))
    ok = mismatches == 0 and john_mismatch == 0 and worst_uu <= 1e-9 and n_ortho == 10
    verdict(
        "C7 orthonormal iff regular",
        ok,
        f"{mismatches} source mismatches ({n_ortho} orthonormal = regular sources), "
        f"{john_mismatch} normalized-body mismatches, max |<u_i,u_j> + 1/n| {worst_uu:.1e}",
    )
    assert ok


def test_c8_cube(verdict):
    worst_ball = worst_w = worst_r = 0.0
    contacts_ok = True
    for n in range(2, 7):
        cube = HPolytope.cube(n)
        e, rep = mvie.max_volume_ellipsoid(cube)
        contacts_ok &= rep.status == mvie.CONVERGED
        worst_ball = max(worst_ball, np.abs(e.center).max(), np.abs(e.shape - np.eye(n)).max())
        cert = john.certificate_for(cube, e)
        want = {tuple(x) for x in np.vstack([np.eye(n), -np.eye(n)])}
        got = {tuple(np.round(x, 6)) for x in cert.contact_points}
        contacts_ok &= got == want and len(cert.weights) == 2 * n
        worst_w = max(worst_w, np.abs(cert.weights - 0.5).max())
        worst_r = max(worst_r, cert.residual_a, cert.residual_b)
    ok = contacts_ok and worst_ball <= 1e-8 and worst_w <= 1e-8 and worst_r <= 1e-8
    verdict(
        "C8 cube n=2..6",
        ok,
        f"unit ball err {worst_ball:.1e}, contacts +-e_i {contacts_ok}, |c-1/2| {worst_w:.1e}, residuals {worst_r:.1e}",
    )
    assert ok
