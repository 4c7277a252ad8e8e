"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 infeasible / unbounded / degenerate
input or solver failure, 3 suite disagreements.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import geom, john, mvie, serialize, suites
from .errors import JohnGaugeError
from .geom import HPolytope, Simplex

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SUITE = 0, 1, 2, 3
ELLIPSE_SAMPLES = 256

log = logging.getLogger("john_gauge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("formatter_class", argparse.ArgumentDefaultsHelpFormatter)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _emit(text, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _solver_config(args):
    return mvie.SolverConfig(tol_kkt=args.tol_kkt, max_newton_iters=args.max_iters)


def _read_body(path):
    try:
        return serialize.body_from_json(serialize.load(path))
    except (OSError, ValueError, KeyError) as exc:
        if isinstance(exc, JohnGaugeError):
            raise
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _john_ellipsoid(body, engine, cfg):
    """(ellipsoid, report-or-None, polytope)"""
    if isinstance(body, Simplex):
        poly = geom.to_halfspaces(body)
        if engine == "analytic":
            return mvie.analytic_simplex_john(body), None, poly
    else:
        poly = body
        if engine == "analytic":
            raise UsageError("the analytic engine needs a Simplex input")
    e, report = mvie.max_volume_ellipsoid(poly, cfg)
    return e, report, poly


# --------------------------------------------------------------------------
# commands

def cmd_gen(args):
    if args.kind == "regular":
        serialize.write(args.out, geom.regular_simplex(args.dim), regular=True)
    else:
        serialize.write(args.out, geom.random_simplex(args.dim, args.seed, args.min_det))
    return EXIT_OK


def cmd_mvie(args):
    body = _read_body(args.input)
    cfg = _solver_config(args)
    e, report, _ = _john_ellipsoid(body, args.engine, cfg)
    d = serialize.to_json(e)
    if report is not None:
        d["report"] = report.to_json()
    _emit(serialize._encode(d) + "\n", args.out)
    if report is not None and report.status != mvie.CONVERGED:
        log.error("solver stopped with status %s (kkt %.3e)", report.status, report.final_kkt_residual)
        return EXIT_INPUT
    return EXIT_OK


def cmd_certify(args):
    body = _read_body(args.input)
    cfg = _solver_config(args)
    e, report, poly = _john_ellipsoid(body, args.engine, cfg)
    if report is not None and report.status != mvie.CONVERGED:
        raise JohnGaugeError(f"solver did not converge ({report.status})")
    cert = john.certificate_for(poly, e, tol_contact=args.tol_contact)
    ok = cert.passes(args.tol_cert)
    _emit(serialize.dumps(cert) + "\n", args.out)
    summary = (
        f"contacts: {len(cert.weights)}\n"
        f"residual_a: {cert.residual_a:.3e}\n"
        f"residual_b: {cert.residual_b:.3e}\n"
        f"sum c_i: {cert.weight_sum:.12g} (n = {cert.dim})\n"
        f"certificate: {'PASS' if ok else 'FAIL'} at {args.tol_cert:g}\n"
    )
    # keep stdout clean when it carries the JSON
    (sys.stderr if args.out in (None, "-") else sys.stdout).write(summary)
    return EXIT_OK if ok else EXIT_INPUT


def _write_report(report, args):
    text = "\n".join(report.lines()) + "\n"
    _emit(text, args.out)
    s = report.summary()
    log.info("%s: %d cases, %d pass, %d fail", s["suite"], s["cases"], s["pass"], s["fail"])
    return EXIT_OK if report.ok else EXIT_SUITE


def cmd_theorem3(args):
    report = suites.theorem3_suite(
        args.dim,
        args.trials,
        args.seed,
        tol_ball=args.tol_ball,
        tol_reg=args.tol_reg,
        engine=args.engine,
        regular_only=args.regular_only,
        min_det=args.min_det,
        cfg=_solver_config(args),
        timing=args.timing,
    )
    return _write_report(report, args)


def cmd_blsuite(args):
    if args.samples < 10**4:
        raise UsageError("--samples must be at least 10000")
    report = suites.bl_suite(
        args.dim, args.samples, args.seed, args.trials, tol_ortho=args.tol_ortho,
        min_det=args.min_det, timing=args.timing,
    )
    return _write_report(report, args)


def polygon_ring(p: HPolytope) -> np.ndarray:
    """Vertices of a bounded 2-D polytope in counter-clockwise order."""
    pts = []
    a, b = p.normals, p.offsets
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            m = a[[i, j]]
            if abs(np.linalg.det(m)) < 1e-12:
                continue
            x = np.linalg.solve(m, b[[i, j]])
            if p.contains(x, 1e-9) and not any(np.allclose(x, q, atol=1e-9) for q in pts):
                pts.append(x)
    pts = np.array(pts)
    c = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
    return pts[order]


def plot_rows(body, engine="analytic", cfg=None):
    if body.dim != 2:
        raise UsageError(f"plot2d needs a 2-D input, got dimension {body.dim}")
    e, report, poly = _john_ellipsoid(body, engine, cfg)
    if report is not None and report.status != mvie.CONVERGED:
        raise JohnGaugeError(f"solver did not converge ({report.status})")
    ring = body.vertices if isinstance(body, Simplex) else polygon_ring(poly)
    theta = 2 * math.pi * np.arange(ELLIPSE_SAMPLES) / ELLIPSE_SAMPLES
    ellipse = e.center + np.column_stack([np.cos(theta), np.sin(theta)]) @ e.shape.T
    unit = john.normalize_to_unit_john(poly, e)
    contacts = e.center + john.contact_points(unit) @ e.shape.T
    rows = [("polygon", x, y) for x, y in ring]
    rows += [("ellipse", x, y) for x, y in ellipse]
    rows += [("contact", x, y) for x, y in contacts]
    return rows


def cmd_plot2d(args):
    body = _read_body(args.input)
    engine = args.engine if isinstance(body, Simplex) else "numeric"
    rows = plot_rows(body, engine, _solver_config(args))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "x", "y"])
    for kind, x, y in rows:
        w.writerow([kind, repr(float(x)), repr(float(y))])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="john-gauge", description="John ellipsoids of simplices and polytopes.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(sp):
        sp.add_argument("--tol-kkt", type=_positive_float, default=1e-9, help="solver KKT tolerance")
        sp.add_argument("--max-iters", type=_positive_int, default=200,
                        help="Newton steps per barrier stage")

    def common(sp, dim=True):
        sp.add_argument("--out", default=None, help="output file, stdout when omitted")
        if dim:
            sp.add_argument("--dim", type=_positive_int, required=True, help="dimension n")
            sp.add_argument("--seed", type=int, default=0, help="master seed")

    g = sub.add_parser("gen", help="write a Simplex JSON instance")
    g.add_argument("kind", choices=["regular", "random"])
    common(g)
    g.add_argument("--min-det", type=_positive_float, default=1e-2,
                   help="rejection threshold on |det| for random instances")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("mvie", help="maximum-volume inscribed ellipsoid")
    m.add_argument("input")
    m.add_argument("--engine", choices=["numeric", "analytic"], default="numeric", help="analytic needs a Simplex")
    common(m, dim=False)
    solver_flags(m)
    m.set_defaults(func=cmd_mvie)

    c = sub.add_parser("certify", help="John decomposition certificate")
    c.add_argument("input")
    c.add_argument("--engine", choices=["numeric", "analytic"], default="numeric", help="analytic needs a Simplex")
    c.add_argument("--tol-contact", type=_positive_float, default=john.CONTACT_TOL,
                   help="tangency threshold b_i - 1")
    c.add_argument("--tol-cert", type=_positive_float, default=1e-7,
                   help="pass threshold on both residuals")
    common(c, dim=False)
    solver_flags(c)
    c.set_defaults(func=cmd_certify)

    t = sub.add_parser("theorem3", help="ball-iff-regular classifier suite")
    common(t)
    t.add_argument("--trials", type=_positive_int, default=100, help="random simplices besides the regular one")
    t.add_argument("--tol-ball", type=_positive_float, default=1e-6, help="relative semi-axis spread for a ball")
    t.add_argument("--tol-reg", type=_positive_float, default=1e-6, help="relative edge spread for regular")
    t.add_argument("--engine", choices=["analytic", "numeric"], default="analytic", help="John ellipsoid source")
    t.add_argument("--regular-only", action="store_true", help="only regular simplices in general position")
    t.add_argument("--min-det", type=_positive_float, default=1e-2, help="|det| rejection threshold")
    t.add_argument("--timing", action="store_true", help="add per-case wall time (breaks byte reproducibility)")
    solver_flags(t)
    t.set_defaults(func=cmd_theorem3)

    b = sub.add_parser("blsuite", help="lift / integral bound / orthonormality suite")
    common(b)
    b.add_argument("--samples", type=_positive_int, default=10**6, help="Monte Carlo samples per case, at least 1e4")
    b.add_argument("--trials", type=int, default=3, help="random simplices besides the regular case")
    b.add_argument("--tol-ortho", type=_positive_float, default=1e-6, help="max |<v_i, v_j>| for orthonormal")
    b.add_argument("--min-det", type=_positive_float, default=1e-2, help="|det| rejection threshold")
    b.add_argument("--timing", action="store_true", help="add per-case wall time (breaks byte reproducibility)")
    b.set_defaults(func=cmd_blsuite)

    pl = sub.add_parser("plot2d", help="CSV of polygon, John ellipse and contact points")
    pl.add_argument("input")
    pl.add_argument("--engine", choices=["numeric", "analytic"], default="analytic",
                    help="analytic for Simplex input; HPolytope input falls back to numeric")
    common(pl, dim=False)
    solver_flags(pl)
    pl.set_defaults(func=cmd_plot2d)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"john-gauge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (JohnGaugeError, ValueError) as exc:
        print(f"john-gauge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
