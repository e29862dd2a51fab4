"""Command-line front end.

Exit status: 0 on success, 2 when a structural hypothesis fails, 1 on any
other error (bad config, non-convergence, I/O).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    check_strong_maximum,
    check_weak_maximum,
    cutoff_levels,
    dirichlet_eigenvalue,
    min_hardy_rayleigh,
    summability_scan,
    u_rho_scan,
)
from .config import load_config
from .errors import HardyFemError, HypothesisError
from .fem import check_hypotheses
from .io import default_output_dir, write_csv
from .manufactured import (
    example_coeffs_exact,
    kl_problem,
    paper_example_coeffs,
    residual_norm,
    sz_residual_diagnostic,
    exact_u_rho,
    H1MembershipWarning,
)
from .mesh import build_mesh
from .solver import continuation_solve
from .thresholds import UNBOUNDED, HypothesisSet, eval_F, require_existence, target_value, threshold_report

log = logging.getLogger("hardyfem")


def _outdir(args, cfg=None) -> Path:
    if args.out is not None:
        d = Path(args.out)
    elif cfg is not None and cfg.output_dir is not None:
        d = cfg.output_dir
    else:
        d = default_output_dir()
    d.mkdir(parents=True, exist_ok=True)
    return d


def _plots(args):
    if args.no_svg:
        return None
    from . import plotting

    return plotting


def cmd_threshold(args) -> int:
    beta = args.beta if args.beta is not None else args.alpha
    hyp = HypothesisSet(args.dim, args.alpha, beta, A=args.drift, lam=args.lam)
    res = threshold_report(hyp)
    print(f"H = {res.H:.17g}")
    print(f"2* = {res.two_star:.17g}")
    print(f"F(2*) = {res.F_at_2star:.17g}")
    if not res.existence_ok:
        require_existence(hyp)
    m = res.m_threshold
    print(f"m_threshold = {'unbounded' if m == UNBOUNDED else format(m, '.17g')}")
    print("existence = ok")
    upper = 3 * m if m != UNBOUNDED else 10 * res.two_star
    grid = np.linspace(res.two_star, upper, args.points)
    F = eval_F(grid, hyp)
    out = _outdir(args)
    path = write_csv(out / "f_curve.csv", ["m", "F"], [grid, F])
    print(f"wrote {path}")
    plots = _plots(args)
    if plots:
        print(f"wrote {plots.plot_f_curve(grid, F, target_value(hyp), m, out / 'f_curve.svg')}")
    return 0


def _solve_config(cfg):
    check_hypotheses(cfg.spec)
    mesh = cfg.mesh()
    return continuation_solve(cfg.spec, mesh, cfg.solver)


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    u, report = _solve_config(cfg)
    out = _outdir(args, cfg)
    path = write_csv(out / "solution.csv", ["r", "u"], [u.mesh.nodes, u.values])
    print(f"wrote {path}")
    for lv in report.levels:
        write_csv(
            out / f"residual_history_n{lv.n:g}.csv",
            ["iter", "gap"],
            [list(range(1, len(lv.gaps) + 1)), lv.gaps],
        )
    (out / "solve_report.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    plots = _plots(args)
    if plots:
        plots.plot_solution(u.mesh.nodes, u.values, out / "solution.svg")
    return 0


def cmd_maxprin(args) -> int:
    cfg = load_config(args.config)
    u, report = _solve_config(cfg)
    verdict = check_weak_maximum(u, cfg.weak_tolerance, cfg.spec)
    if not cfg.spec.f.is_zero:
        check_strong_maximum(u, cfg.inner_radius, verdict)
    out = _outdir(args, cfg)
    write_csv(out / "solution.csv", ["r", "u"], [u.mesh.nodes, u.values])
    (out / "maxprin.txt").write_text(verdict.to_text())
    print(f"solver = {report.verdict}")
    print(verdict.to_text(), end="")
    return 0


def _spectral_mesh(args):
    return build_mesh(args.elements, args.grading, args.dim, args.cutoff)


def cmd_hardy(args) -> int:
    mesh = _spectral_mesh(args)
    mu = min_hardy_rayleigh(mesh, args.tol)
    print(f"hardy_minimum = {mu:.17g}")
    print(f"hardy_constant_squared = {((args.dim - 2) / 2) ** 2:.17g}")
    return 0


def cmd_eigen(args) -> int:
    mesh = _spectral_mesh(args)
    mu = dirichlet_eigenvalue(mesh, args.tol)
    print(f"dirichlet_eigenvalue = {mu:.17g}")
    return 0


def _emit_scan(rep, out, args, name):
    path = rep.to_csv(out / f"{name}.csv")
    print(f"wrote {path}")
    for m, c, i in zip(rep.m_grid, rep.classification, range(len(rep.m_grid))):
        print(f"m = {m:g}: {c} (integral growth {rep.growth(i):.6g}, norm variation {rep.norm_variation(i):.4g})")
    print(f"predicted_threshold = {rep.predicted_threshold}")
    print(f"empirical_threshold = {rep.empirical_threshold}")
    print(f"consistent = {rep.consistent()}")
    plots = _plots(args)
    if plots:
        plots.plot_summability(rep, out / f"{name}.svg")


def cmd_scan(args) -> int:
    if args.rho is not None:
        m_grid = args.m_grid or [6, 7, 8, 9, 10]
        rep = u_rho_scan(args.rho, m_grid, args.cutoffs or (1e-4, 1e-6, 1e-30), args.dim, args.elements_per_decade)
        _emit_scan(rep, _outdir(args), args, "summability")
        return 0
    if args.config is None:
        raise HardyFemError("scan needs --config or --rho")
    cfg = load_config(args.config)
    check_hypotheses(cfg.spec)
    ts = cfg.spec.hyp.two_star
    m_grid = args.m_grid or cfg.m_grid or [ts, 1.5 * ts, 2 * ts, 3 * ts]
    meshes = cutoff_levels(cfg.scan_cutoffs, cfg.spec.N, cfg.elements_per_decade, cfg.quad_order)
    workers = args.workers or cfg.workers
    rep = summability_scan(cfg.spec, m_grid, meshes, opts=cfg.solver, workers=workers)
    _emit_scan(rep, _outdir(args, cfg), args, "summability")
    return 0


def cmd_verify_example(args) -> int:
    out = _outdir(args)
    ex = paper_example_coeffs(args.alpha, args.lam, args.dim, args.m)
    print(f"rho = {ex.rho:.17g}")
    print(f"C = {ex.C:.17g}")
    print(f"a_coef = {ex.a_coef:.17g}")
    print(f"f_coef = {ex.f_coef:.17g}")
    print(f"Q_bound = {ex.Q_bound:.17g}")
    print(f"F(m) = {ex.F_m:.17g}")
    try:
        exact = example_coeffs_exact(*(Fraction(str(x)) for x in (args.alpha, args.lam, args.dim, args.m)))
        print("exact (rho, C, a, f, Q, F) = " + ", ".join(str(v) for v in exact))
    except (ValueError, ZeroDivisionError):
        pass
    mesh = build_mesh(args.elements, args.grading, args.dim)
    for diff in (1.0, float(args.alpha)):
        d = sz_residual_diagnostic(args.alpha, args.lam, args.dim, args.m, mesh, diffusion=diff)
        print(f"example residual (diffusion {diff:g}) = {d['residual_norm']:.6g}; strong remainder {d['strong_remainder']}")
    rho = ex.rho
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", H1MembershipWarning)
        u = exact_u_rho(rho, args.dim)
    print(f"identity residual (rho {rho:.6g}) = {residual_norm(u, kl_problem(rho, args.dim), mesh):.6g}")
    m_grid = sorted({max(2 * args.dim / (args.dim - 2), math.floor(args.m) - k) for k in (3, 2, 1)} | {args.m, args.m + 1})
    rep = u_rho_scan(rho, m_grid, (1e-4, 1e-6, 1e-30), args.dim, 40)
    _emit_scan(rep, out, args, "example_summability")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hardyfem", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output directory (default: $HARDYFEM_OUTPUT_DIR or .)")
        sp.add_argument("--no-svg", action="store_true", help="skip SVG rendering")

    sp = sub.add_parser("threshold", help="threshold function and existence verdict")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--drift", type=float, default=0.0, help="drift bound A")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--points", type=int, default=200)
    common(sp)
    sp.set_defaults(func=cmd_threshold)

    for name, func, hlp in (
        ("solve", cmd_solve, "solve a configured problem by continuation in n"),
        ("maxprin", cmd_maxprin, "solve and report maximum-principle verdicts"),
    ):
        sp = sub.add_parser(name, help=hlp)
        sp.add_argument("config")
        common(sp)
        sp.set_defaults(func=func)

    for name, func in (("hardy", cmd_hardy), ("eigen", cmd_eigen)):
        sp = sub.add_parser(name, help=f"{name} spectral value on a graded mesh")
        sp.add_argument("--dim", type=int, default=3)
        sp.add_argument("--elements", type=int, default=2000)
        sp.add_argument("--grading", type=float, default=1.0)
        sp.add_argument("--cutoff", type=float, default=0.0)
        sp.add_argument("--tol", type=float, default=1e-10)
        sp.set_defaults(func=func, out=None, no_svg=True)

    sp = sub.add_parser("scan", help="summability scan over shrinking cutoffs")
    sp.add_argument("--config")
    sp.add_argument("--rho", type=float, help="scan the exact singular profile instead")
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--m-grid", type=float, nargs="+")
    sp.add_argument("--cutoffs", type=float, nargs="+")
    sp.add_argument("--elements-per-decade", type=int, default=40)
    sp.add_argument("--workers", type=int)
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("verify-example", help="diagnostics for the explicit singular example")
    sp.add_argument("--alpha", type=float, default=7.0)
    sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--m", type=float, default=9.0)
    sp.add_argument("--elements", type=int, default=400)
    sp.add_argument("--grading", type=float, default=0.97)
    common(sp)
    sp.set_defaults(func=cmd_verify_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=sys.stderr)
        return 2
    except (HardyFemError, ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
