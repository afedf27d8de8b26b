"""
Command-line front end.

Every subcommand prints a JSON report (``--human`` indents it) and returns
0 on success, 1 on malformed input or unmet preconditions, and 2 when a
verification fails or the solver does not converge.

:copyright: (c) 2026 by the inflap developers.
:license: MPL-2.0, see LICENSE for more details.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from inflap import __version__, setup_logging
from inflap.cone_harmonic import cone_comparison_sampled, harnack_check, is_inf_superharmonic_exact, regularity_checks
from inflap.config import CheckConfig, SolverConfig
from inflap.const import EXIT_FAILED, EXIT_INPUT_ERROR, EXIT_OK, CheckStatus, SweepMode
from inflap.dumbbell import dumbbell_graph, u_inf, u_inf_plus
from inflap.eikonal import boundary_attainment, comparison_harness, mcshane_extension, monge_classify
from inflap.euclid_grid import Disk, ball_consistency, build_grid_graph, grid_distortion_check
from inflap.io import (
    csv_rows,
    function_to_dict,
    graph_to_dict,
    load_boundary_data,
    load_domain,
    load_function,
    load_graph,
    write_csv,
    write_json,
    write_text,
)
from inflap.metric_graph import MetricGraph, require_valid
from inflap.numeric import format_scalar, parse_scalar
from inflap.perron_solver import (
    NodeFunction,
    discretize,
    incenter_bound_check,
    principal_eigenvalue,
    residual_report,
    scheme_conditions,
    solve_ground_state,
)
from inflap.pl_calculus import PLFunction
from inflap.report import CheckReport

_LOG = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
DEFAULT_GRID_SPACING = 1 / 50


# -- Helpers -------------------------------------------------------------------


def _option(args: argparse.Namespace, name: str, default: Any = None) -> Any:
    return getattr(args, name, default)


def _graph(source: str) -> MetricGraph:
    g = load_graph(source)
    require_valid(g)
    return g


def _pl(u: PLFunction | NodeFunction) -> PLFunction:
    return u.to_pl() if isinstance(u, NodeFunction) else u


def _function(source: str) -> PLFunction:
    u = _pl(load_function(source))
    require_valid(u.graph)
    return u


def _report(args: argparse.Namespace, data: dict[str, Any], target: str | None = None) -> None:
    write_json(data, target, _option(args, "human", False))


def _exit_code(*reports: CheckReport) -> int:
    statuses = {r.status for r in reports}
    if CheckStatus.FAIL in statuses:
        return EXIT_FAILED
    if CheckStatus.INAPPLICABLE in statuses:
        return EXIT_INPUT_ERROR
    return EXIT_OK


def _wants_csv(args: argparse.Namespace, target: str | None) -> bool:
    return _option(args, "format") == "csv" or (target is not None and target.endswith(".csv"))


def _write_function(args: argparse.Namespace, u: PLFunction | NodeFunction, report: dict[str, Any]) -> None:
    """Function to --out when given, otherwise embedded in the report."""
    target = _option(args, "out")
    if target is None:
        report["function"] = function_to_dict(u)
        return
    if _wants_csv(args, target):
        write_csv(csv_rows(u), target)
    else:
        write_json(function_to_dict(u), target, _option(args, "human", False))
    report["written"] = target


def _level(args: argparse.Namespace, g: MetricGraph):
    raw = _option(args, "lam")
    return principal_eigenvalue(g)[0] if raw is None else parse_scalar(raw)


# -- perron_solver -------------------------------------------------------------


def run_eigen(args: argparse.Namespace) -> int:
    g = _graph(args.graph)
    lam, ridge = principal_eigenvalue(g)
    if _option(args, "human", False):
        points = ", ".join(str(p) for p in ridge.points)
        write_text(f"R_inf={float(ridge.value):g}, lambda={float(lam):g}\nridge: {points}", _option(args, "out"))
        return EXIT_OK
    _report(
        args,
        {
            "r_inf": format_scalar(ridge.value),
            "lambda": format_scalar(lam),
            "lambda_value": float(lam),
            "exact": g.exact,
            "ridge": [p.to_dict() for p in ridge.points],
        },
        _option(args, "out"),
    )
    return EXIT_OK


def run_solve(args: argparse.Namespace) -> int:
    g = _graph(args.graph)
    config = SolverConfig.from_args(args)
    result = solve_ground_state(g, _option(args, "lam"), _option(args, "constraint"), config)
    incenter = incenter_bound_check(result.u, result.level)
    report = {**result.to_dict(), "incenter": incenter.to_dict()}
    if result.converged:
        _write_function(args, result.u, report)
    _report(args, report)
    return EXIT_OK if result.converged and incenter.passed else EXIT_FAILED


def run_residual(args: argparse.Namespace) -> int:
    g = _graph(args.graph)
    u = load_function(args.function, graph=g)
    if isinstance(u, PLFunction):
        config = SolverConfig.from_args(args)
        constraint = _option(args, "constraint") or "all"
        if constraint == "all":
            pinned = principal_eigenvalue(g)[1].points
        else:
            pinned = tuple(g.resolve(part.strip()) for part in constraint.split(","))
        disc = discretize(g, config.h, pinned)
        u = disc.sample(u)
    lam = _level(args, g)
    tol = _option(args, "tol") or RESIDUAL_TOL
    residuals = residual_report(u, lam)
    conditions = scheme_conditions(u, lam, tol)
    report = {"level": format_scalar(lam), **residuals.to_dict(), "conditions": conditions.to_dict()}
    _report(args, report, _option(args, "out"))
    return EXIT_OK if residuals.sup <= tol and conditions.passed else EXIT_FAILED


# -- eikonal -------------------------------------------------------------------


def run_mcshane(args: argparse.Namespace) -> int:
    g = _graph(args.graph)
    data = load_boundary_data(args.boundary)
    u = mcshane_extension(g, data, args.lam)
    report = {
        "check": "mcshane",
        "lambda": format_scalar(parse_scalar(args.lam)),
        "attainment": boundary_attainment(u, data),
        "classification": str(monge_classify(u, args.lam).classification),
    }
    _write_function(args, u, report)
    _report(args, report)
    return EXIT_OK


def run_classify(args: argparse.Namespace) -> int:
    u = _function(args.function)
    report = monge_classify(u, _level(args, u.graph))
    _report(args, report.to_dict(), _option(args, "out"))
    return EXIT_OK


def run_compare(args: argparse.Namespace) -> int:
    u = _function(args.lower)
    v = _pl(load_function(args.upper, graph=u.graph))
    checks = CheckConfig.from_args(args)
    report = comparison_harness(u, v, _level(args, u.graph), checks.samples, checks.seed)
    _report(args, report.to_dict(), _option(args, "out"))
    return _exit_code(report)


# -- cone_harmonic -------------------------------------------------------------


def run_verify_super(args: argparse.Namespace) -> int:
    u = _function(args.function)
    reports = [is_inf_superharmonic_exact(u)]
    if not args.exact_only:
        checks = CheckConfig.from_args(args)
        reports.append(cone_comparison_sampled(u, checks.trials, checks.seed))
    code = _exit_code(*reports)
    status = CheckStatus.PASS if code == EXIT_OK else CheckStatus.FAIL
    _report(args, {"check": "superharmonic", "status": str(status), "checks": [r.to_dict() for r in reports]},
            _option(args, "out"))
    return code


def run_harnack(args: argparse.Namespace) -> int:
    u = _function(args.function)
    checks = CheckConfig.from_args(args)
    report = harnack_check(u, u.graph.resolve(args.x0), args.big_r, args.r, checks.samples, checks.seed)
    _report(args, report.to_dict(), _option(args, "out"))
    return _exit_code(report)


def run_regularity(args: argparse.Namespace) -> int:
    u = _function(args.function)
    checks = CheckConfig.from_args(args)
    report = regularity_checks(u, checks.samples, checks.seed)
    _report(args, report.to_dict(), _option(args, "out"))
    return _exit_code(report)


# -- euclid_grid ---------------------------------------------------------------


def run_grid(args: argparse.Namespace) -> int:
    domain = load_domain(args.domain)
    if args.experiment == "consistency":
        if not isinstance(domain, Disk):
            raise ValueError("the consistency experiment runs on a disk domain")
        config = SolverConfig.from_args(argparse.Namespace(**{**vars(args), "mode": SweepMode.JACOBI}))
        result = ball_consistency(domain.radius, args.spacing, args.k, config)
        _report(args, result.to_dict(), _option(args, "out"))
        return EXIT_OK if result.passed() else EXIT_FAILED
    g = build_grid_graph(domain, args.spacing, args.k)
    if args.experiment == "distortion":
        checks = CheckConfig.from_args(args)
        report = grid_distortion_check(g, domain, args.k, checks.samples, checks.seed)
        _report(args, report.to_dict(), _option(args, "out"))
        return _exit_code(report)
    _report(args, graph_to_dict(g), _option(args, "out"))
    return EXIT_OK


# -- Examples ------------------------------------------------------------------


def run_example(args: argparse.Namespace) -> int:
    g = dumbbell_graph()
    human = _option(args, "human", False)
    if args.out_dir is None:
        write_json(graph_to_dict(g), _option(args, "out"), human)
        return EXIT_OK
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(graph_to_dict(g), out / "dumbbell_graph.json", human)
    write_json(function_to_dict(u_inf(g), "dumbbell_graph.json"), out / "u_inf.json", human)
    write_json(function_to_dict(u_inf_plus(g), "dumbbell_graph.json"), out / "u_inf_Y.json", human)
    _LOG.info("Wrote the dumbbell example to %s", out)
    return EXIT_OK


# -- Parser --------------------------------------------------------------------


def _common_options() -> argparse.ArgumentParser:
    """Flags accepted before or after the subcommand; unset flags leave no attribute."""
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--tol", type=float, help="Solver and residual tolerance.")
    common.add_argument("--h", help="Node spacing of the discretization, e.g. 1/64.")
    common.add_argument("--seed", type=int, help="Seed of randomized checks (default: 0).")
    common.add_argument("--trials", type=int, help="Trials of randomized checks.")
    common.add_argument("--samples", type=int, help="Sample points per check.")
    common.add_argument("--out", help="Output file; - for stdout.")
    common.add_argument("--format", choices=["json", "csv"], help="Function output format.")
    common.add_argument("--human", action="store_true", help="Indented, human-readable output.")
    common.add_argument("--threads", type=int, help="Worker threads for Jacobi sweeps.")
    common.add_argument("--mode", choices=[m.value for m in SweepMode], help="Sweep mode of the solver.")
    common.add_argument("--max-iters", dest="max_iters", type=int, help="Sweep budget of the solver.")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="inflap",
        description="Principal infinity-eigenvalues and eigenfunctions on metric graphs.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def command(name: str, func, help_text: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help_text, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = command("eigen", run_eigen, "Principal eigenvalue 1/R and the ridge where R is attained.")
    sp.add_argument("graph", help="Graph JSON file, or - for stdin.")

    sp = command("solve", run_solve, "Minimal ground state by the monotone scheme.")
    sp.add_argument("graph", help="Graph JSON file, or - for stdin.")
    sp.add_argument("--lambda", dest="lam", help="Level (default: the principal eigenvalue).")
    sp.add_argument("--constraint", help="all, or comma separated named points, vertices or edge:t.")

    sp = command("residual", run_residual, "Scheme residual of a function at a level.")
    sp.add_argument("graph", help="Graph JSON file.")
    sp.add_argument("function", help="Function JSON file (PL or node values).")
    sp.add_argument("--lambda", dest="lam", help="Level (default: the principal eigenvalue).")
    sp.add_argument("--constraint", help="Constraint set used to sample a PL function.")

    sp = command("mcshane", run_mcshane, "McShane extension of boundary data.")
    sp.add_argument("graph", help="Graph JSON file.")
    sp.add_argument("boundary", help='Boundary data JSON {"g": {...}}.')
    sp.add_argument("--lambda", dest="lam", required=True, help="Slope of the extension.")

    sp = command("classify", run_classify, "Monge classification for |grad u| = lambda.")
    sp.add_argument("function", help="Function JSON file.")
    sp.add_argument("--lambda", dest="lam", help="Level (default: the principal eigenvalue).")

    sp = command("compare", run_compare, "Comparison of a Monge subsolution and supersolution.")
    sp.add_argument("lower", help="Subsolution JSON file.")
    sp.add_argument("upper", help="Supersolution JSON file.")
    sp.add_argument("--lambda", dest="lam", help="Level (default: the principal eigenvalue).")

    sp = command("verify-super", run_verify_super, "Infinity-superharmonicity, exact and by sampled cones.")
    sp.add_argument("function", help="Function JSON file.")
    sp.add_argument("--exact-only", action="store_true", default=False, help="Skip the sampled cone comparison.")

    sp = command("harnack", run_harnack, "Harnack inequality u(y) <= 3 u(x) on a small ball.")
    sp.add_argument("function", help="Function JSON file.")
    sp.add_argument("--x0", required=True, help="Ball center: named point, vertex or edge:t.")
    sp.add_argument("--R", dest="big_r", required=True, help="Outer radius.")
    sp.add_argument("--r", dest="r", required=True, help="Inner radius, 4r < R.")

    sp = command("regularity", run_regularity, "Lipschitz bound and slope regularity.")
    sp.add_argument("function", help="Function JSON file.")

    sp = command("grid", run_grid, "Grid graph of a planar domain and consistency experiments.")
    sp.add_argument("domain", help="Domain JSON file.")
    sp.add_argument("--spacing", type=float, default=DEFAULT_GRID_SPACING, help="Grid spacing (default: 1/50).")
    sp.add_argument("--k", type=int, default=3, help="Stencil radius (default: 3).")
    sp.add_argument("--experiment", choices=["consistency", "distortion"], default=None)

    sp = command("example", run_example, "Bundled example graphs and closed-form solutions.")
    sp.add_argument("name", choices=["dumbbell"])
    sp.add_argument("--out-dir", default=None, help="Write graph, u_inf and u_inf_Y files here.")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT_ERROR
    setup_logging(_option(args, "log_level"))
    try:
        return int(args.func(args))
    except (ValueError, OSError) as err:
        _LOG.debug("Input error", exc_info=True)
        print(f"inflap: error: {err}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
