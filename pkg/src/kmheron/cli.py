"""Command-line front end.

    kmheron solve <scene>... [--schedule S] [--eps E] [--max-iters N] [--out DIR] [--svg]
                             [--precision P] [--history-stride S] [--jobs N]
    kmheron oracle <scene> [--density D] [--refine R] [--interior] [--budget B] [--tol T] [--compare]
    kmheron certify <scene> --points FILE [--tol T]
    kmheron scenes list | show <name>

A scene is either a bundled name (see ``scenes list``) or a path to a JSON
scene file. Exit codes: 0 success, 1 certificate failed, 2 parse error,
3 infeasible or degenerate input, 4 numeric failure, 5 budget exceeded or
unbounded scene.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import reporting
from .errors import (
    BudgetExceededError,
    DegenerateConfigurationError,
    DimensionMismatchError,
    InfeasibleError,
    NumericFailureError,
    SceneParseError,
    ShapeMismatchError,
    UnboundedSetError,
)
from .optimality import boundary_check, check_optimality
from .oracle import GridSpec, brute_force_min, non_uniqueness_probe
from .problem import objective
from .scenes import BUNDLED, SceneFile, bundled_text, load_scene
from .solver import CHECKPOINTS, StoppingRule, parse_schedule, solve

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4
EXIT_BUDGET = 5

_EXIT_FOR = [
    (SceneParseError, EXIT_PARSE),
    (InfeasibleError, EXIT_INFEASIBLE),
    (DegenerateConfigurationError, EXIT_INFEASIBLE),
    (DimensionMismatchError, EXIT_INFEASIBLE),
    (ShapeMismatchError, EXIT_INFEASIBLE),
    (NumericFailureError, EXIT_NUMERIC),
    (BudgetExceededError, EXIT_BUDGET),
    (UnboundedSetError, EXIT_BUDGET),
]


def exit_code_for(exc: BaseException) -> int | None:
    for cls, code in _EXIT_FOR:
        if isinstance(exc, cls):
            return code
    return None


def _decimals(precision):
    if precision is None:
        return reporting.COORD_DECIMALS, reporting.VALUE_DECIMALS
    return precision, precision


def _certificate_text(inst, Z, tol=1e-3):
    try:
        report = check_optimality(inst, Z, tol)
    except DegenerateConfigurationError as exc:
        return f"certificate unavailable: {exc}\n"
    return reporting.optimality_table(report, boundary_check(inst, Z))


def run_solve(scene: SceneFile, opts) -> tuple[int, str]:
    """Solve one scene; returns the exit code and the text report."""
    coord_dp, value_dp = _decimals(opts.precision)
    settings = scene.solver
    schedule = opts.schedule or parse_schedule(settings.schedule)
    stop = StoppingRule(
        settings.epsilon if opts.eps is None else opts.eps,
        settings.max_iters if opts.max_iters is None else opts.max_iters,
    )
    stride = opts.history_stride if opts.history_stride is not None else settings.history_stride
    inst = scene.instance()
    run = solve(
        inst,
        scene.initial_configuration(),
        schedule,
        stop,
        history_stride=stride,
        check_initial=settings.check_initial,
    )

    lines = [
        f"scene {scene.name}: k={inst.k}, m={inst.m}, dim={inst.dim}",
        f"schedule {schedule.label()}, epsilon {stop.epsilon:g}, max_iters {stop.max_iters}",
        f"stop: {run.stop_reason.value} after {run.iterations} iterations",
        f"best objective: {run.best_value:.{value_dp}f}",
        f"final objective: {run.final_value:.{value_dp}f}",
        "",
        "convergence history",
        f"{'iteration':>10}  {'objective':>14}  {'|dF|':>11}",
    ]
    for h in run.history:
        if h.iteration in CHECKPOINTS or h.iteration == run.iterations:
            lines.append(f"{h.iteration:>10}  {h.objective:>14.{value_dp}f}  {h.delta:>11.4e}")
    lines += ["", "best configuration", reporting.configuration_table(run.best, coord_dp), ""]
    lines += ["pairwise distances", reporting.distance_matrix_csv(run.best, coord_dp).rstrip(), ""]
    lines += ["optimality", _certificate_text(inst, run.best).rstrip()]
    text = "\n".join(lines) + "\n"

    if opts.out is not None:
        out = Path(opts.out)
        if getattr(opts, "multi", False):
            out = out / scene.name
        out.mkdir(parents=True, exist_ok=True)
        (out / "history.csv").write_text(reporting.history_csv(run, value_dp))
        (out / "distances.csv").write_text(reporting.distance_matrix_csv(run.best, coord_dp))
        (out / "solution.json").write_text(reporting.solution_json(run))
        (out / "report.txt").write_text(text)
        if opts.svg and inst.dim == 2:
            (out / "figure.svg").write_text(reporting.render_svg(inst, run.best))
    return EXIT_OK, text


def _solve_job(args):
    ref, opts = args
    try:
        return run_solve(load_scene(ref), opts)
    except Exception as exc:  # reported to the parent with its exit code
        code = exit_code_for(exc)
        if code is None:
            raise
        return code, f"error: {ref}: {exc}\n"


def cmd_solve(opts) -> int:
    opts.multi = len(opts.scenes) > 1
    jobs = [(ref, opts) for ref in opts.scenes]
    if opts.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(_solve_job, jobs))
    else:
        results = [_solve_job(j) for j in jobs]
    worst = EXIT_OK
    for code, text in results:
        (sys.stdout if code == EXIT_OK else sys.stderr).write(text)
        worst = max(worst, code)
    return worst


def cmd_oracle(opts) -> int:
    scene = load_scene(opts.scene)
    inst = scene.instance()
    grid = GridSpec(opts.density, opts.refine, opts.interior, int(opts.budget))
    result = brute_force_min(inst, grid)
    count = non_uniqueness_probe(inst, GridSpec(opts.density, 0, opts.interior, int(opts.budget)), opts.tol)
    print(f"scene {scene.name}: grid density {grid.density}, {grid.refine} refinement rounds")
    print(f"oracle value: {result.value:.6f}")
    print(f"cell size: {result.cell:.3e}")
    print("oracle configuration")
    print(reporting.configuration_table(result.config))
    print(f"near-optimal configurations (tol {opts.tol:g}): {count}")
    if opts.compare:
        run = solve(
            inst,
            scene.initial_configuration(),
            parse_schedule(scene.solver.schedule),
            scene.solver.stopping_rule(),
            check_initial=scene.solver.check_initial,
        )
        gap = result.value - run.best_value
        print(f"solver best value: {run.best_value:.6f}")
        print(f"oracle - solver gap: {gap:.3e}")
    return EXIT_OK


def cmd_certify(opts) -> int:
    scene = load_scene(opts.scene)
    inst = scene.instance()
    try:
        Z = reporting.load_points(Path(opts.points).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise SceneParseError(f"cannot read points: {exc}", field=opts.points) from None
    report = check_optimality(inst, Z, opts.tol)
    print(f"scene {scene.name}: objective {objective(inst, Z):.6f}")
    print(reporting.optimality_table(report, boundary_check(inst, Z)), end="")
    return EXIT_OK if report.passed else EXIT_NOT_CERTIFIED


def cmd_scenes(opts) -> int:
    if opts.action == "list":
        for name in BUNDLED:
            print(f"{name:<16} {load_scene(name).description}")
        return EXIT_OK
    if opts.name is None:
        raise SceneParseError("scenes show needs a scene name")
    try:
        sys.stdout.write(bundled_text(opts.name))
    except KeyError as exc:
        raise SceneParseError(exc.args[0]) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmheron", description="Generalized (k,m)-Heron problem solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run the projected subgradient method")
    p.add_argument("scenes", nargs="+", help="bundled scene name or scene file")
    p.add_argument("--schedule", type=parse_schedule, help="inv-t | inv-t-scaled:<c> | const:<a>")
    p.add_argument("--eps", type=float, help="stop when |F(t) - F(t-1)| < eps")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--history-stride", type=int)
    p.add_argument("--out", help="directory for history.csv, distances.csv, solution.json, report.txt")
    p.add_argument("--svg", action="store_true", help="also write figure.svg (planar scenes)")
    p.add_argument("--precision", type=int, help="decimals for all printed numbers")
    p.add_argument("--jobs", type=int, default=1, help="solve several scenes in parallel")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force grid minimization")
    p.add_argument("scene")
    p.add_argument("--density", type=int, default=64)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--interior", action="store_true", help="sample interiors as well as boundaries")
    p.add_argument("--budget", type=float, default=1e7)
    p.add_argument("--tol", type=float, default=1e-6, help="near-optimality tolerance for the probe")
    p.add_argument("--compare", action="store_true", help="also run the solver and report the gap")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("certify", help="check first-order optimality of given points")
    p.add_argument("scene")
    p.add_argument("--points", required=True, help='JSON {"xs": [...], "ys": [...]} or solution.json')
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("scenes", help="list or show bundled scenes")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_scenes)
    return parser


def main(argv=None) -> int:
    opts = build_parser().parse_args(argv)
    try:
        return opts.func(opts)
    except Exception as exc:
        code = exit_code_for(exc)
        if code is None:
            raise
        print(f"error: {exc}", file=sys.stderr)
        if code == EXIT_BUDGET:
            print("hint: lower --density, raise --budget, or replace unbounded sets", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
