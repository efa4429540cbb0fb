"""``powerplan`` command line front end.

Exit codes are a stable contract::

    0  success / feasible
    1  error (bad input, missing constraints, numerical failure)
    2  infeasible targets, or the minimal point violates the power constraints
    3  boundary case (spectral radius within tolerance of 1)
    4  ``project`` called on an instance that is already feasible
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import scenario_io
from .bargain import BargainProblem, Objective, evaluate_objective, nbs_solve
from .errors import AlreadyFeasible, Infeasible, PowerPlanError, RegionEmpty
from .link_model import Scenario, build_link_model
from .projection import DEFAULT_MAX_CYCLES, balance_infeasible
from .region import NormalizedSystem, min_power_point, normalize, normalized_sir
from .spectral import DEFAULT_MAX_ITER, DEFAULT_TOL
from .sweep import boundary_scale, sweep, write_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_BOUNDARY = 3
EXIT_ALREADY_FEASIBLE = 4

_STATUS_EXIT = {"feasible": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "boundary": EXIT_BOUNDARY}


@dataclass
class RunReport:
    command: str
    scenario: str  # sha256 of the canonical scenario text
    status: str
    rho: Optional[float] = None
    powers: Optional[list] = None
    sir: Optional[list] = None
    objective: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    wall_time: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "scenario": self.scenario,
            "status": self.status,
            "rho": self.rho,
            "powers": self.powers,
            "sir": self.sir,
            "objective": self.objective,
        }
        out.update(self.extra)
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    def render(self, fmt: str) -> str:
        d = self.to_dict()
        if fmt == "json":
            return json.dumps(d, sort_keys=True, allow_nan=False)
        lines = []
        for key, value in d.items():
            if value is None or value == {}:
                continue
            lines.append(f"{key}: {_fmt_value(value)}")
        return "\n".join(lines)


def _fmt_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, list):
        return " ".join(_fmt_value(v) for v in value)
    if isinstance(value, dict):
        return " ".join(f"{k}={_fmt_value(v)}" for k, v in value.items())
    return str(value)


def _floats(arr) -> list:
    return [float(v) for v in arr]


def parse_objective(text: str, scn: Scenario) -> Objective:
    if text == "sum":
        return Objective.total()
    if text.startswith("lq:"):
        return Objective.lq(float(text[3:]))
    if text in ("nash", "nash_game"):
        caps = None if scn.constraints is None else scn.constraints.box_caps()
        if caps is None:
            raise PowerPlanError("the nash_game objective needs individual power caps")
        return Objective.nash_game(caps)
    raise PowerPlanError(f"unknown objective {text!r}; use sum, lq:<q> or nash_game")


def parse_scales(text: str) -> list[float]:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("range must be start:stop:num")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(v) for v in np.linspace(start, stop, num)]
    return [float(v) for v in text.split(",") if v.strip()]


def _default_tol() -> float:
    env = os.environ.get("POWERPLAN_TOL")
    if env is None:
        return DEFAULT_TOL
    try:
        tol = float(env)
    except ValueError:
        raise SystemExit(f"POWERPLAN_TOL={env!r} is not a number") from None
    if not tol > 0:
        raise SystemExit("POWERPLAN_TOL must be positive")
    return tol


def _system(scn: Scenario) -> NormalizedSystem:
    return normalize(build_link_model(scn), scn.sigma2, scn.gamma)


def cmd_check(scn, sys_, args) -> tuple[int, RunReport]:
    rep = min_power_point(sys_, args.tol, args.max_iter)
    report = RunReport("check", scenario_io.digest(scn), rep.status, rep.rho,
                       extra={"margin": 1.0 - rep.rho})
    return _STATUS_EXIT[rep.status], report


def cmd_solve(scn, sys_, args) -> tuple[int, RunReport]:
    rep = min_power_point(sys_, args.tol, args.max_iter)
    report = RunReport("solve", scenario_io.digest(scn), rep.status, rep.rho)
    if not rep.feasible:
        report.extra["message"] = "SIR targets cannot be met by any power vector"
        return EXIT_INFEASIBLE, report
    pi = rep.min_point
    achieved = normalized_sir(sys_, pi)
    report.powers = _floats(pi)
    report.sir = _floats(achieved)
    report.extra["sir_residual"] = _floats(achieved / sys_.gamma - 1.0)
    obj_name = args.objective or scn.objective or "sum"
    obj = parse_objective(obj_name, scn)
    cs = scn.constraints
    if cs is not None and not cs.contains(pi, 1e-9):
        report.status = "constraint_violation"
        report.extra["message"] = "minimal power point violates the power constraints; run 'powerplan project'"
        return EXIT_INFEASIBLE, report
    report.objective = {str(obj): evaluate_objective(obj, pi)}
    return EXIT_OK, report


def cmd_project(scn, sys_, args) -> tuple[int, RunReport]:
    if scn.constraints is None or len(scn.constraints) == 0:
        raise PowerPlanError("scenario has no power constraints to project onto")
    res = balance_infeasible(sys_, scn.constraints, args.tol, args.max_cycles)
    report = RunReport("project", scenario_io.digest(scn), "balanced", None,
                       _floats(res.power), _floats(res.sir))
    report.extra.update(
        min_point=_floats(res.min_point),
        shortfall=_floats(res.shortfall),
        distance=float(np.linalg.norm(res.power - res.min_point)),
        cycles=res.cycles,
    )
    return EXIT_OK, report


def cmd_nbs(scn, sys_, args) -> tuple[int, RunReport]:
    caps = None if scn.constraints is None else scn.constraints.box_caps()
    if caps is None:
        raise PowerPlanError("nbs needs individual power caps in the scenario constraints")
    res = nbs_solve(BargainProblem(sys_, caps))
    solve_point = min_power_point(sys_, args.tol, args.max_iter).min_point
    report = RunReport("nbs", scenario_io.digest(scn), "feasible", res.rho,
                       _floats(res.power), _floats(normalized_sir(sys_, res.power)))
    report.objective = {"nash_product": res.nash_product}
    report.extra.update(
        matches_min_point=bool(np.array_equal(res.power, solve_point)),
        certificate_samples=res.certificate.samples,
        certificate_dominates=res.certificate.dominates_samples,
    )
    return EXIT_OK, report


COMMANDS = {"check": cmd_check, "solve": cmd_solve, "project": cmd_project, "nbs": cmd_nbs}


def _run_sweep(scn, sys_, args, out) -> int:
    rows = sweep(sys_, args.gamma_scale, args.tol, args.max_iter)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, sys_.K, fh)
        s_star = boundary_scale(sys_, args.tol, args.max_iter)
        print(f"wrote {len(rows)} rows to {args.out}; boundary scale s* = {s_star:.10g}", file=out)
    else:
        write_csv(rows, sys_.K, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--tol", type=float, default=None,
                        help="tolerance for spectral and projection solvers (env POWERPLAN_TOL)")
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    common.add_argument("--max-cycles", type=int, default=DEFAULT_MAX_CYCLES)
    common.add_argument("--lenient", action="store_true", help="warn on unknown fields instead of failing")
    common.add_argument("--verbose", action="store_true", help="include wall time in the report")

    parser = argparse.ArgumentParser(prog="powerplan", description="CDMA power control solver")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="feasibility of the SIR targets")
    p_solve = sub.add_parser("solve", parents=[common], help="minimal power allocation")
    p_solve.add_argument("--objective", default=None, help="sum, lq:<q> or nash_game")
    sub.add_parser("project", parents=[common], help="balanced allocation for capped infeasible cases")
    sub.add_parser("nbs", parents=[common], help="Nash bargaining solution under individual caps")
    p_sweep = sub.add_parser("sweep", parents=[common], help="scan a scale on the SIR targets")
    p_sweep.add_argument("--gamma-scale", type=parse_scales, required=True,
                         help="start:stop:num or comma-separated scale factors")
    p_sweep.add_argument("--out", default=None, help="CSV output path (default stdout)")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    if args.tol is None:
        args.tol = _default_tol()
    started = time.perf_counter()
    try:
        scn = scenario_io.load(args.scenario, strict=not args.lenient)
        sys_ = _system(scn)
        if args.command == "sweep":
            return _run_sweep(scn, sys_, args, out)
        code, report = COMMANDS[args.command](scn, sys_, args)
    except (RegionEmpty, Infeasible) as exc:
        return _fail(args, err, exc, EXIT_INFEASIBLE)
    except AlreadyFeasible as exc:
        return _fail(args, err, exc, EXIT_ALREADY_FEASIBLE, hint="use 'powerplan solve'")
    except (PowerPlanError, OSError, ValueError) as exc:
        return _fail(args, err, exc, EXIT_ERROR)
    if args.verbose:
        report.wall_time = time.perf_counter() - started
    print(report.render(args.format), file=out)
    return code


def _fail(args, err, exc, code, hint=None) -> int:
    payload = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
    if hint:
        payload["hint"] = hint
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True), file=err)
    else:
        msg = f"error: {payload['error']}: {payload['message']}"
        if hint:
            msg += f" ({hint})"
        print(msg, file=err)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
