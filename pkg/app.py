# app.py
import argparse
import sys
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

# Add the current directory to Python path
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(current_dir)

import numpy as np
import pandas as pd

import config
from src.errors import CompactonError, ConvergenceError, InconsistencyError
from src.frame import OPERATORS, assemble, build_frame, fit_decay_rate
from src.profile import WaveParams, build_profile, c_coefficient, profile_record, sample_profile
from src.selftest import run_selftest
from src.spectrum import lowest_eigenpairs, poschl_teller_levels, refine_until_stable
from src.stability import MODELS, sweep, verdict
from src.variational import euler_lagrange_residual, minimize
from utils.console import done, fail, status
from utils.export import frame_to_csv, to_json, write_artifact

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4


@dataclass
class RunConfig:
    """One parsed invocation: a subcommand with its parameters and output settings"""

    subcommand: str
    p: float = 4.0
    omega: float = 1.0
    gamma: float = 1.0
    T: Optional[float] = None
    N: Optional[int] = None
    X: Optional[float] = None
    format: str = "json"
    output: Optional[str] = None
    model: str = "kdv"
    operator: str = "plus"
    refine: bool = False
    samples: int = config.PROFILE_SAMPLES
    p_min: float = 3.0
    p_max: float = 12.0
    p_steps: int = 10
    omegas: List[float] = field(default_factory=lambda: [1.0])
    workers: int = config.WORKERS
    max_iter: int = config.VARIATIONAL_MAX_ITER
    checks: Optional[List[str]] = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="compacton-lab", description="Compacton profiles, spectra and stability verdicts")
    parser.add_argument("--verbose", action="store_true", help="progress lines on stderr")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=("json", "csv"), default="json")
    output.add_argument("--output", default=None, help="output path (default: stdout)")

    wave = argparse.ArgumentParser(add_help=False)
    wave.add_argument("--p", type=float, default=4.0, help="nonlinearity exponent p > 2")
    wave.add_argument("--omega", type=float, default=1.0, help="frequency / speed omega > 0")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--T", type=float, default=None, help="half-width of the t-grid (default: from the potential decay)")
    grid.add_argument("--N", type=int, default=None, help="grid points")

    sub = parser.add_subparsers(dest="subcommand", required=True)

    profile = sub.add_parser("profile", parents=[output, wave], help="compacton profile and functionals")
    profile.add_argument("--gamma", type=float, default=1.0)
    profile.add_argument("--samples", type=int, default=config.PROFILE_SAMPLES, help="CSV sampling resolution")

    for name, text in (("frame", "transformed potentials"), ("spectrum", "lowest eigenpairs")):
        cmd = sub.add_parser(name, parents=[output, wave, grid], help=text)
        cmd.add_argument("--gamma", type=float, default=1.0)
        cmd.add_argument("--operator", choices=OPERATORS, default="plus")
        if name == "spectrum":
            cmd.add_argument("--refine", action="store_true", help="halve h until the low eigenvalues settle")

    stability = sub.add_parser("stability", parents=[output, wave, grid], help="slope D and index verdict")
    stability.add_argument("--model", choices=sorted(MODELS), default="kdv")

    sweep_cmd = sub.add_parser("sweep", parents=[output, grid], help="verdict table over p and omega")
    sweep_cmd.add_argument("--p-min", type=float, default=3.0)
    sweep_cmd.add_argument("--p-max", type=float, default=12.0)
    sweep_cmd.add_argument("--p-steps", type=int, default=10)
    sweep_cmd.add_argument("--omega", type=float, nargs="+", default=[1.0])
    sweep_cmd.add_argument("--model", choices=sorted(MODELS), default="kdv")
    sweep_cmd.add_argument("--workers", type=int, default=config.WORKERS)

    variational = sub.add_parser("variational", parents=[output, wave], help="rearrangement gradient-flow oracle")
    variational.add_argument("--X", type=float, default=None, help="domain half-width (default 1.5 L)")
    variational.add_argument("--N", type=int, default=config.VARIATIONAL_POINTS)
    variational.add_argument("--max-iter", type=int, default=config.VARIATIONAL_MAX_ITER)

    selftest = sub.add_parser("selftest", parents=[output], help="acceptance checks")
    selftest.add_argument("--check", dest="checks", action="append", default=None, help="run only this check")
    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.verbose:
        config.VERBOSE = True
    values = {k: v for k, v in vars(args).items() if k != "verbose"}
    if args.subcommand == "sweep":
        values["omegas"] = values.pop("omega")
    return RunConfig(**{k: v for k, v in values.items() if v is not None or k in ("T", "N", "X", "output", "checks")})


class CompactonLabApp:
    """Dispatches one RunConfig to the module pipelines and serializes the result"""

    def __init__(self):
        self.handlers = {
            "profile": self.run_profile,
            "frame": self.run_frame,
            "spectrum": self.run_spectrum,
            "stability": self.run_stability,
            "sweep": self.run_sweep,
            "variational": self.run_variational,
            "selftest": self.run_selftest,
        }

    def run_profile(self, cfg: RunConfig) -> Tuple[int, str]:
        profile = build_profile(WaveParams(cfg.p, cfg.omega, cfg.gamma))
        if cfg.format == "csv":
            return EXIT_OK, frame_to_csv(sample_profile(profile, cfg.samples))
        return EXIT_OK, to_json(profile_record(profile))

    def _operator(self, cfg: RunConfig):
        frame = build_frame(build_profile(WaveParams(cfg.p, cfg.omega, cfg.gamma)))
        return frame, assemble(frame, cfg.operator, cfg.T, cfg.N or config.GRID_POINTS)

    def run_frame(self, cfg: RunConfig) -> Tuple[int, str]:
        frame, op = self._operator(cfg)
        if cfg.format == "csv":
            return EXIT_OK, frame_to_csv(op.potential_frame())
        t = np.linspace(5.0, 10.0, 51) / np.sqrt(cfg.omega)
        record = {
            "p": cfg.p, "omega": cfg.omega, "gamma": cfg.gamma,
            "L": frame.profile.half_support, "phi0": frame.profile.phi0,
            "operator": op.describe(),
            "W0": float(op.potential(0.0)),
            "W_T": float(op.potential(op.half_width)),
            "edge_decay_rate": fit_decay_rate(t, frame.edge_gap(t)),
            "potential_decay_rate": fit_decay_rate(t, frame.potential_shape(t)),
        }
        return EXIT_OK, to_json(record)

    def run_spectrum(self, cfg: RunConfig) -> Tuple[int, str]:
        frame, op = self._operator(cfg)
        refinement = None
        if cfg.refine:
            report, refinement = refine_until_stable(lambda n: op.with_points(n), op.points)
        else:
            report = lowest_eigenpairs(op)
        if cfg.format == "csv":
            grid_t = op.with_points(report.grid["N"]).grid
            columns = {"t": grid_t}
            for j in range(report.eigenvectors.shape[1]):
                columns[f"v{j}"] = report.eigenvectors[:, j]
            return EXIT_OK, frame_to_csv(pd.DataFrame(columns))
        record = report.to_dict()
        record["exact_levels"] = poschl_teller_levels(cfg.p, cfg.omega, cfg.operator)
        record["refinement"] = refinement
        return EXIT_OK, to_json(record)

    def run_stability(self, cfg: RunConfig) -> Tuple[int, str]:
        report = verdict(cfg.p, cfg.omega, cfg.model, cfg.T, cfg.N or config.GRID_POINTS)
        if cfg.format == "csv":
            row = report.to_row()
            row.pop("error")
            return EXIT_OK, frame_to_csv(pd.DataFrame([row]))
        return EXIT_OK, to_json(report)

    def run_sweep(self, cfg: RunConfig) -> Tuple[int, str]:
        p_grid = np.linspace(cfg.p_min, cfg.p_max, cfg.p_steps) if cfg.p_steps > 0 else []
        result = sweep(p_grid, cfg.omegas, cfg.model, cfg.T, cfg.N or config.GRID_POINTS, cfg.workers)
        for item in result.thresholds:
            done(f"D changes sign at p = {item['p_threshold']!r} (omega = {item['omega']})")
        if cfg.format == "csv":
            return EXIT_OK, frame_to_csv(result.table)
        return EXIT_OK, to_json(result)

    def run_variational(self, cfg: RunConfig) -> Tuple[int, str]:
        result = minimize(cfg.p, cfg.omega, cfg.X, cfg.N, cfg.max_iter)
        if not result.converged:
            raise ConvergenceError("variational minimization did not converge",
                                   {"iterations": result.iterations, "m_est": result.m_est})
        if cfg.format == "csv":
            return EXIT_OK, frame_to_csv(result.to_frame())
        record = result.to_dict()
        record["c_closed_form"] = c_coefficient(cfg.p, cfg.omega)
        record["euler_lagrange_residual"] = euler_lagrange_residual(result)
        return EXIT_OK, to_json(record)

    def run_selftest(self, cfg: RunConfig) -> Tuple[int, str]:
        outcome = run_selftest(cfg.checks)
        for record in outcome["checks"]:
            (done if record["passed"] else fail)(f"{record['name']}: {'pass' if record['passed'] else 'FAIL'}")
        code = EXIT_OK if outcome["passed"] else EXIT_SELFTEST_FAILED
        if cfg.format == "csv":
            table = pd.DataFrame([{"name": r["name"], "passed": r["passed"]} for r in outcome["checks"]])
            return code, frame_to_csv(table)
        return code, to_json(outcome)

    def run(self, cfg: RunConfig) -> Tuple[int, str]:
        """Execute one subcommand; returns the exit status and the serialized artifact"""
        status(f"Running {cfg.subcommand}")
        try:
            return self.handlers[cfg.subcommand](cfg)
        except (ConvergenceError, InconsistencyError) as e:
            fail(f"{cfg.subcommand}: {e}")
            record = {"error": type(e).__name__, "message": str(e), "exit_code": EXIT_NUMERICAL,
                      "diagnostics": getattr(e, "diagnostics", {})}
            return EXIT_NUMERICAL, to_json(record)
        except CompactonError as e:
            fail(f"{cfg.subcommand}: {e}")
            record = {"error": type(e).__name__, "message": str(e), "exit_code": EXIT_DOMAIN}
            return EXIT_DOMAIN, to_json(record)


def main(argv: Optional[List[str]] = None) -> int:
    cfg = parse_config(argv)
    code, text = CompactonLabApp().run(cfg)
    write_artifact(text, cfg.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
