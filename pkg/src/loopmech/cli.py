"""Command-line front end.

    loopmech verify [algebra|loop|mechanics|all] [--report PATH] [--seed N]
    loopmech trajectory CONFIG.json [--format csv|json] [--seed N]
    loopmech legendre CONFIG.json [--format csv|json]
    loopmech obstruction --trials N [--seed N] [--quaternionic] [--report PATH]

Exit codes: 0 ok, 1 a check failed, 2 bad configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import DomainError, oct_conj
from .loop import UNIT_OCTONIONS, as_unit, exp_map
from .mechanics import (
    el_solve_step,
    lagrangian_kinetic,
    lagrangian_linear,
    lagrangian_sq,
    legendre_jacobian,
    legendre_minus,
    legendre_plus,
)
from .numerics import SolverConfig, matrix_rank, sample_algebra
from .verify import obstruction_samples, run_suite

log = logging.getLogger("loopmech")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

TRAJECTORY_HEADER = (
    ["step"]
    + [f"c{i}" for i in range(8)]
    + ["residual_norm", "converged", "degenerate"]
    + [f"p_plus_{i}" for i in range(1, 8)]
    + [f"p_minus_{i}" for i in range(1, 8)]
)
LEGENDRE_HEADER = (
    ["index"]
    + [f"c{i}" for i in range(8)]
    + [f"p_plus_{i}" for i in range(1, 8)]
    + [f"p_minus_{i}" for i in range(1, 8)]
    + ["rank_plus", "rank_minus"]
)
HIST_EDGES = np.linspace(0.0, 2.0, 11)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    lagrangian: str
    masses: list = field(default_factory=lambda: [1.0] * 7)
    initial: object = "e0"
    guess_strategy: object = "same"
    steps: int = 10
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0
    output_path: str | None = None
    output_format: str = "csv"
    points: list = field(default_factory=list)
    random_points: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {"lagrangian", "masses", "initial", "guess_strategy", "steps", "solver",
                 "seed", "output", "points", "random_points"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "lagrangian" not in d:
            raise ConfigError("'lagrangian' is required")
        if d["lagrangian"] not in ("linear", "sq", "kinetic"):
            raise ConfigError(f"unknown lagrangian {d['lagrangian']!r}")
        cfg = cls(lagrangian=d["lagrangian"])
        if "masses" in d:
            cfg.masses = d["masses"]
        cfg.initial = d.get("initial", cfg.initial)
        cfg.guess_strategy = d.get("guess_strategy", cfg.guess_strategy)
        cfg.steps = d.get("steps", cfg.steps)
        cfg.seed = d.get("seed", cfg.seed)
        cfg.points = d.get("points", [])
        cfg.random_points = d.get("random_points", 0)
        try:
            cfg.solver = SolverConfig(**d.get("solver", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver: {exc}") from None
        out = d.get("output", {})
        if isinstance(out, str):
            out = {"path": out}
        cfg.output_path = out.get("path")
        cfg.output_format = out.get("format", "csv")
        cfg.validate()
        return cfg

    def validate(self):
        if not isinstance(self.steps, int) or isinstance(self.steps, bool) or self.steps < 1:
            raise ConfigError("steps must be an integer >= 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if not isinstance(self.random_points, int) or self.random_points < 0:
            raise ConfigError("random_points must be a non-negative integer")
        self.lagrangian_obj()
        parse_point(self.initial)
        self.guess_radius()

    def lagrangian_obj(self):
        if self.lagrangian == "linear":
            return lagrangian_linear()
        if self.lagrangian == "sq":
            return lagrangian_sq()
        try:
            return lagrangian_kinetic(self.masses)
        except (DomainError, ValueError, TypeError) as exc:
            raise ConfigError(f"masses: {exc}") from None

    def guess_radius(self):
        g = self.guess_strategy
        if g in ("same", "conjugate"):
            return None
        if isinstance(g, dict) and set(g) == {"perturbed"}:
            r = g["perturbed"]
            if isinstance(r, (int, float)) and r > 0:
                return float(r)
        raise ConfigError(f"guess_strategy must be 'same', 'conjugate' or {{'perturbed': r}}, got {g!r}")


_NAMED = re.compile(r"^-?e[0-7]$")


def parse_point(spec) -> np.ndarray:
    """A unit octonion from ``"e3"``, ``"-e0"``, 8 coefficients, or ``{"exp": [7 values]}``.

    Coefficient lists are normalized onto the sphere.
    """
    if isinstance(spec, str):
        if not _NAMED.match(spec):
            raise ConfigError(f"unknown named point {spec!r}")
        x = np.zeros(8)
        x[int(spec[-1])] = -1.0 if spec.startswith("-") else 1.0
        return x
    if isinstance(spec, dict) and set(spec) == {"exp"}:
        X = np.asarray(spec["exp"], dtype=float)
        if X.shape != (7,) or not np.all(np.isfinite(X)):
            raise ConfigError("'exp' needs 7 finite numbers")
        return exp_map(X)
    try:
        x = np.asarray(spec, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read point {spec!r}") from None
    if x.shape != (8,) or not np.all(np.isfinite(x)) or np.linalg.norm(x) == 0:
        raise ConfigError(f"point needs 8 finite, not all zero, numbers: {spec!r}")
    return x / np.linalg.norm(x)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return RunConfig.from_dict(data)


# --- serialization -----------------------------------------------------------


def _floats(x):
    # + 0.0 folds negative zero
    return [float(v) + 0.0 for v in np.ravel(x)]


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12e}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# --- commands ----------------------------------------------------------------


def cmd_verify(suite: str, seed: int = 0, report=None) -> int:
    checks = run_suite(suite, seed)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"first counterexample ({failed[0].name}): {failed[0].counterexample}")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if report:
        doc = {
            "command": "verify",
            "suite": suite,
            "seed": seed,
            "passed": not failed,
            "checks": [c.to_dict() for c in checks],
        }
        Path(report).write_text(dump_json(doc))
    return EXIT_CHECK if failed else EXIT_OK


def trajectory(cfg: RunConfig):
    """Iterate EL steps from the initial point; returns (records, ok)."""
    L = cfg.lagrangian_obj()
    a = as_unit(parse_point(cfg.initial))
    radius = cfg.guess_radius()
    gen = np.random.default_rng(cfg.seed)

    def record(k, p, res, conv, degen):
        return {
            "step": k,
            "coeffs": _floats(p),
            "residual_norm": float(res),
            "converged": bool(conv),
            "degenerate": bool(degen),
            "p_plus": _floats(legendre_plus(L, p)),
            "p_minus": _floats(legendre_minus(L, p)),
        }

    records = [record(0, a, 0.0, True, False)]
    for k in range(1, cfg.steps + 1):
        if cfg.guess_strategy == "same":
            guess = a
        elif cfg.guess_strategy == "conjugate":
            guess = oct_conj(a)
        else:
            guess = UNIT_OCTONIONS.mul(a, exp_map(sample_algebra(gen, radius)))
        rep = el_solve_step(L, a, guess, cfg.solver)
        records.append(record(k, rep.to, rep.residual_norm, rep.converged, rep.degenerate_branch))
        if not rep.converged:
            log.error("step %d did not converge (residual %.3g)", k, rep.residual_norm)
            return records, False
        a = rep.to
    return records, True


def _trajectory_text(cfg, records):
    if cfg.output_format == "json":
        doc = {
            "command": "trajectory",
            "lagrangian": cfg.lagrangian,
            "masses": _floats(cfg.masses) if cfg.lagrangian == "kinetic" else None,
            "seed": cfg.seed,
            "steps": cfg.steps,
            "records": records,
        }
        return dump_json(doc)
    rows = [
        [r["step"], *r["coeffs"], r["residual_norm"], int(r["converged"]), int(r["degenerate"]),
         *r["p_plus"], *r["p_minus"]]
        for r in records
    ]
    return _csv_text(TRAJECTORY_HEADER, rows)


def cmd_trajectory(cfg: RunConfig) -> int:
    records, ok = trajectory(cfg)
    _emit(_trajectory_text(cfg, records), cfg.output_path)
    return EXIT_OK if ok else EXIT_SOLVER


def legendre_table(cfg: RunConfig):
    L = cfg.lagrangian_obj()
    pts = [parse_point(p) for p in cfg.points]
    if cfg.random_points:
        pts += list(UNIT_OCTONIONS.sample(np.random.default_rng(cfg.seed), cfg.random_points))
    if not pts:
        raise ConfigError("legendre needs 'points' or 'random_points'")
    rows = []
    for k, p in enumerate(pts):
        Jp = legendre_jacobian(L, p, "plus", cfg.solver.fd_step)
        Jm = legendre_jacobian(L, p, "minus", cfg.solver.fd_step)
        rows.append(
            {
                "index": k,
                "coeffs": _floats(p),
                "p_plus": _floats(legendre_plus(L, p)),
                "p_minus": _floats(legendre_minus(L, p)),
                "rank_plus": matrix_rank(Jp),
                "rank_minus": matrix_rank(Jm),
                "jacobian_plus": Jp.tolist(),
                "jacobian_minus": Jm.tolist(),
            }
        )
    gap = max(float(np.max(np.abs(np.subtract(r["p_plus"], r["p_minus"])))) for r in rows)
    return rows, gap


def cmd_legendre(cfg: RunConfig) -> int:
    rows, gap = legendre_table(cfg)
    if cfg.output_format == "json":
        doc = {
            "command": "legendre",
            "lagrangian": cfg.lagrangian,
            "masses": _floats(cfg.masses) if cfg.lagrangian == "kinetic" else None,
            "seed": cfg.seed,
            "max_plus_minus_gap": gap,
            "points": rows,
        }
        text = dump_json(doc)
    else:
        text = _csv_text(
            LEGENDRE_HEADER,
            [[r["index"], *r["coeffs"], *r["p_plus"], *r["p_minus"], r["rank_plus"], r["rank_minus"]]
             for r in rows],
        )
    _emit(text, cfg.output_path)
    return EXIT_OK


def obstruction_report(trials: int, seed: int, quaternionic: bool) -> dict:
    vals = obstruction_samples(trials, seed, quaternionic)
    counts, _ = np.histogram(np.clip(vals, 0.0, HIST_EDGES[-1]), bins=HIST_EDGES)
    worst = float(vals.max())
    if quaternionic:
        passed = worst <= 1e-10
    else:
        passed = worst > 0.01 if trials >= 100 else True
    return {
        "command": "obstruction",
        "trials": trials,
        "seed": seed,
        "quaternionic": quaternionic,
        "max": worst,
        "mean": float(vals.mean()),
        "histogram": {"edges": _floats(HIST_EDGES), "counts": [int(c) for c in counts]},
        "passed": passed,
    }


def cmd_obstruction(trials: int, seed: int = 0, quaternionic: bool = False, report=None) -> int:
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError("trials must be >= 1")
    doc = obstruction_report(trials, seed, quaternionic)
    where = "quaternion subalgebra" if quaternionic else "unit octonions"
    print(f"obstruction over {trials} samples on {where}: max {doc['max']:.6e}, mean {doc['mean']:.6e}")
    for lo, hi, c in zip(HIST_EDGES[:-1], HIST_EDGES[1:], doc["histogram"]["counts"]):
        print(f"  [{lo:.1f}, {hi:.1f}) {c}")
    print("PASS" if doc["passed"] else "FAIL")
    if report:
        Path(report).write_text(dump_json(doc))
    return EXIT_OK if doc["passed"] else EXIT_CHECK


# --- argument parsing --------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="loopmech", description="Discrete mechanics on unit octonions.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run property checks")
    v.add_argument("suite", nargs="?", default="all", choices=["algebra", "loop", "mechanics", "all"])
    v.add_argument("--report", help="write a JSON report here")
    v.add_argument("--seed", type=int, default=0)

    for name, text in (("trajectory", "iterate the discrete EL map"),
                       ("legendre", "tabulate Legendre maps and Jacobian ranks")):
        c = sub.add_parser(name, help=text)
        c.add_argument("config_path", nargs="?", help="JSON run config")
        c.add_argument("--config", dest="config_flag", help="JSON run config")
        c.add_argument("--format", choices=["csv", "json"])
        c.add_argument("--seed", type=int)
        c.add_argument("--output", help="output file (default: config value, else stdout)")

    o = sub.add_parser("obstruction", help="sample the cotangent product obstruction")
    o.add_argument("--trials", type=int, default=1000)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--quaternionic", action="store_true", help="sample inside span{e0..e3}")
    o.add_argument("--report", help="write a JSON report here")
    return p


def _run_config(args) -> RunConfig:
    path = args.config_flag or args.config_path
    if not path:
        raise ConfigError("a config file is required")
    cfg = load_config(path)
    if args.format:
        cfg.output_format = args.format
    if args.seed is not None:
        cfg.seed = args.seed
    if args.output:
        cfg.output_path = args.output
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.seed, args.report)
        if args.command == "obstruction":
            return cmd_obstruction(args.trials, args.seed, args.quaternionic, args.report)
        cfg = _run_config(args)
        if args.command == "trajectory":
            return cmd_trajectory(cfg)
        return cmd_legendre(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
