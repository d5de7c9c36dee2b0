"""Scenario configuration and command-line entry points.

Subcommands:

    run       simulate a scenario config: writes trajectory.csv (one
              representative path seeded with the master seed),
              mc_summary.json (omitted when n_paths == 0) and
              config_echo.json into --out
    validate  parse + validate a config and print its normalized form
    selftest  barrier derivative checks and LP solver-vs-oracle comparison

Config files are strict JSON: unknown fields are rejected, booleans are not
numbers, and every error names the offending field.  Overrides (--paths,
--seed, --dt, --horizon, -w, --delta) are applied to the raw config before
validation, so an invalid override fails exactly like an invalid file value.
Exit codes: 0 success, 1 selftest failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass
from importlib.resources import files as _pkg_files
from pathlib import Path

import numpy as np

from .bounds import bound_curve
from .errors import ConfigError, SdexitError
from .lp import LpProblem, lp_brute_force, lp_solve
from .mc import estimate_exit_probability
from .model import (
    BarrierFunction,
    SdeModel,
    acc_model,
    check_barrier_derivatives,
    deterministic_1d_model,
    linear_model,
    quadratic_barrier,
    scenario_barrier,
)
from .sim import INTERIOR, classify_state, simulate_path
from .synthesis import ProblemSpec, ProblemVariant

__all__ = [
    "ScenarioConfig",
    "load_scenario",
    "validate_config",
    "instantiate",
    "run_scenario",
    "builtin_config_path",
    "cli_main",
    "main",
]

_REQUIRED = {
    "model",
    "scenario_barrier",
    "variant",
    "x0",
    "T",
    "dt",
    "w",
    "delta",
    "n_paths",
    "master_seed",
}
_OPTIONAL = {"strict_margin_eps": 1e-6, "z": 3.0, "mc_horizon": 20.0}
_ALLOWED = _REQUIRED | set(_OPTIONAL)

_MODEL_DEFAULTS = {
    "acc": {
        "f0": 0.1,
        "f1": 5.0,
        "f2": 0.25,
        "mass": 1650.0,
        "lead_velocity": 0.5,
        "u_lo": -1.0,
        "u_hi": 1.0,
    },
    "deterministic_1d": {"rate": 1.0},
}
_LINEAR_KEYS = {"A", "d", "B", "sigma", "u_lo", "u_hi"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated, normalized scenario description (JSON-typed fields only)."""

    model: dict
    scenario_barrier: int | dict
    variant: str
    x0: tuple
    T: float | str  # positive float, or the string "inf"
    dt: float
    w: float
    delta: float
    strict_margin_eps: float
    n_paths: int
    master_seed: int
    z: float
    mc_horizon: float


def _number(field: str, value, *, positive=False, nonnegative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(field, f"must be finite, got {value!r}")
    if positive and out <= 0:
        raise ConfigError(field, f"must be positive, got {value!r}")
    if nonnegative and out < 0:
        raise ConfigError(field, f"must be nonnegative, got {value!r}")
    return out


def _integer(field: str, value, *, nonnegative=False) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, f"must be an integer, got {value!r}")
    if nonnegative and value < 0:
        raise ConfigError(field, f"must be nonnegative, got {value!r}")
    return value


def _number_list(field: str, value) -> list[float]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(field, f"must be a list of numbers, got {value!r}")
    return [_number(f"{field}[{i}]", v) for i, v in enumerate(value)]


def _matrix(field: str, value) -> list[list[float]]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(field, "must be a nonempty list of rows")
    return [_number_list(f"{field}[{i}]", row) for i, row in enumerate(value)]


def _validate_model(raw) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("model", "must be an object with a 'name' field")
    unknown = set(raw) - {"name", "params"}
    if unknown:
        raise ConfigError("model", f"unknown keys {sorted(unknown)}")
    name = raw.get("name")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("model.params", "must be an object")
    if name in _MODEL_DEFAULTS:
        defaults = _MODEL_DEFAULTS[name]
        unknown = set(params) - set(defaults)
        if unknown:
            raise ConfigError("model.params", f"unknown keys {sorted(unknown)}")
        merged = dict(defaults)
        for key, val in params.items():
            merged[key] = _number(f"model.params.{key}", val)
        return {"name": name, "params": merged}
    if name == "linear":
        missing = _LINEAR_KEYS - set(params)
        if missing:
            raise ConfigError("model.params", f"missing keys {sorted(missing)}")
        unknown = set(params) - _LINEAR_KEYS
        if unknown:
            raise ConfigError("model.params", f"unknown keys {sorted(unknown)}")
        merged = {
            "A": _matrix("model.params.A", params["A"]),
            "d": _number_list("model.params.d", params["d"]),
            "B": _matrix("model.params.B", params["B"]),
            "sigma": _matrix("model.params.sigma", params["sigma"]),
            "u_lo": _number_list("model.params.u_lo", params["u_lo"]),
            "u_hi": _number_list("model.params.u_hi", params["u_hi"]),
        }
        return {"name": name, "params": merged}
    raise ConfigError("model.name", f"unknown model {name!r}")


def _validate_barrier(raw) -> int | dict:
    if isinstance(raw, bool):
        raise ConfigError("scenario_barrier", "must be 1, 2, 3 or an inline object")
    if isinstance(raw, int):
        if raw not in (1, 2, 3):
            raise ConfigError("scenario_barrier", f"unknown built-in scenario {raw}")
        return raw
    if isinstance(raw, dict):
        unknown = set(raw) - {"Q", "c", "d"}
        if unknown:
            raise ConfigError("scenario_barrier", f"unknown keys {sorted(unknown)}")
        if "c" not in raw or "d" not in raw:
            raise ConfigError("scenario_barrier", "inline barrier needs 'c' and 'd'")
        c = _number_list("scenario_barrier.c", raw["c"])
        d = _number("scenario_barrier.d", raw["d"])
        q = raw.get("Q")
        if q is not None:
            q = _matrix("scenario_barrier.Q", q)
            if len(q) != len(c) or any(len(row) != len(c) for row in q):
                raise ConfigError("scenario_barrier.Q", "must be square and match 'c'")
        return {"Q": q, "c": c, "d": d}
    raise ConfigError("scenario_barrier", "must be 1, 2, 3 or an inline object")


def _build_model(model_field: dict) -> SdeModel:
    name, params = model_field["name"], model_field["params"]
    try:
        if name == "acc":
            return acc_model(**params)
        if name == "deterministic_1d":
            return deterministic_1d_model(**params)
        return linear_model(
            a_mat=params["A"],
            d_vec=params["d"],
            b_mat=params["B"],
            sigma_mat=params["sigma"],
            u_lo=params["u_lo"],
            u_hi=params["u_hi"],
        )
    except SdexitError as exc:
        raise ConfigError("model.params", str(exc)) from exc


def _build_barrier(barrier_field) -> BarrierFunction:
    if isinstance(barrier_field, int):
        return scenario_barrier(barrier_field)
    try:
        return quadratic_barrier(barrier_field["Q"], barrier_field["c"], barrier_field["d"])
    except SdexitError as exc:
        raise ConfigError("scenario_barrier", str(exc)) from exc


def validate_config(raw: dict) -> ScenarioConfig:
    """Validate a raw JSON object against the strict scenario schema."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = set(raw) - _ALLOWED
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    missing = _REQUIRED - set(raw)
    if missing:
        raise ConfigError(sorted(missing)[0], "missing required field")

    model_field = _validate_model(raw["model"])
    barrier_field = _validate_barrier(raw["scenario_barrier"])
    variant = raw["variant"]
    if variant not in (ProblemVariant.PROBLEM_I.value, ProblemVariant.PROBLEM_II.value):
        raise ConfigError("variant", f"must be 'ProblemI' or 'ProblemII', got {variant!r}")

    horizon = raw["T"]
    if horizon == "inf":
        horizon_norm: float | str = "inf"
    else:
        horizon_norm = _number("T", horizon, positive=True)

    cfg = ScenarioConfig(
        model=model_field,
        scenario_barrier=barrier_field,
        variant=variant,
        x0=tuple(_number_list("x0", raw["x0"])),
        T=horizon_norm,
        dt=_number("dt", raw["dt"], positive=True),
        w=_number("w", raw["w"], nonnegative=True),
        delta=_number("delta", raw["delta"], positive=True),
        strict_margin_eps=_number(
            "strict_margin_eps", raw.get("strict_margin_eps", _OPTIONAL["strict_margin_eps"]),
            positive=True,
        ),
        n_paths=_integer("n_paths", raw["n_paths"], nonnegative=True),
        master_seed=_integer("master_seed", raw["master_seed"], nonnegative=True),
        z=_number("z", raw.get("z", _OPTIONAL["z"]), positive=True),
        mc_horizon=_number("mc_horizon", raw.get("mc_horizon", _OPTIONAL["mc_horizon"]), positive=True),
    )

    # cross-field checks need the actual objects
    model = _build_model(cfg.model)
    barrier = _build_barrier(cfg.scenario_barrier)
    if barrier.n != model.n:
        raise ConfigError(
            "scenario_barrier", f"barrier dimension {barrier.n} != model dimension {model.n}"
        )
    if len(cfg.x0) != model.n:
        raise ConfigError("x0", f"length {len(cfg.x0)} != model dimension {model.n}")
    x0 = np.asarray(cfg.x0, dtype=float)
    state_class = classify_state(ProblemVariant(cfg.variant), barrier, x0)
    if state_class != INTERIOR:
        raise ConfigError("x0", f"initial state classifies as {state_class}, must be Interior")
    return cfg


def load_scenario(source) -> ScenarioConfig:
    """Load and validate a scenario from a path, JSON string content or dict."""
    if isinstance(source, dict):
        return validate_config(source)
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {source}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    return validate_config(raw)


def instantiate(cfg: ScenarioConfig) -> tuple[SdeModel, ProblemSpec, np.ndarray]:
    """Build the model, problem spec and initial state from a config."""
    model = _build_model(cfg.model)
    barrier = _build_barrier(cfg.scenario_barrier)
    spec = ProblemSpec(
        variant=ProblemVariant(cfg.variant),
        barrier=barrier,
        weight_w=cfg.w,
        delta=cfg.delta,
        strict_margin_eps=cfg.strict_margin_eps,
    )
    return model, spec, np.asarray(cfg.x0, dtype=float)


def builtin_config_path(name: str) -> Path:
    """Filesystem path of a shipped scenario config (no .json suffix needed)."""
    if not name.endswith(".json"):
        name = f"{name}.json"
    return Path(str(_pkg_files("sdexit").joinpath("configs", name)))


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def _barrier_values(barrier: BarrierFunction, states: np.ndarray) -> np.ndarray:
    if barrier.vectorized:
        return np.asarray(barrier.value(states), dtype=float)
    return np.array([float(barrier.value(x)) for x in states])


def run_scenario(cfg: ScenarioConfig, out_dir) -> dict:
    """Run one scenario: representative trajectory, Monte Carlo, echo files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, spec, x0 = instantiate(cfg)
    infinite = cfg.T == "inf"
    sim_horizon = cfg.mc_horizon if infinite else float(cfg.T)
    bound_horizon = math.inf if infinite else float(cfg.T)

    traj = simulate_path(model, spec, x0, cfg.dt, sim_horizon, path_seed=cfg.master_seed)
    values = _barrier_values(spec.barrier, traj.states)
    samples = list(zip(traj.times, values, traj.cert_a, traj.cert_b))
    curve = bound_curve(spec, samples, bound_horizon)

    n, m = model.n, model.m
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"u{i + 1}" for i in range(m)]
        + ["a", "b", "status", "barrier", "bound_finite", "bound_infinite"]
    )
    with open(out / "trajectory.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(traj.times.shape[0]):
            feasible = bool(traj.cert_feasible[i])
            fin_bound, inf_bound = curve[i]
            writer.writerow(
                [_fmt(traj.times[i])]
                + [_fmt(v) for v in traj.states[i]]
                + [_fmt(v) for v in traj.controls[i]]
                + [
                    _fmt(traj.cert_a[i]) if feasible else "",
                    _fmt(traj.cert_b[i]) if feasible else "",
                    "feasible" if feasible else "fallback",
                    _fmt(values[i]),
                    _fmt(fin_bound),
                    _fmt(inf_bound),
                ]
            )

    echo = asdict(cfg)
    echo["x0"] = list(cfg.x0)
    with open(out / "config_echo.json", "w") as fh:
        json.dump(echo, fh, indent=2, allow_nan=False)
        fh.write("\n")

    result: dict = {"outcome": traj.outcome.kind, "exit_time": traj.outcome.exit_time}
    if cfg.n_paths >= 1:
        mc = estimate_exit_probability(
            model, spec, x0, cfg.dt, sim_horizon, cfg.n_paths, cfg.master_seed, z=cfg.z
        )
        t0_feasible = bool(traj.cert_feasible[0])
        a0 = float(traj.cert_a[0]) if t0_feasible else None
        b0 = float(traj.cert_b[0]) if t0_feasible else None
        fin0, inf0 = curve[0]
        summary = {
            "n_paths": mc.n_paths,
            "n_target": mc.n_target,
            "n_unsafe": mc.n_unsafe,
            "n_timeout": mc.n_timeout,
            "estimate": mc.estimate,
            "ci_lo": mc.ci_lo,
            "ci_hi": mc.ci_hi,
            "z": mc.z,
            "master_seed": mc.master_seed,
            "bound_finite_t0": fin0,
            "bound_infinite_t0": inf0,
            "cert_t0": {
                "a": a0,
                "b": b0,
                "status": "feasible" if t0_feasible else "fallback",
            },
        }
        with open(out / "mc_summary.json", "w") as fh:
            json.dump(summary, fh, indent=2, allow_nan=False)
            fh.write("\n")
        result.update(summary)
    return result


# ---------------------------------------------------------------------------
# selftest helpers


def _random_lp(rng: np.random.Generator) -> LpProblem:
    d = int(rng.integers(1, 5))
    r = int(rng.integers(0, 7))
    rows = rng.normal(size=(r, d))
    rhs = rng.normal(size=r)
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    for j in range(d):
        kind = rng.integers(0, 4)
        vals = np.sort(rng.normal(scale=2.0, size=2))
        if kind == 0:
            lo[j], hi[j] = vals
        elif kind == 1:
            lo[j] = vals[0]
        elif kind == 2:
            hi[j] = vals[1]
    return LpProblem(
        objective=rng.normal(size=d), rows=rows, rhs=rhs, lo=lo, hi=hi
    )


def _selftest(n_instances: int, n_states: int) -> int:
    rng = np.random.default_rng(0)
    ok = True
    for idx in (1, 2, 3):
        barrier = scenario_barrier(idx)
        worst = 0.0
        for _ in range(n_states):
            x = rng.uniform(-20.0, 20.0, size=barrier.n)
            res = check_barrier_derivatives(barrier, x)
            worst = max(worst, res["grad_err"], res["hess_err"])
            ok = ok and res["ok"]
        print(f"selftest barrier scenario {idx}: max derivative error {worst:.3e}")
    mismatches = 0
    for _ in range(n_instances):
        prob = _random_lp(rng)
        got = lp_solve(prob)
        want = lp_brute_force(prob)
        if got.status != want.status:
            mismatches += 1
        elif got.status == "optimal" and abs(got.objective_value - want.objective_value) > 1e-8 * (
            1.0 + abs(want.objective_value)
        ):
            mismatches += 1
    print(f"selftest lp: {n_instances} random instances, {mismatches} solver/oracle mismatches")
    ok = ok and mismatches == 0
    print(f"selftest: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument parsing


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--paths", type=int, help="override n_paths")
    parser.add_argument("--seed", type=int, help="override master_seed")
    parser.add_argument("--dt", type=float, help="override dt")
    parser.add_argument("--horizon", type=str, help="override T (number or 'inf')")
    parser.add_argument("-w", "--weight", type=float, help="override w")
    parser.add_argument("--delta", type=float, help="override delta")


def _apply_overrides(raw: dict, args: argparse.Namespace) -> None:
    if args.paths is not None:
        raw["n_paths"] = args.paths
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if args.dt is not None:
        raw["dt"] = args.dt
    if args.horizon is not None:
        if args.horizon == "inf":
            raw["T"] = "inf"
        else:
            try:
                raw["T"] = float(args.horizon)
            except ValueError:
                raw["T"] = args.horizon  # let validation name the field
    if args.weight is not None:
        raw["w"] = args.weight
    if args.delta is not None:
        raw["delta"] = args.delta


def _read_raw(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    return raw


def cli_main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdexit",
        description="Exit-probability controller synthesis: simulate, validate, selftest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario config")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--out", default=".", help="output directory (default: cwd)")
    _add_overrides(p_run)

    p_val = sub.add_parser("validate", help="validate a config and print its normal form")
    p_val.add_argument("config", help="path to a scenario JSON file")
    _add_overrides(p_val)

    p_self = sub.add_parser("selftest", help="run built-in consistency checks")
    p_self.add_argument("--instances", type=int, default=60, help="random LP instances")
    p_self.add_argument("--states", type=int, default=25, help="random states per barrier")

    args = parser.parse_args(argv)

    if args.command == "selftest":
        return _selftest(args.instances, args.states)

    try:
        raw = _read_raw(args.config)
        _apply_overrides(raw, args)
        cfg = validate_config(raw)
    except SdexitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        echo = asdict(cfg)
        echo["x0"] = list(cfg.x0)
        print(json.dumps(echo, indent=2))
        return 0

    summary = run_scenario(cfg, args.out)
    print(json.dumps(summary, indent=2, allow_nan=False))
    return 0


def main() -> None:
    raise SystemExit(cli_main(sys.argv[1:]))
