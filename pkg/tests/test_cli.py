"""Config schema validation, scenario runs, output artifacts, CLI subcommands."""

import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from sdexit import (
    ConfigError,
    ProblemVariant,
    builtin_config_path,
    cli_main,
    instantiate,
    load_scenario,
    run_scenario,
    validate_config,
)

BASE = {
    "model": {"name": "acc"},
    "scenario_barrier": 1,
    "variant": "ProblemI",
    "x0": [-0.5, 1.5],
    "T": 2.0,
    "dt": 0.1,
    "w": 1.0,
    "delta": 10.0,
    "n_paths": 5,
    "master_seed": 9,
}


def _raw(**overrides):
    raw = json.loads(json.dumps(BASE))
    raw.update(overrides)
    return raw


def _field_of(err: ConfigError) -> str:
    return err.field


# --- schema validation -------------------------------------------------------


def test_shipped_configs_validate():
    for name in (
        "scenario1_w1",
        "scenario1_whigh",
        "scenario2_w1",
        "scenario2_whigh",
        "scenario3_w1",
        "scenario3_whigh",
    ):
        cfg = load_scenario(builtin_config_path(name))
        assert cfg.T == 2.0
        assert cfg.dt == 0.001
        assert cfg.n_paths == 10000
        assert cfg.delta == 10.0


def test_shipped_scenario1_w1_fields():
    cfg = load_scenario(builtin_config_path("scenario1_w1"))
    assert cfg.variant == "ProblemI"
    assert cfg.x0 == (-0.5, 1.5)
    assert cfg.w == 1.0


def test_shipped_scenario3_whigh_fields():
    cfg = load_scenario(builtin_config_path("scenario3_whigh"))
    assert cfg.variant == "ProblemII"
    assert cfg.x0 == (10.0, 10.0)
    assert cfg.w == 1e12


def test_wrong_type_names_the_field():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(dt="abc"))
    assert _field_of(exc.value) == "dt"
    assert "dt" in str(exc.value)


def test_unknown_field_rejected():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(surprise=1))
    assert _field_of(exc.value) == "surprise"


def test_missing_field_rejected():
    raw = _raw()
    del raw["w"]
    with pytest.raises(ConfigError) as exc:
        validate_config(raw)
    assert _field_of(exc.value) == "w"


def test_bool_is_not_a_number():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(w=True))
    assert _field_of(exc.value) == "w"
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(n_paths=True))
    assert _field_of(exc.value) == "n_paths"


def test_numeric_domain_checks():
    for field, value in (
        ("dt", 0.0),
        ("dt", -1.0),
        ("delta", 0.0),
        ("T", -2.0),
        ("T", "soon"),
        ("n_paths", -1),
        ("n_paths", 2.5),
        ("master_seed", -4),
        ("w", -1.0),
        ("z", 0.0),
        ("mc_horizon", 0.0),
    ):
        with pytest.raises(ConfigError) as exc:
            validate_config(_raw(**{field: value}))
        assert _field_of(exc.value) == field, (field, value)


def test_infinite_horizon_accepted_as_string():
    cfg = validate_config(_raw(T="inf"))
    assert cfg.T == "inf"
    assert cfg.mc_horizon == 20.0


def test_variant_must_be_known():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(variant="ProblemIII"))
    assert _field_of(exc.value) == "variant"


def test_unknown_model_and_bad_params():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(model={"name": "hovercraft"}))
    assert _field_of(exc.value) == "model.name"
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(model={"name": "acc", "params": {"mass": "heavy"}}))
    assert _field_of(exc.value) == "model.params.mass"
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(model={"name": "acc", "params": {"warp": 9}}))
    assert _field_of(exc.value) == "model.params"


def test_scenario_barrier_forms():
    with pytest.raises(ConfigError):
        validate_config(_raw(scenario_barrier=7))
    with pytest.raises(ConfigError):
        validate_config(_raw(scenario_barrier=True))
    inline = {"Q": None, "c": [-0.45, 0.25], "d": 0.0}
    cfg = validate_config(_raw(scenario_barrier=inline))
    assert cfg.scenario_barrier["c"] == [-0.45, 0.25]
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(scenario_barrier={"c": [1.0, 0.0]}))
    assert _field_of(exc.value) == "scenario_barrier"


def test_dimension_cross_checks():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(x0=[-0.5, 1.5, 0.0]))
    assert _field_of(exc.value) == "x0"
    bad_barrier = {"Q": None, "c": [1.0, 0.0, 0.0], "d": 0.0}
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(scenario_barrier=bad_barrier))
    assert _field_of(exc.value) == "scenario_barrier"


def test_x0_must_be_interior():
    with pytest.raises(ConfigError) as exc:
        validate_config(_raw(x0=[0.0, 4.0]))  # h = 1: already on the target set
    assert _field_of(exc.value) == "x0"


def test_instantiate_builds_runnable_objects():
    model, spec, x0 = instantiate(validate_config(_raw()))
    assert model.n == 2
    assert spec.variant == ProblemVariant.PROBLEM_I
    assert np.array_equal(x0, [-0.5, 1.5])


# --- run_scenario outputs ----------------------------------------------------


def test_run_writes_all_artifacts(tmp_path):
    cfg = validate_config(_raw())
    out = run_scenario(cfg, tmp_path)
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "mc_summary.json").exists()
    assert (tmp_path / "config_echo.json").exists()
    assert out["n_paths"] == 5
    summary = json.loads((tmp_path / "mc_summary.json").read_text())
    assert summary["n_target"] + summary["n_unsafe"] + summary["n_timeout"] == 5
    assert 0.0 <= summary["ci_lo"] <= summary["estimate"] <= summary["ci_hi"] <= 1.0
    assert summary["cert_t0"]["status"] == "feasible"
    assert summary["bound_finite_t0"] is not None


def test_trajectory_csv_schema_and_grid(tmp_path):
    run_scenario(validate_config(_raw()), tmp_path)
    with open(tmp_path / "trajectory.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [
        "t", "x1", "x2", "u1", "a", "b", "status", "barrier",
        "bound_finite", "bound_infinite",
    ]
    body = rows[1:]
    assert len(body) == 21  # T=2, dt=0.1
    times = [float(r[0]) for r in body]
    assert times == [i * 0.1 for i in range(21)]
    assert body[0][6] in ("feasible", "fallback")
    # full precision round trip: h(x0) = 0.6 must be stored exactly
    assert float(body[0][7]) == 0.6


def test_csv_floats_round_trip_17_digits(tmp_path):
    cfg = validate_config(_raw(master_seed=31))
    run_scenario(cfg, tmp_path)
    from sdexit import simulate_path
    model, spec, x0 = instantiate(cfg)
    traj = simulate_path(model, spec, x0, cfg.dt, 2.0, path_seed=31)
    with open(tmp_path / "trajectory.csv", newline="") as fh:
        body = list(csv.reader(fh))[1:]
    for i, row in enumerate(body):
        assert float(row[1]) == traj.states[i][0]
        assert float(row[2]) == traj.states[i][1]


def test_no_mc_summary_when_paths_zero(tmp_path):
    run_scenario(validate_config(_raw(n_paths=0)), tmp_path)
    assert (tmp_path / "trajectory.csv").exists()
    assert not (tmp_path / "mc_summary.json").exists()


def test_fallback_rows_have_empty_certificate_columns(tmp_path):
    cfg = validate_config(_raw(delta=1e-8, n_paths=1, T=0.3))
    run_scenario(cfg, tmp_path)
    with open(tmp_path / "trajectory.csv", newline="") as fh:
        body = list(csv.reader(fh))[1:]
    assert body[0][6] == "fallback"
    assert body[0][4] == "" and body[0][5] == ""
    assert body[0][8] == "" and body[0][9] == ""
    summary = json.loads((tmp_path / "mc_summary.json").read_text())
    assert summary["cert_t0"] == {"a": None, "b": None, "status": "fallback"}
    assert summary["bound_finite_t0"] is None


def test_infinite_horizon_uses_mc_surrogate(tmp_path):
    cfg = validate_config(_raw(T="inf", mc_horizon=1.0, n_paths=3))
    run_scenario(cfg, tmp_path)
    with open(tmp_path / "trajectory.csv", newline="") as fh:
        body = list(csv.reader(fh))[1:]
    assert len(body) == 11  # mc_horizon/dt + 1
    feasible = [r for r in body if r[6] == "feasible"]
    assert feasible
    assert all(r[8] == "" for r in feasible)  # no finite bound without a horizon
    assert all(r[9] != "" for r in feasible)
    echo = json.loads((tmp_path / "config_echo.json").read_text())
    assert echo["T"] == "inf"


def test_config_echo_round_trips(tmp_path):
    cfg = validate_config(_raw(strict_margin_eps=1e-7, z=2.5))
    run_scenario(cfg, tmp_path)
    again = load_scenario(tmp_path / "config_echo.json")
    assert again == cfg


# --- command-line entry points ----------------------------------------------


def _write(tmp_path, raw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_cli_run_happy_path(tmp_path, capsys):
    rc = cli_main(["run", _write(tmp_path, _raw()), "--out", str(tmp_path / "res")])
    assert rc == 0
    out = capsys.readouterr().out
    assert json.loads(out)["n_paths"] == 5
    assert (tmp_path / "res" / "trajectory.csv").exists()


def test_cli_overrides_reach_the_artifacts(tmp_path, capsys):
    rc = cli_main(
        [
            "run", _write(tmp_path, _raw()), "--out", str(tmp_path / "res"),
            "--paths", "2", "--seed", "77", "--dt", "0.2", "-w", "5.0",
            "--delta", "4.0", "--horizon", "1.0",
        ]
    )
    assert rc == 0
    echo = json.loads((tmp_path / "res" / "config_echo.json").read_text())
    assert echo["n_paths"] == 2
    assert echo["master_seed"] == 77
    assert echo["dt"] == 0.2
    assert echo["w"] == 5.0
    assert echo["delta"] == 4.0
    assert echo["T"] == 1.0


def test_cli_rejects_bad_override_like_bad_file(tmp_path, capsys):
    rc = cli_main(["run", _write(tmp_path, _raw()), "--horizon", "soon"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "T" in err


def test_cli_validate_prints_normal_form(tmp_path, capsys):
    rc = cli_main(["validate", _write(tmp_path, _raw())])
    assert rc == 0
    echo = json.loads(capsys.readouterr().out)
    assert echo["model"]["params"]["mass"] == 1650.0
    assert echo["strict_margin_eps"] == 1e-6


def test_cli_validate_bad_config_exits_2(tmp_path, capsys):
    rc = cli_main(["validate", _write(tmp_path, _raw(dt="abc"))])
    assert rc == 2
    assert "dt" in capsys.readouterr().err


def test_cli_unreadable_or_malformed_file(tmp_path, capsys):
    rc = cli_main(["run", str(tmp_path / "missing.json")])
    assert rc == 2
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    rc = cli_main(["run", str(bad)])
    assert rc == 2


def test_cli_selftest_passes(capsys):
    rc = cli_main(["selftest", "--instances", "40", "--states", "10"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "selftest: PASS" in out
