import json
import math
import pathlib

import pytest

import mlqueue

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def small_config(**overrides):
    cfg = json.loads((CONFIGS / "reference.json").read_text())
    cfg.update({"n_grid": [25, 100], "horizon": 1.0, "replications": 20, "probe_times": [0.5, 1.0]})
    cfg["sde"] = {"dt": 1e-3, "projection": "bridge"}
    cfg.update(overrides)
    return json.dumps(cfg)


def test_selftest_fixtures_pass():
    results = mlqueue.selftest()
    assert len(results) > 10
    assert all(ok for _, ok, _ in results), [r for r in results if not r[1]]


def test_simulated_path_is_consistent():
    p = mlqueue.simulate(small_config(), n=100, replication=3)
    assert p["time"][0] == 0.0
    assert all(b >= a for a, b in zip(p["time"], p["time"][1:]))
    assert all(x == a - d for x, a, d in zip(p["x"], p["a"], p["d"]))
    assert min(p["x"]) >= 0
    assert math.isclose(sum(p["occupation"]), 1.0, rel_tol=1e-12)
    assert p["dm_defect"] <= 1e-8 * (1 + p["a"][-1])
    assert p["flow_defect"] == 0.0
    again = mlqueue.simulate(small_config(), n=100, replication=3)
    assert again["time"] == p["time"]


def test_sde_paths_stay_nonnegative():
    for scheme in ("projected", "mirror"):
        p = mlqueue.solve_sde(small_config(), scheme=scheme)
        assert len(p["x"]) == 1001
        assert min(p["x"]) >= 0.0
        assert all(b >= a for a, b in zip(p["l"], p["l"][1:]))
    with pytest.raises(mlqueue.ParameterError):
        mlqueue.solve_sde(small_config(), scheme="implicit")


def test_reflection_of_a_v_shaped_path():
    at = [0.0, 0.25, 0.75, 1.0, 1.5, 2.0]
    phi, eta = mlqueue.reflect([0.0, 1.0], [1.0, -1.0], [-2.0, 2.0], 2.0, at)
    expected = [0.0 if t <= 0.5 else (2 * t - 1 if t <= 1 else 1.0) for t in at]
    assert eta == pytest.approx(expected, abs=1e-12)
    assert min(phi) >= 0.0


def test_config_errors_name_the_key():
    with pytest.raises(mlqueue.ParameterError, match="horizon"):
        mlqueue.config_hash(small_config(horizon=-1.0))
    code, _, err = mlqueue.run(["simulate", "--config", "/nonexistent.json"])
    assert code == 2
    assert "config" in err


def test_hash_ignores_output_location_but_not_seed():
    base = mlqueue.config_hash(small_config())
    assert base == mlqueue.config_hash(small_config(output_dir="elsewhere"))
    assert base != mlqueue.config_hash(small_config(seed=7))
    assert mlqueue.ks_distance([1.0, 2.0], [1.0, 2.0]) == 0.0
