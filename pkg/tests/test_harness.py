"""Tests for instances, config parsing and experiment orchestration."""

import json
import math

import numpy as np
import pytest

from dgd_local.constants import SUMMARY_FIELDS
from dgd_local.errors import (
    ConfigError,
    StepsizeError,
)
from dgd_local.harness import (
    CONFIG_KEYS,
    ExperimentConfig,
)
from dgd_local.harness.experiment import (
    MC_SUMMARY_FILE,
    RESOLVED_CONFIG_FILE,
    SUMMARY_FILE,
    TRACE_FILE,
    monte_carlo,
    prepare_experiment,
    run_experiment,
    write_instance,
)
from dgd_local.harness.instances import (
    InstanceSpec,
    gen_instance,
    init_in_ball,
    resolve_rho,
    sample_ball,
)
from dgd_local.matkit import (
    numerical_rank,
    read_matrix,
)
from dgd_local.objective import NetworkShape
from dgd_local.solvers import RunStatus
from dgd_local.topology import (
    omega,
    read_mixing,
)


def _with(text: str, **overrides) -> str:
    """Config text with `key = value` lines replaced or appended."""
    lines = [line for line in text.splitlines() if line.split("=")[0].strip() not in overrides]
    lines += [f"{key} = {value}" for key, value in overrides.items()]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------------------
# ---- Instances ---------------------------------------------------------------
# ------------------------------------------------------------------------------


def test_gen_instance_widths_and_rank():
    y, d = gen_instance(InstanceSpec(n=5, m=7, r=2, J=3, topology="ring", seed=1))
    assert y.shape == (5, 7)
    assert d.widths == (3, 2, 2)
    assert numerical_rank(y) == 2


def test_gen_instance_seeded():
    spec = InstanceSpec(n=4, m=6, r=1, J=2, topology="star", seed=4)
    np.testing.assert_array_equal(gen_instance(spec)[0], gen_instance(spec)[0])
    other = InstanceSpec(n=4, m=6, r=1, J=2, topology="star", seed=5)
    assert not np.array_equal(gen_instance(spec)[0], gen_instance(other)[0])


@pytest.mark.parametrize(
    "kwargs", [
        {"r": 5},
        {"J": 8},
        {"topology": "torus"},
        {"rho": "huge"},
        {"rho": -1.0},
        {"n": 0},
    ]
)
def test_instance_spec_rejects(kwargs):
    base = {"n": 4, "m": 6, "r": 1, "J": 2, "topology": "ring"}
    base.update(kwargs)
    with pytest.raises(ValueError):
        InstanceSpec(**base)


def test_resolve_rho():
    y = np.diag([2.0, 1.0])
    assert resolve_rho("auto", y, 3) == pytest.approx(math.sqrt(12.0))
    assert resolve_rho("auto_network", y, 3) == pytest.approx(math.sqrt(24.0))
    assert resolve_rho(2.5, y, 3) == 2.5
    with pytest.raises(ValueError):
        resolve_rho("auto", np.zeros((2, 2)), 3)
    with pytest.raises(ValueError):
        resolve_rho("bogus", y, 3)


def test_sample_ball_one_dimension(rng):
    """Uniform on (-rho, rho): inside the ball and centred."""
    samples = np.array([sample_ball(1, 1.0, rng)[0] for _ in range(2000)])
    assert np.all(np.abs(samples) < 1.0)
    assert abs(samples.mean()) < 0.05
    with pytest.raises(ValueError):
        sample_ball(0, 1.0, rng)


def test_init_in_ball():
    shape = NetworkShape(n=3, r=2, widths=(2, 2, 1))
    for seed in range(50):
        assert init_in_ball(shape, 1.5, seed).z_norm() < 1.5

    a = init_in_ball(shape, 1.5, 0).to_vector()
    np.testing.assert_array_equal(a, init_in_ball(shape, 1.5, 0).to_vector())
    assert not np.array_equal(a, init_in_ball(shape, 1.5, 1).to_vector())


# ------------------------------------------------------------------------------
# ---- Config ------------------------------------------------------------------
# ------------------------------------------------------------------------------


def test_config_from_text(tiny_config_text):
    cfg = ExperimentConfig.from_text(tiny_config_text)
    assert (cfg.n, cfg.m, cfg.r, cfg.J) == (4, 6, 1, 3)
    assert cfg.lazy is True
    assert cfg.mu == 0.002
    assert cfg.rho == "auto_network"
    assert cfg.tol_grad == "auto"
    assert cfg.init_seed == cfg.seed == 3
    assert "ring (lazy)" in cfg.describe()


def test_config_counts_accept_exponents(tiny_config_text):
    assert ExperimentConfig.from_text(_with(tiny_config_text, max_iters="2e5")).max_iters == 200_000
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(_with(tiny_config_text, max_iters="2.5"))


@pytest.mark.parametrize(
    "overrides", [
        {"colour": "blue"},
        {"topology": "torus"},
        {"mu": "fast"},
        {"mu": "-0.1"},
        {"rho": "0"},
        {"lazy": "maybe"},
        {"r": "5"},
        {"J": "7"},
        {"topology": "erdos"},
        {"safety": "1.5"},
        {"engine": "adam"},
    ]
)
def test_config_rejects(tiny_config_text, overrides):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(_with(tiny_config_text, **overrides))


def test_config_rejects_missing_key(tiny_config_text):
    text = "\n".join(line for line in tiny_config_text.splitlines() if not line.startswith("topology"))
    with pytest.raises(ConfigError, match="topology"):
        ExperimentConfig.from_text(text)


def test_config_rejects_duplicate_key(tiny_config_text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(tiny_config_text + "n = 5\n")


def test_config_echo_round_trip(tiny_config_text):
    cfg = ExperimentConfig.from_text(_with(tiny_config_text, topology="erdos", p="0.5", init_seed="11"))
    again = ExperimentConfig.from_text(cfg.echo())
    assert again.as_dict() == cfg.as_dict()
    assert set(cfg.as_dict()) == set(CONFIG_KEYS)


def test_config_bundled_fallback(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = ExperimentConfig.from_file("ring4.cfg")
    assert (cfg.n, cfg.m, cfg.r, cfg.J) == (4, 8, 1, 4)
    assert cfg.max_iters == 200_000
    with pytest.raises(FileNotFoundError):
        ExperimentConfig.from_file("missing.cfg")


# ------------------------------------------------------------------------------
# ---- Experiments -------------------------------------------------------------
# ------------------------------------------------------------------------------


def test_prepare_experiment(tiny_config_text):
    exp = prepare_experiment(ExperimentConfig.from_text(tiny_config_text))
    assert exp.partition.widths == (2, 2, 2)
    assert exp.omega == pytest.approx(1 / 3)
    assert exp.stepsize() == 0.002
    assert exp.rho == pytest.approx(resolve_rho("auto_network", exp.y, 3))
    assert exp.initial_point().z_norm() < exp.rho


def test_prepare_single_node(tiny_config_text):
    exp = prepare_experiment(ExperimentConfig.from_text(_with(tiny_config_text, J="1")))
    np.testing.assert_array_equal(exp.mixing.wtilde, [[1.0]])
    assert omega(exp.mixing) == 0.0
    assert not exp.graph.edges


def test_write_instance(tmp_path, tiny_config_text):
    exp = prepare_experiment(ExperimentConfig.from_text(tiny_config_text))
    paths = write_instance(exp, tmp_path / "instance")

    names = [p.split("/")[-1] for p in paths]
    assert names == ["Y.txt", "Y_1.txt", "Y_2.txt", "Y_3.txt", "widths.txt", "graph.txt", "mixing.txt"]
    np.testing.assert_array_equal(read_matrix(paths[0]), exp.y)
    assert (tmp_path / "instance" / "widths.txt").read_text() == "2 2 2\n"
    np.testing.assert_array_equal(read_mixing(paths[-1]).wtilde, exp.mixing.wtilde)


def test_run_experiment_artifacts(tiny_config_file, tmp_path):
    trace = run_experiment(tiny_config_file)
    out = tmp_path / "out"

    lines = (out / TRACE_FILE).read_text().splitlines()
    assert len(lines) == len(trace.records) + 1
    summary = json.loads((out / SUMMARY_FILE).read_text())
    assert list(summary) == list(SUMMARY_FIELDS)
    assert summary["status"] == trace.status.value

    resolved = ExperimentConfig.from_file(out / RESOLVED_CONFIG_FILE)
    assert resolved.mu == 0.002
    assert isinstance(resolved.rho, float)
    assert isinstance(resolved.tol_grad, float)


def test_run_experiment_is_reproducible(tiny_config_file, tmp_path):
    """Reruns, including from the resolved config, write identical traces."""
    run_experiment(tiny_config_file, output_dir=tmp_path / "a")
    run_experiment(tiny_config_file, output_dir=tmp_path / "b")
    run_experiment(tmp_path / "a" / RESOLVED_CONFIG_FILE, output_dir=tmp_path / "c")

    first = (tmp_path / "a" / TRACE_FILE).read_bytes()
    assert (tmp_path / "b" / TRACE_FILE).read_bytes() == first
    assert (tmp_path / "c" / TRACE_FILE).read_bytes() == first
    assert (tmp_path / "b" / SUMMARY_FILE).read_bytes() == (tmp_path / "a" / SUMMARY_FILE).read_bytes()


def test_run_experiment_refuses_eager_network(tiny_config_text, tmp_path):
    """omega >= 1/2 with mu = auto stops before iterating and points at lazy."""
    text = _with(tiny_config_text, lazy="false", mu="auto")
    with pytest.raises(StepsizeError, match="lazy"):
        run_experiment(ExperimentConfig.from_text(text))
    assert not (tmp_path / "out" / TRACE_FILE).exists()


def test_monte_carlo_summary(tiny_config_text, tmp_path):
    summary = monte_carlo(ExperimentConfig.from_text(tiny_config_text), trials=2)

    assert summary["trials"] == 2
    assert summary["seeds"] == [3, 4]
    assert summary["mu"] == 0.002
    assert len(summary["per_trial"]) == 2
    for key in ("success_fraction", "left_ball_fraction", "grad_tolerance_fraction"):
        assert 0.0 <= summary[key] <= 1.0

    written = json.loads((tmp_path / "out" / MC_SUMMARY_FILE).read_text())
    assert written["seeds"] == [3, 4]


def test_monte_carlo_diverging_stepsize(tiny_config_text):
    """Negative control: a huge stepsize fails every trial."""
    summary = monte_carlo(ExperimentConfig.from_text(_with(tiny_config_text, mu="10")), trials=3)
    assert summary["success_fraction"] == 0.0
    assert summary["grad_tolerance_fraction"] == 0.0
    assert summary["left_ball_fraction"] == 1.0
    assert summary["success_fraction_in_ball"] is None
    assert all(entry["status"] == RunStatus.LEFT_BALL.value for entry in summary["per_trial"])


def test_monte_carlo_rejects_zero_trials(tiny_config_text):
    with pytest.raises(ValueError):
        monte_carlo(ExperimentConfig.from_text(tiny_config_text), trials=0)


@pytest.mark.slow
def test_bundled_ring4_converges(tmp_path):
    trace = run_experiment("ring4.cfg", output_dir=tmp_path / "ring4")
    assert trace.status == RunStatus.GRAD_TOLERANCE_MET
    assert trace.final.consensus_err <= 1e-6
    assert trace.final.opt_gap <= 1e-4 * np.linalg.norm(prepare_experiment("ring4.cfg").y)**2


@pytest.mark.slow
def test_monte_carlo_ring_converges_from_every_start(tiny_config_text):
    """Twenty random starts on a lazy ring all meet the gradient tolerance inside the ball."""
    text = _with(tiny_config_text, n="10", m="12", r="2", J="4", max_iters="2e5")
    summary = monte_carlo(ExperimentConfig.from_text(text), trials=20)

    assert summary["success_fraction_in_ball"] == 1.0
    assert summary["left_ball_fraction"] == 0.0
    for entry in summary["per_trial"]:
        if entry["status"] == RunStatus.GRAD_TOLERANCE_MET.value:
            assert entry["final_consensus_err"] <= 1e-6
