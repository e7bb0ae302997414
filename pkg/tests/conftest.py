"""Pytest configuration and fixtures for dgd-local tests."""

import numpy as np
import pytest

from dgd_local.objective import (
    DataPartition,
    FactorPair,
    NetworkPoint,
)
from dgd_local.topology import (
    build_graph,
    lazy_fix,
    metropolis_weights,
    to_gd_weights,
)


@pytest.fixture
def rng():
    """Generator with a fixed seed for test data."""
    return np.random.default_rng(1234)


@pytest.fixture
def small_partition(rng):
    """Rank-2 Y (5 x 7) split over J=3 nodes."""
    y = rng.standard_normal((5, 2)) @ rng.standard_normal((7, 2)).T
    return DataPartition.even(y, 3)


@pytest.fixture
def ring_mixing():
    """Lazy Metropolis weights on a ring of three nodes."""
    return lazy_fix(metropolis_weights(build_graph("ring", 3)))


@pytest.fixture
def small_weights(ring_mixing):
    """GD weights of the lazy ring at mu = 0.01."""
    return to_gd_weights(ring_mixing, 0.01)


@pytest.fixture
def small_point(rng, small_partition):
    """Random network point matching small_partition with r = 2."""
    return NetworkPoint(
        copies=tuple(rng.standard_normal((5, 2)) for _ in range(3)),
        locals=tuple(rng.standard_normal((w, 2)) for w in small_partition.widths),
    )


@pytest.fixture
def small_pair(rng):
    """Random factor pair for a 5 x 7 problem with r = 2."""
    return FactorPair(rng.standard_normal((5, 2)), rng.standard_normal((7, 2)))


@pytest.fixture
def tiny_config_text(tmp_path):
    """Fast config on a lazy ring with an explicit stepsize."""
    return (
        "n = 4\n"
        "m = 6\n"
        "r = 1\n"
        "J = 3\n"
        "topology = ring\n"
        "lazy = true\n"
        "seed = 3\n"
        "mu = 0.002\n"
        "rho = auto_network\n"
        "max_iters = 50\n"
        f"output_dir = {tmp_path / 'out'}\n"
    )


@pytest.fixture
def tiny_config_file(tmp_path, tiny_config_text):
    path = tmp_path / "tiny.cfg"
    path.write_text(tiny_config_text)
    return path


@pytest.fixture(scope="session")
def cli_command():
    """CLI command name for testing."""
    return "dgd-local"


def pytest_configure(config):
    """Configure custom markers."""
    config.addinivalue_line("markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')")
