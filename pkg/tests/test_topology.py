"""Tests for graphs, mixing matrices and GD weights."""

import numpy as np
import pytest

from dgd_local.errors import ConvergenceError
from dgd_local.topology import (
    GDWeights,
    Graph,
    MixingMatrix,
    build_graph,
    is_connected,
    lazy_fix,
    metropolis_weights,
    omega,
    perturb_row_sums,
    read_graph,
    read_mixing,
    to_gd_weights,
    write_graph,
    write_mixing,
)


def _check_invariants(m: MixingMatrix) -> None:
    wt = m.wtilde
    assert np.max(np.abs(wt - wt.T)) <= 1e-15
    assert np.all(wt >= 0)
    np.testing.assert_allclose(wt.sum(axis=1), 1.0, atol=1e-12, rtol=0)


# ------------------------------------------------------------------------------
# ---- Graphs ------------------------------------------------------------------
# ------------------------------------------------------------------------------


def test_ring_graph():
    assert build_graph("ring", 4).edges == {(1, 2), (2, 3), (3, 4), (1, 4)}


def test_complete_graph():
    assert len(build_graph("complete", 3).edges) == 3


def test_star_graph():
    """Every edge of the star touches node 1."""
    g = build_graph("star", 5)
    assert len(g.edges) == 4
    assert all(1 in edge for edge in g.edges)


def test_erdos_graph_deterministic_and_connected():
    a = build_graph("erdos", 8, seed=11, p=0.4)
    b = build_graph("erdos", 8, seed=11, p=0.4)
    assert a == b
    assert a.is_connected()


def test_erdos_graph_cap():
    """An isolated-node-only probability never connects."""
    with pytest.raises(ConvergenceError):
        build_graph("erdos", 5, seed=0, p=1e-12)


@pytest.mark.parametrize(
    "kind,J,p", [
        ("ring", 1, None),
        ("erdos", 4, None),
        ("erdos", 4, 1.5),
        ("torus", 4, None),
    ]
)
def test_build_graph_rejects(kind, J, p):
    with pytest.raises(ValueError):
        build_graph(kind, J, p=p)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph.from_pairs(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph.from_pairs(3, [(1, 2), (2, 1)])
    with pytest.raises(ValueError):
        Graph.from_pairs(3, [(1, 4)])


# ------------------------------------------------------------------------------
# ---- Mixing Matrices ---------------------------------------------------------
# ------------------------------------------------------------------------------


def test_metropolis_ring():
    """Degrees are all 2, so every weight is 1/3."""
    m = metropolis_weights(build_graph("ring", 4))
    expected = np.array([
        [1, 1, 0, 1],
        [1, 1, 1, 0],
        [0, 1, 1, 1],
        [1, 0, 1, 1],
    ]) / 3.0
    np.testing.assert_allclose(m.wtilde, expected, atol=1e-15)
    _check_invariants(m)
    assert m.is_supported_on(build_graph("ring", 4))


def test_metropolis_complete_two_nodes():
    m = metropolis_weights(build_graph("complete", 2))
    np.testing.assert_allclose(m.wtilde, [[0.5, 0.5], [0.5, 0.5]])


def test_metropolis_star():
    """Hub keeps 1/3, leaves keep 2/3."""
    m = metropolis_weights(build_graph("star", 3))
    np.testing.assert_allclose(np.diag(m.wtilde), [1 / 3, 2 / 3, 2 / 3])
    _check_invariants(m)


def test_metropolis_rejects_disconnected():
    with pytest.raises(ValueError):
        metropolis_weights(Graph.from_pairs(4, [(1, 2), (3, 4)]))


@pytest.mark.parametrize("kind", ["ring", "star", "complete"])
def test_metropolis_invariants(kind):
    for J in range(2, 9):
        _check_invariants(metropolis_weights(build_graph(kind, J)))


def test_mixing_matrix_validation():
    with pytest.raises(ValueError):
        MixingMatrix(np.array([[0.5, 0.6], [0.6, 0.5]]))
    with pytest.raises(ValueError):
        MixingMatrix(np.array([[0.5, 0.5], [0.4, 0.6]]))
    with pytest.raises(ValueError):
        MixingMatrix(np.array([[1.5, -0.5], [-0.5, 1.5]]))


def test_lazy_fix_examples():
    ring = metropolis_weights(build_graph("ring", 4))
    lazy = lazy_fix(ring)
    np.testing.assert_allclose(np.diag(lazy.wtilde), 2 / 3)
    assert lazy.wtilde[0, 1] == pytest.approx(1 / 6)
    assert omega(lazy) == pytest.approx(1 / 3)

    np.testing.assert_array_equal(lazy_fix(MixingMatrix(np.eye(3))).wtilde, np.eye(3))
    np.testing.assert_allclose(
        lazy_fix(MixingMatrix(np.full((2, 2), 0.5))).wtilde, [[0.75, 0.25], [0.25, 0.75]]
    )


@pytest.mark.parametrize("kind", ["ring", "star", "complete"])
def test_lazy_fix_halves_omega(kind):
    for J in range(2, 8):
        m = metropolis_weights(build_graph(kind, J))
        lazy = lazy_fix(m)
        _check_invariants(lazy)
        assert omega(lazy) == pytest.approx(omega(m) / 2)
        assert omega(lazy) < 0.5
        assert np.all(np.diag(lazy.wtilde) > 0.5)


def test_omega_examples():
    ring = metropolis_weights(build_graph("ring", 4))
    assert omega(ring) == pytest.approx(2 / 3)
    assert omega(MixingMatrix(np.eye(3))) == 0.0


def test_to_gd_weights():
    wt = np.array([[0.6, 0.2, 0.2], [0.2, 0.8, 0.0], [0.2, 0.0, 0.8]])
    weights = to_gd_weights(MixingMatrix(wt), 0.05)
    assert weights.w[0, 1] == pytest.approx(1.0)
    np.testing.assert_array_equal(np.diag(weights.w), 0.0)
    np.testing.assert_array_equal(weights.w, weights.w.T)

    lazy_ring = lazy_fix(metropolis_weights(build_graph("ring", 4)))
    assert to_gd_weights(lazy_ring, 0.1).w[0, 1] == pytest.approx(5 / 12)

    with pytest.raises(ValueError):
        to_gd_weights(lazy_ring, 0.0)


def test_gd_weights_validation():
    weights = GDWeights(np.array([[0.0, 1.0], [1.0, 0.0]]), 0.1)
    assert weights.J == 2
    with pytest.raises(ValueError, match="symmetric"):
        GDWeights(np.array([[0.0, 1.0], [2.0, 0.0]]), 0.1)
    with pytest.raises(ValueError, match="negative"):
        GDWeights(np.array([[0.0, -1.0], [-1.0, 0.0]]), 0.1)
    with pytest.raises(ValueError, match="diagonal"):
        GDWeights(np.eye(2), 0.1)
    with pytest.raises(ValueError):
        GDWeights(np.zeros((2, 2)), 0.0)


def test_to_gd_weights_scales_back():
    m = lazy_fix(metropolis_weights(build_graph("star", 5)))
    mu = 0.0125
    weights = to_gd_weights(m, mu)
    off = ~np.eye(5, dtype=bool)
    np.testing.assert_allclose(4 * mu * weights.w[off], m.wtilde[off], rtol=1e-15, atol=0)


def test_is_connected():
    assert is_connected(metropolis_weights(build_graph("ring", 4)))
    blocks = np.kron(np.eye(2), np.full((2, 2), 0.5))
    assert not is_connected(MixingMatrix(blocks))
    assert is_connected(MixingMatrix(np.ones((1, 1))))


def test_perturb_row_sums():
    m = metropolis_weights(build_graph("ring", 4))
    perturbed = perturb_row_sums(m, 0.9)
    np.testing.assert_allclose(perturbed.wtilde.sum(axis=1), 0.9)
    with pytest.raises(ValueError):
        MixingMatrix(perturbed.wtilde)


def test_graph_and_mixing_files(tmp_path):
    g = build_graph("star", 4)
    m = metropolis_weights(g)
    write_graph(tmp_path / "graph.txt", g)
    write_mixing(tmp_path / "mixing.txt", m)

    assert (tmp_path / "graph.txt").read_text().splitlines() == ["4", "1 2", "1 3", "1 4"]
    assert read_graph(tmp_path / "graph.txt") == g
    np.testing.assert_array_equal(read_mixing(tmp_path / "mixing.txt").wtilde, m.wtilde)
