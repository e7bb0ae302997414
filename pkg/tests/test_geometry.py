"""Tests for classification, balancing, lifting and the run metrics."""

import numpy as np
import pytest

from dgd_local.errors import (
    ClassificationError,
    DegenerateFactorsError,
    DimensionMismatchError,
)
from dgd_local.geometry import (
    QuadraticForm,
    balance_factors,
    classify_critical,
    consensus_error,
    lift_direction,
    lift_pair,
    min_quadform_eig,
    opt_gap,
    symmetric_gradient_residual,
)
from dgd_local.objective import (
    FactorPair,
    NetworkPoint,
    quadform_f,
    quadform_g,
)

# ------------------------------------------------------------------------------
# ---- Metrics -----------------------------------------------------------------
# ------------------------------------------------------------------------------


def test_consensus_error_two_nodes(rng):
    """With two copies the error is half their distance."""
    a = rng.standard_normal((3, 2))
    b = rng.standard_normal((3, 2))
    z = NetworkPoint(copies=(a, b), locals=(np.zeros((1, 2)), np.zeros((1, 2))))
    assert consensus_error(z) == pytest.approx(np.linalg.norm(a - b) / 2)


def test_consensus_error_at_consensus(small_pair, small_partition):
    assert consensus_error(NetworkPoint.consensus(small_pair, small_partition.widths)) == pytest.approx(0.0, abs=1e-12)


def test_opt_gap_examples():
    y = np.diag([2.0, 1.0])
    zero = FactorPair(np.zeros((2, 1)), np.zeros((2, 1)))
    assert opt_gap(zero, y) == pytest.approx(4.0)
    assert opt_gap(zero, y, floor=1.0) == pytest.approx(4.0)

    root = np.sqrt(2.0)
    best = FactorPair(np.array([[root], [0.0]]), np.array([[root], [0.0]]))
    assert opt_gap(best, y) == 0.0


def test_symmetric_gradient_residual(rng):
    """<grad_U f_j, U> equals <grad_V f_j, V_j> for any triple."""
    for _ in range(50):
        u = rng.standard_normal((4, 2))
        v = rng.standard_normal((3, 2))
        y = rng.standard_normal((4, 3))
        assert symmetric_gradient_residual(u, v, y) <= 1e-10


def test_symmetric_gradient_residual_rejects_shapes(rng):
    with pytest.raises(DimensionMismatchError):
        symmetric_gradient_residual(np.ones((4, 2)), np.ones((3, 2)), np.ones((3, 3)))


# ------------------------------------------------------------------------------
# ---- Eigen-Estimate ----------------------------------------------------------
# ------------------------------------------------------------------------------


def test_min_quadform_eig_diagonal():
    estimate = min_quadform_eig(QuadraticForm.from_matrix(np.diag([1.0, -2.0])))
    assert estimate.value == pytest.approx(-2.0, abs=1e-8)
    np.testing.assert_allclose(estimate.witness, [0.0, 1.0], atol=1e-4)
    assert estimate.converged

    estimate = min_quadform_eig(QuadraticForm.from_matrix(np.diag([1.0, 2.0])))
    assert estimate.value == pytest.approx(1.0, abs=1e-8)
    np.testing.assert_allclose(estimate.witness, [1.0, 0.0], atol=1e-4)


def test_min_quadform_eig_matches_dense(rng):
    """Never below the true minimum and close to it for a well separated spectrum."""
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    a = q @ np.diag([-3.0, -1.0, 0.0, 1.0, 2.0, 4.0]) @ q.T
    a = (a + a.T) / 2

    lam_min = float(np.linalg.eigvalsh(a)[0])
    estimate = min_quadform_eig(QuadraticForm.from_matrix(a), seed=3)
    assert estimate.value >= lam_min - 1e-10
    assert estimate.value == pytest.approx(lam_min, abs=1e-6)
    assert np.linalg.norm(estimate.witness) == pytest.approx(1.0)


def test_min_quadform_eig_zero_form():
    estimate = min_quadform_eig(QuadraticForm.from_matrix(np.zeros((3, 3))))
    assert estimate.value == 0.0
    assert estimate.converged


def test_min_quadform_eig_rejects():
    with pytest.raises(DimensionMismatchError):
        QuadraticForm.from_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        min_quadform_eig(QuadraticForm.from_matrix(np.eye(2)), iters=0)


# ------------------------------------------------------------------------------
# ---- Classification ----------------------------------------------------------
# ------------------------------------------------------------------------------


def test_classify_origin_is_strict_saddle():
    """Curvature at the origin is -2 sigma_1(Y)."""
    y = np.diag([1.0, 0.5])
    zero = FactorPair(np.zeros((2, 1)), np.zeros((2, 1)))
    verdict = classify_critical(zero, y)

    assert verdict.kind == "StrictSaddle"
    assert verdict.min_quadform == pytest.approx(-2.0, abs=1e-6)
    assert verdict.witness.norm() == pytest.approx(1.0)
    assert quadform_f(zero, verdict.witness, y) == pytest.approx(verdict.min_quadform)
    assert not verdict.low_confidence


def test_classify_exact_factorization_is_global_min(rng):
    u = rng.standard_normal((5, 2))
    v = rng.standard_normal((4, 2))
    verdict = classify_critical(FactorPair(u, v), u @ v.T)
    assert verdict.kind == "GlobalMin"
    assert verdict.min_quadform is None


def test_classify_best_rank_one_is_global_min():
    root = np.sqrt(2.0)
    best = FactorPair(np.array([[root], [0.0]]), np.array([[root], [0.0]]))
    assert classify_critical(best, np.diag([2.0, 1.0])).kind == "GlobalMin"


def test_classify_second_singular_pair_is_saddle():
    """Fitting the smaller singular value leaves curvature -2 (sigma_1 - sigma_2)."""
    wrong = FactorPair(np.array([[0.0], [1.0]]), np.array([[0.0], [1.0]]))
    verdict = classify_critical(wrong, np.diag([2.0, 1.0]))
    assert verdict.kind == "StrictSaddle"
    assert verdict.min_quadform < 0


def test_classify_random_point_is_not_critical(rng):
    p = FactorPair(rng.standard_normal((4, 2)), rng.standard_normal((3, 2)))
    verdict = classify_critical(p, rng.standard_normal((4, 3)))
    assert verdict.kind == "NotCritical"
    assert verdict.grad_norm > 0


def test_classify_raises_without_negative_curvature():
    """An unreachable saddle threshold leaves the origin unclassified."""
    zero = FactorPair(np.zeros((2, 1)), np.zeros((2, 1)))
    with pytest.raises(ClassificationError):
        classify_critical(zero, np.diag([1.0, 0.5]), tol_saddle=100.0)


def test_classify_rejects_tolerances(small_pair, small_partition):
    with pytest.raises(ValueError):
        classify_critical(small_pair, small_partition.y, tol_grad=0.0)


def test_verdict_to_dict(rng):
    p = FactorPair(rng.standard_normal((2, 1)), rng.standard_normal((2, 1)))
    record = classify_critical(p, np.eye(2)).to_dict()
    assert set(record) == {"kind", "grad_norm", "min_quadform"}
    assert record["kind"] == "NotCritical"


# ------------------------------------------------------------------------------
# ---- Balancing and Lifting ---------------------------------------------------
# ------------------------------------------------------------------------------


def test_balance_scalar_examples():
    balanced = balance_factors(FactorPair(np.array([[2.0]]), np.array([[0.5]])))
    np.testing.assert_allclose(balanced.u, [[1.0]])
    np.testing.assert_allclose(balanced.v, [[1.0]])

    balanced = balance_factors(FactorPair(np.array([[-2.0]]), np.array([[-0.5]])))
    np.testing.assert_allclose(balanced.u, [[1.0]])
    np.testing.assert_allclose(balanced.v, [[1.0]])


def test_balance_random_pairs(rng):
    """Product preserved and Gram matrices equal."""
    for _ in range(100):
        p = FactorPair(rng.standard_normal((6, 3)), rng.standard_normal((5, 3)))
        balanced = balance_factors(p)
        scale = np.linalg.norm(p.product())
        np.testing.assert_allclose(balanced.product(), p.product(), atol=1e-10 * scale)
        np.testing.assert_allclose(balanced.u.T @ balanced.u, balanced.v.T @ balanced.v, atol=1e-10 * scale)


def test_balance_rejects_degenerate(rng):
    u = rng.standard_normal((4, 2))
    u[:, 1] = 0.0
    with pytest.raises(DegenerateFactorsError):
        balance_factors(FactorPair(u, rng.standard_normal((3, 2))))


def test_lift_preserves_quadratic_form(rng, small_pair, small_partition, small_weights):
    """At consensus the penalty form vanishes on lifted directions."""
    z = NetworkPoint.consensus(small_pair, small_partition.widths)
    for _ in range(10):
        direction = small_pair.from_vector(rng.standard_normal(small_pair.dim))
        lifted = lift_pair(direction, small_partition)
        expected = quadform_f(small_pair, direction, small_partition.y)
        assert quadform_g(z, lifted, small_weights, small_partition) == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_lifted_saddle_witness_is_negative_for_g(small_partition, small_weights):
    zero = FactorPair(np.zeros((5, 2)), np.zeros((7, 2)))
    verdict = classify_critical(zero, small_partition.y)
    assert verdict.kind == "StrictSaddle"

    z = NetworkPoint.consensus(zero, small_partition.widths)
    lifted = lift_pair(verdict.witness, small_partition)
    assert quadform_g(z, lifted, small_weights, small_partition) == pytest.approx(verdict.min_quadform, rel=1e-10)
    assert quadform_g(z, lifted, small_weights, small_partition) < 0


def test_lift_direction_copies_blocks(rng):
    q_x = rng.standard_normal((3, 1))
    lifted = lift_direction(q_x, [np.ones((2, 1)), np.ones((1, 1))], 2)
    assert len(lifted.copies) == 2
    for copy in lifted.copies:
        np.testing.assert_array_equal(copy, q_x)
    with pytest.raises(DimensionMismatchError):
        lift_direction(q_x, [np.ones((2, 1))], 2)


def test_network_form_finds_negative_curvature(small_partition, small_weights):
    """At the consensus origin g has curvature at least as negative as the lifted witness."""
    zero = NetworkPoint.consensus(FactorPair(np.zeros((5, 2)), np.zeros((7, 2))), small_partition.widths)
    form = QuadraticForm.of_g(zero, small_weights, small_partition)
    assert form.dim == zero.shape.dim

    witness = classify_critical(FactorPair(np.zeros((5, 2)), np.zeros((7, 2))), small_partition.y).witness
    lifted = lift_pair(witness, small_partition)
    lifted_quotient = quadform_g(zero, lifted, small_weights, small_partition) / lifted.z_norm()**2

    estimate = min_quadform_eig(form)
    assert estimate.value < 0
    assert estimate.value <= lifted_quotient + 1e-6
