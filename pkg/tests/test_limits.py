"""Pencil limits, separation criteria, and the B-decomposition."""

import warnings

import numpy as np
import pytest

import conftest as golden_data
from wmpinv import (
    CriteriaDisagreeError,
    NotPositiveOnRangeError,
    NotPositiveSemidefiniteError,
    NotSeparatedError,
    Weight,
    WeightError,
    closed_form_separated,
    decompose_b,
    general_limit_via_decomposition,
    limit_lambda_to_inf,
    limit_t_to_zero,
    omega_weight,
    require_wmp_inverse,
    separated_pair_check,
)
from wmpinv.linalg import DEFAULT_TOL, operator_norm, projector_rowspace
from wmpinv.sampling import (
    random_matrix_with_rank,
    random_separated_pair,
    random_spd,
    random_weight,
)


def overlapping_pair(gen, cols=5):
    """Row spaces forced to intersect so the t -> 0 decay is genuine."""
    a = random_matrix_with_rank(gen, 4, cols, 3)
    b = random_matrix_with_rank(gen, 3, cols, 3)
    return a, b


class TestOmegaWeight:
    def test_default_build(self, rng):
        a, b = overlapping_pair(rng)
        w = Weight(random_spd(rng, 3))
        om = omega_weight(a, b, w)
        assert om.u.positive_definite
        assert om.restricted_min_eig > 0

    def test_mismatched_columns(self, rng):
        with pytest.raises(ValueError):
            omega_weight(np.eye(3), np.eye(4), Weight(np.eye(4)))

    def test_indefinite_x_can_break_admissibility(self, rng):
        a = np.array([[1.0, 0.0]])
        b = np.array([[0.0, 1.0]])
        with pytest.raises(NotPositiveOnRangeError):
            omega_weight(a, b, Weight(np.eye(1)), x=np.array([[-1.0]]))

    def test_y_enters_only_on_joint_null(self, rng):
        a = random_matrix_with_rank(rng, 2, 5, 2)
        b = random_matrix_with_rank(rng, 2, 5, 2)
        w = Weight(random_spd(rng, 2))
        y = np.diag([5.0, 4.0, 3.0, 2.0, 1.0])
        om = omega_weight(a, b, w, y=y)
        p0 = om.null_projector
        assert np.allclose(om.y_effective, p0 @ y @ p0, atol=1e-10)


class TestLimitT0:
    def test_converges_to_weighted_inverse(self, rng):
        a, b = overlapping_pair(rng)
        v = Weight(random_spd(rng, 4))
        w = Weight(random_spd(rng, 3))
        trace = limit_t_to_zero(a, b, v, w)
        assert trace.converged
        assert trace.rank_flips == ()
        tail = trace.errors[-5:]
        assert np.all(np.diff(tail) <= 0)

    def test_limit_is_u_independent(self, rng):
        a, b = overlapping_pair(rng)
        v = Weight(random_spd(rng, 4))
        w = Weight(random_spd(rng, 3))
        # distinct family members: same w, different x and y blocks
        u1 = omega_weight(a, b, w, x=random_spd(rng, 4))
        u2 = omega_weight(a, b, w, x=random_spd(rng, 4), y=random_spd(rng, 5))
        t1 = limit_t_to_zero(a, b, v, w, u=u1)
        t2 = limit_t_to_zero(a, b, v, w, u=u2)
        assert t1.converged and t2.converged
        assert np.allclose(t1.target, t2.target, atol=1e-9)

    def test_separated_pair_is_exact_at_every_t(self, rng):
        a, b = random_separated_pair(rng, 6, 3, 2, 2, 2)
        v = Weight(random_spd(rng, 3))
        w = Weight(random_spd(rng, 2))
        trace = limit_t_to_zero(a, b, v, w)
        assert np.max(trace.errors) <= 1e-9

    def test_rejects_indefinite_v(self, rng):
        a, b = overlapping_pair(rng)
        with pytest.raises(WeightError):
            limit_t_to_zero(a, b, Weight(np.diag([1.0, 1, 1, -1])), Weight(np.eye(3)))

    def test_rejects_bad_schedule(self, rng):
        a, b = overlapping_pair(rng)
        v = Weight(random_spd(rng, 4))
        w = Weight(random_spd(rng, 3))
        with pytest.raises(ValueError):
            limit_t_to_zero(a, b, v, w, schedule=[1e-1, 1e-1])
        with pytest.raises(ValueError):
            limit_t_to_zero(a, b, v, w, schedule=[1e-1, -1e-2])


class TestLimitLambda:
    def test_golden_two_by_two(self):
        trace = limit_lambda_to_inf(golden_data.LAMBDA_A, golden_data.LAMBDA_B)
        assert np.allclose(trace.target, golden_data.LAMBDA_TARGET, atol=1e-12)
        assert trace.converged

    def test_overlapping_ranges_decay(self, rng):
        g1 = random_matrix_with_rank(rng, 4, 6, 4)
        g2 = random_matrix_with_rank(rng, 4, 6, 4)
        a = g1.conj().T @ g1
        b = g2.conj().T @ g2
        trace = limit_lambda_to_inf(a, b)
        assert trace.converged
        assert trace.errors[-1] < trace.errors[0]

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            limit_lambda_to_inf(np.diag([1.0, -1.0]), np.eye(2))

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            limit_lambda_to_inf(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(2))


class TestSeparationCriteria:
    def test_generated_pair_is_separated(self, rng):
        a, b = random_separated_pair(rng, 6, 3, 2, 3, 2)
        rep = separated_pair_check(a, b)
        assert rep.is_separated
        assert rep.pq_norm < 1.0
        assert rep.intersection_dim == 0

    def test_shared_direction_is_not_separated(self, rng):
        a = random_matrix_with_rank(rng, 2, 5, 2)
        b = np.vstack([a[:1], random_matrix_with_rank(rng, 1, 5, 1)])
        rep = separated_pair_check(a, b)
        assert not rep.is_separated
        assert rep.intersection_dim >= 1

    def test_borderline_raises_instead_of_guessing(self):
        # two lines at an angle whose cosine sits between the margin (1e-6)
        # and the invertibility threshold of 2I - P - Q (about 2e-12)
        theta = np.sqrt(2e-8)
        a = np.array([[1.0, 0.0]])
        b = np.array([[np.cos(theta), np.sin(theta)]])
        with pytest.raises(CriteriaDisagreeError) as exc:
            separated_pair_check(a, b)
        assert exc.value.pq_norm > 1.0 - 1e-6


class TestClosedFormSeparated:
    def test_matches_pencil_and_ignores_w(self, rng):
        a, b = random_separated_pair(rng, 6, 3, 2, 2, 2)
        v = Weight(random_spd(rng, 3))
        w = Weight(random_spd(rng, 2))
        pi, d = closed_form_separated(a, b, v, w, rng=rng)
        # the pencil at t = 1 already equals the closed form
        core = a.conj().T @ v.matrix @ a + b.conj().T @ w.matrix @ b
        lhs = np.linalg.pinv(core) @ a.conj().T @ v.matrix
        assert operator_norm(lhs - d) <= 1e-9 * (1.0 + operator_norm(d))
        for _ in range(2):
            w2 = random_spd(rng, 2)
            core2 = a.conj().T @ v.matrix @ a + b.conj().T @ w2 @ b
            lhs2 = np.linalg.pinv(core2) @ a.conj().T @ v.matrix
            assert operator_norm(lhs2 - d) <= 1e-9 * (1.0 + operator_norm(d))

    def test_raises_when_not_separated(self, rng):
        a, b = overlapping_pair(rng)
        with pytest.raises(NotSeparatedError):
            closed_form_separated(a, b, Weight(random_spd(rng, 4)), Weight(random_spd(rng, 3)))


class TestDecomposeB:
    def test_split_invariants(self, rng):
        a, b = overlapping_pair(rng)
        v = Weight(random_spd(rng, 4))
        w = Weight(random_spd(rng, 3))
        dec = decompose_b(a, b, v, w)
        assert np.allclose(dec.b1 + dec.b2, b, atol=0)
        assert operator_norm(dec.b2.conj().T @ w.matrix @ dec.b1) <= 1e-9 * (
            1.0 + operator_norm(b)
        ) ** 2 * (1.0 + operator_norm(w.matrix))
        p = projector_rowspace(a, DEFAULT_TOL)
        eye = np.eye(a.shape[1])
        assert operator_norm((eye - p) @ dec.b1.conj().T) <= 1e-9 * (1.0 + operator_norm(b))
        assert separated_pair_check(a, dec.b2).is_separated

    def test_orthogonal_rows_keep_b_whole(self, rng):
        # B A* = 0 leaves the weighted inverse blind to B, so b1 vanishes
        a = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])
        b = np.array([[0.0, 0.0, 1.0, 0.0]])
        v = Weight(random_spd(rng, 2))
        w = Weight(random_spd(rng, 1))
        dec = decompose_b(a, b, v, w)
        assert operator_norm(dec.b1) <= 1e-12
        assert np.allclose(dec.b2, b, atol=1e-12)


class TestGeneralLimit:
    def test_reduction_traces_to_the_closed_form(self, rng):
        a, b = overlapping_pair(rng)
        v = Weight(random_spd(rng, 4))
        w = Weight(random_spd(rng, 3))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            res = general_limit_via_decomposition(a, b, v, w, rng=rng)
        assert res.trace.converged
        # the closed form is the same target the direct trace reaches
        direct = limit_t_to_zero(a, b, v, w)
        assert np.allclose(res.closed_form, direct.target, atol=1e-8)

    def test_explicit_w_prime(self, rng):
        a, b = overlapping_pair(rng)
        v = Weight(random_spd(rng, 4))
        w = Weight(random_spd(rng, 3))
        res = general_limit_via_decomposition(a, b, v, w, w_prime=Weight(np.eye(3)), rng=rng)
        assert res.trace.converged
        with pytest.raises(WeightError):
            general_limit_via_decomposition(
                a, b, v, w, w_prime=Weight(np.diag([1.0, 1, -1])), rng=rng
            )
