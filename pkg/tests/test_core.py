"""Weighted inverse core: factored formula, reductions, embeddings."""

import numpy as np
import pytest

import conftest as golden_data
from wmpinv import (
    NonExistentError,
    NotIdempotentError,
    Weight,
    equivalent_domain_weights,
    matched_projection,
    positive_reduction,
    require_wmp_inverse,
    rho_embed,
    verify_weighted_penrose,
    weight_transfer_codomain,
    weight_transfer_domain,
    weighted_adjoint,
    wmp_exists,
    wmp_inverse,
    wmp_inverse_positive,
)
from wmpinv.linalg import DEFAULT_TOL, mp_inverse, operator_norm
from wmpinv.sampling import random_matrix_with_rank, random_spd, random_weight


class TestGoldenExample:
    """Hand-worked 4x4 triple with exact rational entries."""

    def test_ordinary_pinv(self, golden):
        assert np.allclose(mp_inverse(golden["a"], DEFAULT_TOL), golden["pinv"], atol=1e-12)

    def test_factors(self, golden):
        res = wmp_inverse(golden["a"], golden["m"], golden["n"])
        assert res.exists
        assert np.allclose(res.r_factor, golden["r"], atol=1e-12)
        assert np.allclose(res.l_factor, np.eye(4), atol=1e-12)

    def test_weighted_inverse(self, golden):
        res = require_wmp_inverse(golden["a"], golden["m"], golden["n"])
        assert np.allclose(res.inverse, golden["wmp"], atol=1e-12)
        assert max(res.penrose_residuals) <= 1e-12


class TestNonExistence:
    def test_singular_domain_factor(self):
        a, n = golden_data.NOEXIST_A, golden_data.NOEXIST_N
        rep = wmp_exists(a, np.eye(2), n)
        assert not rep.exists
        assert not rep.r_invertible
        assert rep.l_invertible
        assert np.allclose(rep.r_factor, [[1.0, 0.0], [1.0, 0.0]], atol=1e-14)

    def test_wmp_inverse_reports_without_raising(self):
        res = wmp_inverse(golden_data.NOEXIST_A, np.eye(2), golden_data.NOEXIST_N)
        assert not res.exists
        assert res.inverse is None

    def test_require_raises_with_factor_name(self):
        with pytest.raises(NonExistentError) as exc:
            require_wmp_inverse(golden_data.NOEXIST_A, np.eye(2), golden_data.NOEXIST_N)
        assert "R_{A,N}" in str(exc.value)


def test_identity_weights_give_ordinary_pinv(rng):
    a = random_matrix_with_rank(rng, 5, 4, 2)
    res = require_wmp_inverse(a, np.eye(5), np.eye(4))
    assert np.allclose(res.inverse, mp_inverse(a, DEFAULT_TOL), atol=1e-12)


def test_positive_oracle_agreement(rng):
    for _ in range(20):
        rows, cols = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        rank = int(rng.integers(0, min(rows, cols) + 1))
        a = random_matrix_with_rank(rng, rows, cols, rank)
        m = random_weight(rng, rows, positive=True)
        n = random_weight(rng, cols, positive=True)
        direct = require_wmp_inverse(a, m, n).inverse
        oracle = wmp_inverse_positive(a, m, n)
        scale = 1.0 + operator_norm(oracle)
        assert operator_norm(direct - oracle) <= 1e-10 * scale


def test_verify_weighted_penrose_detects_wrong_candidate(rng):
    a = random_matrix_with_rank(rng, 4, 3, 2)
    m = random_weight(rng, 4)
    n = random_weight(rng, 3)
    x = require_wmp_inverse(a, m, n).inverse
    good = verify_weighted_penrose(a, m, n, x)
    assert np.max(good) <= 1e-9
    bad = verify_weighted_penrose(a, m, n, x + 0.1)
    assert np.max(bad) > 1e-3


def test_duality_under_adjoint(rng):
    for _ in range(10):
        a = random_matrix_with_rank(rng, 5, 4, 3)
        m = random_weight(rng, 5)
        n = random_weight(rng, 4)
        res = wmp_inverse(a, m, n)
        if not res.exists:
            continue
        dual = wmp_inverse(a.conj().T, Weight(n.inverse), Weight(m.inverse))
        assert dual.exists
        assert np.allclose(res.inverse.conj().T, dual.inverse, atol=1e-9)


def test_weighted_adjoint_pairing(rng):
    a = random_matrix_with_rank(rng, 4, 3, 3)
    m = random_weight(rng, 4, positive=True)
    n = random_weight(rng, 3, positive=True)
    adj = weighted_adjoint(a, m, n)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    lhs = np.vdot(y, m.matrix @ (a @ x))
    rhs = np.vdot(adj @ y, n.matrix @ x)
    assert lhs == pytest.approx(rhs, abs=1e-10)


class TestPositiveReduction:
    def test_replacement_weights_are_positive(self, rng):
        a = random_matrix_with_rank(rng, 5, 4, 2)
        m = random_weight(rng, 5)
        n = random_weight(rng, 4)
        if not wmp_exists(a, m, n).exists:
            pytest.skip("drew a non-existent instance")
        red = positive_reduction(a, m, n)
        assert red.s.positive_definite
        assert red.t.positive_definite

    def test_same_inverse(self, golden):
        red = positive_reduction(golden["a"], golden["m"], golden["n"])
        replaced = require_wmp_inverse(golden["a"], red.s, red.t).inverse
        assert np.allclose(replaced, golden["wmp"], atol=1e-10)


class TestEquivalentDomainWeights:
    def test_family_members_share_the_inverse(self, golden, rng):
        fam = equivalent_domain_weights(golden["a"], golden["n"], samples=3, rng=rng)
        assert not fam.degenerate
        base = require_wmp_inverse(golden["a"], golden["m"], golden["n"]).inverse
        for n_alt in fam.weights:
            alt = require_wmp_inverse(golden["a"], golden["m"], n_alt).inverse
            assert np.allclose(alt, base, atol=1e-9)

    def test_full_rank_is_degenerate(self, rng):
        a = random_matrix_with_rank(rng, 4, 4, 4)
        fam = equivalent_domain_weights(a, random_weight(rng, 4), rng=rng)
        assert fam.degenerate

    def test_blocked_coupling_raises(self):
        with pytest.raises(NonExistentError):
            equivalent_domain_weights(golden_data.NOEXIST_A, golden_data.NOEXIST_N)


class TestWeightTransfer:
    def test_domain_transfer(self, rng):
        a = random_matrix_with_rank(rng, 5, 4, 3)
        m = random_weight(rng, 5, positive=True)
        n1 = random_weight(rng, 4, positive=True)
        n2 = random_weight(rng, 4, positive=True)
        r = weight_transfer_domain(a, m, n1, n2)
        x1 = require_wmp_inverse(a, m, n1).inverse
        x2 = require_wmp_inverse(a, m, n2).inverse
        assert np.allclose(x1, r @ x2, atol=1e-9)

    def test_codomain_transfer(self, rng):
        a = random_matrix_with_rank(rng, 5, 4, 3)
        m1 = random_weight(rng, 5, positive=True)
        m2 = random_weight(rng, 5, positive=True)
        n = random_weight(rng, 4, positive=True)
        l = weight_transfer_codomain(a, m1, m2, n)
        x1 = require_wmp_inverse(a, m1, n).inverse
        x2 = require_wmp_inverse(a, m2, n).inverse
        assert np.allclose(x1, x2 @ l, atol=1e-9)


def test_rho_embedding_recovers_inverse(golden):
    rho, t_weight = rho_embed(golden["a"], golden["m"], golden["n"])
    rows, cols = golden["a"].shape
    assert np.allclose(rho[:rows, rows:], golden["a"], atol=0)
    assert np.allclose(rho[rows:, :rows], golden["a"].conj().T, atol=0)
    emb = require_wmp_inverse(rho, t_weight, Weight(t_weight.inverse)).inverse
    assert np.allclose(emb[rows:, :rows], golden["wmp"], atol=1e-10)


class TestMatchedProjection:
    def test_golden_value(self):
        m = matched_projection(golden_data.MATCHED_Q)
        assert np.allclose(m, golden_data.MATCHED_GOLDEN, atol=1e-12)

    def test_projection_properties(self, rng):
        # random idempotent: oblique projector onto a random subspace
        g = random_matrix_with_rank(rng, 5, 2, 2)
        h = random_matrix_with_rank(rng, 5, 2, 2)
        q = g @ np.linalg.inv(h.conj().T @ g) @ h.conj().T
        m = matched_projection(q)
        assert np.allclose(m, m.conj().T, atol=1e-10)
        assert np.allclose(m @ m, m, atol=1e-10)
        # trace accuracy degrades with the obliqueness of q
        assert np.trace(m).real == pytest.approx(2.0, abs=1e-6)

    def test_fixes_hermitian_idempotents(self, rng):
        g = random_matrix_with_rank(rng, 5, 3, 3)
        qmat, _ = np.linalg.qr(g)
        p = qmat @ qmat.conj().T
        assert np.allclose(matched_projection(p), p, atol=1e-10)

    def test_rejects_non_idempotent(self):
        with pytest.raises(NotIdempotentError):
            matched_projection(np.array([[1.0, 2.0], [3.0, 4.0]]))
