"""Perturbation harness: trend columns, existence tails, weight limits."""

import numpy as np
import pytest

from wmpinv import (
    NonExistentError,
    PerturbationSequence,
    Weight,
    perturb_weights_only,
    run_diagnostics,
    wmp_inverse,
)
from wmpinv.linalg import DEFAULT_TOL, mp_inverse, operator_norm
from wmpinv.sampling import random_matrix_with_rank, random_weight


def base_problem(gen):
    a = random_matrix_with_rank(gen, 4, 3, 2)
    m = random_weight(gen, 4, positive=True)
    n = random_weight(gen, 3, positive=True)
    return a, m, n


def test_constant_sequence_is_flat(rng):
    a, m, n = base_problem(rng)
    seq = PerturbationSequence.full(a, m, n, [(a, m.matrix, n.matrix)] * 10)
    diag = run_diagnostics(seq)
    for key in ("wmp_diff", "proj_domain_diff", "proj_codomain_diff", "mp_diff"):
        assert np.max(diag.columns[key]) <= 1e-12
    assert all(diag.exists)
    assert diag.equivalences_consistent


def test_rank_preserving_perturbation_converges(rng):
    a, m, n = base_problem(rng)
    p_cod = a @ mp_inverse(a, DEFAULT_TOL)
    p_dom = mp_inverse(a, DEFAULT_TOL) @ a
    e = rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
    terms = [(a + (p_cod @ e @ p_dom) / k, m.matrix, n.matrix) for k in range(1, 41)]
    diag = run_diagnostics(PerturbationSequence.full(a, m, n, terms))
    assert diag.trends["wmp_diff"] == "decreasing"
    assert diag.trends["mp_diff"] == "decreasing"
    assert diag.trends["mp_norm"] != "diverging"
    assert diag.equivalences_consistent


def test_rank_dropping_perturbation_diverges(rng):
    a, m, n = base_problem(rng)
    eye_r = np.eye(4)
    eye_c = np.eye(3)
    p_cod = a @ mp_inverse(a, DEFAULT_TOL)
    p_dom = mp_inverse(a, DEFAULT_TOL) @ a
    f = rng.standard_normal(a.shape) + 1j * rng.standard_normal(a.shape)
    bump = (eye_r - p_cod) @ f @ (eye_c - p_dom)
    assert operator_norm(bump) > 1e-3
    # geometric spacing so the tail window spans a full decade of growth
    terms = [(a + bump / float(2**k), m.matrix, n.matrix) for k in range(0, 21)]
    diag = run_diagnostics(PerturbationSequence.full(a, m, n, terms))
    assert diag.trends["mp_norm"] == "diverging"
    col = diag.columns["mp_norm"]
    assert col[-1] / col[diag.tail_start] >= 10.0


def test_weights_only_immediate_existence(rng):
    a, m, n = base_problem(rng)
    pairs = [(m.matrix, n.matrix + np.eye(3) / k) for k in range(1, 21)]
    diag = perturb_weights_only(a, m, n, pairs)
    assert diag.n0 == 1
    assert all(diag.exists)
    assert diag.trends["wmp_diff"] == "decreasing"


def test_weights_only_reports_first_good_index(rng):
    a, m, n = base_problem(rng)
    singular_n = np.diag([1.0, 1.0, 0.0])
    pairs = [(m.matrix, singular_n)] + [(m.matrix, n.matrix)] * 9
    diag = perturb_weights_only(a, m, n, pairs)
    assert not diag.exists[0]
    assert all(diag.exists[1:])
    assert diag.n0 == 2


def test_per_term_nonexistence_recorded(rng):
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    n_bad = np.array([[0.0, 1.0], [1.0, 0.0]])
    seq = PerturbationSequence.full(
        a, np.eye(2), np.eye(2), [(a, np.eye(2), n_bad), (a, np.eye(2), np.eye(2))]
    )
    diag = run_diagnostics(seq)
    assert diag.exists == [False, True]


def test_base_nonexistence_raises():
    a = np.array([[1.0, 0.0], [0.0, 0.0]])
    n_bad = np.array([[0.0, 1.0], [1.0, 0.0]])
    seq = PerturbationSequence.full(a, np.eye(2), n_bad, [(a, np.eye(2), np.eye(2))])
    with pytest.raises(NonExistentError):
        run_diagnostics(seq)


def test_norm_bound_by_factor_product(rng):
    # per-term: the weighted inverse norm is submultiplicatively bounded
    # by the factor inverses around the plain pseudoinverse
    a, m, n = base_problem(rng)
    terms = [(a, m.matrix, n.matrix + np.eye(3) / k) for k in range(1, 11)]
    for a_k, m_k, n_k in terms:
        res = wmp_inverse(a_k, Weight(m_k), Weight(n_k))
        assert res.exists
        bound = (
            operator_norm(np.linalg.inv(res.r_factor))
            * operator_norm(mp_inverse(a_k, DEFAULT_TOL))
            * operator_norm(np.linalg.inv(res.l_factor))
        )
        assert operator_norm(res.inverse) <= bound * (1.0 + 1e-9)


def test_sequence_shape_validation(rng):
    a, m, n = base_problem(rng)
    with pytest.raises(ValueError):
        PerturbationSequence.full(a, m, n, [(a.T, m.matrix, n.matrix)])
    with pytest.raises(ValueError):
        PerturbationSequence.weights_only(a, m, n, [(np.eye(3), n.matrix)])
    with pytest.raises(ValueError):
        PerturbationSequence.full(a, m, n, [])
