"""Weighted Moore-Penrose inverses for self-adjoint invertible weights.

For a matrix A with codomain weight M and domain weight N (both
self-adjoint and invertible, possibly indefinite), the weighted inverse
A+_MN is the unique X satisfying

    A X A = A,   X A X = X,   (M A X)* = M A X,   (N X A)* = N X A,

whenever it exists.  It is computed here from the factored form

    A+_MN = R^{-1} A+ L^{-1},
    R = A+ A + (I - A+ A) N,      L = A A+ + M^{-1} (I - A A+),

and it exists exactly when both factors are invertible.  R and L are
built from one SVD of A; the factor solves stay on the SVD path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    NonExistentError,
    NotIdempotentError,
    VerificationError,
    WeightError,
)
from .linalg import (
    DEFAULT_TOL,
    SvdFactorization,
    ToleranceConfig,
    as_matrix,
    condition_number,
    mp_inverse,
    operator_norm,
    solve_linear,
    svd_factor,
)
from .weights import Weight, as_weight

__all__ = [
    "ExistenceReport",
    "WmpResult",
    "PositiveReduction",
    "EquivalentWeightFamily",
    "weighted_adjoint",
    "r_operator",
    "l_operator",
    "wmp_exists",
    "wmp_inverse",
    "require_wmp_inverse",
    "verify_weighted_penrose",
    "wmp_inverse_positive",
    "positive_reduction",
    "equivalent_domain_weights",
    "weight_transfer_domain",
    "weight_transfer_codomain",
    "rho_embed",
    "matched_projection",
]


def _projections(f: SvdFactorization) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A+, A+A, AA+) from one factorization."""
    r = f.rank
    if r == 0:
        k, h = f.shape
        return (
            np.zeros((h, k), dtype=np.complex128),
            np.zeros((h, h), dtype=np.complex128),
            np.zeros((k, k), dtype=np.complex128),
        )
    inv_s = np.zeros_like(f.sigma)
    inv_s[:r] = 1.0 / f.sigma[:r]
    mp = (f.vh.conj().T * inv_s) @ f.u.conj().T
    vr = f.vh[:r].conj().T
    ur = f.u[:, :r]
    return mp, vr @ vr.conj().T, ur @ ur.conj().T


def weighted_adjoint(t, m, n, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Adjoint of ``t`` with respect to the weighted inner products.

    ``m`` weighs the codomain (rows of ``t``), ``n`` the domain.  The
    result is ``N^{-1} T* M`` and satisfies ``<Tx, y>_M = <x, T#y>_N``.
    """
    tm = as_matrix(t)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    if mw.dim != tm.shape[0] or nw.dim != tm.shape[1]:
        raise ValueError(
            f"weight dimensions {mw.dim}, {nw.dim} do not match matrix shape {tm.shape}"
        )
    return nw.inverse @ tm.conj().T @ mw.matrix


def r_operator(a, x, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Domain-side factor ``A+ A + (I - A+ A) X`` for square ``x``."""
    am = as_matrix(a)
    xm = as_matrix(x)
    if xm.shape != (am.shape[1], am.shape[1]):
        raise ValueError(f"x must be {am.shape[1]} x {am.shape[1]}, got {xm.shape}")
    _, p_dom, _ = _projections(svd_factor(am, tol))
    eye = np.eye(am.shape[1], dtype=np.complex128)
    return p_dom + (eye - p_dom) @ xm


def l_operator(a, y, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Codomain-side factor ``A A+ + Y (I - A A+)`` for square ``y``."""
    am = as_matrix(a)
    ym = as_matrix(y)
    if ym.shape != (am.shape[0], am.shape[0]):
        raise ValueError(f"y must be {am.shape[0]} x {am.shape[0]}, got {ym.shape}")
    _, _, p_cod = _projections(svd_factor(am, tol))
    eye = np.eye(am.shape[0], dtype=np.complex128)
    return p_cod + ym @ (eye - p_cod)


@dataclass(frozen=True)
class ExistenceReport:
    """Invertibility verdict for the two factors of the factored formula."""

    exists: bool
    r_invertible: bool
    l_invertible: bool
    r_cond: float
    l_cond: float
    r_factor: np.ndarray
    l_factor: np.ndarray


@dataclass(frozen=True)
class WmpResult:
    """Weighted inverse together with its factorization diagnostics.

    ``inverse`` is ``None`` when the weighted inverse does not exist; the
    factors, their condition numbers, and the plain Moore-Penrose inverse
    are always populated.  ``penrose_residuals`` holds the four weighted
    Penrose residuals in operator norm, ``None`` when there is no inverse.
    """

    exists: bool
    inverse: np.ndarray | None
    mp: np.ndarray
    r_factor: np.ndarray
    l_factor: np.ndarray
    r_cond: float
    l_cond: float
    penrose_residuals: np.ndarray | None


def _factors(am, mw, nw, tol):
    f = svd_factor(am, tol)
    mp, p_dom, p_cod = _projections(f)
    eye_h = np.eye(am.shape[1], dtype=np.complex128)
    eye_k = np.eye(am.shape[0], dtype=np.complex128)
    r = p_dom + (eye_h - p_dom) @ nw.matrix
    l = p_cod + mw.inverse @ (eye_k - p_cod)
    return mp, r, l


def wmp_exists(a, m, n, tol: ToleranceConfig = DEFAULT_TOL) -> ExistenceReport:
    """Decide existence of ``A+_MN`` from the two factor condition numbers."""
    am = as_matrix(a)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    if mw.dim != am.shape[0] or nw.dim != am.shape[1]:
        raise ValueError(
            f"weight dimensions {mw.dim}, {nw.dim} do not match matrix shape {am.shape}"
        )
    _, r, l = _factors(am, mw, nw, tol)
    r_cond = condition_number(r)
    l_cond = condition_number(l)
    r_ok = r_cond <= tol.inv_cond_max
    l_ok = l_cond <= tol.inv_cond_max
    return ExistenceReport(
        exists=r_ok and l_ok,
        r_invertible=r_ok,
        l_invertible=l_ok,
        r_cond=r_cond,
        l_cond=l_cond,
        r_factor=r,
        l_factor=l,
    )


def wmp_inverse(a, m, n, tol: ToleranceConfig = DEFAULT_TOL) -> WmpResult:
    """Compute ``A+_MN`` by the factored formula.

    Parameters
    ----------
    a : array_like
        Matrix of any shape and rank.
    m, n : Weight or array_like
        Codomain and domain weights; raw matrices are validated.
    tol : ToleranceConfig
        Rank and invertibility policy.

    Returns
    -------
    WmpResult
        With ``exists`` false (and ``inverse`` ``None``) when either
        factor is numerically singular.  No exception is raised here;
        operations that cannot proceed without the inverse raise
        ``NonExistentError`` instead.
    """
    am = as_matrix(a)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    if mw.dim != am.shape[0] or nw.dim != am.shape[1]:
        raise ValueError(
            f"weight dimensions {mw.dim}, {nw.dim} do not match matrix shape {am.shape}"
        )
    mp, r, l = _factors(am, mw, nw, tol)
    r_cond = condition_number(r)
    l_cond = condition_number(l)
    exists = r_cond <= tol.inv_cond_max and l_cond <= tol.inv_cond_max
    inverse = None
    residuals = None
    if exists:
        x = solve_linear(r, mp)
        inverse = solve_linear(l.T, x.T).T
        residuals = verify_weighted_penrose(am, mw, nw, inverse, tol)
    return WmpResult(
        exists=exists,
        inverse=inverse,
        mp=mp,
        r_factor=r,
        l_factor=l,
        r_cond=r_cond,
        l_cond=l_cond,
        penrose_residuals=residuals,
    )


def require_wmp_inverse(a, m, n, tol: ToleranceConfig = DEFAULT_TOL) -> WmpResult:
    """Like ``wmp_inverse`` but raises ``NonExistentError`` on failure."""
    res = wmp_inverse(a, m, n, tol)
    if not res.exists:
        if res.r_cond > res.l_cond:
            raise NonExistentError("R_{A,N}", res.r_cond)
        raise NonExistentError("L_{A,M^-1}", res.l_cond)
    return res


def verify_weighted_penrose(a, m, n, x, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Operator-norm residuals of the four weighted Penrose identities.

    Order: ``AXA - A``, ``XAX - X``, anti-Hermitian part of ``MAX``,
    anti-Hermitian part of ``NXA``.
    """
    am = as_matrix(a)
    xm = as_matrix(x)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    if xm.shape != (am.shape[1], am.shape[0]):
        raise ValueError(
            f"candidate inverse must be {am.shape[1]} x {am.shape[0]}, got {xm.shape}"
        )
    ax = am @ xm
    xa = xm @ am
    max_ = mw.matrix @ ax
    nxa = nw.matrix @ xa
    return np.array(
        [
            operator_norm(ax @ am - am),
            operator_norm(xa @ xm - xm),
            operator_norm(max_ - max_.conj().T),
            operator_norm(nxa - nxa.conj().T),
        ]
    )


def wmp_inverse_positive(a, m, n, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Square-root route for positive-definite weights only.

    Computes ``N^{-1/2} (M^{1/2} A N^{-1/2})+ M^{1/2}`` through Hermitian
    eigendecompositions.  Independent of the factored formula, so it
    serves as a cross-check oracle on the positive-definite cone.
    """
    from .linalg import hermitian_power

    am = as_matrix(a)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    if not (mw.positive_definite and nw.positive_definite):
        raise WeightError("square-root route requires positive-definite weights")
    m_half = hermitian_power(mw.matrix, 0.5, tol)
    n_negh = hermitian_power(nw.matrix, -0.5, tol)
    return n_negh @ mp_inverse(m_half @ am @ n_negh, tol) @ m_half


@dataclass(frozen=True)
class PositiveReduction:
    """Positive-definite weights that reproduce an indefinite-weight inverse."""

    s: Weight
    t: Weight


def positive_reduction(a, m, n, tol: ToleranceConfig = DEFAULT_TOL) -> PositiveReduction:
    """Replace (M, N) by positive-definite (S, T) with the same inverse.

    With P the projector onto the row space of A and P' onto its range,

        T = P + N (I - P) N,
        S = (P' + M^{-1} (I - P') M^{-1})^{-1},

    both positive definite whenever ``A+_MN`` exists, and
    ``A+_ST = A+_MN``.  T equals R* R and S equals the inverse of L L*,
    so the reduction squares factor condition numbers; weights whose
    squared condition exceeds ``inv_cond_max`` are rejected by the
    ``Weight`` constructor.

    Raises ``NonExistentError`` when ``A+_MN`` does not exist.
    """
    am = as_matrix(a)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    report = wmp_exists(am, mw, nw, tol)
    if not report.exists:
        if report.r_cond > report.l_cond:
            raise NonExistentError("R_{A,N}", report.r_cond)
        raise NonExistentError("L_{A,M^-1}", report.l_cond)
    _, p_dom, p_cod = _projections(svd_factor(am, tol))
    eye_h = np.eye(am.shape[1], dtype=np.complex128)
    eye_k = np.eye(am.shape[0], dtype=np.complex128)
    t_mat = p_dom + nw.matrix @ (eye_h - p_dom) @ nw.matrix
    t_mat = 0.5 * (t_mat + t_mat.conj().T)
    s_base = p_cod + mw.inverse @ (eye_k - p_cod) @ mw.inverse
    s_mat = np.linalg.inv(0.5 * (s_base + s_base.conj().T))
    s_mat = 0.5 * (s_mat + s_mat.conj().T)
    return PositiveReduction(s=Weight(s_mat, tol), t=Weight(t_mat, tol))


@dataclass(frozen=True)
class EquivalentWeightFamily:
    """Sampled domain weights that all induce the same weighted inverse.

    In the orthonormal basis splitting the domain into row space of A
    (columns of ``range_basis``) and null space of A (columns of
    ``null_basis``), every member has the block form

        [[ W11,        C* W22 ],
         [ W22 C,      W22    ]]

    with ``C`` the fixed coupling ``N22^{-1} N21`` of the reference weight
    and ``W22``, ``W11 - C* W22 C`` freely chosen positive definite.
    ``degenerate`` marks zero or full rank of A, where the family is all
    positive-definite weights and the coupling is empty.
    """

    weights: list
    degenerate: bool
    range_basis: np.ndarray | None
    null_basis: np.ndarray | None
    coupling: np.ndarray | None


def equivalent_domain_weights(
    a,
    n,
    samples: int = 3,
    tol: ToleranceConfig = DEFAULT_TOL,
    rng=None,
) -> EquivalentWeightFamily:
    """Sample positive-definite domain weights equivalent to ``n``.

    Equivalent means ``A+_{M,n} = A+_{M,sample}`` for every codomain
    weight M.  Requires the domain factor of ``n`` to be invertible;
    raises ``NonExistentError`` otherwise.
    """
    from .sampling import random_spd, rng_from

    am = as_matrix(a)
    nw = as_weight(n, tol)
    h = am.shape[1]
    if nw.dim != h:
        raise ValueError(f"weight dimension {nw.dim} does not match column count {h}")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    gen = rng_from(rng)

    if am.size == 0:
        rank = 0
    else:
        rank = svd_factor(am, tol).rank
    if rank == 0 or rank == h:
        ws = [Weight(random_spd(gen, h), tol) for _ in range(samples)]
        return EquivalentWeightFamily(
            weights=ws,
            degenerate=True,
            range_basis=None,
            null_basis=None,
            coupling=None,
        )

    _, s, vh = np.linalg.svd(am, full_matrices=True)
    v_range = vh[:rank].conj().T
    v_null = vh[rank:].conj().T
    n21 = v_null.conj().T @ nw.matrix @ v_range
    n22 = v_null.conj().T @ nw.matrix @ v_null
    n22 = 0.5 * (n22 + n22.conj().T)
    if condition_number(n22) > tol.inv_cond_max:
        eye_h = np.eye(h, dtype=np.complex128)
        _, p_dom, _ = _projections(svd_factor(am, tol))
        r = p_dom + (eye_h - p_dom) @ nw.matrix
        raise NonExistentError("R_{A,N}", condition_number(r))
    coupling = solve_linear(n22, n21)

    basis = np.hstack([v_range, v_null])
    ws = []
    for _ in range(samples):
        w22 = random_spd(gen, h - rank)
        gap = random_spd(gen, rank)
        w11 = gap + coupling.conj().T @ w22 @ coupling
        block = np.block(
            [
                [w11, coupling.conj().T @ w22],
                [w22 @ coupling, w22],
            ]
        )
        full = basis @ block @ basis.conj().T
        ws.append(Weight(0.5 * (full + full.conj().T), tol))
    return EquivalentWeightFamily(
        weights=ws,
        degenerate=False,
        range_basis=v_range,
        null_basis=v_null,
        coupling=coupling,
    )


def weight_transfer_domain(a, m, n1, n2, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Factor R with ``A+_{M,n1} = R . A+_{M,n2}``.

    ``R = A+_{M,n1} A + (I - A+_{M,n1} A) n1^{-1} n2``; the transfer
    identity is verified to ``verify_atol`` before returning.
    """
    am = as_matrix(a)
    mw = as_weight(m, tol)
    n1w = as_weight(n1, tol)
    n2w = as_weight(n2, tol)
    x1 = require_wmp_inverse(am, mw, n1w, tol).inverse
    x2 = require_wmp_inverse(am, mw, n2w, tol).inverse
    eye = np.eye(am.shape[1], dtype=np.complex128)
    x1a = x1 @ am
    r = x1a + (eye - x1a) @ n1w.inverse @ n2w.matrix
    resid = operator_norm(x1 - r @ x2)
    scale = 1.0 + operator_norm(x1)
    if resid > tol.verify_atol * scale:
        raise VerificationError("domain weight transfer identity", resid, tol.verify_atol * scale)
    return r


def weight_transfer_codomain(a, m1, m2, n, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Factor L with ``A+_{m1,N} = A+_{m2,N} . L``.

    ``L = A A+_{m1,N} + m2^{-1} m1 (I - A A+_{m1,N})``; verified to
    ``verify_atol`` before returning.
    """
    am = as_matrix(a)
    m1w = as_weight(m1, tol)
    m2w = as_weight(m2, tol)
    nw = as_weight(n, tol)
    x1 = require_wmp_inverse(am, m1w, nw, tol).inverse
    x2 = require_wmp_inverse(am, m2w, nw, tol).inverse
    eye = np.eye(am.shape[0], dtype=np.complex128)
    ax1 = am @ x1
    l = ax1 + m2w.inverse @ m1w.matrix @ (eye - ax1)
    resid = operator_norm(x1 - x2 @ l)
    scale = 1.0 + operator_norm(x1)
    if resid > tol.verify_atol * scale:
        raise VerificationError("codomain weight transfer identity", resid, tol.verify_atol * scale)
    return l


def rho_embed(a, m, n, tol: ToleranceConfig = DEFAULT_TOL):
    """Self-adjoint embedding carrying (A, M, N) to one weighted problem.

    Returns ``(rho, T)`` with ``rho = [[0, A], [A*, 0]]`` Hermitian and
    ``T = diag(M, N^{-1})``.  The weighted inverse of ``rho`` with
    codomain weight T and domain weight ``T^{-1}`` exists exactly when
    ``A+_MN`` does, and its lower-left block equals ``A+_MN``.
    """
    am = as_matrix(a)
    mw = as_weight(m, tol)
    nw = as_weight(n, tol)
    k, h = am.shape
    if mw.dim != k or nw.dim != h:
        raise ValueError(
            f"weight dimensions {mw.dim}, {nw.dim} do not match matrix shape {am.shape}"
        )
    rho = np.zeros((k + h, k + h), dtype=np.complex128)
    rho[:k, k:] = am
    rho[k:, :k] = am.conj().T
    t_mat = np.zeros((k + h, k + h), dtype=np.complex128)
    t_mat[:k, :k] = mw.matrix
    t_mat[k:, k:] = nw.inverse
    return rho, Weight(t_mat, tol)


def matched_projection(q, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector canonically matched to an oblique one.

    For idempotent Q the result is the Hermitian idempotent

        m(Q) = (1/2) (|Q*| + Q*) |Q*|+ (|Q*| + I)^{-1} (|Q*| + Q),

    with ``|Q*|`` the positive square root of ``Q Q*``.  Hermitian inputs
    are returned unchanged by this formula.  Raises
    ``NotIdempotentError`` when ``||Q^2 - Q||`` exceeds ``verify_atol``.
    """
    qm = as_matrix(q)
    if qm.shape[0] != qm.shape[1]:
        raise ValueError("matched projection needs a square matrix")
    resid = operator_norm(qm @ qm - qm)
    if resid > tol.verify_atol:
        raise NotIdempotentError(resid)
    gram = qm @ qm.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    w, v = np.linalg.eigh(gram)
    w = np.clip(w, 0.0, None)
    roots = np.sqrt(w)
    absq = (v * roots) @ v.conj().T
    cutoff = tol.rank_rtol_for(qm.shape) * (roots[-1] if roots.size else 0.0)
    inv_roots = np.where(roots > cutoff, 1.0 / np.where(roots > cutoff, roots, 1.0), 0.0)
    absq_pinv = (v * inv_roots) @ v.conj().T
    eye = np.eye(qm.shape[0], dtype=np.complex128)
    right = solve_linear(absq + eye, absq + qm)
    out = 0.5 * (absq + qm.conj().T) @ absq_pinv @ right
    return 0.5 * (out + out.conj().T)
