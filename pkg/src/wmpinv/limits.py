"""Limit formulas tying regularized pencils to weighted inverses.

The central object is the pencil ``C_t = A* V A + t B* W B`` with positive
definite V and W.  As t drops to zero, ``C_t^+ A* V`` converges to the
weighted inverse ``A+_{V,U}`` for any admissible domain weight U drawn
from the family built by :func:`omega_weight`.  When the row spaces of A
and B are separated the limit collapses to a closed form that is reached
at every t, not just in the limit; the general case reduces to the
separated one by splitting B against the weighted inverse.

Pencil iterates are not computed by inverting ``C_t`` directly: at small
t the O(t) eigenvalue block would be resolved only to ``eps / t``
relative accuracy, drowning the limit in rounding.  Instead the row
space is split into the part where A dominates and its complement, the
t-grading is scaled out exactly, and a uniformly well-conditioned system
is solved, so the iterate error stays at the truncation level O(t) down
the whole schedule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    CriteriaDisagreeError,
    NotPositiveOnRangeError,
    NotPositiveSemidefiniteError,
    NotSeparatedError,
    RankFlipWarning,
    VerificationError,
    WeightError,
)
from .linalg import (
    DEFAULT_TOL,
    LimitTrace,
    ToleranceConfig,
    as_matrix,
    condition_number,
    is_hermitian,
    limit_atol_for,
    mp_inverse,
    numerical_rank,
    operator_norm,
    projector_rowspace,
    solve_linear,
    svd_factor,
)
from .weights import Weight, as_weight

__all__ = [
    "DEFAULT_T_SCHEDULE",
    "DEFAULT_LAMBDA_SCHEDULE",
    "SEPARATION_MARGIN",
    "OmegaWeight",
    "SeparatedPairReport",
    "BDecomposition",
    "GeneralLimitResult",
    "omega_weight",
    "limit_t_to_zero",
    "limit_lambda_to_inf",
    "separated_pair_check",
    "closed_form_separated",
    "decompose_b",
    "general_limit_via_decomposition",
]

DEFAULT_T_SCHEDULE = tuple(10.0 ** (-k) for k in range(1, 11))
DEFAULT_LAMBDA_SCHEDULE = tuple(10.0 ** k for k in range(0, 9))

# Verdict margin for ||P Q|| against 1; inside the band between this margin
# and the invertibility threshold of 2I - P - Q no verdict is returned.
SEPARATION_MARGIN = 1e-6


@dataclass(frozen=True)
class OmegaWeight:
    """Admissible domain weight ``U = A* X A + B* W B + Y0`` with context.

    ``y_effective`` is the compression of Y to the intersection of the two
    null spaces (the projector itself under the default Y = I), and
    ``restricted_min_eig`` is the smallest eigenvalue of
    ``A* X A + B* W B`` compressed to the joint row space, which the
    construction requires to be positive.
    """

    u: Weight
    x: np.ndarray
    y_effective: np.ndarray
    null_projector: np.ndarray
    restricted_min_eig: float


def _joint_bases(am, bm, tol):
    """Orthonormal bases of the joint row space and joint null space."""
    stacked = np.vstack([am, bm])
    h = stacked.shape[1]
    if stacked.size == 0:
        return np.zeros((h, 0), dtype=np.complex128), np.eye(h, dtype=np.complex128)
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    cutoff = tol.rank_rtol_for(stacked.shape) * (s[0] if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    return vh[:r].conj().T, vh[r:].conj().T


def omega_weight(a, b, w, x=None, y=None, tol: ToleranceConfig = DEFAULT_TOL) -> OmegaWeight:
    """Build an admissible domain weight for the t -> 0 limit.

    Parameters
    ----------
    a, b : array_like
        Matrices with a common column count h.
    w : Weight or array_like
        Self-adjoint invertible weight on the rows of ``b``.
    x : array_like, optional
        Self-adjoint matrix on the rows of ``a``; identity by default.
        ``A* X A + B* W B`` must be positive definite on the joint row
        space of A and B.
    y : array_like, optional
        Self-adjoint matrix on the columns; identity by default.  Only its
        compression to the joint null space of A and B enters, and that
        compression must be positive definite.

    Returns
    -------
    OmegaWeight
        Carrying the assembled positive-definite weight and diagnostics.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    if am.shape[1] != bm.shape[1]:
        raise ValueError(f"column counts differ: {am.shape[1]} vs {bm.shape[1]}")
    ww = as_weight(w, tol)
    if ww.dim != bm.shape[0]:
        raise ValueError(f"weight dimension {ww.dim} does not match rows of b {bm.shape[0]}")
    h = am.shape[1]
    k = am.shape[0]
    if x is None:
        xm = np.eye(k, dtype=np.complex128)
    else:
        xm = as_matrix(x)
        if xm.shape != (k, k):
            raise ValueError(f"x must be {k} x {k}, got {xm.shape}")
        if not is_hermitian(xm, tol):
            raise ValueError("x must be self-adjoint")
        xm = 0.5 * (xm + xm.conj().T)

    core = am.conj().T @ xm @ am + bm.conj().T @ ww.matrix @ bm
    core = 0.5 * (core + core.conj().T)

    v_row, v_null = _joint_bases(am, bm, tol)
    restricted_min = np.inf
    if v_row.shape[1] > 0:
        comp = v_row.conj().T @ core @ v_row
        comp = 0.5 * (comp + comp.conj().T)
        eigs = np.linalg.eigvalsh(comp)
        restricted_min = float(eigs[0])
        scale = float(np.max(np.abs(eigs))) if eigs.size else 0.0
        if scale == 0.0 or eigs[0] <= scale / tol.inv_cond_max:
            raise NotPositiveOnRangeError(
                "A*XA + B*WB restricted to the joint row space", restricted_min
            )

    p_null = v_null @ v_null.conj().T
    if y is None:
        y_eff = p_null
    else:
        ym = as_matrix(y)
        if ym.shape != (h, h):
            raise ValueError(f"y must be {h} x {h}, got {ym.shape}")
        if not is_hermitian(ym, tol):
            raise ValueError("y must be self-adjoint")
        if v_null.shape[1] > 0:
            comp = v_null.conj().T @ ym @ v_null
            comp = 0.5 * (comp + comp.conj().T)
            eigs = np.linalg.eigvalsh(comp)
            scale = float(np.max(np.abs(eigs))) if eigs.size else 0.0
            if scale == 0.0 or eigs[0] <= scale / tol.inv_cond_max:
                raise NotPositiveOnRangeError(
                    "Y restricted to the joint null space", float(eigs[0])
                )
            y_eff = v_null @ comp @ v_null.conj().T
        else:
            y_eff = np.zeros((h, h), dtype=np.complex128)

    u_mat = core + y_eff
    u_mat = 0.5 * (u_mat + u_mat.conj().T)
    u = Weight(u_mat, tol)
    if not u.positive_definite:
        eigs = np.linalg.eigvalsh(u.matrix)
        raise NotPositiveOnRangeError("assembled domain weight", float(eigs[0]))
    return OmegaWeight(
        u=u,
        x=xm,
        y_effective=y_eff,
        null_projector=p_null,
        restricted_min_eig=restricted_min,
    )


class _GradedPencilSolver:
    """Evaluates ``(A* V A + t B* W B)^+ A* V`` stably for tiny t.

    In an orthonormal basis of the joint row space, split off the
    subspace where A acts (columns of q1) from its complement (q2).  The
    q2 block row of the normal equations carries an overall factor t
    that divides out exactly, leaving

        [[H11 + t K11, t K12], [K21, K22]],

    whose condition number is bounded uniformly as t -> 0, so neither
    the solve nor the recovery of the iterate loses accuracy to the
    t-grading.
    """

    def __init__(self, am, bm, vmat, wmat, tol: ToleranceConfig):
        stacked = np.vstack([am, bm])
        if stacked.size == 0:
            r0 = 0
            v0 = np.zeros((stacked.shape[1], 0), dtype=np.complex128)
        else:
            _, s, vh = np.linalg.svd(stacked, full_matrices=True)
            cutoff = tol.rank_rtol_for(stacked.shape) * (s[0] if s.size else 0.0)
            r0 = int(np.count_nonzero(s > cutoff))
            v0 = vh[:r0].conj().T
        at = am @ v0
        bt = bm @ v0
        if at.size == 0:
            ra = 0
            q1 = np.zeros((r0, 0), dtype=np.complex128)
            q2 = np.eye(r0, dtype=np.complex128)
        else:
            _, sa, vha = np.linalg.svd(at, full_matrices=True)
            cutoff_a = tol.rank_rtol_for(at.shape) * (sa[0] if sa.size else 0.0)
            ra = int(np.count_nonzero(sa > cutoff_a))
            q1 = vha[:ra].conj().T
            q2 = vha[ra:].conj().T
        a1 = at @ q1
        b1 = bt @ q1
        b2 = bt @ q2
        self.rows = am.shape[0]
        self.cols = am.shape[1]
        self.rank = r0
        self.a_rank = ra
        self.v0 = v0
        self.q1 = q1
        self.q2 = q2
        self.h11 = a1.conj().T @ vmat @ a1
        self.k11 = b1.conj().T @ wmat @ b1
        self.k12 = b1.conj().T @ wmat @ b2
        self.k22 = b2.conj().T @ wmat @ b2
        # q2 spans the null space of A compressed to the row space, so the
        # second block of the scaled right-hand side vanishes identically
        self.rhs1 = a1.conj().T @ vmat

    def system(self, t: float) -> np.ndarray:
        return np.block(
            [
                [self.h11 + t * self.k11, t * self.k12],
                [self.k12.conj().T, self.k22],
            ]
        )

    def iterate(self, t: float) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((self.cols, self.rows), dtype=np.complex128)
        rhs = np.vstack(
            [self.rhs1, np.zeros((self.rank - self.a_rank, self.rows), dtype=np.complex128)]
        )
        y = solve_linear(self.system(t), rhs)
        out = self.q1 @ y[: self.a_rank] + self.q2 @ y[self.a_rank :]
        return self.v0 @ out

    def system_cond(self, t: float) -> float:
        if self.rank == 0:
            return 1.0
        return condition_number(self.system(t))


class _GradedPairSolver:
    """Evaluates ``(lambda A + B)^+ B`` stably for large lambda.

    Same two-scale idea on the split of the joint range into the range
    of A and its complement; A and B must be Hermitian positive
    semidefinite.  Substituting ``y1 = gamma / lambda`` for the block
    that lives on the range of A rescales the system to

        [[H11 + B11 / lambda, B12], [B21 / lambda, B22]],

    which stays uniformly conditioned as lambda grows.
    """

    def __init__(self, a_sym, b_sym, tol: ToleranceConfig):
        n = a_sym.shape[0]
        total = a_sym + b_sym
        if total.size == 0:
            r0 = 0
            v0 = np.zeros((n, 0), dtype=np.complex128)
        else:
            _, s, vh = np.linalg.svd(total, full_matrices=True)
            cutoff = tol.rank_rtol_for(total.shape) * (s[0] if s.size else 0.0)
            r0 = int(np.count_nonzero(s > cutoff))
            v0 = vh[:r0].conj().T
        at = v0.conj().T @ a_sym @ v0
        at = 0.5 * (at + at.conj().T)
        bt = v0.conj().T @ b_sym @ v0
        bt = 0.5 * (bt + bt.conj().T)
        if at.size == 0:
            ra = 0
            q1 = np.zeros((r0, 0), dtype=np.complex128)
            q2 = np.eye(r0, dtype=np.complex128)
        else:
            _, sa, vha = np.linalg.svd(at, full_matrices=True)
            cutoff_a = tol.rank_rtol_for(at.shape) * (sa[0] if sa.size else 0.0)
            ra = int(np.count_nonzero(sa > cutoff_a))
            q1 = vha[:ra].conj().T
            q2 = vha[ra:].conj().T
        self.n = n
        self.rank = r0
        self.a_rank = ra
        self.v0 = v0
        self.q1 = q1
        self.q2 = q2
        self.h11 = q1.conj().T @ at @ q1
        self.b11 = q1.conj().T @ bt @ q1
        self.b12 = q1.conj().T @ bt @ q2
        self.b22 = q2.conj().T @ bt @ q2
        vb = v0.conj().T @ b_sym
        self.rhs1 = q1.conj().T @ vb
        self.rhs2 = q2.conj().T @ vb

    def system(self, lam: float) -> np.ndarray:
        return np.block(
            [
                [self.h11 + self.b11 / lam, self.b12],
                [self.b12.conj().T / lam, self.b22],
            ]
        )

    def iterate(self, lam: float) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((self.n, self.n), dtype=np.complex128)
        rhs = np.vstack([self.rhs1, self.rhs2])
        y = solve_linear(self.system(lam), rhs)
        # gamma / lambda is tiny by design; the division shrinks its
        # absolute error along with it
        out = self.q1 @ (y[: self.a_rank] / lam) + self.q2 @ y[self.a_rank :]
        return self.v0 @ out

    def system_cond(self, lam: float) -> float:
        if self.rank == 0:
            return 1.0
        return condition_number(self.system(lam))


def _trace_over(solver, schedule, target, tol, atol=None) -> LimitTrace:
    iterates = []
    errors = np.empty(len(schedule))
    flips = []
    for i, t in enumerate(schedule):
        it = solver.iterate(float(t))
        iterates.append(it)
        errors[i] = operator_norm(it - target)
        if solver.system_cond(float(t)) > tol.inv_cond_max:
            flips.append(i)
    if flips:
        warnings.warn(
            f"the scaled pencil system degenerated at schedule indices {flips}; "
            f"iterates there are unreliable",
            RankFlipWarning,
            stacklevel=3,
        )
    if atol is None:
        atol = limit_atol_for(target)
    return LimitTrace(
        params=np.asarray(schedule, dtype=np.float64),
        iterates=iterates,
        errors=errors,
        target=target,
        limit_atol=atol,
        converged=bool(errors[-1] <= atol),
        rank_flips=tuple(flips),
    )


def limit_t_to_zero(
    a,
    b,
    v,
    w,
    u: OmegaWeight | Weight | None = None,
    schedule=None,
    tol: ToleranceConfig = DEFAULT_TOL,
    atol: float | None = None,
) -> LimitTrace:
    """Trace ``(A* V A + t B* W B)^+ A* V`` down a decreasing schedule.

    Converges to the weighted inverse ``A+_{V,U}`` for every admissible
    U; the default U is built by :func:`omega_weight` with X = V.  V and
    W must be positive definite.  A degenerate scaled system at some
    schedule point (the finite analogue of the pencil dropping rank) is
    reported through ``RankFlipWarning`` and recorded on the trace.
    ``atol`` overrides the convergence threshold recorded on the trace;
    the default is ``1e-8 * (1 + ||target||)``.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    if am.shape[1] != bm.shape[1]:
        raise ValueError(f"column counts differ: {am.shape[1]} vs {bm.shape[1]}")
    vw = as_weight(v, tol)
    ww = as_weight(w, tol)
    if vw.dim != am.shape[0]:
        raise ValueError(f"v must weigh the rows of a (dimension {am.shape[0]})")
    if ww.dim != bm.shape[0]:
        raise ValueError(f"w must weigh the rows of b (dimension {bm.shape[0]})")
    if not vw.positive_definite:
        raise WeightError("v must be positive definite for the t -> 0 limit")
    if not ww.positive_definite:
        raise WeightError("w must be positive definite for the t -> 0 limit")

    if u is None:
        u = omega_weight(am, bm, ww, x=vw.matrix, tol=tol)
    u_weight = u.u if isinstance(u, OmegaWeight) else as_weight(u, tol)

    if schedule is None:
        schedule = DEFAULT_T_SCHEDULE
    s = np.asarray(schedule, dtype=np.float64)
    if s.ndim != 1 or s.size == 0 or not np.all(s > 0) or not np.all(np.diff(s) < 0):
        raise ValueError("schedule must be positive and strictly decreasing")

    from .core import require_wmp_inverse

    target = require_wmp_inverse(am, vw, u_weight, tol).inverse
    solver = _GradedPencilSolver(am, bm, vw.matrix, ww.matrix, tol)
    return _trace_over(solver, s, target, tol, atol)


def limit_lambda_to_inf(
    a,
    b,
    schedule=None,
    tol: ToleranceConfig = DEFAULT_TOL,
    atol: float | None = None,
) -> LimitTrace:
    """Trace ``(lambda A + B)^+ B`` up an increasing schedule.

    For positive semidefinite A and B the iterates converge to
    ``((I - P) B (I - P))^+ B`` with P the orthogonal projector onto the
    range of A.  Inputs failing positive semidefiniteness within
    ``verify_atol`` are rejected.  The error decays like 1 / lambda, so
    the default convergence threshold is the coarser
    ``1e-6 * (1 + ||target||)``, matched to the default schedule's top
    value; pass ``atol`` to tighten it alongside a longer schedule.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    if am.shape[0] != am.shape[1] or am.shape != bm.shape:
        raise ValueError("a and b must be square with equal shapes")
    for name, mat in (("a", am), ("b", bm)):
        asym = operator_norm(mat - mat.conj().T)
        if asym > tol.verify_atol:
            raise NotPositiveSemidefiniteError(f"{name} (not self-adjoint)", -asym)
    a_sym = 0.5 * (am + am.conj().T)
    b_sym = 0.5 * (bm + bm.conj().T)
    for name, mat in (("a", a_sym), ("b", b_sym)):
        if mat.size:
            w_min = float(np.linalg.eigvalsh(mat)[0])
            if w_min < -tol.verify_atol:
                raise NotPositiveSemidefiniteError(name, w_min)

    if schedule is None:
        schedule = DEFAULT_LAMBDA_SCHEDULE
    s = np.asarray(schedule, dtype=np.float64)
    if s.ndim != 1 or s.size == 0 or not np.all(s > 0) or not np.all(np.diff(s) > 0):
        raise ValueError("schedule must be positive and strictly increasing")

    n = a_sym.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    f = svd_factor(a_sym, tol)
    ur = f.u[:, : f.rank]
    p = ur @ ur.conj().T
    mid = (eye - p) @ b_sym @ (eye - p)
    mid = 0.5 * (mid + mid.conj().T)
    # when the range of A covers the range of B the compression is an
    # exact zero and anything left in mid is rounding; anchor the rank
    # cutoff to the scale of B so that noise is not inverted
    floor = tol.rank_rtol_for(mid.shape) * operator_norm(b_sym)
    target = mp_inverse(mid, tol, sigma_floor=floor) @ b_sym
    solver = _GradedPairSolver(a_sym, b_sym, tol)
    if atol is None:
        atol = 1e-6 * (1.0 + operator_norm(target))
    return _trace_over(solver, s, target, tol, atol)


@dataclass(frozen=True)
class SeparatedPairReport:
    """Separation verdict for the row spaces of a pair of matrices.

    Two criteria are computed: ``||P Q|| < 1`` with a margin of
    ``SEPARATION_MARGIN``, and numerical invertibility of ``2I - P - Q``.
    They agree outside a narrow band; inside it
    ``CriteriaDisagreeError`` is raised instead of guessing.
    """

    is_separated: bool
    pq_norm: float
    two_minus_sum_cond: float
    intersection_dim: int
    sum_rank: int


def separated_pair_check(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> SeparatedPairReport:
    """Decide whether the row spaces of ``a`` and ``b`` are separated."""
    am = as_matrix(a)
    bm = as_matrix(b)
    if am.shape[1] != bm.shape[1]:
        raise ValueError(f"column counts differ: {am.shape[1]} vs {bm.shape[1]}")
    p = projector_rowspace(am, tol)
    q = projector_rowspace(bm, tol)
    pq_norm = operator_norm(p @ q)
    eye = np.eye(am.shape[1], dtype=np.complex128)
    two = 2.0 * eye - p - q
    # anchor the smallest singular value to the scale of 2I rather than
    # to sigma_max(two): when the row spaces coincide, two is an exact
    # zero plus rounding, and the relative condition of noise looks
    # deceptively small
    s2 = np.linalg.svd(two, compute_uv=False) if two.size else np.array([])
    smin = float(s2[-1]) if s2.size else 0.0
    if smin <= tol.rank_rtol_for(two.shape) * 2.0:
        cond = float("inf")
    else:
        cond = float(s2[0] / smin)
    by_norm = pq_norm <= 1.0 - SEPARATION_MARGIN
    by_inverse = cond <= tol.inv_cond_max
    if by_norm != by_inverse:
        raise CriteriaDisagreeError(pq_norm, cond)
    ra = numerical_rank(am, tol)
    rb = numerical_rank(bm, tol)
    rs = numerical_rank(np.vstack([am, bm]), tol)
    return SeparatedPairReport(
        is_separated=by_norm,
        pq_norm=pq_norm,
        two_minus_sum_cond=cond,
        intersection_dim=ra + rb - rs,
        sum_rank=rs,
    )


def closed_form_separated(
    a,
    b,
    v,
    w,
    tol: ToleranceConfig = DEFAULT_TOL,
    rng=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed form of the pencil inverse action for separated row spaces.

    Returns ``(Pi, D)`` with

        Pi = (2I - P - Q)^{-1} (A* V A)^+ A* V,
        D  = (A* V A)^+ A* V - (I - P) Pi,

    and verifies that ``(A* V A + B* W B)^+ A* V`` equals D both for the
    given W and for a fresh random positive-definite replacement, because
    the closed form depends on B only through its row space.  Raises
    ``NotSeparatedError`` when the row spaces are not separated.
    """
    from .sampling import random_spd, rng_from

    am = as_matrix(a)
    bm = as_matrix(b)
    vw = as_weight(v, tol)
    ww = as_weight(w, tol)
    report = separated_pair_check(am, bm, tol)
    if not report.is_separated:
        raise NotSeparatedError(report.pq_norm)

    p = projector_rowspace(am, tol)
    q = projector_rowspace(bm, tol)
    eye = np.eye(am.shape[1], dtype=np.complex128)
    core_a = am.conj().T @ vw.matrix @ am
    core_a = 0.5 * (core_a + core_a.conj().T)
    base = mp_inverse(core_a, tol) @ am.conj().T @ vw.matrix
    pi = solve_linear(2.0 * eye - p - q, base)
    d = base - (eye - p) @ pi

    scale = 1.0 + operator_norm(d)
    gen = rng_from(rng)
    for label, wmat in (
        ("given W", ww.matrix),
        ("replacement W", random_spd(gen, bm.shape[0])),
    ):
        lhs = _GradedPencilSolver(am, bm, vw.matrix, wmat, tol).iterate(1.0)
        resid = operator_norm(lhs - d)
        if resid > tol.verify_atol * scale:
            raise VerificationError(
                f"separated closed form against the pencil ({label})",
                resid,
                tol.verify_atol * scale,
            )
    return pi, d


@dataclass(frozen=True)
class BDecomposition:
    """Split of B against the weighted inverse ``Z = A+_{V,U}``.

    ``b1 = B Z A`` has row space inside that of A, ``b2 = B - b1`` has row
    space separated from it, and ``b2* W b1 = 0``.
    """

    b1: np.ndarray
    b2: np.ndarray
    z: np.ndarray


def decompose_b(a, b, v, w, tol: ToleranceConfig = DEFAULT_TOL) -> BDecomposition:
    """Split B so the t -> 0 pencil limit reduces to the separated case.

    Uses the admissible weight ``U = A* V A + B* W B + P0`` (P0 the
    projector onto the joint null space) and the weighted inverse
    ``Z = A+_{V,U}``.  Singular values of ``b2`` below
    ``verify_atol * (1 + ||B||)`` are rounding debris inherited from Z
    and are truncated away, so the row space of ``b2`` is decided on its
    genuine directions; ``b1 = B - b2`` keeps the split exact.  The three
    structural properties are verified before returning:
    W-orthogonality of the parts, containment of the rows of ``b1`` in
    the row space of A, and separation of ``b2`` from A.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    vw = as_weight(v, tol)
    ww = as_weight(w, tol)
    if not vw.positive_definite or not ww.positive_definite:
        raise WeightError("decompose_b requires positive definite v and w")

    from .core import require_wmp_inverse

    u = omega_weight(am, bm, ww, x=vw.matrix, tol=tol)
    z = require_wmp_inverse(am, vw, u.u, tol).inverse
    b2_raw = bm - bm @ z @ am
    if b2_raw.size:
        bu, bs, bvh = np.linalg.svd(b2_raw, full_matrices=False)
        keep = bs > tol.verify_atol * (1.0 + operator_norm(bm))
        b2 = (bu[:, keep] * bs[keep]) @ bvh[keep]
    else:
        b2 = b2_raw
    b1 = bm - b2

    w_cross = operator_norm(b2.conj().T @ ww.matrix @ b1)
    scale = (1.0 + operator_norm(bm)) ** 2 * (1.0 + operator_norm(ww.matrix))
    if w_cross > tol.verify_atol * scale:
        raise VerificationError("W-orthogonality of the B split", w_cross, tol.verify_atol * scale)

    p = projector_rowspace(am, tol)
    eye = np.eye(am.shape[1], dtype=np.complex128)
    containment = operator_norm((eye - p) @ b1.conj().T)
    if containment > tol.verify_atol * (1.0 + operator_norm(bm)):
        raise VerificationError(
            "row-space containment of b1", containment, tol.verify_atol * (1.0 + operator_norm(bm))
        )

    report = separated_pair_check(am, b2, tol)
    if not report.is_separated:
        raise NotSeparatedError(report.pq_norm)
    return BDecomposition(b1=b1, b2=b2, z=z)


@dataclass(frozen=True)
class GeneralLimitResult:
    """Pencil limit evaluated through the separated reduction."""

    decomposition: BDecomposition
    pi: np.ndarray
    closed_form: np.ndarray
    trace: LimitTrace


def general_limit_via_decomposition(
    a,
    b,
    v,
    w,
    w_prime=None,
    schedule=None,
    tol: ToleranceConfig = DEFAULT_TOL,
    rng=None,
) -> GeneralLimitResult:
    """Evaluate the t -> 0 pencil limit by reducing to the separated case.

    Splits B into ``b1 + b2`` with :func:`decompose_b`, forms

        Pi' = (2I - P - Q2)^{-1} (A* V A)^+ A* V,
        D   = (A* V A)^+ A* V - (I - P) Pi',

    where Q2 projects onto the row space of ``b2``, verifies that
    ``(A* V A + b2* W' b2)^+ A* V`` equals D for ``w_prime`` (a random
    positive-definite draw when omitted) and for one further independent
    draw, then traces the original pencil ``(A* V A + t B* W B)^+ A* V``
    against the target D.
    """
    from .sampling import random_spd, rng_from

    am = as_matrix(a)
    bm = as_matrix(b)
    vw = as_weight(v, tol)
    ww = as_weight(w, tol)
    dec = decompose_b(am, bm, vw, ww, tol)

    p = projector_rowspace(am, tol)
    q2 = projector_rowspace(dec.b2, tol)
    eye = np.eye(am.shape[1], dtype=np.complex128)
    core_a = am.conj().T @ vw.matrix @ am
    core_a = 0.5 * (core_a + core_a.conj().T)
    base = mp_inverse(core_a, tol) @ am.conj().T @ vw.matrix
    pi = solve_linear(2.0 * eye - p - q2, base)
    d = base - (eye - p) @ pi

    gen = rng_from(rng)
    if w_prime is None:
        w_prime = Weight(random_spd(gen, bm.shape[0]), tol)
    else:
        w_prime = as_weight(w_prime, tol)
        if not w_prime.positive_definite:
            raise WeightError("w_prime must be positive definite")
    scale = 1.0 + operator_norm(d)
    for label, wmat in (
        ("w_prime", w_prime.matrix),
        ("independent draw", random_spd(gen, bm.shape[0])),
    ):
        lhs = _GradedPencilSolver(am, dec.b2, vw.matrix, wmat, tol).iterate(1.0)
        resid = operator_norm(lhs - d)
        if resid > tol.verify_atol * scale:
            raise VerificationError(
                f"separated reduction of the pencil limit ({label})",
                resid,
                tol.verify_atol * scale,
            )

    if schedule is None:
        schedule = DEFAULT_T_SCHEDULE
    s = np.asarray(schedule, dtype=np.float64)
    if s.ndim != 1 or s.size == 0 or not np.all(s > 0) or not np.all(np.diff(s) < 0):
        raise ValueError("schedule must be positive and strictly decreasing")

    solver = _GradedPencilSolver(am, bm, vw.matrix, ww.matrix, tol)
    trace = _trace_over(solver, s, d, tol)
    return GeneralLimitResult(decomposition=dec, pi=pi, closed_form=d, trace=trace)
