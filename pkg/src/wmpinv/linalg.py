"""Dense kernels: truncated-SVD pseudoinverse, projectors, rank decisions.

Everything in the package funnels through these helpers so that rank
cutoffs and invertibility thresholds are decided in exactly one place.
All computation is done in complex128.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import WmpError

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "SvdFactorization",
    "LimitTrace",
    "as_matrix",
    "svd_factor",
    "numerical_rank",
    "mp_inverse",
    "projector_range",
    "projector_rowspace",
    "projector_nullspace_pair",
    "operator_norm",
    "condition_number",
    "is_invertible",
    "is_hermitian",
    "is_positive_definite",
    "hermitian_power",
    "solve_linear",
    "regularized_pinv_limit",
]

_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical policy shared by every operation.

    Parameters
    ----------
    rank_rtol : float or None
        Relative singular-value cutoff for rank decisions.  ``None`` means
        the per-matrix default ``max(rows, cols) * eps``; the cutoff is
        always relative to the largest singular value.
    inv_cond_max : float
        A square matrix counts as numerically invertible when its
        2-norm condition number does not exceed this bound.
    verify_atol : float
        Absolute tolerance for identity verification residuals.
    verify_rtol : float
        Relative tolerance for comparisons against reference values.
    """

    rank_rtol: float | None = None
    inv_cond_max: float = 1e12
    verify_atol: float = 1e-9
    verify_rtol: float = 1e-9

    def __post_init__(self):
        if self.rank_rtol is not None and not (0.0 < self.rank_rtol < 1.0):
            raise ValueError("rank_rtol must lie strictly between 0 and 1")
        if self.inv_cond_max <= 1.0:
            raise ValueError("inv_cond_max must exceed 1")
        if self.verify_atol <= 0.0 or self.verify_rtol <= 0.0:
            raise ValueError("verification tolerances must be positive")

    def rank_rtol_for(self, shape: tuple[int, int]) -> float:
        """Effective relative rank cutoff for a matrix of the given shape."""
        if self.rank_rtol is not None:
            return self.rank_rtol
        return max(shape) * _EPS


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a) -> np.ndarray:
    """Coerce input to a finite 2-D complex128 array."""
    m = np.asarray(a)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    m = np.ascontiguousarray(m, dtype=np.complex128)
    if m.size and not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


@dataclass(frozen=True)
class SvdFactorization:
    """Economy SVD together with the numerical rank decision.

    ``u`` is rows x k, ``sigma`` is the nonincreasing singular value vector
    of length k = min(rows, cols), ``vh`` is k x cols.  ``rank`` counts the
    singular values above the relative cutoff actually used, stored in
    ``cutoff`` (an absolute threshold).
    """

    u: np.ndarray
    sigma: np.ndarray
    vh: np.ndarray
    rank: int
    cutoff: float

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u.shape[0], self.vh.shape[1])


def svd_factor(a, tol: ToleranceConfig = DEFAULT_TOL, *, sigma_floor: float = 0.0) -> SvdFactorization:
    """Economy SVD of ``a`` with the rank cutoff applied.

    ``sigma_floor`` sets an absolute lower bound on retained singular
    values.  The relative cutoff alone misjudges matrices that are exact
    zeros contaminated by rounding (their largest singular value is
    itself noise); callers that know the scale of that noise pass it
    here.
    """
    m = as_matrix(a)
    if m.size == 0:
        k = min(m.shape)
        return SvdFactorization(
            u=np.zeros((m.shape[0], k), dtype=np.complex128),
            sigma=np.zeros(k),
            vh=np.zeros((k, m.shape[1]), dtype=np.complex128),
            rank=0,
            cutoff=0.0,
        )
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    cutoff = max(tol.rank_rtol_for(m.shape) * (s[0] if s.size else 0.0), sigma_floor)
    rank = int(np.count_nonzero(s > cutoff))
    return SvdFactorization(u=u, sigma=s, vh=vh, rank=rank, cutoff=cutoff)


def numerical_rank(a, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Number of singular values above the relative cutoff."""
    return svd_factor(a, tol).rank


def mp_inverse(
    a,
    tol: ToleranceConfig = DEFAULT_TOL,
    *,
    rank: int | None = None,
    sigma_floor: float = 0.0,
) -> np.ndarray:
    """Moore-Penrose inverse via truncated SVD.

    Parameters
    ----------
    a : array_like
        Matrix to invert, any shape including rank deficient.
    tol : ToleranceConfig
        Supplies the relative singular-value cutoff.
    rank : int, optional
        Pin the truncation rank instead of deciding it from the cutoff.
        Used by limit evaluations where the mathematical rank is known.
    sigma_floor : float, optional
        Absolute cutoff floor, forwarded to :func:`svd_factor`.  Use it
        when ``a`` was produced by a cancellation-prone computation whose
        rounding noise would otherwise be inverted.

    Returns
    -------
    numpy.ndarray
        The unique matrix satisfying the four Penrose identities, computed
        by inverting the retained singular values.
    """
    f = svd_factor(a, tol, sigma_floor=sigma_floor)
    r = f.rank if rank is None else int(rank)
    if r < 0 or r > f.sigma.size:
        raise ValueError(f"pinned rank {r} is out of range for shape {f.shape}")
    if r == 0:
        return np.zeros((f.shape[1], f.shape[0]), dtype=np.complex128)
    inv_s = np.zeros_like(f.sigma)
    inv_s[:r] = 1.0 / f.sigma[:r]
    return (f.vh.conj().T * inv_s) @ f.u.conj().T


def projector_range(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the range of ``a`` (equals ``A A^+``)."""
    f = svd_factor(a, tol)
    ur = f.u[:, : f.rank]
    return ur @ ur.conj().T


def projector_rowspace(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the range of ``a*`` (equals ``A^+ A``)."""
    f = svd_factor(a, tol)
    vr = f.vh[: f.rank].conj().T
    return vr @ vr.conj().T


def projector_nullspace_pair(a, b, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the intersection of the two null spaces.

    Both matrices must have the same column count; the projector is computed
    from the full SVD of the stacked matrix, so the two null spaces are never
    intersected by chained projections.
    """
    am = as_matrix(a)
    bm = as_matrix(b)
    if am.shape[1] != bm.shape[1]:
        raise ValueError(
            f"column counts differ: {am.shape[1]} vs {bm.shape[1]}"
        )
    stacked = np.vstack([am, bm])
    n = stacked.shape[1]
    if stacked.size == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    cutoff = tol.rank_rtol_for(stacked.shape) * (s[0] if s.size else 0.0)
    r = int(np.count_nonzero(s > cutoff))
    vn = vh[r:].conj().T
    return vn @ vn.conj().T


def operator_norm(a) -> float:
    """Largest singular value; zero for empty matrices."""
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def condition_number(a) -> float:
    """2-norm condition number, ``inf`` when the smallest singular value is 0."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("condition number is defined here for square matrices")
    if m.size == 0:
        return 1.0
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def is_invertible(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Square and condition number within ``inv_cond_max``."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("invertibility is defined for square matrices")
    return condition_number(m) <= tol.inv_cond_max


def is_hermitian(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Self-adjoint within ``verify_atol`` in operator norm."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        return False
    return operator_norm(m - m.conj().T) <= tol.verify_atol


def is_positive_definite(a, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Hermitian with all eigenvalues above the invertibility floor."""
    m = as_matrix(a)
    if not is_hermitian(m, tol):
        return False
    if m.size == 0:
        return True
    w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    scale = float(np.max(np.abs(w)))
    if scale == 0.0:
        return False
    return bool(w[0] > scale / tol.inv_cond_max)


def hermitian_power(a, power: float, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Real power of a Hermitian matrix through its eigendecomposition.

    Negative or fractional powers require positive eigenvalues; eigenvalues
    in the rounding band below zero are rejected rather than clamped.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("hermitian_power needs a square matrix")
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    if (power != int(power) or power < 0) and w.size and w[0] <= 0.0:
        raise WmpError(
            f"hermitian_power({power}) needs positive eigenvalues, found {w[0]:.6e}"
        )
    return (v * np.power(w, power)) @ v.conj().T


def solve_linear(a, b) -> np.ndarray:
    """Least-squares solve of ``a x = b`` on the SVD path.

    Callers are responsible for checking that ``a`` is well conditioned;
    this helper never forms an explicit inverse.
    """
    return np.linalg.lstsq(as_matrix(a), as_matrix(b), rcond=None)[0]


@dataclass
class LimitTrace:
    """Evaluation of a matrix limit along a monotone parameter schedule.

    ``params`` holds the schedule (decreasing for t -> 0 limits, increasing
    for growing-parameter limits), ``iterates[i]`` the matrix at
    ``params[i]``, and ``errors[i]`` its operator-norm distance to
    ``target``.  ``converged`` is true exactly when the final error is at
    most ``limit_atol``.  ``rank_flips`` lists schedule indices where the
    natural numerical rank of the shifted matrix deviated from the pinned
    rank used for its pseudoinverse.
    """

    params: np.ndarray
    iterates: list[np.ndarray]
    errors: np.ndarray
    target: np.ndarray
    limit_atol: float
    converged: bool
    rank_flips: tuple[int, ...] = field(default_factory=tuple)

    def rows(self):
        """Iterate over (param, iterate, error) triples in schedule order."""
        for t, it, e in zip(self.params, self.iterates, self.errors):
            yield float(t), it, float(e)


def _check_schedule(schedule, *, decreasing: bool) -> np.ndarray:
    s = np.asarray(schedule, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("schedule must be a nonempty 1-D sequence")
    if not np.all(s > 0.0):
        raise ValueError("schedule values must be positive")
    diffs = np.diff(s)
    if decreasing and not np.all(diffs < 0.0):
        raise ValueError("schedule must be strictly decreasing")
    if not decreasing and not np.all(diffs > 0.0):
        raise ValueError("schedule must be strictly increasing")
    return s


def limit_atol_for(target: np.ndarray) -> float:
    """Convergence tolerance used by every limit trace."""
    return 1e-8 * (1.0 + operator_norm(target))


def regularized_pinv_limit(t_mat, schedule, tol: ToleranceConfig = DEFAULT_TOL) -> LimitTrace:
    """Trace of ``(T* T + t I)^{-1} T*`` along a decreasing schedule.

    The iterates converge to the Moore-Penrose inverse of ``T`` as t drops
    to zero; the returned trace carries the per-step operator-norm error
    against ``mp_inverse(T)`` and a convergence flag at the final step.

    Each iterate is evaluated through the singular value decomposition as
    ``V_r diag(sigma / (sigma^2 + t)) U_r*``, which is the same map but
    carries no t-dependent rounding, so the error column decays like O(t)
    all the way to the floor of the final-step comparison.  Singular
    values below the rank cutoff are treated as exact zeros, consistent
    with :func:`mp_inverse`.
    """
    m = as_matrix(t_mat)
    s = _check_schedule(schedule, decreasing=True)
    f = svd_factor(m, tol)
    ur = f.u[:, : f.rank]
    sr = f.sigma[: f.rank]
    vr = f.vh[: f.rank].conj().T
    target = (vr / sr) @ ur.conj().T if f.rank else np.zeros((m.shape[1], m.shape[0]), dtype=np.complex128)
    iterates = []
    errors = np.empty(s.size)
    for i, t in enumerate(s):
        if f.rank:
            it = (vr * (sr / (sr**2 + t))) @ ur.conj().T
        else:
            it = target
        iterates.append(it)
        errors[i] = operator_norm(it - target)
    atol = limit_atol_for(target)
    return LimitTrace(
        params=s,
        iterates=iterates,
        errors=errors,
        target=target,
        limit_atol=atol,
        converged=bool(errors[-1] <= atol),
    )
