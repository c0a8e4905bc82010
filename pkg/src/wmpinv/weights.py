"""Validated self-adjoint invertible weights.

A weight may be indefinite; positive definiteness is recorded as a flag
because several operations (the square-root reduction oracle, the limit
formulas) require it while the core factored formula does not.
"""

from __future__ import annotations

import numpy as np

from .exceptions import WeightError
from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix, operator_norm

__all__ = ["Weight", "as_weight"]


class Weight:
    """Self-adjoint numerically invertible matrix with a cached inverse.

    Construction symmetrizes inputs whose asymmetry is within
    ``verify_atol`` and rejects anything further from self-adjoint, or
    whose condition number exceeds ``inv_cond_max``.  The inverse is
    computed once through the eigendecomposition (the one place an
    explicit inverse is a deliverable) and is exactly Hermitian.

    Attributes
    ----------
    matrix : numpy.ndarray
        The symmetrized weight.
    inverse : numpy.ndarray
        Cached Hermitian inverse.
    positive_definite : bool
        True when the smallest eigenvalue clears the invertibility floor.
    cond : float
        2-norm condition number.
    """

    __slots__ = ("matrix", "inverse", "positive_definite", "cond")

    def __init__(self, matrix, tol: ToleranceConfig = DEFAULT_TOL):
        w = as_matrix(matrix)
        if w.shape[0] != w.shape[1]:
            raise WeightError(f"weight must be square, got shape {w.shape}")
        asym = operator_norm(w - w.conj().T)
        if asym > tol.verify_atol:
            raise WeightError(
                f"weight is not self-adjoint: ||W - W*|| = {asym:.6e} "
                f"exceeds {tol.verify_atol:.1e}"
            )
        h = 0.5 * (w + w.conj().T)
        if h.size == 0:
            raise WeightError("weight must be nonempty")
        eigvals, eigvecs = np.linalg.eigh(h)
        absvals = np.abs(eigvals)
        smax = float(absvals.max())
        smin = float(absvals.min())
        if smin == 0.0 or smax / smin > tol.inv_cond_max:
            cond = float("inf") if smin == 0.0 else smax / smin
            raise WeightError(
                f"weight is numerically singular: condition number {cond:.6e} "
                f"exceeds {tol.inv_cond_max:.1e}"
            )
        inv = (eigvecs / eigvals) @ eigvecs.conj().T
        self.matrix = h
        self.inverse = 0.5 * (inv + inv.conj().T)
        self.positive_definite = bool(eigvals[0] > smax / tol.inv_cond_max)
        self.cond = smax / smin

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Weight":
        return cls(np.eye(n, dtype=np.complex128))

    def __repr__(self) -> str:
        kind = "positive definite" if self.positive_definite else "indefinite"
        return f"Weight(dim={self.dim}, {kind}, cond={self.cond:.3e})"


def as_weight(w, tol: ToleranceConfig = DEFAULT_TOL) -> Weight:
    """Pass a ``Weight`` through, or validate a raw matrix into one."""
    if isinstance(w, Weight):
        return w
    return Weight(w, tol)
