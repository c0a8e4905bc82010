"""Perturbation harness for continuity of the weighted inverse.

For a sequence (A_n, M_n, N_n) -> (A, M, N) the convergence of the
weighted inverses, of the plain Moore-Penrose inverses, of the two
projectors, and the boundedness of the inverse norms stand or fall
together.  The harness evaluates finite proxies for each of these
conditions per term and classifies their tails, so rank-preserving and
rank-dropping perturbations can be told apart by inspection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import WeightError
from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix, operator_norm, svd_factor
from .weights import Weight, as_weight

__all__ = [
    "PerturbationSequence",
    "ContinuityDiagnostics",
    "TAIL_FRACTION",
    "DIVERGENCE_FACTOR",
    "run_diagnostics",
    "perturb_weights_only",
]

# Trend classification examines the last quarter of the terms; a column
# whose tail grows by at least the factor below is flagged diverging.
TAIL_FRACTION = 0.25
DIVERGENCE_FACTOR = 10.0

_DIFF_COLUMNS = ("wmp_diff", "proj_domain_diff", "proj_codomain_diff", "mp_diff")
_NORM_COLUMNS = ("wmp_norm", "mp_norm")


def _validate_hermitian(name: str, mat: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    m = as_matrix(mat)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    asym = operator_norm(m - m.conj().T)
    if asym > tol.verify_atol:
        raise ValueError(f"{name} must be self-adjoint, asymmetry {asym:.3e}")
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class PerturbationSequence:
    """Base problem plus a list of perturbed terms.

    ``kind`` is ``"full"`` when the matrix itself moves and
    ``"weights-only"`` when every term shares the base matrix.  Term
    weights are stored raw because they are allowed to be singular; the
    harness records per-term non-existence instead of rejecting them.
    """

    base_a: np.ndarray
    base_m: Weight
    base_n: Weight
    terms: tuple
    kind: str

    @classmethod
    def full(cls, a, m, n, terms, tol: ToleranceConfig = DEFAULT_TOL) -> "PerturbationSequence":
        """Sequence with varying matrices; terms are (A_n, M_n, N_n) triples."""
        am = as_matrix(a)
        mw = as_weight(m, tol)
        nw = as_weight(n, tol)
        checked = []
        for i, (an, mn, nn) in enumerate(terms):
            anm = as_matrix(an)
            if anm.shape != am.shape:
                raise ValueError(f"term {i}: matrix shape {anm.shape} differs from base {am.shape}")
            mnm = _validate_hermitian(f"term {i} codomain weight", mn, tol)
            nnm = _validate_hermitian(f"term {i} domain weight", nn, tol)
            if mnm.shape[0] != am.shape[0]:
                raise ValueError(f"term {i}: codomain weight dimension {mnm.shape[0]} != {am.shape[0]}")
            if nnm.shape[0] != am.shape[1]:
                raise ValueError(f"term {i}: domain weight dimension {nnm.shape[0]} != {am.shape[1]}")
            checked.append((anm, mnm, nnm))
        if not checked:
            raise ValueError("a perturbation sequence needs at least one term")
        return cls(base_a=am, base_m=mw, base_n=nw, terms=tuple(checked), kind="full")

    @classmethod
    def weights_only(cls, a, m, n, weight_pairs, tol: ToleranceConfig = DEFAULT_TOL) -> "PerturbationSequence":
        """Sequence moving only the weights; terms are (M_n, N_n) pairs."""
        am = as_matrix(a)
        mw = as_weight(m, tol)
        nw = as_weight(n, tol)
        checked = []
        for i, (mn, nn) in enumerate(weight_pairs):
            mnm = _validate_hermitian(f"term {i} codomain weight", mn, tol)
            nnm = _validate_hermitian(f"term {i} domain weight", nn, tol)
            if mnm.shape[0] != am.shape[0]:
                raise ValueError(f"term {i}: codomain weight dimension {mnm.shape[0]} != {am.shape[0]}")
            if nnm.shape[0] != am.shape[1]:
                raise ValueError(f"term {i}: domain weight dimension {nnm.shape[0]} != {am.shape[1]}")
            checked.append((am, mnm, nnm))
        if not checked:
            raise ValueError("a perturbation sequence needs at least one term")
        return cls(base_a=am, base_m=mw, base_n=nw, terms=tuple(checked), kind="weights-only")

    def __len__(self) -> int:
        return len(self.terms)


@dataclass
class ContinuityDiagnostics:
    """Per-term proxy columns with tail-trend classifications.

    Columns, one value per term (operator norms, ``nan`` where the
    weighted inverse does not exist):

    - ``wmp_diff``: distance of the perturbed weighted inverse to the base one
    - ``wmp_norm``: norm of the perturbed weighted inverse
    - ``mp_norm``: norm of the perturbed Moore-Penrose inverse
    - ``proj_domain_diff``: distance between the domain projectors
    - ``proj_codomain_diff``: distance between the codomain projectors
    - ``mp_diff``: distance between the Moore-Penrose inverses

    ``equivalences_consistent`` records whether the convergence proxies
    and the boundedness proxies landed on the same side, which the theory
    demands.  ``n0`` is the first 1-based index from which every later
    term has an existing weighted inverse (``None`` if the final term has
    none).
    """

    columns: dict
    exists: list
    trends: dict
    equivalences_consistent: bool
    tail_start: int
    n0: int | None


def _tail_start(count: int) -> int:
    if count <= 1:
        return 0
    return min(count - 2, math.floor(count * (1.0 - TAIL_FRACTION)))


def _classify(values: np.ndarray, start: int, atol: float) -> str:
    tail = values[start:]
    tail = tail[np.isfinite(tail)]
    if tail.size == 0:
        return "undefined"
    first, last = float(tail[0]), float(tail[-1])
    if last <= atol:
        return "decreasing"
    if first == 0.0:
        return "diverging"
    ratio = last / first
    if ratio >= DIVERGENCE_FACTOR:
        return "diverging"
    if ratio <= 0.9:
        return "decreasing"
    return "bounded"


def run_diagnostics(seq: PerturbationSequence, tol: ToleranceConfig = DEFAULT_TOL) -> ContinuityDiagnostics:
    """Evaluate all continuity proxies over a perturbation sequence.

    The base weighted inverse must exist; per-term failures (singular
    weights or singular factors) are recorded as non-existence rather
    than raised.
    """
    from .core import require_wmp_inverse, wmp_inverse

    base = require_wmp_inverse(seq.base_a, seq.base_m, seq.base_n, tol)
    f0 = svd_factor(seq.base_a, tol)
    r0 = f0.rank
    v0 = f0.vh[:r0].conj().T
    u0 = f0.u[:, :r0]
    p_dom0 = v0 @ v0.conj().T
    p_cod0 = u0 @ u0.conj().T

    count = len(seq.terms)
    cols = {
        name: np.full(count, np.nan)
        for name in ("wmp_diff", "wmp_norm", "mp_norm", "proj_domain_diff", "proj_codomain_diff", "mp_diff")
    }
    exists = []
    for i, (an, mn, nn) in enumerate(seq.terms):
        fn = svd_factor(an, tol)
        rn = fn.rank
        if rn == 0:
            mpn = np.zeros((an.shape[1], an.shape[0]), dtype=np.complex128)
            p_dom = np.zeros((an.shape[1], an.shape[1]), dtype=np.complex128)
            p_cod = np.zeros((an.shape[0], an.shape[0]), dtype=np.complex128)
        else:
            inv_s = np.zeros_like(fn.sigma)
            inv_s[:rn] = 1.0 / fn.sigma[:rn]
            mpn = (fn.vh.conj().T * inv_s) @ fn.u.conj().T
            vn = fn.vh[:rn].conj().T
            un = fn.u[:, :rn]
            p_dom = vn @ vn.conj().T
            p_cod = un @ un.conj().T
        cols["mp_norm"][i] = operator_norm(mpn)
        cols["mp_diff"][i] = operator_norm(mpn - base.mp)
        cols["proj_domain_diff"][i] = operator_norm(p_dom - p_dom0)
        cols["proj_codomain_diff"][i] = operator_norm(p_cod - p_cod0)
        try:
            res = wmp_inverse(an, Weight(mn, tol), Weight(nn, tol), tol)
        except WeightError:
            res = None
        ok = res is not None and res.exists
        exists.append(ok)
        if ok:
            cols["wmp_diff"][i] = operator_norm(res.inverse - base.inverse)
            cols["wmp_norm"][i] = operator_norm(res.inverse)

    start = _tail_start(count)
    trends = {name: _classify(vals, start, tol.verify_atol) for name, vals in cols.items()}
    diffs_converge = all(trends[name] == "decreasing" for name in _DIFF_COLUMNS)
    norms_bounded = all(trends[name] != "diverging" for name in _NORM_COLUMNS)
    consistent = diffs_converge == norms_bounded

    n0 = None
    if exists and exists[-1]:
        n0 = count
        while n0 > 1 and exists[n0 - 2]:
            n0 -= 1
    return ContinuityDiagnostics(
        columns=cols,
        exists=exists,
        trends=trends,
        equivalences_consistent=consistent,
        tail_start=start,
        n0=n0,
    )


def perturb_weights_only(a, m, n, weight_pairs, tol: ToleranceConfig = DEFAULT_TOL) -> ContinuityDiagnostics:
    """Run the harness for a sequence that moves only the weights.

    Terms may have singular weights or singular factors; ``n0`` in the
    result reports the first index from which everything stays
    invertible, matching the threshold in the weights-only continuity
    statement.
    """
    seq = PerturbationSequence.weights_only(a, m, n, weight_pairs, tol)
    return run_diagnostics(seq, tol)
