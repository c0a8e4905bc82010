"""Problem bundles and matrix files.

A bundle is a JSON object whose top-level keys are role names mapping to
matrix objects ``{"rows": r, "cols": c, "re": [...], "im": [...]}`` with
flat row-major entry lists (``im`` optional), plus the reserved keys
``tolerances`` (numeric overrides), ``schedule`` (list of positive
floats), and ``seed``.  Floats are written with 17 significant digits so
a write/read cycle is bit identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix

__all__ = [
    "BundleFormatError",
    "ProblemBundle",
    "matrix_to_obj",
    "matrix_from_obj",
    "load_bundle",
    "parse_bundle",
    "load_matrix",
    "read_matrix_market",
    "dump_json",
    "write_bundle",
    "geometric_schedule",
]

_RESERVED = {"tolerances", "schedule", "seed"}
_TOLERANCE_KEYS = {"rank_rtol", "inv_cond_max", "verify_atol", "verify_rtol"}


class BundleFormatError(ValueError):
    """The file parsed as JSON but does not follow the bundle layout."""


@dataclass
class ProblemBundle:
    """Named matrices plus optional numeric policy carried alongside."""

    matrices: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    schedule: np.ndarray | None = None
    seed: int | None = None

    def tolerance_config(self, base: ToleranceConfig = DEFAULT_TOL) -> ToleranceConfig:
        """Apply the bundle's overrides on top of a base configuration."""
        if not self.tolerances:
            return base
        fields = {
            "rank_rtol": base.rank_rtol,
            "inv_cond_max": base.inv_cond_max,
            "verify_atol": base.verify_atol,
            "verify_rtol": base.verify_rtol,
        }
        fields.update(self.tolerances)
        return ToleranceConfig(**fields)


def matrix_to_obj(a) -> dict:
    """Matrix object with flat row-major entry lists."""
    m = as_matrix(a)
    obj = {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in m.real.ravel()],
    }
    if np.any(m.imag != 0.0):
        obj["im"] = [float(x) for x in m.imag.ravel()]
    return obj


def _as_float_vector(value, what: str) -> np.ndarray:
    # malformed content is a format error, not a numerical one
    try:
        out = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise BundleFormatError(f"{what} must be a flat list of numbers") from e
    if out.ndim != 1:
        raise BundleFormatError(f"{what} must be a flat list of numbers")
    return out


def matrix_from_obj(obj) -> np.ndarray:
    if not isinstance(obj, dict) or not {"rows", "cols", "re"} <= set(obj):
        raise BundleFormatError("matrix object needs keys rows, cols, re")
    unknown = set(obj) - {"rows", "cols", "re", "im"}
    if unknown:
        raise BundleFormatError(f"matrix object has unrecognized keys {sorted(unknown)}")
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
    except (TypeError, ValueError) as e:
        raise BundleFormatError("rows and cols must be integers") from e
    if rows < 0 or cols < 0:
        raise BundleFormatError("matrix dimensions must be nonnegative")
    re = _as_float_vector(obj["re"], "re")
    if re.shape != (rows * cols,):
        raise BundleFormatError(
            f"re has {re.size} entries, expected rows*cols = {rows * cols} (flat row-major)"
        )
    out = re.astype(np.complex128)
    if "im" in obj:
        im = _as_float_vector(obj["im"], "im")
        if im.shape != (rows * cols,):
            raise BundleFormatError("im must match re in length")
        out = out + 1j * im
    return out.reshape(rows, cols)


def parse_bundle(text: str) -> ProblemBundle:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise BundleFormatError(f"invalid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise BundleFormatError("bundle must be a JSON object")
    bundle = ProblemBundle()
    for key, value in raw.items():
        if key == "tolerances":
            if not isinstance(value, dict) or not set(value) <= _TOLERANCE_KEYS:
                raise BundleFormatError(
                    f"tolerances must be an object with keys from {sorted(_TOLERANCE_KEYS)}"
                )
            try:
                bundle.tolerances = {k: float(v) for k, v in value.items()}
            except (TypeError, ValueError) as e:
                raise BundleFormatError("tolerance values must be numbers") from e
        elif key == "schedule":
            sched = _as_float_vector(value, "schedule")
            if sched.size == 0:
                raise BundleFormatError("schedule must be a nonempty list of numbers")
            bundle.schedule = sched
        elif key == "seed":
            try:
                bundle.seed = int(value)
            except (TypeError, ValueError) as e:
                raise BundleFormatError("seed must be an integer") from e
        elif isinstance(value, dict):
            bundle.matrices[key] = matrix_from_obj(value)
        else:
            raise BundleFormatError(f"unrecognized bundle key {key!r}")
    return bundle


def load_bundle(path) -> ProblemBundle:
    return parse_bundle(Path(path).read_text())


def read_matrix_market(path) -> np.ndarray:
    """Dense array from a Matrix Market file (sparse input is densified)."""
    from scipy.io import mmread

    data = mmread(str(path))
    if hasattr(data, "todense"):
        data = np.asarray(data.todense())
    return as_matrix(np.atleast_2d(data))


def load_matrix(path) -> np.ndarray:
    """Single matrix from a JSON matrix object or a Matrix Market file.

    A bundle file holding exactly one matrix also works, so the output of
    ``--out`` can be bound straight back to a role.
    """
    p = Path(path)
    if p.suffix.lower() in {".mtx", ".mm"}:
        return read_matrix_market(p)
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise BundleFormatError(f"{p}: invalid JSON: {e}") from e
    if isinstance(obj, dict) and not {"rows", "cols", "re"} <= set(obj):
        bundle = parse_bundle(json.dumps(obj))
        if len(bundle.matrices) == 1:
            return next(iter(bundle.matrices.values()))
        raise BundleFormatError(
            f"{p}: expected one matrix, found roles {sorted(bundle.matrices)}"
        )
    return matrix_from_obj(obj)


def _dump(obj, pieces: list, indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            pieces.append(f'{pad}  {json.dumps(str(k))}: ')
            _dump(v, pieces, indent + 1)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist() if isinstance(obj, np.ndarray) else obj)
        if not seq:
            pieces.append("[]")
            return
        pieces.append("[")
        for i, v in enumerate(seq):
            _dump(v, pieces, indent)
            if i < len(seq) - 1:
                pieces.append(", ")
        pieces.append("]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        pieces.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        pieces.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        pieces.append(format(x, ".17g") if np.isfinite(x) else "null")
    elif obj is None:
        pieces.append("null")
    elif isinstance(obj, str):
        pieces.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj) -> str:
    """Serialize with floats at 17 significant digits (non-finite as null)."""
    pieces: list = []
    _dump(obj, pieces, 0)
    return "".join(pieces) + "\n"


def write_bundle(path, matrices: dict, scalars: dict | None = None) -> None:
    """Write named matrices (plus optional scalar entries) as a bundle."""
    out: dict = {name: matrix_to_obj(mat) for name, mat in matrices.items()}
    for key, value in (scalars or {}).items():
        if key in out:
            raise ValueError(f"scalar key {key!r} collides with a matrix role")
        out[key] = value
    Path(path).write_text(dump_json(out))


def geometric_schedule(start: float, stop: float, count: int | None = None) -> np.ndarray:
    """Strictly monotone geometric schedule between positive endpoints.

    The default point count is one per decade spanned, with a floor of
    two points.
    """
    if start <= 0 or stop <= 0:
        raise ValueError("schedule endpoints must be positive")
    if start == stop:
        raise ValueError("schedule endpoints must differ")
    if count is None:
        count = max(2, int(round(abs(np.log10(stop / start)))) + 1)
    if count < 2:
        raise ValueError("schedule needs at least two points")
    return np.geomspace(start, stop, count)
