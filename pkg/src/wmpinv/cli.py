"""Command line front end.

Exit codes: 0 success, 1 file or parse error, 2 mathematical
non-existence or precondition failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .continuity import PerturbationSequence, perturb_weights_only, run_diagnostics
from .core import (
    matched_projection,
    positive_reduction,
    require_wmp_inverse,
    rho_embed,
    verify_weighted_penrose,
    wmp_exists,
    wmp_inverse,
)
from .exceptions import WmpError
from .io import (
    BundleFormatError,
    ProblemBundle,
    dump_json,
    geometric_schedule,
    load_bundle,
    load_matrix,
    matrix_to_obj,
    write_bundle,
)
from .limits import (
    closed_form_separated,
    decompose_b,
    general_limit_via_decomposition,
    limit_lambda_to_inf,
    limit_t_to_zero,
    omega_weight,
    separated_pair_check,
)
from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix, operator_norm, projector_range, projector_rowspace
from .sampling import random_complex, rng_from
from .weights import Weight, as_weight

__all__ = ["main", "run"]


class _Parser(argparse.ArgumentParser):
    # usage problems exit 64 instead of argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _role_pair(text: str):
    name, sep, path = text.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected NAME=PATH, got {text!r}")
    return name, path


def _schedule_endpoints(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"schedule endpoints must be numbers, got {text!r}")
    if a <= 0 or b <= 0 or a == b:
        raise argparse.ArgumentTypeError("schedule endpoints must be positive and distinct")
    return a, b


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--bundle", help="JSON problem bundle holding the input roles")
    p.add_argument(
        "--role",
        action="append",
        default=[],
        type=_role_pair,
        metavar="NAME=PATH",
        help="bind a role to a JSON matrix or Matrix Market file (repeatable)",
    )
    p.add_argument("--out", help="write result matrices to this JSON file")
    p.add_argument("--json", action="store_true", help="machine readable report on stdout")
    p.add_argument("--rank-rtol", type=float, help="relative singular value cutoff")
    p.add_argument("--verify-atol", type=float, help="identity verification tolerance")
    p.add_argument(
        "--schedule",
        type=_schedule_endpoints,
        metavar="A:B",
        help="geometric schedule endpoints for limit commands",
    )
    p.add_argument("--seed", type=int, help="seed for sampled verification draws")


@dataclass
class _Context:
    matrices: dict
    tol: ToleranceConfig
    tol_sources: dict
    schedule: np.ndarray | None
    seed: int | None


def _gather(args) -> _Context:
    bundle = load_bundle(args.bundle) if args.bundle else ProblemBundle()
    matrices = dict(bundle.matrices)
    for name, path in args.role:
        matrices[name] = load_matrix(path)

    fields = {
        "rank_rtol": DEFAULT_TOL.rank_rtol,
        "inv_cond_max": DEFAULT_TOL.inv_cond_max,
        "verify_atol": DEFAULT_TOL.verify_atol,
        "verify_rtol": DEFAULT_TOL.verify_rtol,
    }
    sources = {k: "default" for k in fields}
    for k, v in bundle.tolerances.items():
        fields[k] = v
        sources[k] = "bundle"
    if args.rank_rtol is not None:
        fields["rank_rtol"] = args.rank_rtol
        sources["rank_rtol"] = "flag"
    if args.verify_atol is not None:
        fields["verify_atol"] = args.verify_atol
        sources["verify_atol"] = "flag"
    tol = ToleranceConfig(**fields)

    schedule = None
    if args.schedule is not None:
        schedule = geometric_schedule(*args.schedule)
    elif bundle.schedule is not None:
        schedule = bundle.schedule
    seed = args.seed if args.seed is not None else bundle.seed
    return _Context(matrices=matrices, tol=tol, tol_sources=sources, schedule=schedule, seed=seed)


class _UsageError(Exception):
    """Bad invocation discovered after argparse (e.g. an unbound role)."""


def _need(ctx: _Context, *names: str) -> list:
    missing = [n for n in names if n not in ctx.matrices]
    if missing:
        raise _UsageError(
            f"missing role(s) {', '.join(missing)}; supply them via --bundle or --role"
        )
    return [ctx.matrices[n] for n in names]


def _fmt_entry(v: complex) -> str:
    if v.imag == 0.0:
        return f"{v.real:.12g}"
    return f"({v.real:.12g}{v.imag:+.12g}j)"


def _matrix_lines(name: str, a: np.ndarray) -> list:
    lines = [f"{name} ({a.shape[0]} x {a.shape[1]}):"]
    for row in np.atleast_2d(a):
        lines.append("  [ " + "  ".join(_fmt_entry(v) for v in row) + " ]")
    return lines


def _tol_line(ctx: _Context) -> str:
    rt = ctx.tol.rank_rtol
    parts = [
        f"rank_rtol={'adaptive' if rt is None else f'{rt:g}'} ({ctx.tol_sources['rank_rtol']})",
        f"inv_cond_max={ctx.tol.inv_cond_max:g} ({ctx.tol_sources['inv_cond_max']})",
        f"verify_atol={ctx.tol.verify_atol:g} ({ctx.tol_sources['verify_atol']})",
    ]
    return "tolerances: " + ", ".join(parts)


def _tol_report(ctx: _Context) -> dict:
    return {
        "rank_rtol": ctx.tol.rank_rtol,
        "inv_cond_max": ctx.tol.inv_cond_max,
        "verify_atol": ctx.tol.verify_atol,
        "verify_rtol": ctx.tol.verify_rtol,
        "sources": ctx.tol_sources,
    }


def _emit(args, report: dict, lines: list, out_matrices: dict | None = None) -> None:
    if args.json:
        sys.stdout.write(dump_json(report))
    else:
        print("\n".join(lines))
    if args.out and out_matrices:
        write_bundle(args.out, out_matrices)


def _worse_factor(r_cond: float, l_cond: float, tol: ToleranceConfig):
    r_bad = not (r_cond <= tol.inv_cond_max)
    l_bad = not (l_cond <= tol.inv_cond_max)
    if r_bad and (r_cond >= l_cond or not l_bad):
        return "R_{A,N}", r_cond
    return "L_{A,M^-1}", l_cond


def _trace_report(trace) -> dict:
    return {
        "schedule": [float(t) for t in trace.params],
        "errors": [float(e) for e in trace.errors],
        "limit_atol": trace.limit_atol,
        "converged": bool(trace.converged),
        "rank_flips": list(trace.rank_flips),
        "target": matrix_to_obj(trace.target),
        "final_iterate": matrix_to_obj(trace.iterates[-1]),
    }


def _trace_lines(trace, param_name: str) -> list:
    lines = [f"{param_name:>12}  {'error':>14}"]
    for t, _, e in trace.rows():
        lines.append(f"{t:>12.6g}  {e:>14.6e}")
    lines.append(f"converged: {trace.converged} (final error vs tolerance {trace.limit_atol:.3e})")
    if trace.rank_flips:
        lines.append(f"rank flips at schedule indices: {list(trace.rank_flips)}")
    return lines


def cmd_wmp(args) -> int:
    ctx = _gather(args)
    a, m, n = _need(ctx, "A", "M", "N")
    res = wmp_inverse(a, as_weight(m, ctx.tol), as_weight(n, ctx.tol), ctx.tol)
    report = {
        "command": "wmp",
        "tolerances": _tol_report(ctx),
        "exists": res.exists,
        "r_cond": res.r_cond,
        "l_cond": res.l_cond,
    }
    if not res.exists:
        factor, cond = _worse_factor(res.r_cond, res.l_cond, ctx.tol)
        report["singular_factor"] = factor
        msg = f"weighted inverse does not exist: {factor} has condition number {cond:.6e}"
        _emit(args, report, [_tol_line(ctx), msg])
        if not args.json:
            print(msg, file=sys.stderr)
        return 2
    report["penrose_residuals"] = [float(x) for x in res.penrose_residuals]
    report["inverse"] = matrix_to_obj(res.inverse)
    lines = [
        _tol_line(ctx),
        f"exists: true (cond R = {res.r_cond:.6e}, cond L = {res.l_cond:.6e})",
        "penrose residuals: " + ", ".join(f"{x:.3e}" for x in res.penrose_residuals),
    ]
    lines += _matrix_lines("inverse", res.inverse)
    _emit(args, report, lines, {"inverse": res.inverse})
    return 0


def cmd_exists(args) -> int:
    ctx = _gather(args)
    a, m, n = _need(ctx, "A", "M", "N")
    rep = wmp_exists(a, as_weight(m, ctx.tol), as_weight(n, ctx.tol), ctx.tol)
    report = {
        "command": "exists",
        "tolerances": _tol_report(ctx),
        "exists": rep.exists,
        "r_invertible": rep.r_invertible,
        "l_invertible": rep.l_invertible,
        "r_cond": rep.r_cond,
        "l_cond": rep.l_cond,
    }
    lines = [
        _tol_line(ctx),
        f"R factor invertible: {rep.r_invertible} (condition number {rep.r_cond:.6e})",
        f"L factor invertible: {rep.l_invertible} (condition number {rep.l_cond:.6e})",
        f"exists: {rep.exists}",
    ]
    if not rep.exists:
        factor, cond = _worse_factor(rep.r_cond, rep.l_cond, ctx.tol)
        report["singular_factor"] = factor
        msg = f"weighted inverse does not exist: {factor} has condition number {cond:.6e}"
        lines.append(msg)
        _emit(args, report, lines)
        if not args.json:
            print(msg, file=sys.stderr)
        return 2
    _emit(args, report, lines)
    return 0


def cmd_verify(args) -> int:
    ctx = _gather(args)
    a, m, n, x = _need(ctx, "A", "M", "N", "X")
    resid = verify_weighted_penrose(a, as_weight(m, ctx.tol), as_weight(n, ctx.tol), x, ctx.tol)
    names = ["AXA - A", "XAX - X", "hermitian M A X", "hermitian N X A"]
    passes = [bool(r <= ctx.tol.verify_atol) for r in resid]
    report = {
        "command": "verify",
        "tolerances": _tol_report(ctx),
        "residuals": {nm: float(r) for nm, r in zip(names, resid)},
        "passes": {nm: p for nm, p in zip(names, passes)},
        "all_pass": all(passes),
    }
    lines = [_tol_line(ctx)]
    for nm, r, p in zip(names, resid, passes):
        lines.append(f"{nm}: residual {r:.6e} {'pass' if p else 'FAIL'}")
    lines.append(f"all identities pass: {all(passes)}")
    _emit(args, report, lines)
    return 0 if all(passes) else 2


def cmd_reduce(args) -> int:
    ctx = _gather(args)
    a, m, n = _need(ctx, "A", "M", "N")
    mw, nw = as_weight(m, ctx.tol), as_weight(n, ctx.tol)
    red = positive_reduction(a, mw, nw, ctx.tol)
    x_orig = require_wmp_inverse(a, mw, nw, ctx.tol).inverse
    x_red = require_wmp_inverse(a, red.s, red.t, ctx.tol).inverse
    agreement = operator_norm(x_orig - x_red)
    report = {
        "command": "reduce",
        "tolerances": _tol_report(ctx),
        "agreement": float(agreement),
        "s_cond": red.s.cond,
        "t_cond": red.t.cond,
        "S": matrix_to_obj(red.s.matrix),
        "T": matrix_to_obj(red.t.matrix),
    }
    lines = [
        _tol_line(ctx),
        f"positive definite replacements found (cond S = {red.s.cond:.3e}, cond T = {red.t.cond:.3e})",
        f"inverse agreement ||X_MN - X_ST|| = {agreement:.6e}",
    ]
    lines += _matrix_lines("S", red.s.matrix)
    lines += _matrix_lines("T", red.t.matrix)
    _emit(args, report, lines, {"S": red.s.matrix, "T": red.t.matrix})
    return 0


def cmd_limit_t0(args) -> int:
    ctx = _gather(args)
    a, b, v, w = _need(ctx, "A", "B", "V", "W")
    vw, ww = as_weight(v, ctx.tol), as_weight(w, ctx.tol)
    if "U" in ctx.matrices:
        u = as_weight(ctx.matrices["U"], ctx.tol)
    elif "X" in ctx.matrices or "Y" in ctx.matrices:
        u = omega_weight(
            a,
            b,
            ww,
            x=ctx.matrices.get("X", vw.matrix),
            y=ctx.matrices.get("Y"),
            tol=ctx.tol,
        )
    else:
        u = None
    trace = limit_t_to_zero(a, b, vw, ww, u, schedule=ctx.schedule, tol=ctx.tol)
    report = {"command": "limit-t0", "tolerances": _tol_report(ctx), **_trace_report(trace)}
    lines = [_tol_line(ctx)] + _trace_lines(trace, "t")
    lines += _matrix_lines("target", trace.target)
    _emit(args, report, lines, {"target": trace.target, "final_iterate": trace.iterates[-1]})
    return 0


def cmd_limit_lambda(args) -> int:
    ctx = _gather(args)
    a, b = _need(ctx, "A", "B")
    trace = limit_lambda_to_inf(a, b, schedule=ctx.schedule, tol=ctx.tol)
    report = {"command": "limit-lambda", "tolerances": _tol_report(ctx), **_trace_report(trace)}
    lines = [_tol_line(ctx)] + _trace_lines(trace, "lambda")
    lines += _matrix_lines("target", trace.target)
    _emit(args, report, lines, {"target": trace.target, "final_iterate": trace.iterates[-1]})
    return 0


def cmd_separated(args) -> int:
    ctx = _gather(args)
    a, b = _need(ctx, "A", "B")
    rep = separated_pair_check(a, b, ctx.tol)
    report = {
        "command": "separated",
        "tolerances": _tol_report(ctx),
        "is_separated": rep.is_separated,
        "pq_norm": rep.pq_norm,
        "two_minus_sum_cond": rep.two_minus_sum_cond,
        "intersection_dim": rep.intersection_dim,
        "sum_rank": rep.sum_rank,
    }
    lines = [
        _tol_line(ctx),
        f"||P Q|| = {rep.pq_norm:.12f}",
        f"cond(2I - P - Q) = {rep.two_minus_sum_cond:.6e}",
        f"row-space intersection dimension: {rep.intersection_dim}",
        f"separated: {rep.is_separated}",
    ]
    _emit(args, report, lines)
    return 0


def cmd_closed_form(args) -> int:
    ctx = _gather(args)
    a, b, v, w = _need(ctx, "A", "B", "V", "W")
    pi, d = closed_form_separated(
        a, b, as_weight(v, ctx.tol), as_weight(w, ctx.tol), ctx.tol, rng=rng_from(ctx.seed)
    )
    report = {
        "command": "closed-form",
        "tolerances": _tol_report(ctx),
        "pi": matrix_to_obj(pi),
        "closed_form": matrix_to_obj(d),
    }
    lines = [_tol_line(ctx), "closed form verified against the pencil for two weight choices"]
    lines += _matrix_lines("pi", pi)
    lines += _matrix_lines("closed_form", d)
    _emit(args, report, lines, {"pi": pi, "closed_form": d})
    return 0


def cmd_decompose(args) -> int:
    ctx = _gather(args)
    a, b, v, w = _need(ctx, "A", "B", "V", "W")
    vw, ww = as_weight(v, ctx.tol), as_weight(w, ctx.tol)
    dec = decompose_b(a, b, vw, ww, ctx.tol)
    am = as_matrix(a)
    eye = np.eye(am.shape[1], dtype=np.complex128)
    p = projector_rowspace(am, ctx.tol)
    w_cross = operator_norm(dec.b2.conj().T @ ww.matrix @ dec.b1)
    containment = operator_norm((eye - p) @ dec.b1.conj().T)
    pair = separated_pair_check(am, dec.b2, ctx.tol)
    report = {
        "command": "decompose",
        "tolerances": _tol_report(ctx),
        "w_orthogonality": float(w_cross),
        "containment": float(containment),
        "b2_separated": pair.is_separated,
        "b2_pq_norm": pair.pq_norm,
        "B1": matrix_to_obj(dec.b1),
        "B2": matrix_to_obj(dec.b2),
        "Z": matrix_to_obj(dec.z),
    }
    lines = [
        _tol_line(ctx),
        f"||B2* W B1|| = {w_cross:.6e}",
        f"row-space containment residual = {containment:.6e}",
        f"(A, B2) separated: {pair.is_separated} (||P Q|| = {pair.pq_norm:.6f})",
    ]
    lines += _matrix_lines("B1", dec.b1)
    lines += _matrix_lines("B2", dec.b2)
    lines += _matrix_lines("Z", dec.z)
    _emit(args, report, lines, {"B1": dec.b1, "B2": dec.b2, "Z": dec.z})
    return 0


def cmd_matched_projection(args) -> int:
    ctx = _gather(args)
    (q,) = _need(ctx, "Q")
    m = matched_projection(q, ctx.tol)
    qm = as_matrix(q)
    herm = operator_norm(m - m.conj().T)
    idem = operator_norm(m @ m - m)
    dist = operator_norm(m - qm)
    report = {
        "command": "matched-projection",
        "tolerances": _tol_report(ctx),
        "hermitian_residual": float(herm),
        "idempotent_residual": float(idem),
        "distance_to_input": float(dist),
        "projection": matrix_to_obj(m),
    }
    lines = [
        _tol_line(ctx),
        f"hermitian residual {herm:.3e}, idempotent residual {idem:.3e}",
        f"distance to input ||m(Q) - Q|| = {dist:.6e}",
    ]
    lines += _matrix_lines("projection", m)
    _emit(args, report, lines, {"projection": m})
    return 0


def cmd_rho(args) -> int:
    ctx = _gather(args)
    a, m, n = _need(ctx, "A", "M", "N")
    mw, nw = as_weight(m, ctx.tol), as_weight(n, ctx.tol)
    rho, t_weight = rho_embed(a, mw, nw, ctx.tol)
    base = wmp_inverse(a, mw, nw, ctx.tol)
    embedded = wmp_inverse(rho, t_weight, Weight(t_weight.inverse, ctx.tol), ctx.tol)
    report = {
        "command": "rho",
        "tolerances": _tol_report(ctx),
        "base_exists": base.exists,
        "embedded_exists": embedded.exists,
        "rho": matrix_to_obj(rho),
        "T": matrix_to_obj(t_weight.matrix),
    }
    lines = [
        _tol_line(ctx),
        f"base exists: {base.exists}, embedded exists: {embedded.exists}",
    ]
    if not base.exists:
        factor, cond = _worse_factor(base.r_cond, base.l_cond, ctx.tol)
        msg = f"weighted inverse does not exist: {factor} has condition number {cond:.6e}"
        report["singular_factor"] = factor
        lines.append(msg)
        _emit(args, report, lines)
        if not args.json:
            print(msg, file=sys.stderr)
        return 2
    k = as_matrix(a).shape[0]
    block = embedded.inverse[k:, :k]
    block_resid = operator_norm(block - base.inverse)
    report["block_residual"] = float(block_resid)
    report["inverse_block"] = matrix_to_obj(block)
    lines.append(f"lower-left block residual against the direct inverse: {block_resid:.6e}")
    lines += _matrix_lines("rho", rho)
    lines += _matrix_lines("inverse_block", block)
    _emit(args, report, lines, {"rho": rho, "T": t_weight.matrix, "inverse_block": block})
    return 0


def cmd_perturb(args) -> int:
    ctx = _gather(args)
    a, m, n = _need(ctx, "A", "M", "N")
    am = as_matrix(a)
    mw, nw = as_weight(m, ctx.tol), as_weight(n, ctx.tol)
    terms = args.terms
    if terms < 2:
        raise ValueError("--terms must be at least 2")
    if args.kind == "weights-only":
        dm = ctx.matrices.get("DM")
        dn = ctx.matrices.get("DN")
        if dm is None:
            dm = 0.1 * operator_norm(mw.matrix) * np.eye(mw.dim, dtype=np.complex128)
        if dn is None:
            dn = 0.1 * operator_norm(nw.matrix) * np.eye(nw.dim, dtype=np.complex128)
        pairs = [
            (mw.matrix + dm / (i + 1), nw.matrix + dn / (i + 1)) for i in range(terms)
        ]
        diag = perturb_weights_only(am, mw, nw, pairs, ctx.tol)
    else:
        gen = rng_from(ctx.seed)
        e = ctx.matrices.get("E")
        if e is None:
            scale = 0.1 * max(operator_norm(am), 1.0)
            e = scale * random_complex(gen, am.shape[0], am.shape[1])
        p_cod = projector_range(am, ctx.tol)
        p_dom = projector_rowspace(am, ctx.tol)
        direction = p_cod @ as_matrix(e) @ p_dom
        seq = PerturbationSequence.full(
            am,
            mw,
            nw,
            [(am + direction / (i + 1), mw.matrix, nw.matrix) for i in range(terms)],
            ctx.tol,
        )
        diag = run_diagnostics(seq, ctx.tol)
    finals = {k: (float(v[-1]) if np.isfinite(v[-1]) else None) for k, v in diag.columns.items()}
    report = {
        "command": "perturb",
        "tolerances": _tol_report(ctx),
        "kind": args.kind,
        "terms": terms,
        "trends": diag.trends,
        "final_values": finals,
        "equivalences_consistent": diag.equivalences_consistent,
        "n0": diag.n0,
        "exists": [bool(x) for x in diag.exists],
    }
    lines = [_tol_line(ctx), f"kind: {args.kind}, terms: {terms}"]
    for name, trend in diag.trends.items():
        final = finals[name]
        shown = "nan" if final is None else f"{final:.6e}"
        lines.append(f"{name}: trend {trend}, final {shown}")
    lines.append(f"equivalence proxies consistent: {diag.equivalences_consistent}")
    lines.append(f"first index with stable existence: {diag.n0}")
    _emit(args, report, lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wmpinv", description="Weighted pseudoinverse toolkit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    entries = [
        ("wmp", cmd_wmp, "weighted pseudoinverse via the factored formula (roles A, M, N)"),
        ("exists", cmd_exists, "existence check through the two factors (roles A, M, N)"),
        ("reduce", cmd_reduce, "positive definite weight replacement (roles A, M, N)"),
        ("limit-t0", cmd_limit_t0, "pencil limit t -> 0 (roles A, B, V, W; optional U, X, Y)"),
        ("limit-lambda", cmd_limit_lambda, "pencil limit lambda -> inf (roles A, B)"),
        ("separated", cmd_separated, "row-space separation verdict (roles A, B)"),
        ("closed-form", cmd_closed_form, "separated closed form of the pencil limit (roles A, B, V, W)"),
        ("decompose", cmd_decompose, "split B against the weighted inverse (roles A, B, V, W)"),
        ("verify", cmd_verify, "check the four weighted identities (roles A, M, N, X)"),
        ("perturb", cmd_perturb, "continuity diagnostics under perturbation (roles A, M, N)"),
        ("matched-projection", cmd_matched_projection, "orthogonal projection matched to an idempotent (role Q)"),
        ("rho", cmd_rho, "self-adjoint embedding of the weighted problem (roles A, M, N)"),
    ]
    for name, handler, help_text in entries:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "perturb":
            p.add_argument("--terms", type=int, default=50, help="sequence length")
            p.add_argument(
                "--kind",
                choices=["weights-only", "full"],
                default="weights-only",
                help="perturb only the weights or the matrix as well",
            )
        p.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    try:
        return args.handler(args)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 64
    except (BundleFormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (WmpError, ValueError, np.linalg.LinAlgError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
