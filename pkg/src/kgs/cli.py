"""Command-line interface.

Subcommands: validate, spectra, solve, sweep, verify.  Machine-readable
outputs (JSON / RFC-4180 CSV) go to --out or stdout; human summaries go to
stderr when stdout carries data.  Exit codes separate mathematical outcomes
from engineering failures:

    0  success / Solved          3  NoNontrivialSolution
    1  failed checks/violations  4  OutOfTheory
    2  unusable input            5  NotConverged
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from .errors import GraphFormatError, InvalidGraphError, KgsError
from .functional import KIND_DIRICHLET, KIND_WHOLE, EnergyParams
from .graphs import load_graph, parse_graph_payload, validate
from .solver import (
    SolveOptions,
    SolveStatus,
    solve,
    sweep,
    verify,
)
from .spectral import compute_constants, kappa, kappa_whole_explicit

_STATUS_EXIT = {
    SolveStatus.SOLVED: 0,
    SolveStatus.NO_NONTRIVIAL: 3,
    SolveStatus.OUT_OF_THEORY: 4,
    SolveStatus.NOT_CONVERGED: 5,
}

_SWEEP_COLUMNS = ["lambda", "eta", "b", "status", "energy", "norm",
                  "nehari_residual", "max_residual", "kappa", "bounds_ok"]


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kgs-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text, summary=None):
    if args.out:
        _write_atomic(args.out, text)
        if summary:
            print(summary)
    else:
        sys.stdout.write(text)
        if summary:
            print(summary, file=sys.stderr)


def _json_text(obj):
    return json.dumps(obj, indent=2) + "\n"


def _load_graph_or_fail(args):
    try:
        return load_graph(args.input)
    except FileNotFoundError:
        raise _Exit(2, f"input file not found: {args.input}")
    except GraphFormatError as exc:
        raise _Exit(2, f"cannot parse graph: {exc}")
    except InvalidGraphError as exc:
        raise _Exit(1, f"invalid graph: {exc}")


class _Exit(Exception):
    def __init__(self, code, message=None):
        super().__init__(message)
        self.code = code
        self.message = message


def _params_from(args):
    return EnergyParams(a=args.a, b=args.b, lam=args.lam, eta=args.eta, kind=args.kind)


def _options_from(args):
    seed = args.seed
    env_seed = os.environ.get("KGS_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            raise _Exit(2, f"KGS_SEED must be an integer, got {env_seed!r}")
    return SolveOptions(starts=args.starts, max_iters=args.max_iters,
                        grad_tol=args.grad_tol, residual_tol=args.residual_tol,
                        seed=seed, polish=not args.no_polish, force=args.force)


def _consts_payload(consts):
    return {
        "lambda1": consts.lambda1,
        "eta0": consts.eta0,
        "d4_sharp": consts.d4_sharp,
        "b": consts.b,
        "mu0": consts.mu0,
        "h0": consts.h0,
    }


def _bounds_payload(bounds):
    if bounds is None:
        return None
    return {
        "applicable": bounds.applicable,
        "lambda_in_range": bounds.lambda_in_range,
        "eta_above_threshold": bounds.eta_above_threshold,
        "kappa": bounds.kappa,
        "norm_exceeds_kappa": bounds.norm_exceeds_kappa,
        "energy_lower_bound": bounds.energy_lower_bound,
        "energy_exceeds_bound": bounds.energy_exceeds_bound,
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args):
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        data = parse_graph_payload(payload)
    except (OSError, json.JSONDecodeError, GraphFormatError) as exc:
        raise _Exit(2, f"cannot parse graph: {exc}")
    report = validate(data)
    obj = {
        "ok": report.ok,
        "violations": [{"code": v.code, "message": v.message} for v in report.violations],
        "mu0": report.mu0,
        "h0": report.h0,
        "connected": report.connected,
        "n_vertices": len(data.ids),
        "n_edges": len(data.edges),
    }
    lines = [f"vertices: {len(data.ids)}  edges: {len(data.edges)}",
             f"mu0 = {report.mu0}" + (f"  h0 = {report.h0}" if report.h0 is not None else ""),
             f"connected: {report.connected}"]
    for v in report.violations:
        lines.append(f"violation [{v.code}] {v.message}")
    lines.append("OK" if report.ok else f"{len(report.violations)} violation(s)")
    _emit(args, _json_text(obj), "\n".join(lines))
    return 0 if report.ok else 1


def _cmd_spectra(args):
    graph = _load_graph_or_fail(args)
    b = 1.0 if args.b is None else args.b
    try:
        consts = compute_constants(graph, kind=args.kind, b=b)
    except KgsError as exc:
        raise _Exit(1, f"spectral computation failed: {exc}")
    obj = _consts_payload(consts)
    obj["note"] = ("eta0 computed at b = 1; eta0 scales linearly in b"
                   if args.b is None else None)
    obj["kappa"] = None
    obj["kappa_explicit"] = None
    if args.a is not None and args.lam is not None and args.eta is not None:
        params = EnergyParams(a=args.a, b=b, lam=args.lam, eta=args.eta, kind=args.kind)
        try:
            obj["kappa"] = kappa(consts, params)
            if args.kind == KIND_WHOLE:
                obj["kappa_explicit"] = kappa_whole_explicit(consts, params)
        except KgsError as exc:
            raise _Exit(1, f"kappa undefined: {exc}")
    summary = [f"lambda1 = {consts.lambda1:.12g}",
               f"eta0 = {consts.eta0:.12g} (b = {b:g})",
               f"d4_sharp = {consts.d4_sharp:.12g}"]
    if obj["kappa"] is not None:
        summary.append(f"kappa = {obj['kappa']:.12g}")
    if obj["note"]:
        summary.append(obj["note"])
    _emit(args, _json_text(obj), "  ".join(summary))
    return 0


def _solve_payload(graph, result, opts):
    return {
        "schema": "kgs.solve/1",
        "kind": result.params.kind,
        "params": {"a": result.params.a, "b": result.params.b,
                   "lambda": result.params.lam, "eta": result.params.eta},
        "options": {"starts": opts.starts, "max_iters": opts.max_iters,
                    "grad_tol": opts.grad_tol, "residual_tol": opts.residual_tol,
                    "seed": opts.seed, "polish": opts.polish,
                    "membership_tol": opts.membership_tol, "force": opts.force},
        "status": result.status,
        "energy": result.energy,
        "norm": result.norm,
        "nehari_residual": result.nehari_residual,
        "max_pointwise_residual": result.max_pointwise_residual,
        "vertices": list(graph.ids),
        "values": None if result.u is None else [float(x) for x in result.u],
        "constants": _consts_payload(result.consts),
        "bounds": _bounds_payload(result.bounds),
        "diagnostics": {
            "backend": result.diagnostics.backend,
            "seed": result.diagnostics.seed,
            "selected_start": result.diagnostics.selected_start,
            "cone_empty": result.diagnostics.cone_empty,
            "note": result.diagnostics.note,
            "distinct_levels": result.diagnostics.distinct_levels,
            "polish": result.diagnostics.polish,
            "starts": [
                {"index": s.index, "label": s.label, "iterations": s.iterations,
                 "converged": s.converged, "grad_norm": s.grad_norm, "energy": s.energy}
                for s in result.diagnostics.starts
            ],
        },
    }


def _cmd_solve(args):
    graph = _load_graph_or_fail(args)
    opts = _options_from(args)
    try:
        params = _params_from(args)
        result = solve(graph, params, opts)
    except KgsError as exc:
        raise _Exit(2, f"solve failed: {exc}")
    summary = f"status: {result.status}"
    if result.energy is not None:
        summary += f"  energy = {result.energy:.12g}  norm = {result.norm:.12g}"
        summary += f"  max_residual = {result.max_pointwise_residual:.3g}"
    _emit(args, _json_text(_solve_payload(graph, result, opts)), summary)
    return _STATUS_EXIT[result.status]


def _parse_grid(spec):
    """Parse 'lambda=lo:hi:n,eta=lo:hi:n[,b=lo:hi:n]' into value arrays."""
    axes = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ValueError(f"malformed grid component {part!r}")
        name, _, rng = part.partition("=")
        name = name.strip()
        if name not in ("lambda", "eta", "b"):
            raise ValueError(f"unknown grid axis {name!r}")
        if name in axes:
            raise ValueError(f"grid axis {name!r} given twice")
        pieces = rng.split(":")
        if len(pieces) == 1:
            axes[name] = [float(pieces[0])]
            continue
        if len(pieces) != 3:
            raise ValueError(f"grid axis {name!r} must be lo:hi:n or a single value")
        lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
        if count < 1:
            raise ValueError(f"grid axis {name!r} must have n >= 1")
        axes[name] = [float(x) for x in np.linspace(lo, hi, count)]
    if not axes:
        raise ValueError("empty grid")
    return axes


def _row_cells(row):
    def fmt(x):
        if x is None:
            return ""
        if isinstance(x, bool):
            return "true" if x else "false"
        return repr(x) if isinstance(x, float) else str(x)
    return [fmt(v) for v in (row.lam, row.eta, row.b, row.status, row.energy,
                             row.norm, row.nehari_residual, row.max_residual,
                             row.kappa, row.bounds_ok)]


def _cmd_sweep(args):
    graph = _load_graph_or_fail(args)
    opts = _options_from(args)
    try:
        axes = _parse_grid(args.grid)
    except ValueError as exc:
        raise _Exit(2, f"malformed grid: {exc}")
    try:
        base = _params_from(args)
        rows = sweep(graph, base,
                     axes.get("lambda", [base.lam]),
                     axes.get("eta", [base.eta]),
                     axes.get("b", [base.b]),
                     opts)
    except KgsError as exc:
        raise _Exit(2, f"sweep failed: {exc}")
    if args.format == "json":
        payload = [dict(zip(_SWEEP_COLUMNS, [r.lam, r.eta, r.b, r.status, r.energy,
                                             r.norm, r.nehari_residual, r.max_residual,
                                             r.kappa, r.bounds_ok])) for r in rows]
        text = _json_text(payload)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)  # csv default line terminator is CRLF per RFC 4180
        writer.writerow(_SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(_row_cells(row))
        text = buf.getvalue()
    solved = sum(1 for r in rows if r.status == SolveStatus.SOLVED)
    _emit(args, text, f"{len(rows)} rows, {solved} solved")
    return 0


def _cmd_verify(args):
    graph = _load_graph_or_fail(args)
    try:
        with open(args.solution, "r", encoding="utf-8") as fh:
            sol = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _Exit(2, f"cannot read solution file: {exc}")
    for key in ("schema", "kind", "params", "options", "status", "vertices", "values", "energy"):
        if key not in sol:
            raise _Exit(2, f"solution file lacks {key!r}")
    if sol["status"] != SolveStatus.SOLVED:
        raise _Exit(2, f"solution file status is {sol['status']!r}; nothing to verify")
    if list(sol["vertices"]) != list(graph.ids):
        raise _Exit(2, "solution file vertices do not match the graph")
    values = sol["values"]
    if values is None or len(values) != graph.n:
        raise _Exit(2, "solution file values do not match the graph")
    p = sol["params"]
    try:
        params = EnergyParams(a=p["a"], b=p["b"], lam=p["lambda"], eta=p["eta"],
                              kind=sol["kind"])
        report = verify(graph, params, np.asarray(values, dtype=np.float64),
                        expected_energy=float(sol["energy"]),
                        membership_tol=float(sol["options"].get("membership_tol", 1e-10)),
                        residual_tol=float(sol["options"].get("residual_tol", 1e-8)))
    except KgsError as exc:
        raise _Exit(2, f"verification failed to run: {exc}")
    obj = {
        "passed": report.passed,
        "energy_recomputed": report.energy_recomputed,
        "energy_matches": report.energy_matches,
        "norm_recomputed": report.norm_recomputed,
        "nehari_residual": report.nehari_residual,
        "nehari_ok": report.nehari_ok,
        "max_pointwise_residual": report.max_pointwise_residual,
        "residual_ok": report.residual_ok,
        "bounds": _bounds_payload(report.bounds),
        "bounds_ok": report.bounds.ok,
    }
    _emit(args, _json_text(obj), "verification " + ("PASSED" if report.passed else "FAILED"))
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(p, kind=True):
    p.add_argument("--input", required=True, help="graph JSON file")
    p.add_argument("--out", default=None, help="output file (stdout when omitted)")
    if kind:
        p.add_argument("--kind", choices=[KIND_DIRICHLET, KIND_WHOLE], required=True)


def _add_params(p, required=True):
    p.add_argument("--a", type=float, required=required, default=None)
    p.add_argument("--b", type=float, required=required, default=None)
    p.add_argument("--lambda", dest="lam", type=float, required=required, default=None)
    p.add_argument("--eta", type=float, required=required, default=None)


def _add_solver_options(p):
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0,
                   help="multistart seed (KGS_SEED overrides when set)")
    p.add_argument("--grad-tol", type=float, default=1e-10)
    p.add_argument("--residual-tol", type=float, default=1e-8)
    p.add_argument("--no-polish", action="store_true")
    p.add_argument("--force", action="store_true",
                   help="run outside the guaranteed parameter range")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="kgs",
        description="Ground states of asymptotically cubic Kirchhoff equations "
                    "on finite weighted graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a graph file against all invariants")
    _add_common(p, kind=False)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("spectra", help="compute lambda1, eta0 and embedding constants")
    _add_common(p)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None,
                   help="quartic coefficient; when omitted eta0 is reported at b = 1")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.set_defaults(fn=_cmd_spectra)

    p = sub.add_parser("solve", help="compute a least-energy solution")
    _add_common(p)
    _add_params(p)
    _add_solver_options(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("sweep", help="solve over a (lambda, eta, b) grid")
    _add_common(p)
    _add_params(p)
    _add_solver_options(p)
    p.add_argument("--grid", required=True,
                   help="axes like 'eta=2:10:5' or 'lambda=0:1:3,eta=5:9:2,b=1'")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("verify", help="independently recheck a solve output file")
    _add_common(p, kind=False)
    p.add_argument("--solution", required=True, help="JSON file written by 'solve'")
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _Exit as exc:
        if exc.message:
            print(f"kgs: {exc.message}", file=sys.stderr)
        return exc.code


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
