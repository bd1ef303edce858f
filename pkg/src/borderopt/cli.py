"""``borderopt`` command line.

Exit codes: 0 success, 2 unreadable problem, 3 no flat decomposition up to
the order cap, 4 SDP solver failure (including a missing SDPA binary or
result file).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import sdpa
from .borderbasis import InconsistentEqualities, compute_border_basis
from .driver import MaxOrderReached, MinimizationOutcome, MinimizeOptions, SolverFailure, augment, initial_order, minimize
from .polyalg import Polynomial
from .problem import ParseError, ProblemFile, load_problem
from .relaxation import build_full_relaxation, build_relaxation

EXIT_OK, EXIT_PARSE, EXIT_MAX_ORDER, EXIT_SOLVER = 0, 2, 3, 4

# option lines in problem files that map onto flags
_FILE_OPTIONS = {
    "gradient-ideal": ("gradient_ideal", lambda v: v == "on"),
    "regular-case": ("regular_case", lambda v: v == "on"),
    "preordering": ("preordering", lambda v: v == "on"),
    "order-max": ("max_order", int),
    "seed": ("seed", int),
    "rank-tol": ("rank_tol", float),
    "relaxation": ("relaxation", str),
}


def corpus_names() -> list[str]:
    return sorted(p.name[:-3] for p in resources.files("borderopt.corpus").iterdir() if p.name.endswith(".pb"))


def corpus_path(name: str) -> Path:
    return Path(str(resources.files("borderopt.corpus") / f"{name}.pb"))


def resolve_problem(arg: str) -> Path:
    p = Path(arg)
    if not p.exists() and arg in corpus_names():
        return corpus_path(arg)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="borderopt",
        description="Global polynomial minimization with border-basis moment relaxations.",
    )
    ap.add_argument("problem", nargs="?", help="problem file, or the name of a bundled example")
    ap.add_argument("--list-corpus", action="store_true", help="list bundled examples and exit")
    ap.add_argument("--order-max", type=int, help="highest relaxation order (default t0 + 8)")
    ap.add_argument("--order-min", type=int, help="first relaxation order (default t0)")
    ap.add_argument(
        "--gradient-ideal", nargs="?", const="on", choices=["on", "off"],
        help="add the partial derivatives of f as equalities (default: on when unconstrained)",
    )
    ap.add_argument("--regular-case", action="store_true", help="add the regular-case KKT minors")
    ap.add_argument("--preordering", action="store_true", help="use all products of the inequalities")
    ap.add_argument("--relaxation", choices=["border", "full"], help="border-basis or full moment relaxation")
    ap.add_argument("--solver", choices=["internal", "sdpa-file"], default="internal")
    ap.add_argument("--sdpa-dir", help="working directory for --solver sdpa-file")
    ap.add_argument("--export-sdpa", metavar="PATH", help="write the first relaxation in SDPA format and exit")
    ap.add_argument("--seed", type=int, help="seed for the random eigenvector combination")
    ap.add_argument("--rank-tol", type=float, help="relative norm cutoff in the decomposition")
    ap.add_argument("--gap-tol", type=float, help="SDP relative duality gap tolerance")
    ap.add_argument("--feas-tol", type=float, help="SDP feasibility tolerance")
    ap.add_argument("--json", metavar="PATH", help="write the full report as JSON ('-' for stdout)")
    ap.add_argument("--trace", action="store_true", help="print one line per relaxation order")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def options_for(pf: ProblemFile, args) -> MinimizeOptions:
    opts = MinimizeOptions()
    for key, val in pf.options.items():
        if key in _FILE_OPTIONS:
            attr, conv = _FILE_OPTIONS[key]
            setattr(opts, attr, conv(val))
    if args.order_max is not None:
        opts.max_order = args.order_max
    if args.order_min is not None:
        opts.start_order = args.order_min
    if args.gradient_ideal is not None:
        opts.gradient_ideal = args.gradient_ideal == "on"
    if args.regular_case:
        opts.regular_case = True
    if args.preordering:
        opts.preordering = True
    if args.relaxation:
        opts.relaxation = args.relaxation
    opts.solver = args.solver
    opts.sdpa_dir = args.sdpa_dir
    for flag in ("seed", "rank_tol", "gap_tol", "feas_tol"):
        if getattr(args, flag) is not None:
            setattr(opts, flag, getattr(args, flag))
    return opts


# -- report ----------------------------------------------------------------


def poly_json(p: Polynomial, names) -> dict:
    return {
        "text": p.to_string(names, exact=True),
        "terms": [[list(m), c] for m, c in sorted(p.terms.items())],
    }


def outcome_json(out: MinimizationOutcome, names) -> dict:
    ms = out.minimizers
    sol = out.solution
    rep = {
        "status": "success",
        "variables": list(names),
        "f_star": out.f_star,
        "order_reached": out.order_reached,
        "minimizers": {
            "points": ms.points.tolist(),
            "weights": ms.weights.tolist(),
            "f_values": ms.f_values.tolist(),
            "f_star": ms.f_star,
            "seed": ms.seed,
        },
        "minimizer_basis": [poly_json(b, names) for b in out.minimizer_basis],
        "minimizer_ideal_generators": [poly_json(g, names) for g in out.minimizer_ideal_generators],
        "minimizer_border_basis": None,
        "trace": [trace_json(r) for r in out.trace],
    }
    if out.decomposition is not None:
        rep["basis_norms"] = list(map(float, out.decomposition.norms))
    if out.minimizer_border_basis is not None:
        kb = out.minimizer_border_basis
        rep["minimizer_border_basis"] = {
            "B": [list(m) for m in kb.B],
            "F": [poly_json(g, names) for g in kb.F],
        }
    if sol is not None:
        rep["sdp"] = {
            "status": sol.status.value,
            "near_optimal": sol.near_optimal,
            "primal_objective": sol.primal_objective,
            "dual_objective": sol.dual_objective,
            "gap": sol.gap,
            "iterations": sol.iterations,
            "moments": np.asarray(sol.moments).tolist(),
        }
    return rep


def trace_json(r) -> dict:
    return {
        "t": r.t, "f_mu": r.f_mu, "s": r.s, "p": r.p,
        "solver_status": r.solver_status, "decompose_status": r.decompose_status,
    }


def print_trace(trace, stream):
    print(f"{'o':>3} {'p':>6} {'s':>5} {'f_mu':>22}  solver / decomposition", file=stream)
    for r in trace:
        print(f"{r.t:>3} {r.p:>6} {r.s:>5} {r.f_mu:>22.15g}  {r.solver_status} / {r.decompose_status}", file=stream)


def print_outcome(out: MinimizationOutcome, names, stream):
    print(f"f* = {out.f_star:.10g}   (order {out.order_reached})", file=stream)
    print(f"{len(out.minimizers)} minimizer(s):", file=stream)
    for p, w in zip(out.minimizers.points, out.minimizers.weights):
        coords = ", ".join(f"{v:.8g}" for v in p)
        print(f"  ({coords})  weight {w:.4g}", file=stream)
    print("minimizer ideal generated by:", file=stream)
    for g in out.minimizer_ideal_generators:
        print(f"  {g.to_string(names, exact=False)}", file=stream)


def _emit_json(rep: dict, path: str):
    text = json.dumps(rep, indent=2, allow_nan=True)
    if path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def export_first(pf: ProblemFile, opts: MinimizeOptions, path: str):
    f, cs = pf.objective, pf.constraints
    eqs, ineqs = augment(f, cs, opts)
    t = max(initial_order(f, eqs, ineqs), opts.start_order or 0)
    if opts.relaxation == "full":
        rel = build_full_relaxation(f, eqs, ineqs, t, nvars=pf.nvars)
    else:
        rel = build_relaxation(f, compute_border_basis(eqs, 2 * t, nvars=pf.nvars), ineqs, t)
    sdpa.export_sdpa(rel.to_sdp(), path)
    return rel


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.list_corpus:
        for name in corpus_names():
            print(name)
        return EXIT_OK
    if not args.problem:
        ap.error("a problem file is required")

    path = resolve_problem(args.problem)
    try:
        pf = load_problem(path)
    except ParseError as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    names = pf.names
    try:
        opts = options_for(pf, args)
    except ValueError as exc:
        print(f"{path}: bad option value: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.export_sdpa:
        rel = export_first(pf, opts, args.export_sdpa)
        print(f"wrote order-{rel.order} relaxation (s={rel.s}, p={rel.p}) to {args.export_sdpa}")
        return EXIT_OK

    try:
        out = minimize(pf.objective, pf.constraints, opts)
    except MaxOrderReached as exc:
        if args.trace:
            print_trace(exc.trace, sys.stdout)
        print(f"no flat decomposition: {exc}", file=sys.stderr)
        if args.json:
            _emit_json({"status": "max-order-reached", "message": str(exc), "trace": [trace_json(r) for r in exc.trace]}, args.json)
        return EXIT_MAX_ORDER
    except (SolverFailure, InconsistentEqualities, FileNotFoundError, sdpa.ParseError) as exc:
        trace = getattr(exc, "trace", [])
        if args.trace and trace:
            print_trace(trace, sys.stdout)
        print(f"solver failure: {exc}", file=sys.stderr)
        if args.json:
            _emit_json({"status": "solver-failure", "message": str(exc), "trace": [trace_json(r) for r in trace]}, args.json)
        return EXIT_SOLVER

    if args.trace:
        print_trace(out.trace, sys.stdout)
    if args.json != "-":
        print_outcome(out, names, sys.stdout)
    if args.json:
        _emit_json(outcome_json(out, names), args.json)
    return EXIT_OK


run = main

if __name__ == "__main__":
    sys.exit(main())
