"""Outer relaxation loop: raise the order until the optimum decomposes."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .borderbasis import (
    BorderBasis,
    DegreeTooSmall,
    InconsistentEqualities,
    NumericalBreakdown,
    check_border_basis,
    compute_border_basis,
)
from .decompose import DecompositionResult, MomentSequence, NumericBreakdown, decompose
from .minimizers import (
    ComplexEigenvalue,
    MinimizerSet,
    NegativeWeight,
    NonGenericCombination,
    extract_points,
    multiplication_matrices,
)
from .polyalg import ConstraintSet, Polynomial
from .relaxation import (
    build_full_relaxation,
    build_relaxation,
    gradient_ideal_constraints,
    preordering_inequalities,
    regular_case_constraints,
)
from .sdpsolve import SdpSolution, SolverOptions, Status, solve

log = logging.getLogger(__name__)


class MaxOrderReached(RuntimeError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


class SolverFailure(RuntimeError):
    def __init__(self, status, trace):
        super().__init__(f"SDP solver returned {status.value}")
        self.status = status
        self.trace = trace


@dataclass
class MinimizeOptions:
    max_order: int | None = None  # default t0 + 8
    start_order: int | None = None
    gradient_ideal: bool | None = None  # None: on when unconstrained
    regular_case: bool = False
    preordering: bool = False
    relaxation: str = "border"  # or "full"
    solver: str = "internal"  # or "sdpa-file"
    sdpa_dir: str | None = None
    seed: int = 0
    rank_tol: float = 1e-6
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200


@dataclass
class TraceRow:
    t: int
    f_mu: float
    s: int
    p: int
    solver_status: str
    decompose_status: str


@dataclass
class MinimizationOutcome:
    f_star: float
    minimizers: MinimizerSet
    minimizer_basis: list
    minimizer_ideal_generators: list
    order_reached: int
    trace: list = field(default_factory=list)
    minimizer_border_basis: BorderBasis | None = None
    decomposition: DecompositionResult | None = None
    solution: SdpSolution | None = None


def initial_order(f: Polynomial, equalities, inequalities) -> int:
    degs = [f.degree] + [g.degree for g in equalities] + [g.degree for g in inequalities]
    return max(1, max(math.ceil(d / 2) for d in degs))


def augment(f: Polynomial, cs: ConstraintSet, opts: MinimizeOptions) -> tuple[list, list]:
    """Equalities and inequalities actually fed to the relaxation."""
    eqs = list(cs.equalities)
    ineqs = list(cs.inequalities)
    grad = opts.gradient_ideal if opts.gradient_ideal is not None else cs.unconstrained
    if grad:
        eqs += [g for g in gradient_ideal_constraints(f) if not g.is_zero()]
    if opts.regular_case:
        eqs += [g for g in regular_case_constraints(f, cs) if not g.is_zero()]
    if opts.preordering and ineqs:
        ineqs = preordering_inequalities(ineqs)
    return eqs, ineqs


def _solve(rel, opts: MinimizeOptions, tighten: int):
    sopts = SolverOptions(
        gap_tol=opts.gap_tol / 100**tighten, feas_tol=opts.feas_tol / 100**tighten, max_iter=opts.max_iter
    )
    prob = rel.to_sdp()
    if opts.solver == "sdpa-file":
        from .sdpa import solve_external

        return solve_external(prob, opts.sdpa_dir or ".", name=f"order{rel.order}")
    return solve(prob, sopts)


def minimizer_border_basis(relations: list, rank: int, nvars: int, tol: float = 1e-6) -> BorderBasis | None:
    """Border basis of the ideal generated by the kernel relations.

    Tries degrees from ``max deg`` upward until the quotient has dimension
    ``rank``; returns None if that never happens.
    """
    if not relations:
        return None
    d0 = max(p.degree for p in relations)
    for D in range(d0, d0 + 3):
        try:
            bb = compute_border_basis(relations, D, nvars=nvars, tol=tol, verify=False)
        except (NumericalBreakdown, ValueError):
            continue
        if len(bb.B) == rank and check_border_basis(bb, tol=max(tol, 1e-8)):
            return bb
    return None


def minimize(f: Polynomial, cs: ConstraintSet | None = None, opts: MinimizeOptions | None = None) -> MinimizationOutcome:
    cs = cs or ConstraintSet()
    opts = opts or MinimizeOptions()
    eqs, ineqs = augment(f, cs, opts)
    t0 = initial_order(f, eqs, ineqs)
    if opts.start_order is not None:
        t0 = max(t0, opts.start_order)
    t_max = opts.max_order if opts.max_order is not None else t0 + 8
    trace: list[TraceRow] = []
    n = f.nvars

    t = t0
    tighten = 0
    while t <= t_max:
        if opts.relaxation == "full":
            rel = build_full_relaxation(f, eqs, ineqs, t, nvars=n)
        else:
            try:
                bb = compute_border_basis(eqs, 2 * t, nvars=n)
            except InconsistentEqualities:
                raise
            except (NumericalBreakdown, DegreeTooSmall) as exc:
                # high degrees of an ill-scaled ideal: no more orders to try
                raise MaxOrderReached(f"border basis fails at order {t}: {exc}", trace) from exc
            rel = build_relaxation(f, bb, ineqs, t)
        sol = _solve(rel, opts, tighten)
        row = TraceRow(t, sol.primal_objective, rel.s, rel.p, sol.status.value, "-")
        trace.append(row)
        log.info("order %d: s=%d p=%d f_mu=%.10g %s", t, rel.s, rel.p, sol.primal_objective, sol.status.value)
        if sol.status == Status.INFEASIBLE:
            raise SolverFailure(sol.status, trace)
        if not sol.usable:
            # an unbounded or stalled relaxation is not yet exact at this order
            t += 1
            continue

        try:
            lam = MomentSequence.from_solution(rel, sol)
            dec = decompose(lam, rank_tol=opts.rank_tol)
            row.decompose_status = dec.status.value
            if dec.ok:
                mats = multiplication_matrices(dec.basis, lam)
                pts = extract_points(mats, dec.basis, lam, f, seed=opts.seed)
        except (NumericBreakdown, ComplexEigenvalue, NonGenericCombination, NegativeWeight) as exc:
            row.decompose_status = type(exc).__name__
            if tighten == 0:
                tighten = 1
                log.info("order %d: %s, tightening solver tolerances", t, exc)
                continue
            tighten = 0
            t += 1
            continue

        if dec.ok:
            kbb = minimizer_border_basis(dec.relations, dec.rank, n)
            return MinimizationOutcome(
                f_star=sol.primal_objective,
                minimizers=pts,
                minimizer_basis=dec.basis,
                minimizer_ideal_generators=dec.relations,
                order_reached=t,
                trace=trace,
                minimizer_border_basis=kbb,
                decomposition=dec,
                solution=sol,
            )
        tighten = 0
        t += 1
    raise MaxOrderReached(f"no flat decomposition up to order {t_max}", trace)
