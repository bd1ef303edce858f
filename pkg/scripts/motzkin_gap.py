"""Motzkin: how far the solved moments sit from a flat form, order by order.

For each order the script reports the SDP gap and the norms the
decomposition produced; the last norm is the part that keeps the form
from being flat at the default cutoff.
"""
import numpy as np

from borderopt import MomentSequence, build_relaxation, compute_border_basis, decompose, load_problem, solve
from borderopt.cli import corpus_path

f = load_problem(corpus_path("motzkin")).objective
print(f"{'t':>2} {'s':>4} {'p':>4} {'status':>13} {'gap':>9} {'f_mu':>10}  smallest kept norm")
for t in range(4, 10):
    rel = build_relaxation(f, compute_border_basis(f.gradient(), 2 * t), [], t)
    sol = solve(rel.to_sdp())
    dec = decompose(MomentSequence.from_solution(rel, sol))
    tail = min(dec.norms) if dec.norms else float("nan")
    print(f"{t:>2} {rel.s:>4} {rel.p:>4} {sol.status.value:>13} {sol.gap:>9.1e} {sol.primal_objective:>10.2e}  "
          f"{tail:.1e} ({dec.status.value}, rank {dec.rank})")
