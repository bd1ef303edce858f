"""Walk through the running example step by step and print each stage."""
import numpy as np

from borderopt import (
    MomentSequence,
    build_relaxation,
    compute_border_basis,
    decompose,
    extract_points,
    multiplication_matrices,
    solve,
    variables,
)

x, y = variables(2)
f = (x - 1) ** 2 * (x - 2) ** 2 * (x**2 + 1) + (y - 1) ** 2 * (y**2 + 1)
t = 3

bb = compute_border_basis(f.gradient(), 2 * t)
print("B_t:", bb.B_upto(t))
for g in bb.F:
    if g.leading_monomial() in ((5, 0), (0, 3)):
        print("  rewrite rule:", g)

rel = build_relaxation(f, bb, [], t)
print(f"relaxation: s={rel.s} p={rel.p}")

sol = solve(rel.to_sdp())
print(f"SDP {sol.status.value}: f_mu = {sol.primal_objective:.3e}, {sol.iterations} iterations")
for m, v in sol.moment_dict().items():
    print(f"  Λ*(x^{m[0]} y^{m[1]}) = {v:.6f}")

lam = MomentSequence.from_solution(rel, sol)
dec = decompose(lam)
print("basis:", [str(b) for b in dec.basis], "norms:", np.round(dec.norms, 6).tolist())
print("kernel:", [str(r) for r in dec.relations])

Mx, My = multiplication_matrices(dec.basis, lam)
print("M_x =", np.round(Mx, 6).tolist(), " M_y =", np.round(My, 6).tolist())
ms = extract_points([Mx, My], dec.basis, lam, f, direction=(1.0, 1.0))
print("eigenvalues of M_x + M_y:", np.round(np.sort(np.linalg.eigvals(Mx + My).real), 6).tolist())
for p, w in zip(ms.points, ms.weights):
    print(f"  minimizer ({p[0]:.6f}, {p[1]:.6f}) weight {w:.4f}")
