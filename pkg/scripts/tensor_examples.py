"""Best rank-1 approximations from the appendix tensor examples."""
import numpy as np

from borderopt import load_problem, minimize
from borderopt.cli import corpus_path

for name in ("tensor_ex3_1", "tensor_ex3_8"):
    pf = load_problem(corpus_path(name))
    out = minimize(pf.objective, pf.constraints)
    print(f"{name}: λ = {-out.f_star:.6f} at order {out.order_reached}, {len(out.minimizers)} point(s)")
    for p in out.minimizers.points:
        print("   u =", np.round(p, 6).tolist())
