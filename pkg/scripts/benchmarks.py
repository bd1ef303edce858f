"""Benchmark rows for the bundled examples: order, p, s, solution count, time.

Timings depend on the machine; only the structural columns are comparable.
"""
import argparse
import time

from borderopt import MaxOrderReached, MinimizeOptions, load_problem, minimize
from borderopt.cli import corpus_path

ROWS = ["robinson", "motzkin", "l01_ex1", "l01_ex5", "running_example"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rank-tol", type=float, default=1e-6)
    ap.add_argument("names", nargs="*", default=ROWS)
    args = ap.parse_args()

    print(f"{'problem':<18}{'v':>3}{'c':>3}{'d':>3}{'sol':>5}{'o':>4}{'p':>6}{'s':>5}{'time':>8}")
    for name in args.names:
        pf = load_problem(corpus_path(name))
        f, cs = pf.objective, pf.constraints
        t0 = time.perf_counter()
        try:
            out = minimize(f, cs, MinimizeOptions(rank_tol=args.rank_tol))
            last = out.trace[-1]
            sol = str(len(out.minimizers))
        except MaxOrderReached as exc:
            last = exc.trace[-1]
            sol = "-"
        dt = time.perf_counter() - t0
        c = len(cs.equalities) + len(cs.inequalities)
        print(f"{name:<18}{pf.nvars:>3}{c:>3}{f.degree:>3}{sol:>5}{last.t:>4}{last.p:>6}{last.s:>5}{dt:>8.2f}")


if __name__ == "__main__":
    main()
