import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from borderopt.sdpsolve import (
    SdpProblem,
    SolverOptions,
    Status,
    kkt_residuals,
    solve,
    solve_standard,
)
from oracles import random_sdp

TIGHT = SolverOptions(gap_tol=1e-10, feas_tol=1e-9)


def disc_problem(scale=1.0):
    """min λ s.t. [[1, λ], [λ, 1]] ⪰ 0; optimum -1."""
    F = np.zeros((2, 2, 2))
    F[0] = np.eye(2)
    F[1] = [[0, 1], [1, 0]]
    return SdpProblem([F], [0.0, scale])


def test_two_by_two():
    sol = solve(disc_problem())
    assert sol.status == Status.OPTIMAL
    assert abs(sol.primal_objective + 1) <= 1e-7
    assert abs(sol.moments[1] + 1) <= 1e-6
    assert sol.primal_objective >= sol.dual_objective - 1e-7


@pytest.mark.parametrize("scale", [1e-3, 1.0, 7.5, 1e3])
def test_objective_scaling(scale):
    sol = solve(disc_problem(scale))
    assert abs(sol.primal_objective / scale + 1) <= 1e-6
    assert abs(sol.moments[1] + 1) <= 1e-5


def test_infeasible():
    # λ >= 1 and λ <= -1
    b1 = np.array([[[-1.0]], [[1.0]]])
    b2 = np.array([[[-1.0]], [[-1.0]]])
    assert solve(SdpProblem([b1, b2], [0, 1])).status == Status.INFEASIBLE


def test_unbounded():
    b = np.array([[[0.0]], [[-1.0]]])
    assert solve(SdpProblem([b], [0, 1])).status == Status.UNBOUNDED


def test_inconsistent_equalities_are_infeasible():
    F = disc_problem().blocks
    rows = np.array([[1.0, 0.0], [0.0, 0.0]])  # 1 = 0
    assert solve(SdpProblem(F, [0, 1], rows)).status == Status.INFEASIBLE


def test_equality_pins_value():
    F = disc_problem().blocks
    rows = np.array([[-0.5, 1.0]])  # λ = 0.5
    sol = solve(SdpProblem(F, [0, 1], rows))
    assert sol.status == Status.OPTIMAL
    assert abs(sol.moments[1] - 0.5) <= 1e-9


def test_rejects_asymmetric_block():
    F = np.zeros((2, 2, 2))
    F[1] = [[0, 1], [0, 0]]
    with pytest.raises(ValueError):
        SdpProblem([F], [0, 1])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_kkt_on_random_instances(seed):
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, 7, size=rng.integers(1, 3))
    C, A, b = random_sdp(rng, sizes, int(rng.integers(1, 12)))
    res = solve_standard(C, A, b, TIGHT)
    # a stall a hair short of the 1e-10 target still has to meet the residual bound
    assert res["status"] in (Status.OPTIMAL, Status.SLOW_PROGRESS)
    kkt = kkt_residuals(C, A, b, res["X"], res["y"], res["Z"])
    assert max(kkt.values()) <= 1e-7
    for X, Z in zip(res["X"], res["Z"]):
        assert np.linalg.eigvalsh(X).min() >= -1e-9
        assert np.linalg.eigvalsh(Z).min() >= -1e-9


def test_running_example_moments(running_f):
    from borderopt.borderbasis import compute_border_basis
    from borderopt.relaxation import build_relaxation

    rel = build_relaxation(running_f, compute_border_basis(running_f.gradient(), 6), [], 3)
    sol = solve(rel.to_sdp())
    assert sol.status == Status.OPTIMAL
    assert abs(sol.primal_objective) <= 1e-6
    # the measure (δ(1,1) + δ(2,1)) / 2
    mom = sol.moment_dict()
    for m, v in mom.items():
        want = 0.5 * (1 ** m[0] * 1 ** m[1] + 2 ** m[0] * 1 ** m[1])
        assert abs(v - want) <= 1e-4, m
