import numpy as np
import pytest

from borderopt.borderbasis import check_border_basis
from borderopt.driver import (
    MaxOrderReached,
    MinimizeOptions,
    SolverFailure,
    augment,
    initial_order,
    minimize,
)
from borderopt.polyalg import ConstraintSet, variables


def test_initial_order(running_f, xy):
    x, y = xy
    assert initial_order(running_f, running_f.gradient(), []) == 3
    assert initial_order(x, [], [1 - x**2 - y**4]) == 2


def test_gradient_ideal_defaults(running_f, xy):
    x, _ = xy
    eqs, _ = augment(running_f, ConstraintSet(), MinimizeOptions())
    assert len(eqs) == 2
    eqs, _ = augment(running_f, ConstraintSet([], [x]), MinimizeOptions())
    assert eqs == []
    eqs, _ = augment(running_f, ConstraintSet(), MinimizeOptions(gradient_ideal=False))
    assert eqs == []


def test_running_example(running_f, xy):
    x, y = xy
    out = minimize(running_f)
    assert out.order_reached == 3
    assert abs(out.f_star) <= 1e-5
    assert np.abs(out.minimizers.points - [[1, 1], [2, 1]]).max() <= 1e-4
    assert len(out.minimizer_basis) == 2
    assert out.minimizer_border_basis is not None
    assert check_border_basis(out.minimizer_border_basis, 1e-6)
    for g in out.minimizer_ideal_generators:
        for p in out.minimizers.points:
            assert abs(g(p)) <= 1e-6
    assert [(r.t, r.s, r.p) for r in out.trace] == [(3, 9, 14)]


def test_sum_of_squares(xy):
    x, y = xy
    out = minimize(x**2 + y**2)
    assert out.order_reached == 1
    assert abs(out.f_star) <= 1e-6
    assert np.abs(out.minimizers.points).max() <= 1e-5


def test_constrained_box(xy):
    x, _ = xy
    x1 = variables(1)[0]
    out = minimize(x1**2, ConstraintSet([], [x1 - 1]))
    assert out.f_star == pytest.approx(1.0, abs=1e-5)
    assert out.minimizers.points[:, 0] == pytest.approx([1.0], abs=1e-4)


def test_full_relaxation_agrees(running_f):
    a = minimize(running_f)
    b = minimize(running_f, opts=MinimizeOptions(relaxation="full"))
    assert abs(a.f_star - b.f_star) <= 1e-6
    assert np.abs(a.minimizers.points - b.minimizers.points).max() <= 1e-5


def test_order_cap_raises_with_trace(motzkin):
    with pytest.raises(MaxOrderReached) as err:
        minimize(motzkin, opts=MinimizeOptions(max_order=3))
    assert [r.t for r in err.value.trace] == [3]


def test_infeasible_raises(xy):
    x, y = xy
    with pytest.raises(SolverFailure):
        minimize(x + y, ConstraintSet([], [x - 1, -x - 1]))


def test_trace_is_nondecreasing(robinson):
    out = minimize(robinson)
    f = [r.f_mu for r in out.trace]
    assert all(b >= a - 1e-6 for a, b in zip(f, f[1:]))
    assert out.f_star == pytest.approx(f[-1], abs=1e-5)


def test_seeded_runs_are_identical(running_f):
    a = minimize(running_f, opts=MinimizeOptions(seed=4))
    b = minimize(running_f, opts=MinimizeOptions(seed=4))
    assert np.array_equal(a.minimizers.points, b.minimizers.points)
