import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from borderopt.decompose import MomentSequence, decompose
from borderopt.minimizers import (
    ComplexEigenvalue,
    NonGenericCombination,
    eigen_residual,
    extract_points,
    multiplication_matrices,
)
from borderopt.polyalg import monomials_up_to
from oracles import point_moments, random_measure


def setup(points, weights, t=3):
    lam = MomentSequence.from_points(points, weights, t)
    res = decompose(lam)
    assert res.ok
    return lam, res, multiplication_matrices(res.basis, lam)


def test_running_example_matrices(running_f):
    lam, res, (Mx, My) = setup([(1.0, 1.0), (2.0, 1.0)], [0.5, 0.5])
    # basis is {1, x - 1.5} up to sign of the second element
    sign = np.sign(res.basis[1].coeff((1, 0)))
    assert Mx[0, 0] == pytest.approx(1.5, abs=1e-9)
    assert Mx[1, 1] == pytest.approx(1.5, abs=1e-9)
    assert Mx[0, 1] * sign == pytest.approx(0.25, abs=1e-9)
    assert Mx[1, 0] * sign == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(My, np.eye(2), atol=1e-9)
    assert np.sort(np.linalg.eigvals(Mx + My).real) == pytest.approx([2.0, 3.0], abs=1e-9)


def test_running_example_points(running_f):
    lam, res, mats = setup([(1.0, 1.0), (2.0, 1.0)], [0.5, 0.5])
    ms = extract_points(mats, res.basis, lam, running_f, direction=(1.0, 1.0))
    assert np.allclose(ms.points, [[1, 1], [2, 1]], atol=1e-9)
    assert np.allclose(ms.weights, [0.5, 0.5], atol=1e-9)
    assert ms.f_star == pytest.approx(0.0, abs=1e-9)


def test_single_point():
    lam, res, mats = setup([(0.25, -0.5)], [1.0], 2)
    assert [M.shape for M in mats] == [(1, 1), (1, 1)]
    ms = extract_points(mats, res.basis, lam)
    assert np.allclose(ms.points, [[0.25, -0.5]])
    assert ms.weights == pytest.approx([1.0])


def test_three_point_measure():
    pts = np.array([[-0.5, 0.1], [0.2, 0.8], [0.7, -0.6]])
    w = np.array([0.2, 0.3, 0.5])
    lam, res, mats = setup(pts, w)
    assert np.linalg.norm(mats[0] @ mats[1] - mats[1] @ mats[0]) <= 1e-6
    ms = extract_points(mats, res.basis, lam, seed=1)
    assert np.abs(ms.points - pts).max() <= 1e-6
    assert np.abs(ms.weights - w).max() <= 1e-6
    # evaluation consistency on B_t · B_t
    for m in monomials_up_to(2, 6):
        assert abs(lam.mono(m) - point_moments(ms.points, ms.weights, [m])[0]) <= 1e-5


def test_eigen_residual_small():
    pts = np.array([[-0.5, 0.1], [0.2, 0.8], [0.7, -0.6]])
    lam, res, mats = setup(pts, [1 / 3] * 3)
    ms = extract_points(mats, res.basis, lam)
    ev, U = np.linalg.eig(sum(c * M for c, M in zip((0.6, 0.8), mats)))
    U = U.real[:, np.argsort(ev.real)]
    order = np.argsort(ms.points @ np.array([0.6, 0.8]))
    assert eigen_residual(mats, ms.points[order], U) <= 1e-6


def test_degenerate_direction_is_rejected():
    lam, res, mats = setup([(1.0, 1.0), (2.0, 1.0)], [0.5, 0.5])
    with pytest.raises(NonGenericCombination):
        extract_points(mats, res.basis, lam, direction=(0.0, 1.0))


def test_complex_eigenvalues_are_rejected():
    rot = [np.array([[0.0, -1.0], [1.0, 0.0]]), np.eye(2)]
    lam, res, _ = setup([(1.0, 1.0), (2.0, 1.0)], [0.5, 0.5])
    with pytest.raises(ComplexEigenvalue):
        extract_points(rot, res.basis, lam, direction=(1.0, 0.0))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_seed_invariance(seed):
    rng = np.random.default_rng(seed)
    pts, w = random_measure(rng, 2, 3)
    lam, res, mats = setup(pts, w, 4)
    runs = [extract_points(mats, res.basis, lam, seed=s).points for s in range(5)]
    for r in runs[1:]:
        assert np.abs(r - runs[0]).max() <= 1e-6
    again = extract_points(mats, res.basis, lam, seed=0).points
    assert np.array_equal(again, runs[0])
