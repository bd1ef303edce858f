import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from borderopt.decompose import (
    DecompositionStatus,
    MomentSequence,
    NumericBreakdown,
    decompose,
    inner_product,
)
from borderopt.polyalg import Polynomial, monomials_up_to, variables
from oracles import point_moments, random_measure

RUNNING_POINTS = [(1.0, 1.0), (2.0, 1.0)]


def running_moments(t=3):
    return MomentSequence.from_points(RUNNING_POINTS, [0.5, 0.5], t)


def span_distance(rels, target):
    """Largest residual of projecting each target onto span(rels), coefficientwise."""
    monos = sorted({m for p in rels + target for m in p.terms})
    R = np.array([[p.coeff(m) for m in monos] for p in rels]).T
    worst = 0.0
    for q in target:
        v = np.array([q.coeff(m) for m in monos])
        c = np.linalg.lstsq(R, v, rcond=None)[0]
        worst = max(worst, np.abs(R @ c - v).max())
    return worst


def test_from_points_matches_direct_evaluation():
    lam = running_moments()
    for m in monomials_up_to(2, 6):
        assert lam.mono(m) == pytest.approx(point_moments(RUNNING_POINTS, [0.5, 0.5], [m])[0], abs=1e-12)


def test_running_example_decomposition():
    x, y = variables(2)
    res = decompose(running_moments())
    assert res.status == DecompositionStatus.SUCCESS
    assert res.rank == 2
    assert res.norms == pytest.approx([1.0, 0.25], abs=1e-12)
    # basis spans {1, x - 1.5}
    assert span_distance(res.basis, [Polynomial.constant(2, 1.0), x - 1.5]) <= 1e-9
    kernel = [y - 1, x**2 - 3 * x + 2, x * y - 1.5 * y - x + 1.5]
    assert span_distance(res.relations, kernel) <= 1e-9
    assert span_distance(kernel, res.relations) <= 1e-9


def test_basis_is_orthogonal():
    lam = running_moments()
    res = decompose(lam)
    G = np.array([[inner_product(p, q, lam) for q in res.basis] for p in res.basis])
    assert np.abs(G - np.diag(np.diag(G))).max() <= 1e-10


def test_relations_are_in_the_kernel():
    lam = running_moments()
    res = decompose(lam)
    for r in res.relations:
        for m in monomials_up_to(2, 1):
            assert abs(inner_product(r, Polynomial.monomial(m), lam)) <= 1e-10


def test_order_too_low_fails():
    # four generic points need degree-1 basis elements times x: not flat at t = 1
    pts = [(0.1, 0.2), (-0.5, 0.7), (0.9, -0.3), (-0.2, -0.8)]
    res = decompose(MomentSequence.from_points(pts, [0.25] * 4, 1))
    assert res.status == DecompositionStatus.FAILED


def test_non_flat_form_fails():
    """Lebesgue-like moments on [-1, 1] never become flat."""
    t = 4
    vals = {(k,): (0.0 if k % 2 else 1.0 / (k + 1)) for k in range(2 * t + 1)}
    res = decompose(MomentSequence(vals, t, 1))
    assert res.status == DecompositionStatus.FAILED


def test_negative_norm_is_a_breakdown():
    vals = {(0,): 1.0, (1,): 0.0, (2,): -1.0}
    with pytest.raises(NumericBreakdown):
        decompose(MomentSequence(vals, 1, 1))


def test_single_point():
    res = decompose(MomentSequence.from_points([(0.3, -0.7)], [1.0], 2))
    assert res.ok and res.rank == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.integers(1, 4))
def test_rank_equals_number_of_points(seed, n, r):
    rng = np.random.default_rng(seed)
    pts, w = random_measure(rng, n, r)
    res = decompose(MomentSequence.from_points(pts, w, 4))
    assert res.ok
    assert res.rank == r
    for rel in res.relations:
        for p in pts:
            assert abs(rel(p)) <= 1e-6
