from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from borderopt.borderbasis import (
    DegreeTooSmall,
    InconsistentEqualities,
    check_border_basis,
    compute_border_basis,
    is_connected_to_one,
    normal_form,
)
from borderopt.polyalg import Polynomial, mono_mul, monomials_up_to, variables
from oracles import fr_remainder_dict

# monic forms of the two gradient components, exact
PX = [1, -5, Fraction(28, 3), -9, Fraction(17, 3), -2]
PY = [1, Fraction(-3, 2), 1, Fraction(-1, 2)]


def exact_nf(m):
    """Normal form of x^a y^b: the gradient ideal splits, so reduce each variable separately."""
    a, b = m
    rx = fr_remainder_dict(a, PX) if a >= 5 else {a: Fraction(1)}
    ry = fr_remainder_dict(b, PY) if b >= 3 else {b: Fraction(1)}
    return {(i, j): float(cx * cy) for i, cx in rx.items() for j, cy in ry.items()}


@pytest.fixture
def running_bb(running_f):
    return compute_border_basis(running_f.gradient(), 6)


def test_running_example_basis(running_bb):
    assert running_bb.B_upto(3) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2)]
    assert check_border_basis(running_bb)


def test_running_example_rewrite_rules(running_bb):
    fx = next(f for f in running_bb.F if f.leading_monomial() == (5, 0))
    fy = next(f for f in running_bb.F if f.leading_monomial() == (0, 3))
    for f, coeffs, var in ((fx, PX, 0), (fy, PY, 1)):
        d = len(coeffs) - 1
        for i, c in enumerate(coeffs):
            m = (d - i, 0) if var == 0 else (0, d - i)
            assert abs(f.coeff(m) - float(c)) <= 1e-9


@pytest.mark.parametrize("m", [(0, 3), (1, 3), (0, 4), (5, 0), (2, 3), (1, 4), (6, 0), (5, 1), (3, 3), (2, 4)])
def test_reductions_match_exact_division(running_bb, m):
    got = running_bb.reduce_monomial(m)
    want = exact_nf(m)
    for k in set(got) | set(want):
        assert abs(got.get(k, 0.0) - want.get(k, 0.0)) <= 1e-9, (m, k)


def test_basis_monomials_are_fixed(running_bb):
    for b in running_bb.B:
        assert running_bb.reduce_monomial(b) == {b: 1.0}


def test_normal_form_of_ideal_members_vanishes(running_bb, running_f):
    for g in running_f.gradient():
        for a in monomials_up_to(2, 6 - g.degree):
            assert normal_form(g.mul_monomial(a), running_bb).max_abs_coeff() <= 1e-9


def test_empty_equalities_give_all_monomials():
    bb = compute_border_basis([], 4, nvars=2)
    assert list(bb.B) == monomials_up_to(2, 4)
    assert bb.F == ()


def test_degree_too_small(running_f):
    with pytest.raises(DegreeTooSmall):
        compute_border_basis(running_f.gradient(), 4)


def test_inconsistent():
    x, y = variables(2)
    with pytest.raises(InconsistentEqualities):
        compute_border_basis([x, x - 1], 3)


def test_connected_to_one():
    assert is_connected_to_one([(0, 0), (1, 0), (1, 1)], 2)
    assert not is_connected_to_one([(0, 0), (1, 1)], 2)


def triangular_system(roots, q):
    """{∏(x - r), y - q(x)}: zero-dimensional with one point per root."""
    x, y = variables(2)
    px = Polynomial.constant(2, 1.0)
    for r in roots:
        px = px * (x - r)
    qy = Polynomial.constant(2, 0.0)
    for k, c in enumerate(q):
        qy = qy + c * x**k
    return [px, y - qy], [(r, qy((r, 0.0))) for r in roots]


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.integers(-4, 4), min_size=1, max_size=3, unique=True),
    st.lists(st.integers(-2, 2), min_size=1, max_size=3),
)
def test_random_triangular_ideals(roots, q):
    eqs, pts = triangular_system([r / 2 for r in roots], [c / 2 for c in q])
    D = max(g.degree for g in eqs) + 2
    bb = compute_border_basis(eqs, D)
    assert check_border_basis(bb)
    assert is_connected_to_one(bb.B, 2)
    # γ is injective and every rewrite rule vanishes on the variety
    assert len({f.leading_monomial() for f in bb.F}) == len(bb.F)
    for f in bb.F:
        for p in pts:
            assert abs(f(p)) <= 1e-7 * max(1.0, f.max_abs_coeff()) * 10
    # the quotient has one dimension per point once D is large enough
    assert len(bb.B_upto(D - 1)) >= len(pts)


def test_generic_quadrics_have_four_solutions():
    rng = np.random.default_rng(3)
    for _ in range(10):
        eqs = [Polynomial.from_terms(2, {m: rng.standard_normal() for m in monomials_up_to(2, 2)}) for _ in range(2)]
        bb = compute_border_basis(eqs, 6)
        assert check_border_basis(bb)
        # Bezout: four points, so the standard monomials stabilise at four
        assert len(bb.B_upto(3)) == 4
