"""Moment relaxations: the border-basis reduced one and the full one.

Both builders produce a :class:`MomentRelaxation` whose matrix blocks are
templates, i.e. every entry is a sparse linear combination of moment ids.
Id 0 is always the unit moment ``Λ(1)``, pinned to 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .borderbasis import BorderBasis, DegreeTooSmall
from .polyalg import ConstraintSet, Polynomial, mono_key, mono_mul, monomials_up_to


class SubsetTooLarge(ValueError):
    pass


class TooManyProducts(ValueError):
    pass


@dataclass
class BlockTemplate:
    """Symmetric ``size x size`` block; entry (i, j) is ``sum coef * λ[id]``.

    Stored as COO over the upper triangle (i <= j).
    """

    size: int
    rows: np.ndarray
    cols: np.ndarray
    ids: np.ndarray
    coefs: np.ndarray

    def dense(self, nids: int) -> np.ndarray:
        """Coefficient tensor of shape ``(nids, size, size)``."""
        T = np.zeros((nids, self.size, self.size))
        np.add.at(T, (self.ids, self.rows, self.cols), self.coefs)
        off = self.rows != self.cols
        np.add.at(T, (self.ids[off], self.cols[off], self.rows[off]), self.coefs[off])
        return T

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        M = np.zeros((self.size, self.size))
        np.add.at(M, (self.rows, self.cols), self.coefs * values[self.ids])
        return M + np.triu(M, 1).T

    def entry(self, i: int, j: int) -> dict:
        if i > j:
            i, j = j, i
        sel = (self.rows == i) & (self.cols == j)
        return {int(k): float(c) for k, c in zip(self.ids[sel], self.coefs[sel])}


class _Builder:
    def __init__(self):
        self.rows, self.cols, self.ids, self.coefs = [], [], [], []

    def add(self, i, j, combo):
        for k, c in combo.items():
            self.rows.append(i)
            self.cols.append(j)
            self.ids.append(k)
            self.coefs.append(c)

    def done(self, size):
        return BlockTemplate(
            size,
            np.array(self.rows, dtype=int),
            np.array(self.cols, dtype=int),
            np.array(self.ids, dtype=int),
            np.array(self.coefs, dtype=float),
        )


@dataclass
class MomentRelaxation:
    """Order-``t`` moment SDP over a monomial basis.

    ``monomials[k]`` is the monomial carried by moment id ``k``;
    ``equality_rows`` is an ``(r, nids)`` array of functionals that must
    vanish on ``[λ_0=1, λ_1, ...]``.
    """

    order: int
    nvars: int
    basis: list
    monomials: list
    index: dict
    objective: np.ndarray
    moment_block: BlockTemplate
    localizing_blocks: list = field(default_factory=list)
    localizing_bases: list = field(default_factory=list)
    equality_rows: np.ndarray | None = None
    bb: BorderBasis | None = None
    kind: str = "border"

    @property
    def s(self) -> int:
        return len(self.basis)

    @property
    def nids(self) -> int:
        return len(self.monomials)

    @property
    def p(self) -> int:
        """Free parameters: moment ids other than the pinned unit moment."""
        return self.nids - 1

    def moment_matrix(self, values: np.ndarray) -> np.ndarray:
        return self.moment_block.evaluate(np.asarray(values))

    def objective_value(self, values: np.ndarray) -> float:
        return float(self.objective @ np.asarray(values))

    def moments_from_point(self, xi: Sequence[float]) -> np.ndarray:
        """Moment vector of the point evaluation at ``xi``."""
        return np.array([Polynomial.monomial(m)(xi) for m in self.monomials])

    def to_sdp(self):
        from .sdpsolve import SdpProblem

        blocks = [self.moment_block] + list(self.localizing_blocks)
        eq = self.equality_rows
        if eq is None:
            eq = np.zeros((0, self.nids))
        return SdpProblem(
            blocks=[b.dense(self.nids) for b in blocks],
            objective=self.objective.copy(),
            equality_rows=eq,
            labels=list(self.monomials),
        )


class _Index:
    def __init__(self, nvars):
        one = (0,) * nvars
        self.index = {one: 0}
        self.monomials = [one]

    def combo(self, reduced: dict) -> dict:
        out = {}
        for m, c in reduced.items():
            k = self.index.get(m)
            if k is None:
                k = self.index[m] = len(self.monomials)
                self.monomials.append(m)
            out[k] = out.get(k, 0.0) + c
        return out

    def finalize(self):
        """Renumber ids in graded order; returns old->new map."""
        order = sorted(range(len(self.monomials)), key=lambda k: mono_key(self.monomials[k]))
        remap = np.empty(len(order), dtype=int)
        for new, old in enumerate(order):
            remap[old] = new
        self.monomials = [self.monomials[k] for k in order]
        self.index = {m: i for i, m in enumerate(self.monomials)}
        return remap


def _reduce_poly(p: Polynomial, reduce_mono) -> dict:
    acc: dict = {}
    for m, c in p.terms.items():
        for b, v in reduce_mono(m).items():
            acc[b] = acc.get(b, 0.0) + c * v
    return acc


def _build(f, inequalities, t, basis, reduce_mono, nvars, kind, bb=None, eq_polys=()):
    if f.degree > 2 * t:
        raise DegreeTooSmall(f"objective degree {f.degree} > 2t = {2 * t}")
    idx = _Index(nvars)

    mb = _Builder()
    cache = {}
    for i, a in enumerate(basis):
        for j in range(i, len(basis)):
            m = mono_mul(a, basis[j])
            if m not in cache:
                cache[m] = idx.combo(reduce_mono(m))
            mb.add(i, j, cache[m])

    loc_builders, loc_bases = [], []
    for g in inequalities:
        w = math.ceil(g.degree / 2)
        if w > t:
            raise DegreeTooSmall(f"inequality of degree {g.degree} needs order >= {w}")
        lb = [m for m in basis if sum(m) <= t - w]
        if not lb:
            raise DegreeTooSmall("empty localizing basis")
        b = _Builder()
        for i, a in enumerate(lb):
            for j in range(i, len(lb)):
                prod = g.mul_monomial(mono_mul(a, lb[j]))
                b.add(i, j, idx.combo(_reduce_poly(prod, reduce_mono)))
        loc_builders.append(b)
        loc_bases.append(lb)

    obj_combo = idx.combo(_reduce_poly(f, reduce_mono))
    eq_combos = [idx.combo(_reduce_poly(g, reduce_mono)) for g in eq_polys]

    remap = idx.finalize()
    nids = len(idx.monomials)

    def fix(builder, size):
        blk = builder.done(size)
        blk.ids = remap[blk.ids] if blk.ids.size else blk.ids
        return blk

    objective = np.zeros(nids)
    for k, c in obj_combo.items():
        objective[remap[k]] += c
    eq_rows = np.zeros((len(eq_combos), nids))
    for r, combo in enumerate(eq_combos):
        for k, c in combo.items():
            eq_rows[r, remap[k]] += c

    return MomentRelaxation(
        order=t,
        nvars=nvars,
        basis=list(basis),
        monomials=idx.monomials,
        index=idx.index,
        objective=objective,
        moment_block=fix(mb, len(basis)),
        localizing_blocks=[fix(b, len(lb)) for b, lb in zip(loc_builders, loc_bases)],
        localizing_bases=loc_bases,
        equality_rows=eq_rows,
        bb=bb,
        kind=kind,
    )


def build_relaxation(f: Polynomial, bb: BorderBasis, inequalities: Sequence[Polynomial], t: int) -> MomentRelaxation:
    """Border-basis relaxation of order ``t``; ``bb`` must have degree ``2t``.

    Products ``b_i b_j`` over ``B_t`` and ``g b_i b_j`` are reduced through
    the border basis before being indexed, so the equalities are absorbed
    and ``equality_rows`` stays empty.
    """
    if bb.degree != 2 * t:
        raise ValueError(f"border basis degree {bb.degree} does not match order {t}")
    basis = bb.B_upto(t)
    return _build(f, inequalities, t, basis, bb.reduce_monomial, bb.nvars, "border", bb=bb)


def build_full_relaxation(
    f: Polynomial,
    equalities: Sequence[Polynomial],
    inequalities: Sequence[Polynomial],
    t: int,
    nvars: int | None = None,
) -> MomentRelaxation:
    """Plain moment relaxation over all monomials of degree ``<= t``.

    Each equality ``g`` contributes rows ``Λ(x^a g) = 0`` for
    ``|a| <= 2t - deg g``.
    """
    if nvars is None:
        nvars = f.nvars
    basis = monomials_up_to(nvars, t)
    eq_polys = []
    for g in equalities:
        if g.is_zero():
            continue
        if g.degree > 2 * t:
            raise DegreeTooSmall(f"equality of degree {g.degree} > 2t = {2 * t}")
        for a in monomials_up_to(nvars, 2 * t - g.degree):
            eq_polys.append(g.mul_monomial(a))
    return _build(f, inequalities, t, basis, lambda m: {m: 1.0}, nvars, "full", eq_polys=eq_polys)


# -- constraint generators ---------------------------------------------------


def gradient_ideal_constraints(f: Polynomial) -> list[Polynomial]:
    return f.gradient()


def _poly_det(M: list) -> Polynomial:
    """Determinant of a square matrix of polynomials by cofactor expansion."""
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    nv = M[0][0].nvars
    total = Polynomial.zero(nv)
    for j in range(n):
        if M[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * _poly_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def regular_case_constraints(
    f: Polynomial, cs: ConstraintSet, subsets: Sequence[Sequence[int]] | None = None
) -> list[Polynomial]:
    """Polynomials ``g_ν = det(A_ν A_νᵀ) · ∏_{j∉ν} g⁺_j`` for the regular case.

    ``A_ν`` stacks the gradients of ``f``, of every equality and of the
    inequalities indexed by ``ν``.  By default ``ν`` runs over all subsets
    of the inequality indices with ``|ν| <= n - n₁``.
    """
    n = f.nvars
    n1, n2 = len(cs.equalities), len(cs.inequalities)
    cap = n - n1
    if subsets is None:
        subsets = [nu for k in range(0, max(cap, -1) + 1) for nu in itertools.combinations(range(n2), k)]
    grads_eq = [g.gradient() for g in cs.equalities]
    grads_in = [g.gradient() for g in cs.inequalities]
    out = []
    for nu in subsets:
        nu = tuple(nu)
        if len(nu) > cap:
            raise SubsetTooLarge(f"|ν| = {len(nu)} exceeds n - n₁ = {cap}")
        rows = [f.gradient()] + grads_eq + [grads_in[j] for j in nu]
        gram = [[_dot(a, b) for b in rows] for a in rows]
        g = _poly_det(gram)
        for j in range(n2):
            if j not in nu:
                g = g * cs.inequalities[j]
        out.append(g)
    return out


def _dot(a, b):
    total = Polynomial.zero(a[0].nvars)
    for p, q in zip(a, b):
        total = total + p * q
    return total


def preordering_inequalities(inequalities: Sequence[Polynomial], max_factors: int = 12) -> list[Polynomial]:
    """All nonempty products of distinct inequality constraints."""
    gs = list(inequalities)
    if len(gs) > max_factors:
        raise TooManyProducts(f"{len(gs)} inequalities give {2 ** len(gs) - 1} products")
    out = []
    for k in range(1, len(gs) + 1):
        for combo in itertools.combinations(gs, k):
            p = combo[0]
            for q in combo[1:]:
                p = p * q
            out.append(p)
    return out
