"""Graded border bases of an equality ideal, truncated at a fixed degree.

The construction works on the vector space ``V = <x^a g : deg <= D>`` of all
prolongations of the equalities up to degree ``D``.  A top-down elimination
by degree block gives the filtration ``V ∩ R_d``; a second, bottom-up pass
picks the leading monomials degree by degree with the tolerant choice rule
(largest coefficient wins) while keeping the complement ``B`` connected to 1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polyalg import (
    Monomial,
    Polynomial,
    mono_key,
    mono_mul,
    mono_var,
    monomials_up_to,
)

log = logging.getLogger(__name__)


class DegreeTooSmall(ValueError):
    pass


class NumericalBreakdown(ArithmeticError):
    pass


class InconsistentEqualities(ValueError):
    """The equalities generate the unit ideal up to the working degree."""


def predecessors(m: Monomial) -> list[Monomial]:
    return [m[:i] + (m[i] - 1,) + m[i + 1:] for i in range(len(m)) if m[i] > 0]


def prolongation(monos: Sequence[Monomial], nvars: int) -> set:
    """``B+ = B ∪ x_1 B ∪ ... ∪ x_n B``."""
    out = set(monos)
    for m in monos:
        for k in range(nvars):
            out.add(mono_mul(m, mono_var(nvars, k)))
    return out


def is_connected_to_one(monos: Sequence[Monomial], nvars: int) -> bool:
    s = set(monos)
    if (0,) * nvars not in s:
        return False
    return all(sum(m) == 0 or any(p in s for p in predecessors(m)) for m in s)


@dataclass(frozen=True, eq=False)
class BorderBasis:
    """Monomial set ``B`` connected to 1 and its rewrite family ``F``.

    ``F`` is monic in its leading monomial and indexed by ``leading``.
    ``reductions`` holds the normal form of every non-``B`` monomial of
    degree at most ``degree``, border or interior, as ``{b: coeff}``.
    """

    nvars: int
    degree: int
    B: tuple
    F: tuple
    leading: dict
    reductions: dict = field(repr=False)

    @property
    def border(self) -> list[Monomial]:
        b = set(self.B)
        return sorted(
            (m for m in prolongation(self.B, self.nvars) if m not in b and sum(m) <= self.degree),
            key=mono_key,
        )

    def B_upto(self, d: int) -> list[Monomial]:
        return [m for m in self.B if sum(m) <= d]

    def reduce_monomial(self, m: Monomial) -> dict:
        if sum(m) > self.degree:
            raise DegreeTooSmall(f"monomial of degree {sum(m)} above border basis degree {self.degree}")
        red = self.reductions.get(m)
        if red is None:
            return {m: 1.0}
        return red


def normal_form(p: Polynomial, bb: BorderBasis) -> Polynomial:
    """Projection of ``p`` onto ``<B>`` along ``<F|degree>``."""
    if p.nvars != bb.nvars:
        raise ValueError("variable count mismatch")
    if p.degree > bb.degree:
        raise DegreeTooSmall(f"degree {p.degree} > {bb.degree}")
    acc: dict = {}
    for m, c in p.terms.items():
        for b, v in bb.reduce_monomial(m).items():
            acc[b] = acc.get(b, 0.0) + c * v
    scale = max(p.max_abs_coeff(), 1e-300)
    return Polynomial(p.nvars, {m: c for m, c in acc.items() if abs(c) > 1e-12 * scale})


def compute_border_basis(
    equalities: Sequence[Polynomial],
    degree: int,
    nvars: int | None = None,
    tol: float = 1e-9,
    verify: bool = True,
) -> BorderBasis:
    """Graded border basis of ``equalities`` in degree ``degree``.

    ``tol`` is the relative pivot threshold; rows whose remaining entries
    fall below ``tol`` (rows are scaled to unit max-norm) count as zero.
    """
    eqs = [g for g in equalities if not g.is_zero()]
    if nvars is None:
        if not equalities:
            raise ValueError("nvars is required when there are no equalities")
        nvars = equalities[0].nvars
    for g in eqs:
        if g.nvars != nvars:
            raise ValueError("variable count mismatch")
        if g.degree > degree:
            raise DegreeTooSmall(f"equality of degree {g.degree} exceeds border basis degree {degree}")

    monos = monomials_up_to(nvars, degree)
    col = {m: i for i, m in enumerate(monos)}
    mdeg = np.array([sum(m) for m in monos])

    rows = []
    for g in eqs:
        for a in monomials_up_to(nvars, degree - g.degree):
            r = np.zeros(len(monos))
            for m, c in g.terms.items():
                r[col[mono_mul(m, a)]] = c
            rows.append(r / np.max(np.abs(r)))
    if not rows:
        return _trivial(nvars, degree, monos)
    A, row_deg = _stable_span(np.array(rows), monos, col, mdeg, degree, nvars, tol)
    leads = _choose_leading(A, row_deg, monos, mdeg, degree, nvars, tol)
    reductions = _reduce(A, row_deg, leads, monos, mdeg, degree)

    lead_set = set(reductions)
    B = tuple(m for m in monos if m not in lead_set)
    if not B:
        raise InconsistentEqualities("the equalities have no common root")
    border = [m for m in sorted(prolongation(B, nvars), key=mono_key) if m in lead_set]
    F = []
    leading = {}
    for m in border:
        terms = {m: 1.0}
        for b, c in reductions[m].items():
            terms[b] = -c
        leading[m] = len(F)
        F.append(Polynomial(nvars, terms))
    bb = BorderBasis(nvars, degree, B, tuple(F), leading, reductions)
    if verify:
        report = check_border_basis(bb)
        if not report:
            raise NumericalBreakdown("border basis check failed: " + "; ".join(report.violations))
    return bb


def _trivial(nvars, degree, monos):
    return BorderBasis(nvars, degree, tuple(monos), (), {}, {})


def _stable_span(A, monos, col, mdeg, D, nvars, tol, max_rounds=50):
    """Close ``span(A)`` under ``v -> x_i v`` whenever ``deg(x_i v) <= D``.

    Degree drops (top-degree cancellation between prolongations) produce
    low-degree elements whose multiples are missing from the plain
    prolongation; they are added until the dimension stabilises.
    """
    shift = []
    for k in range(nvars):
        xk = mono_var(nvars, k)
        src = [i for i, m in enumerate(monos) if sum(m) < D]
        dst = [col[mono_mul(monos[i], xk)] for i in src]
        shift.append((np.array(src), np.array(dst)))
    row_deg = _filtration(A, mdeg, D, tol)
    for _ in range(max_rounds):
        keep = row_deg >= 0
        basis, bdeg = A[keep], row_deg[keep]
        low = basis[bdeg < D]
        new = []
        for src, dst in shift:
            S = np.zeros_like(low)
            S[:, dst] = low[:, src]
            new.append(S)
        if not new or low.shape[0] == 0:
            return basis, bdeg
        cand = np.vstack([basis] + new)
        cand /= np.max(np.abs(cand), axis=1, keepdims=True)
        cdeg = _filtration(cand, mdeg, D, tol)
        if np.count_nonzero(cdeg >= 0) == basis.shape[0]:
            return basis, bdeg
        A, row_deg = cand, cdeg
    raise NumericalBreakdown("prolongation closure did not stabilise")


def _filtration(A: np.ndarray, mdeg: np.ndarray, D: int, tol: float) -> np.ndarray:
    """Top-down elimination by degree block, in place.

    Returns the degree assigned to each row (-1 for dependent rows).  A row
    of degree d ends with exact zeros in every column of degree above d.
    """
    nrows = A.shape[0]
    row_deg = np.full(nrows, -1)
    active = np.ones(nrows, dtype=bool)
    for d in range(D, -1, -1):
        cols = np.flatnonzero(mdeg == d)
        while True:
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            sub = np.abs(A[np.ix_(idx, cols)])
            k = np.argmax(sub)
            i, j = divmod(k, cols.size)
            if sub[i, j] < tol:
                break
            r, c = idx[i], cols[j]
            piv = A[r].copy()
            others = idx[idx != r]
            factors = A[others, c] / piv[c]
            A[others] -= np.outer(factors, piv)
            A[others, c] = 0.0
            row_deg[r] = d
            active[r] = False
        idx = np.flatnonzero(active)
        A[np.ix_(idx, cols)] = 0.0
    return row_deg


def _choose_leading(A, row_deg, monos, mdeg, D, nvars, tol):
    """Bottom-up choice of leading monomials; returns a set."""
    leads: set = set()
    for d in range(D + 1):
        ridx = np.flatnonzero(row_deg == d)
        if ridx.size == 0:
            continue
        cols = np.flatnonzero(mdeg == d)
        W = A[np.ix_(ridx, cols)].copy()
        W /= np.max(np.abs(W), axis=1, keepdims=True)
        orphan = np.array(
            [d > 0 and all(p in leads for p in predecessors(monos[c])) for c in cols]
        )
        free = np.ones(cols.size, dtype=bool)
        live = np.ones(ridx.size, dtype=bool)
        for _ in range(ridx.size):
            pick = None
            for allowed in (orphan & free, free):
                if not allowed.any():
                    continue
                sub = np.abs(W[np.ix_(live, allowed)])
                k = np.argmax(sub)
                i, j = divmod(k, sub.shape[1])
                if sub[i, j] >= tol:
                    pick = (np.flatnonzero(live)[i], np.flatnonzero(allowed)[j])
                    break
            if pick is None:
                raise NumericalBreakdown(f"no choosable pivot left in degree {d}")
            i, j = pick
            prow = W[i].copy()
            rest = np.flatnonzero(live)
            rest = rest[rest != i]
            W[rest] -= np.outer(W[rest, j] / prow[j], prow)
            live[i] = False
            free[j] = False
            leads.add(monos[cols[j]])
        if (orphan & free).any():
            stuck = [monos[cols[j]] for j in np.flatnonzero(orphan & free)]
            raise NumericalBreakdown(f"monomials {stuck} cannot stay connected to 1")
    return leads


def _reduce(A, row_deg, leads, monos, mdeg, D):
    """Solve for rows equal to ``m + (B part)`` for each leading ``m``."""
    col = {m: i for i, m in enumerate(monos)}
    lead_cols_by_deg = {}
    for m in leads:
        lead_cols_by_deg.setdefault(sum(m), []).append(col[m])
    is_lead = np.zeros(len(monos), dtype=bool)
    for m in leads:
        is_lead[col[m]] = True

    done_cols: list[int] = []
    done_rows: list[np.ndarray] = []
    reduced_rows = {}
    for d in range(D + 1):
        ridx = np.flatnonzero(row_deg == d)
        if ridx.size == 0:
            continue
        R = A[ridx].copy()
        if done_cols:
            low = np.array(done_rows)
            R -= R[:, done_cols] @ low
            R[:, done_cols] = 0.0
        lc = sorted(lead_cols_by_deg[d])
        T = R[:, lc]
        S = np.linalg.solve(T, R)
        S[:, lc] = np.eye(len(lc))
        S[:, mdeg > d] = 0.0
        for c, row in zip(lc, S):
            reduced_rows[c] = row
            done_cols.append(c)
            done_rows.append(row)

    reductions = {}
    bcols = np.flatnonzero(~is_lead)
    for c, row in reduced_rows.items():
        scale = max(1.0, np.max(np.abs(row[bcols]), initial=0.0))
        nf = {monos[b]: -row[b] for b in bcols if abs(row[b]) > 1e-13 * scale}
        reductions[monos[c]] = nf
    return reductions


@dataclass
class BorderBasisReport:
    ok: bool
    violations: list

    def __bool__(self):
        return self.ok


def check_border_basis(bb: BorderBasis, tol: float = 1e-8) -> BorderBasisReport:
    """Check every defining condition of a border basis in degree ``bb.degree``."""
    n, D = bb.nvars, bb.degree
    bad = []
    Bset = set(bb.B)
    if not is_connected_to_one(bb.B, n):
        bad.append("connected to 1")
    plus = prolongation(bb.B, n)
    border = {m for m in plus if m not in Bset and sum(m) <= D}

    gammas = []
    for idx, f in enumerate(bb.F):
        supp = set(f.terms)
        if not supp <= plus or f.degree > D:
            bad.append(f"support of F[{idx}] leaves B+ ∩ R_{D}")
        in_border = [m for m in supp if m in border]
        if len(in_border) != 1:
            bad.append(f"F[{idx}] has {len(in_border)} border monomials")
            continue
        g = in_border[0]
        if abs(f.coeff(g) - 1.0) > tol:
            bad.append(f"F[{idx}] not monic in its leading monomial")
        if sum(g) != f.degree:
            bad.append(f"F[{idx}] not graded")
        gammas.append(g)
    if len(set(gammas)) != len(gammas):
        bad.append("γ injectivity")
    missing = border - set(gammas)
    if missing:
        bad.append(f"border monomials without a rewrite rule: {sorted(missing, key=mono_key)[:5]}")

    if not bad:
        bad.extend(_direct_sum_violations(bb, tol))
    return BorderBasisReport(not bad, bad)


def _direct_sum_violations(bb: BorderBasis, tol: float) -> list:
    n, D = bb.nvars, bb.degree
    monos = monomials_up_to(n, D)
    col = {m: i for i, m in enumerate(monos)}
    prol = []
    for f in bb.F:
        for a in monomials_up_to(n, D - f.degree):
            r = np.zeros(len(monos))
            for m, c in f.terms.items():
                r[col[mono_mul(m, a)]] = c
            prol.append((f.degree + sum(a), r))
    out = []
    for d in range(D + 1):
        ncols = sum(1 for m in monos if sum(m) <= d)
        nb = sum(1 for m in bb.B if sum(m) <= d)
        rows = [r[:ncols] for deg, r in prol if deg <= d]
        rank_f = _rank(np.array(rows)) if rows else 0
        if nb + rank_f != ncols:
            out.append(f"degree {d}: dim<B> {nb} + dim<F|{d}> {rank_f} != {ncols}")
            continue
        if rows:
            units = np.zeros((nb, ncols))
            for i, m in enumerate(m for m in bb.B if sum(m) <= d):
                units[i, col[m]] = 1.0
            if _rank(np.vstack([units, np.array(rows)])) != ncols:
                out.append(f"degree {d}: <B> and <F|{d}> intersect")
    return out


def _rank(M: np.ndarray, rel: float = 1e-9) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rel * max(s[0], 1.0)))
