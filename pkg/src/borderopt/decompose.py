"""Orthogonal-basis decomposition of an optimal linear form.

Polynomials of degree <= t are handled as dense coefficient vectors over
``monomials_up_to(n, t)``; the bilinear form ``⟨p, q⟩ = Λ(p q)`` is then
``pᵀ H q`` with ``H[a, b] = Λ(π(x^a x^b))``.  Entries that ``Λ`` cannot
evaluate (products outside the relaxation) are NaN and only hurt if a
computation actually touches them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .borderbasis import BorderBasis, DegreeTooSmall
from .polyalg import Polynomial, mono_key, mono_mul, monomials_up_to


class NumericBreakdown(ArithmeticError):
    """A norm ``Λ(b²)`` came out negative: the form is not PSD numerically."""


class MomentSequence:
    """Values of ``Λ`` on monomials, optionally routed through a border basis.

    Monomials of degree <= ``2t`` are evaluated by reducing them with
    ``bb`` (when given) and reading the stored values of the result.
    """

    def __init__(self, values: dict, t: int, nvars: int, bb: BorderBasis | None = None):
        self.values = {tuple(m): float(v) for m, v in values.items()}
        self.t = t
        self.nvars = nvars
        self.bb = bb
        self._cache: dict = {}

    @classmethod
    def from_solution(cls, relaxation, solution) -> "MomentSequence":
        vals = dict(zip(relaxation.monomials, solution.moments))
        return cls(vals, relaxation.order, relaxation.nvars, relaxation.bb)

    @classmethod
    def from_points(cls, points, weights, t: int) -> "MomentSequence":
        """Moments of ``Σ w_i ev_{ξ_i}`` up to degree ``2t``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.asarray(weights, dtype=float)
        n = pts.shape[1]
        vals = {m: float(w @ np.prod(pts ** np.array(m), axis=1)) for m in monomials_up_to(n, 2 * t)}
        return cls(vals, t, n)

    def mono(self, m) -> float:
        m = tuple(m)
        if m in self._cache:
            return self._cache[m]
        if sum(m) > 2 * self.t:
            raise DegreeTooSmall(f"moment of degree {sum(m)} beyond 2t = {2 * self.t}")
        if self.bb is None:
            if m not in self.values:
                raise DegreeTooSmall(f"no moment for {m}")
            v = self.values[m]
        else:
            v = 0.0
            for b, c in self.bb.reduce_monomial(m).items():
                if b not in self.values:
                    raise DegreeTooSmall(f"normal form of {m} leaves the relaxation")
                v += c * self.values[b]
        self._cache[m] = v
        return v

    def eval(self, p: Polynomial) -> float:
        return sum(c * self.mono(m) for m, c in p.terms.items())

    def hankel(self, monos) -> np.ndarray:
        """``H[a, b] = Λ(x^a x^b)``; NaN where ``Λ`` is undefined."""
        k = len(monos)
        H = np.full((k, k), np.nan)
        for i in range(k):
            for j in range(i, k):
                try:
                    H[i, j] = H[j, i] = self.mono(mono_mul(monos[i], monos[j]))
                except DegreeTooSmall:
                    pass
        return H


def inner_product(p: Polynomial, q: Polynomial, lam: MomentSequence) -> float:
    return lam.eval(p * q)


class DecompositionStatus(str, Enum):
    SUCCESS = "Success"
    FAILED = "Failed"


@dataclass
class DecompositionResult:
    status: DecompositionStatus
    basis: list = field(default_factory=list)
    norms: list = field(default_factory=list)
    relations: list = field(default_factory=list)
    reason: str = ""

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def ok(self) -> bool:
        return self.status == DecompositionStatus.SUCCESS


class _Space:
    """Coefficient vectors over monomials of degree <= t."""

    def __init__(self, lam: MomentSequence):
        self.n, self.t = lam.nvars, lam.t
        self.monos = monomials_up_to(self.n, self.t)
        self.pos = {m: i for i, m in enumerate(self.monos)}
        self.deg = np.array([sum(m) for m in self.monos])
        self.H = lam.hankel(self.monos)
        # shift[k][i] = index of x_k * monos[i] (or -1 past degree t)
        self.shift = [
            np.array([self.pos.get(mono_mul(m, tuple(int(j == k) for j in range(self.n))), -1) for m in self.monos])
            for k in range(self.n)
        ]

    def gram(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        """``[⟨u_i, v_j⟩]`` for the columns of U and V."""
        su = np.flatnonzero(np.any(U != 0, axis=1))
        sv = np.flatnonzero(np.any(V != 0, axis=1))
        sub = self.H[np.ix_(su, sv)]
        if np.isnan(sub).any():
            raise DegreeTooSmall("inner product needs moments outside the relaxation")
        return U[su].T @ sub @ V[sv]

    def times(self, k: int, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        nz = np.flatnonzero(v)
        tgt = self.shift[k][nz]
        if (tgt < 0).any():
            raise DegreeTooSmall("product leaves degree t")
        out[tgt] = v[nz]
        return out

    def degree(self, v: np.ndarray, rel: float = 1e-10) -> int:
        cut = rel * np.max(np.abs(v), initial=0.0)
        nz = np.abs(v) > cut
        return int(self.deg[nz].max()) if nz.any() else -1

    def poly(self, v: np.ndarray, rel: float = 1e-12) -> Polynomial:
        cut = rel * np.max(np.abs(v), initial=0.0)
        return Polynomial(self.n, {self.monos[i]: float(v[i]) for i in np.flatnonzero(np.abs(v) > cut)})


def decompose(lam: MomentSequence, rank_tol: float = 1e-6) -> DecompositionResult:
    """Grow an orthogonal basis until multiplication by each variable closes.

    Each round projects every ``x_k b_j`` off the current basis and keeps a
    maximal well-conditioned subset (greedy largest-norm pivoting).  If the
    basis would have to be multiplied beyond degree ``t`` the result is
    ``Failed``; if a round adds nothing the projected candidates are the
    kernel relations and the result is ``Success``.
    """
    sp = _Space(lam)
    one = np.zeros(len(sp.monos))
    one[0] = 1.0
    h11 = sp.gram(one[:, None], one[:, None])[0, 0]
    if h11 <= 0:
        raise NumericBreakdown(f"Λ(1) = {h11}")
    B = [one]
    norms = [h11]

    while True:
        if any(sp.degree(b) > sp.t - 1 for b in B):
            return DecompositionResult(
                DecompositionStatus.FAILED, [sp.poly(b) for b in B], norms,
                reason=f"basis reaches degree {max(sp.degree(b) for b in B)} at order {sp.t}",
            )
        Bm = np.array(B).T
        try:
            cands = np.array([sp.times(k, b) for b in B for k in range(sp.n)]).T
            # two projection passes keep the candidates orthogonal to B
            for _ in range(2):
                coef = sp.gram(Bm, cands) / np.array(norms)[:, None]
                cands = cands - Bm @ coef
            G = sp.gram(cands, cands)
        except DegreeTooSmall as exc:
            return DecompositionResult(DecompositionStatus.FAILED, [sp.poly(b) for b in B], norms, reason=str(exc))

        new, new_norms = _pivoted_family(cands, G, rank_tol)
        if not new:
            rels = []
            for j in range(cands.shape[1]):
                v = cands[:, j]
                if np.max(np.abs(v)) <= 1e-9:
                    continue
                p = sp.poly(v)
                big = max(abs(c) for c in p.terms.values())
                lead = max((m for m, c in p.terms.items() if abs(c) > 1e-6 * big), key=mono_key)
                rels.append(p / p.coeff(lead))
            rels = _dedupe(rels)
            return DecompositionResult(
                DecompositionStatus.SUCCESS, [sp.poly(b) for b in B], norms, relations=rels
            )
        B.extend(new)
        norms.extend(new_norms)


def _pivoted_family(C: np.ndarray, G: np.ndarray, rank_tol: float):
    """Greedy Gram–Schmidt on the columns of C under the Gram matrix G."""
    G = 0.5 * (G + G.T)
    k = G.shape[0]
    # coefficients of the orthogonalised candidates in terms of the originals
    T = np.eye(k)
    d = np.diag(G).copy()
    first = None
    out, out_norms = [], []
    active = np.ones(k, dtype=bool)
    while active.any():
        idx = np.flatnonzero(active)
        j = idx[np.argmax(d[idx])]
        piv = d[j]
        if first is None:
            first = piv
            if piv < -rank_tol * max(abs(piv), 1.0):
                raise NumericBreakdown(f"candidate norm {piv:.3e} < 0")
        if piv < rank_tol * max(first, 1.0):
            if d[idx].min() < -rank_tol * max(first, 1.0):
                raise NumericBreakdown(f"candidate norm {d[idx].min():.3e} < 0")
            break
        active[j] = False
        tj = T[:, j].copy()
        out.append(C @ tj)
        out_norms.append(float(piv))
        # project the pivot out of the remaining candidates
        gj = G @ tj
        for i in np.flatnonzero(active):
            a = (T[:, i] @ gj) / piv
            T[:, i] -= a * tj
            d[i] = T[:, i] @ G @ T[:, i]
    return out, out_norms


def _dedupe(polys, tol: float = 1e-6):
    out = []
    for p in polys:
        if not any(p.allclose(q, tol) for q in out):
            out.append(p)
    return out
