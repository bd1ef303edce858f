"""Minimizer points from multiplication matrices of an orthogonal basis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decompose import MomentSequence, inner_product
from .polyalg import Polynomial


class NonGenericCombination(ArithmeticError):
    pass


class ComplexEigenvalue(ArithmeticError):
    pass


class NegativeWeight(ArithmeticError):
    pass


@dataclass
class MinimizerSet:
    points: np.ndarray
    weights: np.ndarray
    f_values: np.ndarray
    f_star: float
    seed: int | None = None

    def __len__(self):
        return len(self.points)

    def sorted(self) -> "MinimizerSet":
        order = np.lexsort(self.points.T[::-1])
        return MinimizerSet(self.points[order], self.weights[order], self.f_values[order], self.f_star, self.seed)


def multiplication_matrices(basis: list, lam: MomentSequence) -> list[np.ndarray]:
    """``M_k[i, j] = ⟨x_k b_j, b_i⟩ / ⟨b_i, b_i⟩``: column j is ``x_k b_j`` in the basis."""
    n = lam.nvars
    norms = np.array([inner_product(b, b, lam) for b in basis])
    out = []
    for k in range(n):
        xk = Polynomial.variable(n, k)
        M = np.array([[inner_product(xk * bj, bi, lam) for bj in basis] for bi in basis])
        out.append(M / norms[:, None])
    return out


def _min_gap(ev: np.ndarray) -> float:
    if ev.size < 2:
        return np.inf
    d = np.abs(ev[:, None] - ev[None, :])
    return float(d[~np.eye(ev.size, dtype=bool)].min())


def extract_points(
    mats: list,
    basis: list,
    lam: MomentSequence,
    f: Polynomial | None = None,
    seed: int = 0,
    direction=None,
    cluster_tol: float = 1e-6,
    merge_tol: float = 1e-6,
    imag_tol: float = 1e-6,
    draws: int = 5,
) -> MinimizerSet:
    """Eigenvectors of ``Σ l_k M_k`` give the points; weights by least squares.

    ``direction`` fixes ``l``; otherwise ``l`` is drawn uniformly on the unit
    sphere from ``seed``, redrawing (up to ``draws`` times) when two
    eigenvalues are closer than ``cluster_tol`` times the spread.
    """
    n = len(mats)
    r = mats[0].shape[0]
    rng = np.random.default_rng(seed)
    for attempt in range(draws):
        if direction is not None:
            l = np.asarray(direction, dtype=float)
        else:
            l = rng.standard_normal(n)
            l /= np.linalg.norm(l)
        Ml = sum(c * M for c, M in zip(l, mats))
        ev, U = np.linalg.eig(Ml)
        scale = max(1.0, np.max(np.abs(ev)))
        if np.max(np.abs(ev.imag)) > imag_tol * scale:
            if direction is not None or attempt == draws - 1:
                raise ComplexEigenvalue(f"eigenvalue with imaginary part {np.max(np.abs(ev.imag)):.2e}")
            continue
        if _min_gap(ev.real) >= cluster_tol * scale:
            break
        if direction is not None:
            raise NonGenericCombination(f"l = {l} gives clustered eigenvalues")
    else:
        raise NonGenericCombination(f"clustered eigenvalues after {draws} draws")

    U = U.real
    pts = np.empty((r, n))
    for i in range(r):
        u = U[:, i]
        uu = u @ u
        for k, M in enumerate(mats):
            pts[i, k] = (u @ M @ u) / uu

    # Λ(b_j) = Σ_i ω_i b_j(ξ_i)
    V = np.array([[b(p) for p in pts] for b in basis])
    rhs = np.array([lam.eval(b) for b in basis])
    w = np.linalg.lstsq(V, rhs, rcond=None)[0]
    if (w < -1e-6).any():
        raise NegativeWeight(f"recovered weights {w}")
    pts, w = _merge(pts, w, merge_tol)
    fv = np.array([f(p) for p in pts]) if f is not None else np.full(len(pts), np.nan)
    f_star = float(np.mean(fv)) if f is not None else float("nan")
    return MinimizerSet(pts, w, fv, f_star, None if direction is not None else seed).sorted()


def _merge(pts, w, tol):
    keep_p, keep_w = [], []
    for p, wi in zip(pts, w):
        for j, q in enumerate(keep_p):
            if np.max(np.abs(p - q)) < tol:
                keep_w[j] += wi
                break
        else:
            keep_p.append(p.copy())
            keep_w.append(wi)
    return np.array(keep_p), np.array(keep_w)


def eigen_residual(mats, points, basis_vectors) -> float:
    """``max ‖M_k u_i − ξ_ik u_i‖ / ‖u_i‖``; used by the tests."""
    worst = 0.0
    for i, u in enumerate(basis_vectors.T):
        for k, M in enumerate(mats):
            worst = max(worst, np.linalg.norm(M @ u - points[i, k] * u) / np.linalg.norm(u))
    return worst
