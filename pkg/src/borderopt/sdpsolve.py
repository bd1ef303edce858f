"""Dense primal-dual interior-point solver for moment SDPs.

Problems are stated in the moment parametrisation::

    minimize    c · [1, λ]
    subject to  M_k(λ) = F_k[0] + Σ_i λ_i F_k[i]  ⪰ 0     (each block k)
                E · [1, λ] = 0

Equality rows are eliminated by null-space substitution, after which the
problem is the dual of a standard-form SDP and is solved with an
infeasible-start path-following method (Nesterov–Todd scaling, Mehrotra
predictor-corrector).  The moment matrices are the dual slacks; the
primal matrices are the Gram matrices of the SOS side.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    SLOW_PROGRESS = "SlowProgress"


@dataclass
class SolverOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    # optional bound on <X, Z> itself, for problems with large objective values
    abs_gap_tol: float = float("inf")
    max_iter: int = 200
    # certificate thresholds for infeasibility / unboundedness
    infeas_tol: float = 1e-8
    blowup: float = 1e10
    # move the optimum to the analytic centre of the optimal face
    center: bool = True
    # eigenvalues below center_tol * max(1, λ_max) span the face's kernel
    center_tol: float = 1e-6
    # a stalled solve whose best iterate is this accurate is "near optimal"
    near_tol: float = 1e-6


@dataclass
class SdpProblem:
    """Moment SDP with block templates.

    ``blocks[k]`` has shape ``(nids, s_k, s_k)``; slice 0 multiplies the
    pinned unit moment.  ``labels`` optionally names each id.
    """

    blocks: list
    objective: np.ndarray
    equality_rows: np.ndarray = None
    labels: list = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.blocks = [np.asarray(b, dtype=float) for b in self.blocks]
        if self.equality_rows is None:
            self.equality_rows = np.zeros((0, self.nids))
        self.equality_rows = np.atleast_2d(np.asarray(self.equality_rows, dtype=float))
        for b in self.blocks:
            if b.shape[0] != self.nids or b.shape[1] != b.shape[2]:
                raise ValueError(f"block of shape {b.shape} for {self.nids} ids")
            if not np.allclose(b, b.transpose(0, 2, 1)):
                raise ValueError("block template is not symmetric")

    @property
    def nids(self) -> int:
        return self.objective.shape[0]

    @property
    def block_sizes(self) -> list[int]:
        return [b.shape[1] for b in self.blocks]

    def block_values(self, lam_full: np.ndarray) -> list[np.ndarray]:
        return [np.tensordot(lam_full, b, axes=1) for b in self.blocks]


@dataclass
class SdpSolution:
    """Result of a solve.

    ``moments`` is the full vector ``[1, λ_1, ...]``.  ``primal_objective``
    is the moment side (the relaxation value), ``dual_objective`` the SOS
    lower bound; weak duality reads primal >= dual.
    """

    status: Status
    primal_objective: float
    dual_objective: float
    moments: np.ndarray
    blocks: list = field(default_factory=list)
    dual_blocks: list = field(default_factory=list)
    iterations: int = 0
    gap: float = float("nan")
    primal_infeasibility: float = float("nan")
    dual_infeasibility: float = float("nan")
    labels: list = None

    near_optimal: bool = False

    @property
    def ok(self) -> bool:
        return self.status == Status.OPTIMAL

    @property
    def usable(self) -> bool:
        """Optimal, or stalled at an iterate within ``near_tol``."""
        return self.ok or self.near_optimal

    def moment_dict(self) -> dict:
        if self.labels is None:
            return dict(enumerate(self.moments))
        return dict(zip(self.labels, self.moments))


# -- standard form core --------------------------------------------------------
#
#   (P) min <C,X>  s.t. <A_i,X> = b_i, X ⪰ 0
#   (D) max b·y    s.t. Z = C - Σ y_i A_i ⪰ 0
#
# C: list of (s,s); A: list of (m,s,s); blocks are independent.


def _inner(U, V):
    return sum(float(np.vdot(u, v)) for u, v in zip(U, V))


def _Aop(A, X):
    return sum(a.reshape(a.shape[0], -1) @ x.ravel() for a, x in zip(A, X))


def _ATop(A, y):
    return [np.tensordot(y, a, axes=1) for a in A]


def _sym(M):
    return 0.5 * (M + M.T)


def _nt_scaling(X, Z):
    """``G`` with ``G⁻¹ X G⁻ᵀ = Gᵀ Z G = diag(d)``; returns (G, d, W=GGᵀ)."""
    L = np.linalg.cholesky(X)
    R = np.linalg.cholesky(Z)
    U, s, Vt = np.linalg.svd(R.T @ L)
    G = L @ Vt.T / np.sqrt(s)
    return G, s, G @ G.T


def _max_step(X, dX):
    L = np.linalg.cholesky(X)
    Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    ev = np.linalg.eigvalsh(_sym(Li @ dX @ Li.T))
    lo = ev[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _lyap_diag(d, R):
    """Solve ``(D U + U D)/2 = R`` for diagonal ``D = diag(d)``."""
    return 2.0 * R / (d[:, None] + d[None, :])


def solve_standard(C, A, b, opts: SolverOptions | None = None):
    """Solve the standard-form pair; returns a dict with X, y, Z and status."""
    opts = opts or SolverOptions()
    m = b.shape[0]
    sizes = [c.shape[0] for c in C]
    n = sum(sizes)
    normA = [np.sqrt(sum(np.sum(a[i] ** 2) for a in A)) for i in range(m)]
    normC = np.sqrt(sum(np.sum(c**2) for c in C))
    normb = np.linalg.norm(b)

    X, Z = [], []
    for s, c, a in zip(sizes, C, A):
        nA = [np.linalg.norm(a[i]) for i in range(m)]
        xi = max(10.0, np.sqrt(s), s * max(((1 + abs(b[i])) / (1 + nA[i]) for i in range(m)), default=1.0))
        eta = max(10.0, np.sqrt(s), max(nA, default=0.0), np.linalg.norm(c))
        X.append(xi * np.eye(s))
        Z.append(eta * np.eye(s))
    y = np.zeros(m)

    status = Status.SLOW_PROGRESS
    it = 0
    stall = 0
    hist = []
    best = None  # (merit, iterate) of the most accurate point seen
    since_best = 0
    for it in range(opts.max_iter + 1):
        Rp = b - _Aop(A, X)
        ATy = _ATop(A, y)
        Rd = [c - z - aty for c, z, aty in zip(C, Z, ATy)]
        pobj = _inner(C, X)
        dobj = float(b @ y)
        gap = _inner(X, Z)
        mu = gap / n
        pinf = np.linalg.norm(Rp) / (1 + normb)
        dinf = np.sqrt(sum(np.sum(r**2) for r in Rd)) / (1 + normC)
        relgap = max(gap, abs(pobj - dobj)) / (1 + abs(pobj) + abs(dobj))
        hist.append((relgap, pinf, dinf))
        merit = max(relgap / opts.gap_tol, pinf / opts.feas_tol, dinf / opts.feas_tol, gap / opts.abs_gap_tol)
        if best is None or merit < best[0]:
            best = (merit, ([x.copy() for x in X], y.copy(), [z.copy() for z in Z]), (relgap, pinf, dinf))
            since_best = 0
        else:
            since_best += 1
        log.debug("it %3d pobj %.10e dobj %.10e relgap %.2e pinf %.2e dinf %.2e", it, pobj, dobj, relgap, pinf, dinf)

        if relgap < opts.gap_tol and pinf < opts.feas_tol and dinf < opts.feas_tol and gap <= opts.abs_gap_tol:
            status = Status.OPTIMAL
            break
        cert = _certificates(A, b, C, X, y, Z, opts)
        if cert is not None:
            status = cert
            break
        if it == opts.max_iter or since_best >= 8:
            break

        try:
            scal = [_nt_scaling(x, z) for x, z in zip(X, Z)]
        except np.linalg.LinAlgError:
            break
        Ws = [w for _, _, w in scal]

        solveM = _schur_solver(A, [G for G, _, _ in scal])

        def direction(Rc_hat):
            rhs = Rp - _Aop(A, Rc_hat) + _Aop(A, [W @ r @ W for W, r in zip(Ws, Rd)])
            dy = solveM(rhs)
            for _ in range(2):  # iterative refinement against the true A(dX) = Rp
                dZ = [r - aty for r, aty in zip(Rd, _ATop(A, dy))]
                dX = [_sym(rc - W @ dz @ W) for rc, W, dz in zip(Rc_hat, Ws, dZ)]
                dy = dy + solveM(Rp - _Aop(A, dX))
            dZ = [r - aty for r, aty in zip(Rd, _ATop(A, dy))]
            dX = [_sym(rc - W @ dz @ W) for rc, W, dz in zip(Rc_hat, Ws, dZ)]
            return dX, dy, [_sym(d) for d in dZ]

        # predictor
        Rc_hat = [-x for x in X]
        dX, dy, dZ = direction(Rc_hat)
        ap = min(1.0, min(_max_step(x, d) for x, d in zip(X, dX)))
        ad = min(1.0, min(_max_step(z, d) for z, d in zip(Z, dZ)))
        mu_aff = _inner([x + ap * d for x, d in zip(X, dX)], [z + ad * d for z, d in zip(Z, dZ)]) / n
        expon = max(1.0, 3 * min(ap, ad) ** 2)
        sigma = min(1.0, (max(mu_aff, 0.0) / mu) ** expon)

        # corrector
        Rc_hat = []
        for (G, d, W), dx, dz in zip(scal, dX, dZ):
            Gi = np.linalg.inv(G)
            dXh = Gi @ dx @ Gi.T
            dZh = G.T @ dz @ G
            Rv = sigma * mu * np.eye(d.size) - np.diag(d**2) - _sym(dXh @ dZh)
            Rc_hat.append(_sym(G @ (_lyap_diag(d, Rv)) @ G.T))
        dX, dy, dZ = direction(Rc_hat)

        ap = min(_max_step(x, d) for x, d in zip(X, dX))
        ad = min(_max_step(z, d) for z, d in zip(Z, dZ))
        gamma = 0.9 + 0.09 * min(1.0, ap, ad)
        ap = min(1.0, gamma * ap)
        ad = min(1.0, gamma * ad)
        log.debug("   ap %.3e ad %.3e sigma %.3e", ap, ad, sigma)
        X = [_sym(x + ap * d) for x, d in zip(X, dX)]
        y = y + ad * dy
        Z = [_sym(z + ad * d) for z, d in zip(Z, dZ)]

        if max(ap, ad) < 1e-8:
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0

    last = hist[-1]
    if status == Status.SLOW_PROGRESS and best is not None:
        (X, y, Z), last = best[1], best[2]
    return dict(
        X=X, y=y, Z=Z, status=status, iterations=it, pobj=_inner(C, X), dobj=float(b @ y),
        gap=last[0], pinf=last[1], dinf=last[2],
    )


def _schur_solver(A, Gs):
    """Solver for ``M dy = r`` with ``M_ij = tr(A_i W A_j W)``, ``W = G Gᵀ``.

    ``M = ÃᵀÃ`` where the columns of ``Ã`` are ``vec(Gᵀ A_i G)``.  Cholesky
    of the assembled ``M`` is used while it is well conditioned; past that,
    the triangular factor comes from a QR of ``Ã``, which avoids squaring
    the condition number when forming ``M``.
    """
    m = A[0].shape[0]
    At = np.vstack([np.einsum("ai,kab,bj->kij", G, a, G).reshape(m, -1).T for a, G in zip(A, Gs)])
    M = At.T @ At
    try:
        cf = sla.cho_factor(M)
        # squared pivot ratio is a cheap lower bound on 1/cond(M)
        if np.min(np.diag(cf[0])) ** 2 > 1e-30 * np.max(np.diag(M)):
            return lambda r: sla.cho_solve(cf, r)
    except np.linalg.LinAlgError:
        pass
    if sum(G.shape[0] * (G.shape[0] + 1) // 2 for G in Gs) >= m:
        R = sla.qr(At, mode="r")[0][:m]
        d = np.abs(np.diag(R))
        if d.min() > 1e-15 * d.max():
            return lambda r: sla.solve_triangular(R, sla.solve_triangular(R, r, trans="T"))
    # rank deficient: minimum-norm solution through the SVD of Ã
    _, sv, Vt = np.linalg.svd(At, full_matrices=False)
    keep = sv > 1e-14 * sv[0]
    P = Vt[keep].T / sv[keep] ** 2
    return lambda r: P @ (Vt[keep] @ r)


def _certificates(A, b, C, X, y, Z, opts):
    # (D) infeasible: X ⪰ 0, A(X) ≈ 0, <C,X> < 0  -> moment side infeasible
    cx = _inner(C, X)
    if cx < 0:
        xn = np.sqrt(sum(np.sum(x**2) for x in X))
        if xn > opts.blowup ** 0.5 and np.linalg.norm(_Aop(A, X)) / -cx < opts.infeas_tol:
            return Status.INFEASIBLE
    # (D) unbounded: A^T y + Z ≈ 0 with Z ⪰ 0, b·y > 0  -> moment side unbounded below
    by = float(b @ y)
    if by > 0 and np.linalg.norm(y) > opts.blowup ** 0.5:
        res = np.sqrt(sum(np.sum((aty + z) ** 2) for aty, z in zip(_ATop(A, y), Z)))
        if res / by < opts.infeas_tol:
            return Status.UNBOUNDED
    return None


# -- moment-form wrapper -------------------------------------------------------


def _eliminate(prob: SdpProblem):
    """λ = lam0 + N z satisfying the equality rows; None if inconsistent."""
    m = prob.nids - 1
    E = prob.equality_rows
    if E.shape[0] == 0:
        return np.zeros(m), np.eye(m)
    Ef, e0 = E[:, 1:], -E[:, 0]
    U, s, Vt = np.linalg.svd(Ef, full_matrices=True)
    tol = 1e-10 * max(1.0, s[0] if s.size else 0.0)
    r = int(np.sum(s > tol))
    lam0 = Vt[:r].T @ ((U[:, :r].T @ e0) / s[:r])
    if np.linalg.norm(Ef @ lam0 - e0) > 1e-8 * max(1.0, np.linalg.norm(e0)):
        return None
    return lam0, Vt[r:].T


def solve(prob: SdpProblem, opts: SolverOptions | None = None) -> SdpSolution:
    """Minimise the moment objective; see the module docstring."""
    opts = opts or SolverOptions()
    elim = _eliminate(prob)
    if elim is None:
        return SdpSolution(Status.INFEASIBLE, np.inf, np.inf, np.full(prob.nids, np.nan), labels=prob.labels)
    lam0, N = elim
    full0 = np.concatenate([[1.0], lam0])
    C = [np.tensordot(full0, b, axes=1) for b in prob.blocks]
    A = [-np.tensordot(N.T, b[1:], axes=1) for b in prob.blocks]
    cvec = prob.objective[1:]
    const = float(prob.objective @ full0)
    bvec = -(N.T @ cvec)

    if N.shape[1] == 0:
        Ms = [_sym(c) for c in C]
        ok = all(np.linalg.eigvalsh(c)[0] >= -opts.feas_tol for c in Ms)
        return SdpSolution(
            Status.OPTIMAL if ok else Status.INFEASIBLE, const, const, full0, blocks=Ms, labels=prob.labels,
        )

    res = solve_standard(C, A, bvec, opts)
    lam = lam0 + N @ res["y"]
    moments = np.concatenate([[1.0], lam])
    near = res["status"] == Status.SLOW_PROGRESS and max(res["gap"], res["pinf"], res["dinf"]) <= opts.near_tol
    if opts.center and (res["status"] == Status.OPTIMAL or near):
        moments = center_on_optimal_face(prob, moments, opts.center_tol)
    return SdpSolution(
        status=res["status"],
        primal_objective=const - res["dobj"],
        dual_objective=const - res["pobj"],
        moments=moments,
        blocks=prob.block_values(moments),
        dual_blocks=res["X"],
        iterations=res["iterations"],
        gap=res["gap"],
        primal_infeasibility=res["dinf"],
        dual_infeasibility=res["pinf"],
        labels=prob.labels,
        near_optimal=near,
    )


def center_on_optimal_face(prob: SdpProblem, moments: np.ndarray, rank_tol: float = 1e-6, max_iter: int = 100) -> np.ndarray:
    """Analytic centre of the face of optimal solutions containing ``moments``.

    The face is cut out by ``M_k(λ) Q_k = 0`` where ``Q_k`` spans the
    numerical kernel of each block at ``moments``, plus the objective
    level and the equality rows.  On it, ``Σ_k log det(P_kᵀ M_k P_k)`` is
    maximised by damped Newton (``P_k`` spans the ranges).  Returns the
    input unchanged when the face is a single point or the projection
    onto it is not positive definite.
    """
    m = prob.nids - 1
    vals = prob.block_values(moments)
    rows, rhs, ranges = [], [], []
    for blk, M in zip(prob.blocks, vals):
        ev, V = np.linalg.eigh(_sym(M))
        cut = rank_tol * max(1.0, ev[-1])
        Q, P = V[:, ev <= cut], V[:, ev > cut]
        ranges.append(P)
        if Q.shape[1]:
            FQ = blk @ Q  # (nids, s, q)
            rows.append(FQ[1:].reshape(m, -1).T)
            rhs.append(-FQ[0].ravel())
    if not rows:
        return moments
    E = prob.equality_rows
    rows.append(E[:, 1:])
    rhs.append(-E[:, 0])
    rows.append(prob.objective[1:][None, :])
    rhs.append(np.array([prob.objective @ moments - prob.objective[0]]))
    Cm = np.vstack(rows)
    d = np.concatenate(rhs)
    U, s, Vt = np.linalg.svd(Cm, full_matrices=True)
    r = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    lam = moments[1:]
    lam_c = lam - Vt[:r].T @ ((U[:, :r].T @ (Cm @ lam - d)) / s[:r])
    if np.linalg.norm(Cm @ lam_c - d) > 1e-8 * max(1.0, np.linalg.norm(d)):
        return moments  # kernel guess inconsistent with the templates
    K = Vt[r:].T
    if K.shape[1] == 0:
        return _accept(prob, moments, np.concatenate([[1.0], lam_c]))

    full_c = np.concatenate([[1.0], lam_c])
    S0 = [P.T @ np.tensordot(full_c, b, axes=1) @ P for b, P in zip(prob.blocks, ranges)]
    At = [np.einsum("ai,jab,bc->jic", P, np.tensordot(K.T, b[1:], axes=1), P) for b, P in zip(prob.blocks, ranges)]

    def phi(w):
        total = 0.0
        for S, Ak in zip(S0, At):
            Sw = S + np.tensordot(w, Ak, axes=1)
            try:
                L = np.linalg.cholesky(_sym(Sw))
            except np.linalg.LinAlgError:
                return -np.inf, None
            total += 2 * np.sum(np.log(np.diag(L)))
        return total, True

    w = np.zeros(K.shape[1])
    val, ok = phi(w)
    if ok is None:
        return moments
    for _ in range(max_iter):
        g = np.zeros_like(w)
        H = np.zeros((w.size, w.size))
        for S, Ak in zip(S0, At):
            Sw = _sym(S + np.tensordot(w, Ak, axes=1))
            L = np.linalg.cholesky(Sw)
            Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
            B = Li @ Ak @ Li.T  # (k, r, r)
            g += np.trace(B, axis1=1, axis2=2)
            Bf = B.reshape(B.shape[0], -1)
            H += Bf @ Bf.T
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        dec = float(g @ step)
        if dec < 1e-14:
            break
        if not np.isfinite(dec):
            return moments
        t = 1.0
        while t > 1e-12:
            nv, ok = phi(w + t * step)
            if ok is not None and nv >= val + 0.25 * t * dec:
                break
            t *= 0.5
        else:
            break
        w = w + t * step
        val = nv
    else:
        return moments  # no centre: the face is unbounded or Newton stalled
    return _accept(prob, moments, np.concatenate([[1.0], lam_c + K @ w]))


def _accept(prob, old, new, tol=1e-7):
    """Keep ``new`` only if it is PSD and no worse in objective than ``old``."""
    scale = max(1.0, np.max(np.abs(new)))
    for M in prob.block_values(new):
        if M.size and np.linalg.eigvalsh(_sym(M))[0] < -tol * scale:
            return old
    if prob.objective @ new > prob.objective @ old + tol * max(1.0, abs(prob.objective @ old)):
        return old
    return new


def kkt_residuals(C, A, b, X, y, Z) -> dict:
    """Raw KKT residuals of a standard-form triple (for checking)."""
    return dict(
        dual=np.sqrt(sum(np.sum((aty + z - c) ** 2) for aty, z, c in zip(_ATop(A, y), Z, C))),
        primal=float(np.linalg.norm(_Aop(A, X) - b)),
        complementarity=_inner(X, Z),
    )
