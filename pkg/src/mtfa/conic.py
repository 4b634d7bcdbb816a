"""Primal-dual interior-point solver for small dense semidefinite programs.

The standard-form pair is::

    minimize   <C, X> + c_f' x_f            maximize   b' y
    subject to A(X) + A_f x_f = b           subject to A*(y) + S = C
               X in K                                  A_f' y = c_f
                                                       S in K

where ``K`` is a product of PSD blocks and one non-negative orthant (``lp``)
and ``x_f`` are free variables. Iterations follow the infeasible
path-following scheme with Nesterov-Todd scaling and Mehrotra's
predictor-corrector. Linearly dependent equality constraints are removed
before iterating; inconsistent ones are reported with an algebraic Farkas ray.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal-infeasible"
DUAL_INFEASIBLE = "dual-infeasible-unbounded"
NUMERICAL_LIMIT = "numerical-limit"


def _env_tol(default: float) -> float:
    val = os.environ.get("ELLIPTOPE_TOL")
    if not val:
        return default
    tol = float(val)
    if not 0 < tol < 1:
        raise ValueError("ELLIPTOPE_TOL must lie in (0, 1)")
    return tol


@dataclass
class SolverSettings:
    feas_tol: float = field(default_factory=lambda: _env_tol(1e-8))
    gap_tol: float = field(default_factory=lambda: _env_tol(1e-8))
    infeas_tol: float = 1e-8
    max_iter: int = 200
    step: float = 0.98

    def __post_init__(self):
        for name in ("feas_tol", "gap_tol", "infeas_tol"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


# --------------------------------------------------------------------------
# constraint maps restricted to one PSD block


class DenseConstraints:
    """Block part of ``A(X)_k = <A_k, X>`` with explicit symmetric ``A_k``."""

    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError("dense constraints need shape (m, nb, nb)")
        self.A = 0.5 * (A + A.transpose(0, 2, 1))
        self.m = A.shape[0]
        self.size = A.shape[1]

    def apply(self, X):
        return np.einsum("kij,ij->k", self.A, X)

    def adjoint(self, y):
        return np.einsum("k,kij->ij", y, self.A)

    def schur(self, W):
        T = W @ self.A @ W
        return self.A.reshape(self.m, -1) @ T.reshape(self.m, -1).T

    def take(self, rows):
        return DenseConstraints(self.A[rows])


class FactoredConstraints:
    """Block part of the map with ``A_k = sum_e val_e * sym(F[:, i_e] F[:, j_e]^T)``.

    With ``F = I`` each term selects one matrix entry, which covers diagonal
    and block-diagonal extraction; with ``F = V`` it covers the quadratic
    forms ``v_i^T M v_j`` of ellipsoid fitting. The Schur complement then
    only needs ``G = F^T W F``.
    """

    def __init__(self, F, k, i, j, val, m: int):
        self.F = np.asarray(F, dtype=float)
        self.k = np.asarray(k, dtype=int)
        self.i = np.asarray(i, dtype=int)
        self.j = np.asarray(j, dtype=int)
        self.val = np.asarray(val, dtype=float)
        self.m = int(m)
        self.size = self.F.shape[0]
        self._S = np.zeros((self.m, self.k.size))
        self._S[self.k, np.arange(self.k.size)] = self.val

    def apply(self, X):
        G = self.F.T @ X @ self.F
        return np.bincount(self.k, weights=self.val * G[self.i, self.j], minlength=self.m)

    def adjoint(self, y):
        p = self.F.shape[1]
        T = np.zeros((p, p))
        w = 0.5 * self.val * y[self.k]
        np.add.at(T, (self.i, self.j), w)
        np.add.at(T, (self.j, self.i), w)
        return self.F @ T @ self.F.T

    def schur(self, W):
        G = self.F.T @ W @ self.F
        i, j = self.i, self.j
        T = 0.5 * (G[np.ix_(i, i)] * G[np.ix_(j, j)] + G[np.ix_(i, j)] * G[np.ix_(j, i)])
        return self._S @ T @ self._S.T

    def take(self, rows):
        rows = np.asarray(rows, dtype=int)
        remap = -np.ones(self.m, dtype=int)
        remap[rows] = np.arange(rows.size)
        keep = remap[self.k] >= 0
        return FactoredConstraints(self.F, remap[self.k[keep]], self.i[keep], self.j[keep],
                                   self.val[keep], rows.size)


@dataclass
class PSDBlock:
    C: np.ndarray
    cons: object  # DenseConstraints | FactoredConstraints

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float)
        self.C = 0.5 * (self.C + self.C.T)
        if self.C.shape != (self.cons.size, self.cons.size):
            raise ValueError("cost block and constraint block sizes differ")


@dataclass
class LinearBlock:
    """Non-negative (``lp``) or free variables: ``A`` is ``m x p``."""

    c: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.A = np.asarray(self.A, dtype=float).reshape(-1, self.c.size)


@dataclass
class ConicProblem:
    """Standard-form conic program over PSD blocks, an orthant, and free variables."""

    b: np.ndarray
    psd: list = field(default_factory=list)
    lp: Optional[LinearBlock] = None
    free: Optional[LinearBlock] = None
    layout: Optional[list] = None  # for from_dense: (kind, index) per diagonal block

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.b.size
        if m < 1:
            raise ValueError("need at least one equality constraint")
        for blk in self.psd:
            if blk.cons.m != m:
                raise ValueError("PSD block constraint count differs from len(b)")
        for blk in (self.lp, self.free):
            if blk is not None and blk.A.shape[0] != m:
                raise ValueError("linear block constraint count differs from len(b)")
        if not self.psd and self.lp is None:
            raise ValueError("problem has no conic variables")

    @property
    def m(self) -> int:
        return self.b.size

    @classmethod
    def from_dense(cls, C, A: Sequence, b, block_sizes: Optional[Sequence[int]] = None):
        """Build from a dense cost ``C`` and coefficient matrices ``A_i``.

        ``block_sizes`` splits the variable into diagonal blocks (default: one
        block); off-block entries of ``C`` and ``A_i`` are ignored. Blocks of
        size one are pooled into the orthant.
        """
        C = np.asarray(C, dtype=float)
        n = C.shape[0]
        A = np.asarray(A, dtype=float).reshape(-1, n, n)
        if A.shape[1:] != C.shape or C.shape[0] != C.shape[1]:
            raise ValueError("cost and constraint matrices must share one square shape")
        sizes = list(block_sizes) if block_sizes is not None else [n]
        if sum(sizes) != n or min(sizes) < 1:
            raise ValueError("block sizes must be positive and sum to n")
        psd, layout, lp_idx = [], [], []
        off = 0
        for sz in sizes:
            sl = slice(off, off + sz)
            if sz == 1:
                layout.append(("lp", len(lp_idx)))
                lp_idx.append(off)
            else:
                layout.append(("psd", len(psd)))
                psd.append(PSDBlock(C[sl, sl], DenseConstraints(A[:, sl, sl])))
            off += sz
        lp = None
        if lp_idx:
            lp = LinearBlock(C[lp_idx, lp_idx], A[:, lp_idx, lp_idx])
        return cls(b=b, psd=psd, lp=lp, layout=layout)

    # linear map over all blocks
    def apply(self, Xs, xl, xf):
        out = np.zeros(self.m)
        for blk, X in zip(self.psd, Xs):
            out += blk.cons.apply(X)
        if self.lp is not None:
            out += self.lp.A @ xl
        if self.free is not None:
            out += self.free.A @ xf
        return out

    def cost_norm(self) -> float:
        tot = sum(np.sum(blk.C ** 2) for blk in self.psd)
        for blk in (self.lp, self.free):
            if blk is not None:
                tot += np.sum(blk.c ** 2)
        return float(np.sqrt(tot))

    def gram(self) -> np.ndarray:
        """``A A*`` as an ``m x m`` matrix."""
        G = np.zeros((self.m, self.m))
        for blk in self.psd:
            G += blk.cons.schur(np.eye(blk.cons.size))
        for lin in (self.lp, self.free):
            if lin is not None:
                G += lin.A @ lin.A.T
        return 0.5 * (G + G.T)

    def take(self, rows) -> "ConicProblem":
        rows = np.asarray(rows, dtype=int)
        psd = [PSDBlock(blk.C, blk.cons.take(rows)) for blk in self.psd]
        lp = LinearBlock(self.lp.c, self.lp.A[rows]) if self.lp is not None else None
        free = LinearBlock(self.free.c, self.free.A[rows]) if self.free is not None else None
        return ConicProblem(b=self.b[rows], psd=psd, lp=lp, free=free, layout=self.layout)


@dataclass
class ConicSolution:
    status: str
    Xs: list
    y: np.ndarray
    Ss: list
    x_lp: np.ndarray
    s_lp: np.ndarray
    x_free: np.ndarray
    primal_objective: float
    dual_objective: float
    residuals: dict
    iterations: int
    ray: Optional[np.ndarray] = None
    history: list = field(default_factory=list)
    layout: Optional[list] = None

    @property
    def X(self) -> np.ndarray:
        return self._assemble(self.Xs, self.x_lp)

    @property
    def S(self) -> np.ndarray:
        return self._assemble(self.Ss, self.s_lp)

    def _assemble(self, blocks, vec):
        if self.layout is None:
            if len(blocks) == 1 and vec.size == 0:
                return blocks[0]
            parts = list(blocks) + [np.diag(vec)] if vec.size else list(blocks)
            return sla.block_diag(*parts)
        parts = [blocks[i] if kind == "psd" else vec[i:i + 1].reshape(1, 1)
                 for kind, i in self.layout]
        return sla.block_diag(*parts)


# --------------------------------------------------------------------------
# the interior-point iteration


def _chol(X):
    return np.linalg.cholesky(0.5 * (X + X.T))


def _nt_scaling(X, S):
    """Return ``R, Rinv, lam`` with ``R^{-1} X R^{-T} = R^T S R = diag(lam)``."""
    Lx = _chol(X)
    Ls = _chol(S)
    U, lam, Vt = np.linalg.svd(Ls.T @ Lx)
    sq = np.sqrt(lam)
    R = (Lx @ Vt.T) / sq
    Rinv = (U.T @ Ls.T) / sq[:, None]
    return R, Rinv, lam


def _lyap(lam, Rhs):
    """Solve ``(diag(lam) Z + Z diag(lam)) / 2 = Rhs``."""
    return 2.0 * Rhs / (lam[:, None] + lam[None, :])


def _max_step(lam, D):
    """Largest ``a`` with ``diag(lam) + a D`` PSD (``inf`` if unbounded)."""
    s = 1.0 / np.sqrt(lam)
    wmin = np.linalg.eigvalsh(s[:, None] * D * s[None, :])[0]
    return np.inf if wmin >= 0 else -1.0 / wmin


def _max_step_lp(lam, d):
    neg = d < 0
    return np.inf if not np.any(neg) else float(np.min(-lam[neg] / d[neg]))


class _KKT:
    """Factorization of ``[[M, A_f], [A_f^T, 0]]``."""

    def __init__(self, M, Af, refine: int = 2):
        self.Af = Af
        M = 0.5 * (M + M.T)
        self.M = M
        self.refine = refine
        self.chol = None
        try:
            self.chol = sla.cho_factor(M)
        except (sla.LinAlgError, ValueError):
            reg = 1e-14 * max(1.0, np.max(np.abs(np.diag(M))))
            self.chol = sla.cho_factor(M + reg * np.eye(M.shape[0]))
        if Af is not None and Af.shape[1]:
            MiA = sla.cho_solve(self.chol, Af)
            self.Sf = Af.T @ MiA
            self.MiA = MiA
        else:
            self.Af = None

    def solve(self, r1, r2):
        # a few rounds of iterative refinement; M loses conditioning as mu -> 0
        dy, dxf = self._solve(r1, r2)
        for _ in range(self.refine):
            e1 = r1 - self.M @ dy
            e2 = r2.copy()
            if self.Af is not None:
                e1 -= self.Af @ dxf
                e2 = r2 - self.Af.T @ dy
            ey, ef = self._solve(e1, e2)
            dy, dxf = dy + ey, dxf + ef
        return dy, dxf

    def _solve(self, r1, r2):
        u = sla.cho_solve(self.chol, r1)
        if self.Af is None:
            return u, np.zeros(0)
        dxf = np.linalg.lstsq(self.Sf, self.Af.T @ u - r2, rcond=None)[0]
        dy = u - self.MiA @ dxf
        return dy, dxf


def _initial_point(p: ConicProblem):
    bnorm1 = 1 + np.abs(p.b)
    Xs, Ss = [], []
    for blk in p.psd:
        nb = blk.cons.size
        Anorm = np.sqrt(np.maximum(np.diag(blk.cons.schur(np.eye(nb))), 0))
        xi = max(10.0, np.sqrt(nb), nb * np.max(bnorm1 / (1 + Anorm)))
        eta = max(10.0, np.sqrt(nb), np.max(Anorm), np.linalg.norm(blk.C))
        Xs.append(xi * np.eye(nb))
        Ss.append(eta * np.eye(nb))
    if p.lp is not None:
        nl = p.lp.c.size
        An = np.linalg.norm(p.lp.A, axis=0)
        xi = max(10.0, np.sqrt(nl), nl * np.max(bnorm1) / (1 + np.max(An, initial=0)))
        eta = max(10.0, np.sqrt(nl), np.max(An, initial=0), np.linalg.norm(p.lp.c))
        xl, sl = xi * np.ones(nl), eta * np.ones(nl)
    else:
        xl, sl = np.zeros(0), np.zeros(0)
    xf = np.zeros(p.free.c.size) if p.free is not None else np.zeros(0)
    return Xs, Ss, xl, sl, xf, np.zeros(p.m)


def _residuals(p, Xs, Ss, xl, sl, xf, y):
    rp = p.b - p.apply(Xs, xl, xf)
    rd = [blk.C - blk.cons.adjoint(y) - S for blk, S in zip(p.psd, Ss)]
    rl = p.lp.c - p.lp.A.T @ y - sl if p.lp is not None else np.zeros(0)
    rf = p.free.c - p.free.A.T @ y if p.free is not None else np.zeros(0)
    return rp, rd, rl, rf


def _objectives(p, Xs, xl, xf, y):
    pobj = sum(np.vdot(blk.C, X) for blk, X in zip(p.psd, Xs))
    if p.lp is not None:
        pobj += p.lp.c @ xl
    if p.free is not None:
        pobj += p.free.c @ xf
    return float(pobj), float(p.b @ y)


def _primal_ray_ok(p, y, tol):
    by = p.b @ y
    if not by > 0:
        return None
    d = y / by
    for blk in p.psd:
        if np.linalg.eigvalsh(blk.cons.adjoint(d))[-1] > tol:
            return None
    if p.lp is not None and np.max(p.lp.A.T @ d, initial=-np.inf) > tol:
        return None
    if p.free is not None and np.max(np.abs(p.free.A.T @ d), initial=0) > tol:
        return None
    return d


def _dual_ray_ok(p, Xs, xl, xf, pobj, tol):
    if not pobj < 0:
        return False
    scale = -pobj
    r = p.apply(Xs, xl, xf) / scale
    return np.linalg.norm(r) <= tol


def _solution(status, p, it, Xs, Ss, xl, sl, xf, y, hist, ray=None):
    rp, rd, rl, rf = _residuals(p, Xs, Ss, xl, sl, xf, y)
    pobj, dobj = _objectives(p, Xs, xl, xf, y)
    gap = sum(np.vdot(X, S) for X, S in zip(Xs, Ss)) + float(xl @ sl)
    res = {
        "primal": float(np.linalg.norm(rp)),
        "dual": float(np.sqrt(sum(np.sum(r ** 2) for r in rd) + np.sum(rl ** 2) + np.sum(rf ** 2))),
        "gap": float(gap),
    }
    return ConicSolution(status, Xs, y, Ss, xl, sl, xf, pobj, dobj, res, it, ray, hist, p.layout)


def _reduce(p: ConicProblem, tol: float):
    """Drop dependent equality rows; report inconsistency with a Farkas ray."""
    G = p.gram()
    w, Q = np.linalg.eigh(G)
    wmax = max(w[-1], 0.0)
    keep = w > 1e-11 * max(wmax, 1e-300) * max(1, p.m)
    rank = int(np.sum(keep))
    if rank == p.m:
        return None, None
    Qr = Q[:, keep]
    b_perp = p.b - Qr @ (Qr.T @ p.b)
    if np.linalg.norm(b_perp) > 1e-9 * (1 + np.linalg.norm(p.b)):
        return None, b_perp / (b_perp @ p.b)
    _, _, piv = sla.qr(G, pivoting=True)
    rows = np.sort(piv[:rank])
    return rows, None


def solve(p: ConicProblem, settings: Optional[SolverSettings] = None) -> ConicSolution:
    """Solve the primal-dual pair; see :class:`ConicSolution` for the status contract."""
    settings = settings or SolverSettings()
    rows, ray = _reduce(p, settings.feas_tol)
    if ray is not None:
        Xs = [np.zeros((b.cons.size,) * 2) for b in p.psd]
        nl = p.lp.c.size if p.lp is not None else 0
        nf = p.free.c.size if p.free is not None else 0
        return _solution(PRIMAL_INFEASIBLE, p, 0, Xs, [x.copy() for x in Xs], np.zeros(nl),
                         np.zeros(nl), np.zeros(nf), np.zeros(p.m), [], ray)
    if rows is None:
        return _solve_reduced(p, settings)
    sub = _solve_reduced(p.take(rows), settings)
    y = np.zeros(p.m)
    y[rows] = sub.y
    ray = None
    if sub.ray is not None:
        ray = np.zeros(p.m)
        ray[rows] = sub.ray
    return _solution(sub.status, p, sub.iterations, sub.Xs, sub.Ss, sub.x_lp, sub.s_lp,
                     sub.x_free, y, sub.history, ray)


def _solve_reduced(p: ConicProblem, st: SolverSettings) -> ConicSolution:
    Xs, Ss, xl, sl, xf, y = _initial_point(p)
    nu = sum(blk.cons.size for blk in p.psd) + xl.size
    bscale = 1 + np.linalg.norm(p.b)
    cscale = 1 + p.cost_norm()
    Af = p.free.A if p.free is not None else None
    # A A* is well conditioned after _reduce; used to restore primal
    # feasibility of search directions when the scaled system loses accuracy
    gram = sla.cho_factor(p.gram())
    hist = []
    best = None
    for it in range(st.max_iter + 1):
        rp, rd, rl, rf = _residuals(p, Xs, Ss, xl, sl, xf, y)
        pobj, dobj = _objectives(p, Xs, xl, xf, y)
        gap = sum(np.vdot(X, S) for X, S in zip(Xs, Ss)) + float(xl @ sl)
        relp = np.linalg.norm(rp) / bscale
        reld = np.sqrt(sum(np.sum(r ** 2) for r in rd) + np.sum(rl ** 2) + np.sum(rf ** 2)) / cscale
        relg = gap / (1 + abs(pobj))
        hist.append((pobj, dobj, gap, relp, reld))
        log.debug("it %3d pobj %.9e dobj %.9e gap %.2e pres %.2e dres %.2e",
                  it, pobj, dobj, gap, relp, reld)
        score = max(relp / st.feas_tol, reld / st.feas_tol, relg / st.gap_tol)
        if best is None or score < best[0]:
            best = (score, [X.copy() for X in Xs], [S.copy() for S in Ss], xl.copy(),
                    sl.copy(), xf.copy(), y.copy())
        if score <= 1.0:
            return _solution(OPTIMAL, p, it, Xs, Ss, xl, sl, xf, y, hist)
        d = _primal_ray_ok(p, y, st.infeas_tol)
        if d is not None:
            return _solution(PRIMAL_INFEASIBLE, p, it, Xs, Ss, xl, sl, xf, y, hist, d)
        if _dual_ray_ok(p, Xs, xl, xf, pobj, st.infeas_tol):
            return _solution(DUAL_INFEASIBLE, p, it, Xs, Ss, xl, sl, xf, y, hist)
        if it == st.max_iter:
            break
        mu = gap / nu
        try:
            scal = [_nt_scaling(X, S) for X, S in zip(Xs, Ss)]
        except np.linalg.LinAlgError:
            log.debug("lost positive definiteness at iteration %d", it)
            break
        Ws = [R @ R.T for R, _, _ in scal]
        wl = xl / sl if xl.size else xl
        rl_sc = np.sqrt(wl)
        laml = np.sqrt(xl * sl)
        M = np.zeros((p.m, p.m))
        for blk, W in zip(p.psd, Ws):
            M += blk.cons.schur(W)
        if p.lp is not None:
            M += (p.lp.A * wl) @ p.lp.A.T
        try:
            kkt = _KKT(M, Af)
        except (sla.LinAlgError, ValueError):
            log.debug("Schur complement factorization failed at iteration %d", it)
            break

        def newton(Zs, zl):
            r1 = rp.copy()
            for blk, (R, _, _), W, Z, rdb in zip(p.psd, scal, Ws, Zs, rd):
                r1 -= blk.cons.apply(R @ Z @ R.T - W @ rdb @ W)
            if p.lp is not None:
                r1 -= p.lp.A @ (rl_sc * zl - wl * rl)
            dy, dxf = kkt.solve(r1, rf)
            dS, dX, dSt, dXt = [], [], [], []
            for blk, (R, Rinv, lam), W, Z, rdb in zip(p.psd, scal, Ws, Zs, rd):
                dSb = rdb - blk.cons.adjoint(dy)
                dSb = 0.5 * (dSb + dSb.T)
                dSbt = R.T @ dSb @ R
                dXbt = Z - dSbt
                dXb = R @ dXbt @ R.T
                dS.append(dSb)
                dX.append(0.5 * (dXb + dXb.T))
                dSt.append(0.5 * (dSbt + dSbt.T))
                dXt.append(0.5 * (dXbt + dXbt.T))
            if p.lp is not None:
                dsl = rl - p.lp.A.T @ dy
                dslt = rl_sc * dsl
                dxlt = zl - dslt
                dxl = rl_sc * dxlt
            else:
                dsl = dslt = dxlt = dxl = np.zeros(0)
            e = rp - p.apply(dX, dxl, dxf)
            if np.linalg.norm(e) > 1e-14 * bscale:
                z = sla.cho_solve(gram, e)
                dX = [D + blk.cons.adjoint(z) for blk, D in zip(p.psd, dX)]
                dX = [0.5 * (D + D.T) for D in dX]
                dXt = [Rinv @ D @ Rinv.T for (_, Rinv, _), D in zip(scal, dX)]
                dXt = [0.5 * (D + D.T) for D in dXt]
                if p.lp is not None:
                    dxl = dxl + p.lp.A.T @ z
                    dxlt = dxl / rl_sc
                if Af is not None:
                    dxf = dxf + Af.T @ z
            return dX, dy, dS, dxl, dsl, dxf, dXt, dSt, dxlt, dslt

        def steps(dXt, dSt, dxlt, dslt):
            ap, ad = np.inf, np.inf
            for (_, _, lam), Dx, Ds in zip(scal, dXt, dSt):
                ap = min(ap, _max_step(lam, Dx))
                ad = min(ad, _max_step(lam, Ds))
            if xl.size:
                ap = min(ap, _max_step_lp(laml, dxlt))
                ad = min(ad, _max_step_lp(laml, dslt))
            return ap, ad

        # predictor
        Za = [-np.diag(lam) for _, _, lam in scal]
        za = -laml
        aff = newton(Za, za)
        ap, ad = steps(*aff[6:])
        ap, ad = min(1.0, ap), min(1.0, ad)
        gap_aff = sum(np.vdot(X + ap * dX, S + ad * dS)
                      for X, S, dX, dS in zip(Xs, Ss, aff[0], aff[2]))
        if xl.size:
            gap_aff += float((xl + ap * aff[3]) @ (sl + ad * aff[4]))
        sigma = float(np.clip((max(gap_aff, 0.0) / gap) ** 3, 0.0, 1.0))

        # corrector
        Zc = []
        for (_, _, lam), Dx, Ds in zip(scal, aff[6], aff[7]):
            jordan = 0.5 * (Dx @ Ds + Ds @ Dx)
            Rhs = sigma * mu * np.eye(lam.size) - np.diag(lam ** 2) - jordan
            Zc.append(_lyap(lam, Rhs))
        zc = (sigma * mu - laml ** 2 - aff[8] * aff[9]) / laml if xl.size else laml
        dX, dy, dS, dxl, dsl, dxf, dXt, dSt, dxlt, dslt = newton(Zc, zc)
        ap, ad = steps(dXt, dSt, dxlt, dslt)
        ap = min(1.0, st.step * ap)
        ad = min(1.0, st.step * ad)
        log.debug("   steps ap %.3e ad %.3e sigma %.3e", ap, ad, sigma)
        if ap < 1e-12 and ad < 1e-12:
            log.debug("step length collapsed at iteration %d", it)
            break
        Xs = [X + ap * D for X, D in zip(Xs, dX)]
        xl = xl + ap * dxl
        xf = xf + ap * dxf
        y = y + ad * dy
        Ss = [S + ad * D for S, D in zip(Ss, dS)]
        sl = sl + ad * dsl
    _, Xs, Ss, xl, sl, xf, y = best
    return _solution(NUMERICAL_LIMIT, p, it, Xs, Ss, xl, sl, xf, y, hist)


# --------------------------------------------------------------------------
# certificates and checks


@dataclass
class OptimalityCheck:
    ok: bool
    primal_residual: float
    dual_residual: float
    complementarity: float
    min_eig_X: float
    min_eig_S: float

    def __bool__(self):
        return self.ok


def verify_optimality(p: ConicProblem, sol: ConicSolution, tol: float = 1e-7) -> OptimalityCheck:
    """Check feasibility of both sides and ``X S = 0`` without trusting solver internals."""
    rp, rd, rl, rf = _residuals(p, sol.Xs, sol.Ss, sol.x_lp, sol.s_lp, sol.x_free, sol.y)
    pres = float(np.linalg.norm(rp))
    dres = float(np.sqrt(sum(np.sum(r ** 2) for r in rd) + np.sum(rl ** 2) + np.sum(rf ** 2)))
    eigX = [np.linalg.eigvalsh(X)[0] for X in sol.Xs] + list(sol.x_lp)
    eigS = [np.linalg.eigvalsh(S)[0] for S in sol.Ss] + list(sol.s_lp)
    mx, ms = float(min(eigX)), float(min(eigS))
    XS = np.sqrt(sum(np.sum((X @ S) ** 2) for X, S in zip(sol.Xs, sol.Ss))
                 + float(np.sum((sol.x_lp * sol.s_lp) ** 2)))
    nX = np.sqrt(sum(np.sum(X ** 2) for X in sol.Xs) + np.sum(sol.x_lp ** 2))
    nS = np.sqrt(sum(np.sum(S ** 2) for S in sol.Ss) + np.sum(sol.s_lp ** 2))
    ok = (pres <= tol * (1 + np.linalg.norm(p.b)) and mx >= -tol
          and dres <= tol * (1 + p.cost_norm()) and ms >= -tol
          and XS <= tol * (1 + nX * nS))
    return OptimalityCheck(bool(ok), pres, dres, float(XS), mx, ms)


def check_primal_ray(p: ConicProblem, d, tol: float = 1e-8) -> bool:
    """``<b, d> > 0`` and ``A*(d)`` in ``-K`` up to ``tol`` (Farkas certificate)."""
    d = np.asarray(d, dtype=float)
    if not p.b @ d > 0:
        return False
    scale = max(1.0, p.b @ d)
    for blk in p.psd:
        if np.linalg.eigvalsh(blk.cons.adjoint(d))[-1] > tol * scale:
            return False
    if p.lp is not None and np.max(p.lp.A.T @ d, initial=-np.inf) > tol * scale:
        return False
    if p.free is not None and np.max(np.abs(p.free.A.T @ d), initial=0) > tol * scale:
        return False
    return True


# --------------------------------------------------------------------------
# linear feasibility


@dataclass
class LPFeasibility:
    feasible: bool
    x: Optional[np.ndarray] = None
    ray_ineq: Optional[np.ndarray] = None
    ray_eq: Optional[np.ndarray] = None
    value: float = 0.0
    status: str = OPTIMAL

    def __bool__(self):
        return self.feasible


def lp_feasible(inequalities: Sequence = (), equalities: Sequence = (),
                settings: Optional[SolverSettings] = None, tol: float = 1e-8) -> LPFeasibility:
    """Decide whether ``{x : a.x (<=|>=) rhs, a.x == rhs}`` is non-empty.

    ``inequalities`` holds ``(a, sense, rhs)`` with sense ``"<="`` or ``">="``;
    ``equalities`` holds ``(a, rhs)``. When infeasible, the returned ray
    ``(z >= 0, w)`` satisfies ``sum z_i s_i a_i + sum w_j a_j = 0`` and
    ``sum z_i s_i rhs_i + sum w_j rhs_j < 0``, with ``s_i = +1`` for ``<=``
    rows and ``-1`` for ``>=`` rows.

    The feasibility test is the phase-one program ``min t`` over
    ``a.x - rhs <= t`` (``t >= -1``), solved by the same interior-point code
    with orthant and free blocks.
    """
    if not inequalities and not equalities:
        raise ValueError("need at least one constraint")
    rows = [np.atleast_1d(np.asarray(a, dtype=float)) for a, _, _ in inequalities]
    rows += [np.atleast_1d(np.asarray(a, dtype=float)) for a, _ in equalities]
    k = rows[0].size
    if any(r.size != k for r in rows):
        raise ValueError("constraint vectors differ in length")
    sign = []
    for _, sense, _ in inequalities:
        if sense not in ("<=", ">="):
            raise ValueError(f"unknown sense {sense!r}")
        sign.append(1.0 if sense == "<=" else -1.0)
    sign = np.array(sign)
    G = np.array([s * np.asarray(a, dtype=float) for s, (a, _, _) in zip(sign, inequalities)]).reshape(-1, k)
    h = np.array([s * float(r) for s, (_, _, r) in zip(sign, inequalities)])
    E = np.array([np.asarray(a, dtype=float) for a, _ in equalities]).reshape(-1, k)
    f = np.array([float(r) for _, r in equalities])
    p_ineq, q = G.shape[0], E.shape[0]

    if p_ineq == 0:
        x, *_ = np.linalg.lstsq(E, f, rcond=None)
        r = f - E @ x
        if np.linalg.norm(r) <= tol * (1 + np.linalg.norm(f)):
            return LPFeasibility(True, x=x)
        w = -r / (r @ r)
        return LPFeasibility(False, ray_ineq=np.zeros(0), ray_eq=w, value=float(np.linalg.norm(r)))

    # variables: lp = (tau, slack_1..p), free = x ; rows: ineq then eq
    m = p_ineq + q
    A_lp = np.zeros((m, 1 + p_ineq))
    A_lp[:p_ineq, 0] = -1.0
    A_lp[:p_ineq, 1:] = np.eye(p_ineq)
    c_lp = np.zeros(1 + p_ineq)
    c_lp[0] = 1.0
    A_f = np.vstack([G, E])
    b = np.concatenate([h - 1.0, f])
    prob = ConicProblem(b=b, lp=LinearBlock(c_lp, A_lp), free=LinearBlock(np.zeros(k), A_f))
    sol = solve(prob, settings or SolverSettings(feas_tol=1e-10, gap_tol=1e-10))
    if sol.status == PRIMAL_INFEASIBLE:
        # equality part is inconsistent
        d = sol.ray
        z = np.maximum(-d[:p_ineq], 0.0)
        w = -d[p_ineq:]
        return LPFeasibility(False, ray_ineq=np.zeros(p_ineq), ray_eq=w, value=np.inf, status=sol.status)
    t = sol.primal_objective - 1.0
    x = sol.x_free
    viol = max(np.max(G @ x - h, initial=-np.inf), np.max(np.abs(E @ x - f), initial=0.0))
    if sol.status == OPTIMAL and viol <= tol * (1 + np.max(np.abs(h), initial=0)):
        return LPFeasibility(True, x=x, value=float(t), status=sol.status)
    z = np.maximum(-sol.y[:p_ineq], 0.0)
    w = -sol.y[p_ineq:]
    val = h @ z + f @ w
    if val < 0:
        z, w = z / -val, w / -val
    if val < 0 and np.linalg.norm(G.T @ z + E.T @ w) <= tol:
        return LPFeasibility(False, ray_ineq=z, ray_eq=w, value=float(t), status=sol.status)
    return LPFeasibility(viol <= 1e-6, x=x, value=float(t), status=NUMERICAL_LIMIT)
