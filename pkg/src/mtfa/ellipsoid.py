"""Centered ellipsoids through prescribed points.

A centered ellipsoid ``{x : x^T M x = 1}`` with ``M`` PSD passes through the
columns ``v_i`` of a ``k x n`` matrix ``V`` when ``diag(V^T M V) = 1``. The
block variant asks for ``[V^T M V]_I = I`` on every block ``I`` of a
partition, i.e. the whole ellipsoid ``V(S^I)`` lies on the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import conic
from .numerics import DegenerateInputError, Partition, lambda_max, lambda_min

FITTED = "fitted"
INFEASIBLE = "infeasible"
UNCERTAIN = "boundary-uncertain"

BOUNDARY_MARGIN = 1e-7


@dataclass(frozen=True, eq=False)
class PointSet:
    """Points ``v_1..v_n`` in R^k stored as the columns of ``V``."""

    V: np.ndarray

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        if V.ndim == 1:
            V = V[:, None]
        if V.ndim != 2 or V.shape[0] < 1 or V.shape[1] < 1:
            raise ValueError("points must form a non-empty k x n array")
        if not np.all(np.isfinite(V)):
            raise ValueError("points contain NaN or infinite entries")
        V.setflags(write=False)
        object.__setattr__(self, "V", V)

    @classmethod
    def from_points(cls, *points) -> "PointSet":
        return cls(np.column_stack([np.asarray(v, dtype=float) for v in points]))

    @property
    def k(self) -> int:
        return self.V.shape[0]

    @property
    def n(self) -> int:
        return self.V.shape[1]


@dataclass
class FitResult:
    """Outcome of a fit.

    ``M`` is set when a fitting ellipsoid was found, ``d`` (``B`` for block
    problems) when a separating certificate was found: ``sum(d) > 0`` and
    ``V diag(d) V^T`` negative semidefinite. ``phase1`` is the optimal value
    of the phase-one program; negative values mean slack inside the PSD cone.
    """

    status: str
    M: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None
    phase1: float = float("nan")
    solver_status: str = ""

    @property
    def margin(self) -> float:
        return abs(self.phase1)

    @property
    def fitted(self) -> bool:
        return self.status == FITTED


def _whiten(V, tol=1e-12):
    """Orthonormal-row matrix with the row space of ``V`` and the back-map ``T``.

    ``V = T^{-1}``-style relation: ``v_i = (T^+)^T w_i`` so a fit ``Mw`` for the
    whitened columns gives ``T Mw T^T`` for the original ones.
    """
    U, s, Wt = np.linalg.svd(V, full_matrices=False)
    keep = s > tol * (s[0] if s.size else 0.0)
    return Wt[keep], U[:, keep] / s[keep]


def _phase_one(W, P: Partition, settings):
    """min s  s.t.  [W^T (Z - s I) W]_I = I,  Z PSD   (W has orthonormal rows)."""
    ks, is_, js, b = [], [], [], []
    for blk in P.blocks:
        for ia, a in enumerate(blk):
            for c in blk[ia:]:
                ks.append(len(b))
                is_.append(a)
                js.append(c)
                b.append(1.0 if a == c else 0.0)
    ks, is_, js = np.array(ks), np.array(is_), np.array(js)
    m = len(b)
    kdim = W.shape[0]
    cons = conic.FactoredConstraints(W, ks, is_, js, np.ones(m), m)
    G = W.T @ W
    free = conic.LinearBlock(np.ones(1), -G[is_, js].reshape(m, 1))
    prob = conic.ConicProblem(b=np.array(b), psd=[conic.PSDBlock(np.zeros((kdim, kdim)), cons)],
                              free=free)
    return prob, conic.solve(prob, settings), (is_, js)


def _block_from_y(y, pairs, n):
    is_, js = pairs
    B = np.zeros((n, n))
    diag = is_ == js
    B[is_[diag], js[diag]] = y[diag]
    off = ~diag
    B[is_[off], js[off]] = 0.5 * y[off]
    B[js[off], is_[off]] = 0.5 * y[off]
    return B


def _collapse(W, tol=1e-12):
    """Representative columns after merging ``w_i = +-w_j`` duplicates."""
    reps, owner = [], np.empty(W.shape[1], dtype=int)
    for i in range(W.shape[1]):
        for r in reps:
            if (np.linalg.norm(W[:, i] - W[:, r]) <= tol or
                    np.linalg.norm(W[:, i] + W[:, r]) <= tol):
                owner[i] = r
                break
        else:
            reps.append(i)
            owner[i] = i
    return np.array(reps), owner


def _fit_core(V, P: Partition, settings) -> FitResult:
    n = V.shape[1]
    if P.n != n:
        raise ValueError(f"partition is over {P.n} indices but there are {n} points")
    settings = settings or conic.SolverSettings(feas_tol=1e-9, gap_tol=1e-9)
    if not np.any(V):
        B = np.zeros((n, n))
        B[P.blocks[0][0], P.blocks[0][0]] = 1.0
        return _finish_infeasible(B, V, P, np.inf, conic.PRIMAL_INFEASIBLE)
    W, T = _whiten(V)

    cols = np.arange(n)
    sub_P = P
    if P.is_singletons:
        reps, _ = _collapse(W)
        cols = reps
        sub_P = Partition.singletons(reps.size)
    Wc = W[:, cols]

    prob, sol, pairs = _phase_one(Wc, sub_P, settings)
    if sol.status == conic.PRIMAL_INFEASIBLE:
        Bc = _block_from_y(sol.ray, pairs, cols.size)
        return _finish_infeasible(_embed(Bc, cols, n), V, P, np.inf, sol.status)
    if sol.status != conic.OPTIMAL:
        return _salvage(prob, sol, pairs, cols, W, T, V, P)

    s = float(sol.x_free[0])
    Mw = sol.Xs[0] - s * np.eye(W.shape[0])
    Mw = 0.5 * (Mw + Mw.T)
    if s > BOUNDARY_MARGIN:
        Bc = _block_from_y(sol.y, pairs, cols.size)
        return _finish_infeasible(_embed(Bc, cols, n), V, P, s, sol.status)
    M = T @ Mw @ T.T
    M = 0.5 * (M + M.T)
    status = FITTED if s < -BOUNDARY_MARGIN else UNCERTAIN
    res = FitResult(status, M=M, phase1=s, solver_status=sol.status)
    if status == UNCERTAIN:
        if lambda_min(Mw) < -1e-8:
            res.M = None
        Bc = _block_from_y(sol.y, pairs, cols.size)
        B = _clean_certificate(_embed(Bc, cols, n), V)
        if B is not None:
            res.B = B
            res.d = np.diag(B).copy() if P.is_singletons else None
    return res


def _polish_fit(prob, Mw):
    """Least-norm correction putting ``Mw`` exactly on the affine constraints; None if not PSD."""
    cons = prob.psd[0].cons
    e = prob.b - cons.apply(Mw)
    G = cons.schur(np.eye(Mw.shape[0]))
    z = np.linalg.lstsq(G, e, rcond=None)[0]
    Mw = Mw + cons.adjoint(z)
    Mw = 0.5 * (Mw + Mw.T)
    if np.max(np.abs(prob.b - cons.apply(Mw))) > 1e-10 or lambda_min(Mw) < 0:
        return None
    return Mw


def _salvage(prob, sol, pairs, cols, W, T, V, P) -> FitResult:
    """Try to read a verified answer off the best iterate of a stalled solve.

    A dual iterate with value above the margin gives a separating matrix
    after cleaning; a primal iterate with value below minus the margin gives
    a fit after projecting onto the constraints. Both are re-checked, so
    the solver's own stopping test is not relied on.
    """
    n = V.shape[1]
    if sol.dual_objective > BOUNDARY_MARGIN and sol.residuals["dual"] <= 1e-7:
        Bc = _block_from_y(sol.y, pairs, cols.size)
        res = _finish_infeasible(_embed(Bc, cols, n), V, P, float(sol.dual_objective), sol.status)
        if res.status == INFEASIBLE:
            return res
    s = float(sol.x_free[0]) if sol.x_free.size else np.nan
    if s < -BOUNDARY_MARGIN:
        Mw = _polish_fit(prob, sol.Xs[0] - s * np.eye(W.shape[0]))
        if Mw is not None:
            M = T @ Mw @ T.T
            return FitResult(FITTED, M=0.5 * (M + M.T), phase1=s, solver_status=sol.status)
    return FitResult(UNCERTAIN, phase1=float(sol.primal_objective), solver_status=sol.status)


def _embed(Bc, cols, n):
    B = np.zeros((n, n))
    B[np.ix_(cols, cols)] = Bc
    return B


def _clean_certificate(B, V):
    """Shift ``B`` by a multiple of ``I`` so ``V B V^T`` is exactly NSD; None if tr <= 0."""
    W, _ = _whiten(V)
    top = lambda_max(W @ B @ W.T) if W.size else 0.0
    if top > 0:
        B = B - top * np.eye(B.shape[0])
    if not np.trace(B) > 0:
        return None
    return B / np.max(np.abs(np.diag(B)))


def _finish_infeasible(B, V, P, s, solver_status):
    Bn = _clean_certificate(B, V)
    if Bn is None:
        return FitResult(UNCERTAIN, phase1=s, solver_status=solver_status)
    if not P.is_singletons:
        # certificate must stay block diagonal
        Bn = np.where(P.mask(), Bn, 0.0)
    d = np.diag(Bn).copy() if P.is_singletons else None
    return FitResult(INFEASIBLE, d=d, B=Bn, phase1=s, solver_status=solver_status)


def fit(points, settings: Optional[conic.SolverSettings] = None) -> FitResult:
    """Fit a centered ellipsoid through every point, or certify that none exists.

    Examples
    --------
    >>> res = fit(PointSet.from_points([1, 0], [0, 1], [1, 1]))
    >>> res.status, np.round(res.M, 6).tolist()
    ('fitted', [[1.0, -0.5], [-0.5, 1.0]])
    """
    pts = points if isinstance(points, PointSet) else PointSet(points)
    return _fit_core(pts.V, Partition.singletons(pts.n), settings)


def fit_blocks(points, P: Partition, settings: Optional[conic.SolverSettings] = None) -> FitResult:
    """Block version of :func:`fit`: ``[V^T M V]_I = I`` for each block ``I`` of ``P``."""
    pts = points if isinstance(points, PointSet) else PointSet(points)
    return _fit_core(pts.V, P, settings)


def check_fit(points, res: FitResult, tol: float = 1e-7, P: Optional[Partition] = None) -> bool:
    """Independent check of whichever certificate ``res`` carries."""
    pts = points if isinstance(points, PointSet) else PointSet(points)
    V = pts.V
    P = P or Partition.singletons(pts.n)
    if res.status == FITTED:
        if res.M is None or lambda_min(res.M) < -1e-8 * max(1.0, np.linalg.norm(res.M)):
            return False
        G = V.T @ res.M @ V
        target = np.eye(pts.n)
        return bool(np.max(np.abs((G - target)[P.mask()]), initial=0) <= tol)
    if res.status == INFEASIBLE:
        B = res.B if res.B is not None else np.diag(res.d)
        if np.any(np.abs(B[~P.mask()]) > 0):
            return False
        Q = V @ B @ V.T
        return bool(np.trace(B) > 0 and lambda_max(Q) <= 1e-8 * max(1.0, np.linalg.norm(V) ** 2))
    return False


def sandwich_values(points) -> np.ndarray:
    """Quadratic forms ``v_i^T (V V^T)^{-1} v_i``."""
    pts = points if isinstance(points, PointSet) else PointSet(points)
    V = pts.V
    G = V @ V.T
    s = np.linalg.svd(G, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise DegenerateInputError("points do not span R^k (V V^T is singular)")
    return np.einsum("ij,ij->j", V, np.linalg.solve(G, V))


def sandwich_check(points, beta: float) -> bool:
    """True iff every point lies in the shell ``beta < v^T (V V^T)^{-1} v <= 1``."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    q = sandwich_values(points)
    return bool(np.all(q > beta) and np.all(q <= 1 + 1e-12))


def hull_boundary(points, tol: float = 1e-8) -> np.ndarray:
    """Per point, whether ``v_i`` lies on the boundary of ``conv{+-v_1, ..., +-v_n}``.

    Decided by the linear feasibility problem ``<x, v_i> = 1``,
    ``|<x, v_j>| <= 1`` for ``j != i``.
    """
    pts = points if isinstance(points, PointSet) else PointSet(points)
    out = np.zeros(pts.n, dtype=bool)
    for i in range(pts.n):
        out[i] = bool(hull_lp(pts.V, i, tol))
    return out


def hull_lp(V, i: int, tol: float = 1e-8) -> conic.LPFeasibility:
    V = np.asarray(V, dtype=float)
    ineq = []
    for j in range(V.shape[1]):
        if j != i:
            ineq.append((V[:, j], "<=", 1.0))
            ineq.append((V[:, j], ">=", -1.0))
    eq = [(V[:, i], 1.0)]
    return conic.lp_feasible(ineq, eq, tol=tol)


def region_R(v) -> bool:
    """Whether ``v``, together with ``e_1..e_k``, admits a fitting centered ellipsoid."""
    a = np.abs(np.asarray(v, dtype=float))
    tot = a.sum()
    return bool(tot >= 1 and np.all(2 * a - tot <= 1))


def region_Rprime(v) -> bool:
    """Whether ``v, e_1..e_k`` satisfy the 1/2-sandwich condition."""
    sq = np.asarray(v, dtype=float) ** 2
    tot = sq.sum()
    return bool(tot > 1 and np.all(2 * sq - tot < 1))


def distance_to_region_boundary(v) -> float:
    """Euclidean distance from a planar point to the boundary of ``R`` (k = 2 only)."""
    x, y = np.abs(np.asarray(v, dtype=float))
    # by symmetry work in the first quadrant; the boundary there is the
    # segment x + y = 1 and the rays x - y = 1 (x >= 1), y - x = 1 (y >= 1)
    p = np.array([x, y])
    segs = [((1.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (1e6 + 1, 1e6)), ((0.0, 1.0), (1e6, 1e6 + 1))]
    best = np.inf
    for a, b in segs:
        a, b = np.array(a), np.array(b)
        t = np.clip((p - a) @ (b - a) / ((b - a) @ (b - a)), 0, 1)
        best = min(best, np.linalg.norm(p - (a + t * (b - a))))
    return float(best)


def region_grid(xmin: float, xmax: float, ymin: float, ymax: float, step: float,
                settings: Optional[conic.SolverSettings] = None):
    """Evaluate ``R``, ``R'`` and the fitted verdict for ``v`` on a planar grid.

    Yields ``(x, y, in_R, in_Rprime, status)`` with base points ``e_1, e_2``.
    """
    nx = int(round((xmax - xmin) / step)) + 1
    ny = int(round((ymax - ymin) / step)) + 1
    for ix in range(nx):
        x = round(xmin + ix * step, 12)
        for iy in range(ny):
            y = round(ymin + iy * step, 12)
            v = np.array([x, y])
            res = fit(np.column_stack([np.eye(2), v]), settings)
            yield x, y, region_R(v), region_Rprime(v), res.status
