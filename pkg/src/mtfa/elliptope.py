"""Realizability of subspaces against the elliptope and its block analogue.

A subspace ``U`` of R^n is realizable when some correlation matrix ``Y``
(PSD, unit diagonal) has ``Y u = 0`` for all ``u`` in ``U``. For a partition
``P`` the block version replaces the unit diagonal by identity diagonal
blocks. Certificates go both ways: a ``CorrelationCertificate`` holds such a
``Y``; a ``FailureCertificate`` holds a (block-)diagonal ``D`` with positive
trace that is negative semidefinite on the orthogonal complement of ``U``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import conic, ellipsoid
from .numerics import (DegenerateInputError, Partition, Subspace, lambda_max, lambda_min,
                       projector, spectral_norm)

REALIZABLE = "realizable"
NOT_REALIZABLE = "not-realizable"
UNCERTAIN = "boundary-uncertain"

CONSTRUCTIVE = "constructive"
SDP = "sdp"
BALANCE = "balance-necessity"

# constructive route is skipped within this distance of the 1/2 threshold
THRESHOLD_BAND = 1e-3


class PreconditionError(ValueError):
    """Hypothesis of a sufficient-condition construction does not hold."""


@dataclass
class CorrelationCertificate:
    """``Y`` in the (block) elliptope with ``U`` in its null space.

    ``lam`` holds the weights of the explicit construction when that route
    produced ``Y``, else None.
    """

    Y: np.ndarray
    lam: Optional[np.ndarray] = None


@dataclass
class FailureCertificate:
    """``d`` is the diagonal of ``D`` (singleton case); ``B`` the full block-diagonal matrix."""

    B: np.ndarray

    @property
    def d(self) -> np.ndarray:
        return np.diag(self.B).copy()


Certificate = Union[CorrelationCertificate, FailureCertificate]


@dataclass
class RealizabilityReport:
    verdict: str
    certificate: Optional[Certificate]
    method: str
    margin: float

    @property
    def realizable(self) -> bool:
        return self.verdict == REALIZABLE


# --------------------------------------------------------------------------
# coherence and balance


def coherence(U: Subspace) -> float:
    """Largest squared norm of a projected standard basis vector: ``max_i [P_U]_ii``."""
    if U.dim == 0:
        return 0.0
    return float(np.max(np.sum(U.basis ** 2, axis=1)))


def p_coherence(U: Subspace, P: Partition) -> float:
    """Largest spectral norm of a principal block ``[P_U]_I`` over blocks of ``P``."""
    if P.n != U.n:
        raise ValueError("partition and subspace dimensions differ")
    if U.dim == 0:
        return 0.0
    PU = projector(U)
    return max(spectral_norm(blk) for blk in P.blkdiag(PU))


def squared_balance_check(U: Subspace) -> bool:
    """Sufficient test for realizability: ``u o u`` strictly balanced for all ``u`` in U.

    Equivalent to ``coherence(U) < 1/2``, which is what is evaluated.
    """
    if U.dim < 1:
        raise ValueError("need a non-trivial subspace")
    return coherence(U) < 0.5


def is_balanced(u, strict: bool = False) -> bool:
    """``|u_i| <= sum_{j != i} |u_j|`` for every ``i`` (``<`` when strict)."""
    a = np.abs(np.asarray(u, dtype=float))
    if not np.any(a):
        raise ValueError("balance is undefined for the zero vector")
    slack = (a.sum() - a) - a
    return bool(np.all(slack > 0) if strict else np.all(slack >= 0))


def balance_margin(u) -> float:
    """``min_i (sum_{j != i}|u_j| - |u_i|) / ||u||_1``; negative when unbalanced."""
    a = np.abs(np.asarray(u, dtype=float))
    return float(np.min(a.sum() - 2 * a) / a.sum())


def is_p_balanced(u, P: Partition, strict: bool = False) -> bool:
    """Block analogue of :func:`is_balanced` using Euclidean norms of ``u_I``."""
    u = np.asarray(u, dtype=float)
    if P.n != u.size:
        raise ValueError("partition and vector dimensions differ")
    if not np.any(u):
        raise ValueError("balance is undefined for the zero vector")
    return is_balanced(P.block_norms(u), strict)


@dataclass
class BalanceResult:
    holds: bool
    index: Optional[int] = None
    witness: Optional[np.ndarray] = None
    uncertain: bool = False

    def __bool__(self):
        return self.holds


def all_balanced(U: Subspace, tol: float = 1e-8) -> BalanceResult:
    """Decide whether every vector of ``U`` is balanced.

    For each index ``i`` one linear feasibility problem is solved on a basis
    ``V`` of the complement: ``v_i`` lies on the boundary of the hull of the
    ``+-v_j`` exactly when no ``u`` in ``U`` has ``|u_i| > sum_{j != i}|u_j|``.
    An infeasible problem yields such a ``u`` from its Farkas ray.
    """
    if U.dim >= U.n:
        raise ValueError("U must be a proper subspace")
    if U.dim == 0:
        return BalanceResult(True)
    V = U.complement().basis.T
    uncertain = False
    for i in range(U.n):
        res = ellipsoid.hull_lp(V, i, tol)
        if res.status == conic.NUMERICAL_LIMIT:
            uncertain = True
            continue
        if res.feasible:
            continue
        z = res.ray_ineq
        u = np.zeros(U.n)
        others = [j for j in range(U.n) if j != i]
        u[others] = z[0::2] - z[1::2]
        u[i] = res.ray_eq[0]
        # project onto U to wash out solver error, then confirm directly
        u = U.basis @ (U.basis.T @ u)
        a = np.abs(u)
        if a[i] > a.sum() - a[i]:
            return BalanceResult(False, i, u)
        uncertain = True
    return BalanceResult(True, uncertain=uncertain)


# --------------------------------------------------------------------------
# constructive certificate


def walters_solve(A, y) -> np.ndarray:
    """Solve ``A x = y`` for a non-negative ``A`` satisfying Walters' positivity test.

    Hypotheses: ``A >= 0`` entrywise, ``diag(A) > 0``, ``y > 0`` and
    ``2 y - A D^{-1} y > 0`` with ``D = diag(A)``. Under these ``A`` is
    invertible and the solution is entrywise positive.

    Raises
    ------
    PreconditionError
        naming the first hypothesis that fails.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != y.size:
        raise ValueError("A must be square and match y")
    if np.any(A < 0):
        raise PreconditionError("A has negative entries")
    dA = np.diag(A)
    if np.any(dA <= 0):
        raise PreconditionError("A has non-positive diagonal entries")
    if np.any(y <= 0):
        raise PreconditionError("y is not strictly positive")
    test = 2 * y - A @ (y / dA)
    if np.any(test <= 0):
        i = int(np.argmin(test))
        raise PreconditionError(f"2y - A D^-1 y > 0 fails at index {i} (value {test[i]:.3g})")
    x = np.linalg.solve(A, y)
    if np.any(x <= 0):
        raise DegenerateInputError("solution lost positivity to roundoff")
    return x


def hadamard_certificate(U: Subspace) -> CorrelationCertificate:
    """Explicit correlation matrix ``P diag(lam) P`` vanishing on ``U``, ``P`` the complement projector.

    ``lam`` solves ``(P o P) lam = 1``; requires ``coherence(U) < 1/2``.
    """
    mu = coherence(U)
    if not mu < 0.5 - 1e-9:
        raise PreconditionError(f"coherence {mu:.6g} is not below 1/2")
    Pc = np.eye(U.n) - projector(U)
    lam = walters_solve(Pc * Pc, np.ones(U.n))
    Y = (Pc * lam) @ Pc
    return CorrelationCertificate(0.5 * (Y + Y.T), lam)


# --------------------------------------------------------------------------
# certificate checks (numerics only)


def check_correlation_certificate(Y, U: Subspace, P: Optional[Partition] = None,
                                  tol: float = 1e-8, null_tol: float = 1e-7) -> bool:
    Y = np.asarray(Y, dtype=float)
    P = P or Partition.singletons(U.n)
    if Y.shape != (U.n, U.n) or np.max(np.abs(Y - Y.T)) > tol:
        return False
    if lambda_min(Y) < -tol:
        return False
    target = np.eye(U.n)
    if np.max(np.abs((Y - target)[P.mask()])) > tol:
        return False
    return bool(np.linalg.norm(Y @ projector(U)) <= null_tol)


def check_failure_certificate(B, U: Subspace, P: Optional[Partition] = None,
                              tol: float = 1e-8) -> bool:
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = np.diag(B)
    P = P or Partition.singletons(U.n)
    if B.shape != (U.n, U.n) or np.any(B[~P.mask()] != 0):
        return False
    if not np.trace(B) > 0:
        return False
    Pc = np.eye(U.n) - projector(U)
    return bool(lambda_max(Pc @ B @ Pc) <= tol * max(np.linalg.norm(B), 1e-300))


def check_certificate(cert: Certificate, U: Subspace, P: Optional[Partition] = None) -> bool:
    if isinstance(cert, CorrelationCertificate):
        return check_correlation_certificate(cert.Y, U, P)
    if isinstance(cert, FailureCertificate):
        return check_failure_certificate(cert.B, U, P)
    return False


# --------------------------------------------------------------------------
# decision procedure


def unbalanced_certificate(u, U: Optional[Subspace] = None) -> FailureCertificate:
    """Failure certificate from a vector with ``|u_i| > sum_{j != i} |u_j|``.

    With ``S = sum_{j != i}|u_j|``, ``D = diag(d)`` where ``d_i = u_i^2 / S`` and
    ``d_j = -|u_j|``. Cauchy-Schwarz gives ``v^T D v <= 0`` for ``v`` orthogonal
    to ``u``, and ``tr D = u_i^2/S - S > 0``.
    """
    u = np.asarray(u, dtype=float)
    a = np.abs(u)
    i = int(np.argmax(a))
    S = a.sum() - a[i]
    if not a[i] > S:
        raise PreconditionError("vector is balanced")
    d = -a.copy()
    d[i] = a[i] ** 2 / S if S > 0 else 1.0
    d /= np.max(np.abs(d))
    return FailureCertificate(np.diag(d))


def _block_rotation(u, P: Partition) -> np.ndarray:
    """Block orthogonal ``Q`` sending each ``u_I`` onto its first coordinate."""
    Q = np.eye(P.n)
    for blk in P.blocks:
        idx = list(blk)
        x = u[idx]
        nx = np.linalg.norm(x)
        if len(idx) == 1 or nx == 0:
            continue
        e = np.zeros(len(idx))
        e[0] = 1.0
        w = x / nx - e
        if np.linalg.norm(w) < 1e-15:
            continue
        w /= np.linalg.norm(w)
        Q[np.ix_(idx, idx)] = np.eye(len(idx)) - 2 * np.outer(w, w)
    return Q


def p_unbalanced_certificate(u, P: Partition) -> FailureCertificate:
    """Block failure certificate from a vector that is not ``P``-balanced.

    Rotate each block of ``u`` onto one coordinate with a block orthogonal
    ``Q``; the diagonal certificate for ``Q u`` pulls back to ``Q^T D Q``.
    """
    u = np.asarray(u, dtype=float)
    Q = _block_rotation(u, P)
    D = unbalanced_certificate(Q @ u).B
    B = Q.T @ D @ Q
    B = np.where(P.mask(), 0.5 * (B + B.T), 0.0)
    return FailureCertificate(B)


def _sdp_route(U: Subspace, P: Partition, settings) -> RealizabilityReport:
    V = U.complement().basis.T
    res = ellipsoid.fit_blocks(V, P, settings) if not P.is_singletons else ellipsoid.fit(V, settings)
    if res.status == ellipsoid.FITTED:
        Y = V.T @ res.M @ V
        return RealizabilityReport(REALIZABLE, CorrelationCertificate(0.5 * (Y + Y.T)), SDP, res.margin)
    if res.status == ellipsoid.INFEASIBLE:
        return RealizabilityReport(NOT_REALIZABLE, FailureCertificate(res.B), SDP, res.margin)
    cert = None
    if res.M is not None:
        Y = V.T @ res.M @ V
        cert = CorrelationCertificate(0.5 * (Y + Y.T))
    elif res.B is not None:
        cert = FailureCertificate(res.B)
    return RealizabilityReport(UNCERTAIN, cert, SDP, res.margin)


def realizability_certificate(U: Subspace, P: Optional[Partition] = None,
                              method: Optional[str] = None,
                              settings: Optional[conic.SolverSettings] = None) -> RealizabilityReport:
    """Decide (block) realizability of ``U`` and return a checked certificate.

    Routes, in order: the explicit construction when the (block) coherence is
    clearly below 1/2; for one-dimensional ``U`` an explicit failure
    certificate when the spanning vector is clearly unbalanced; otherwise the
    phase-one semidefinite program on a basis of the complement. ``method``
    forces one route (``"constructive"``, ``"balance-necessity"`` or ``"sdp"``).
    Every certificate is re-checked before it is reported; one that fails the
    check downgrades the verdict to ``boundary-uncertain``.
    """
    if not 0 < U.dim < U.n:
        raise ValueError("realizability needs 0 < dim U < n")
    P = P or Partition.singletons(U.n)
    if P.n != U.n:
        raise ValueError("partition and subspace dimensions differ")
    singletons = P.is_singletons

    report = None
    if method in (None, CONSTRUCTIVE):
        mu = coherence(U) if singletons else p_coherence(U, P)
        if mu < 0.5 - THRESHOLD_BAND:
            cert = hadamard_certificate(U)
            if singletons or check_correlation_certificate(cert.Y, U, P):
                report = RealizabilityReport(REALIZABLE, cert, CONSTRUCTIVE, 0.5 - mu)
        elif method == CONSTRUCTIVE:
            raise PreconditionError(f"coherence {mu:.6g} is too close to or above 1/2")
    if report is None and method in (None, BALANCE) and U.dim == 1:
        u = U.basis[:, 0]
        norms = np.abs(u) if singletons else P.block_norms(u)
        margin = balance_margin(norms)
        if margin < -1e-6:
            cert = unbalanced_certificate(u) if singletons else p_unbalanced_certificate(u, P)
            report = RealizabilityReport(NOT_REALIZABLE, cert, BALANCE, -margin)
        elif method == BALANCE:
            raise PreconditionError("spanning vector is not clearly unbalanced")
    if report is None and method in (None, SDP):
        report = _sdp_route(U, P, settings)
    if report is None:
        raise ValueError(f"unknown method {method!r}")

    if report.certificate is not None and not check_certificate(report.certificate, U, P):
        report = RealizabilityReport(UNCERTAIN, report.certificate, report.method, report.margin)
    return report


def orbit_transform(U: Subspace, Q, P: Partition, tol: float = 1e-10) -> Subspace:
    """Image ``Q U`` under a block orthogonal ``Q`` (block structure from ``P``)."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (U.n, U.n) or P.n != U.n:
        raise ValueError("Q, U and P dimensions differ")
    if np.max(np.abs(Q[~P.mask()]), initial=0) > tol:
        raise ValueError("Q is not block diagonal for the partition")
    if np.max(np.abs(Q.T @ Q - np.eye(U.n))) > tol:
        raise ValueError("Q is not orthogonal")
    return Subspace.span(Q @ U.basis)


def random_block_orthogonal(P: Partition, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of the block orthogonal group of ``P``."""
    Q = np.zeros((P.n, P.n))
    for blk in P.blocks:
        k = len(blk)
        G = rng.standard_normal((k, k))
        q, r = np.linalg.qr(G)
        q = q * np.sign(np.diag(r))
        Q[np.ix_(blk, blk)] = q
    return Q
