"""Certificate validation with plain numpy, independent of the package's own checkers."""
import numpy as np


def proj(basis):
    B = np.asarray(basis, dtype=float)
    return B @ B.T


def block_mask(n, blocks):
    lab = np.empty(n, dtype=int)
    for k, b in enumerate(blocks):
        lab[list(b)] = k
    return lab[:, None] == lab[None, :]


def correlation_ok(Y, basis, blocks=None, tol=1e-8, null_tol=1e-7):
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[0]
    blocks = blocks or [[i] for i in range(n)]
    if np.max(np.abs(Y - Y.T)) > tol:
        return False
    if np.linalg.eigvalsh(Y)[0] < -tol:
        return False
    mask = block_mask(n, blocks)
    if np.max(np.abs((Y - np.eye(n))[mask])) > tol:
        return False
    return np.linalg.norm(Y @ proj(basis)) <= null_tol


def failure_ok(B, basis, blocks=None, tol=1e-8):
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = np.diag(B)
    n = B.shape[0]
    blocks = blocks or [[i] for i in range(n)]
    if np.any(B[~block_mask(n, blocks)] != 0):
        return False
    if not np.trace(B) > 0:
        return False
    Pc = np.eye(n) - proj(basis)
    return np.linalg.eigvalsh(Pc @ B @ Pc)[-1] <= tol * np.linalg.norm(B)


def fit_ok(V, M, blocks=None, tol=1e-7):
    V = np.asarray(V, dtype=float)
    n = V.shape[1]
    blocks = blocks or [[i] for i in range(n)]
    if np.linalg.eigvalsh(M)[0] < -1e-8:
        return False
    G = V.T @ M @ V
    mask = block_mask(n, blocks)
    return np.max(np.abs((G - np.eye(n))[mask])) <= tol


def separation_ok(V, B, tol=1e-8):
    """``tr B > 0`` and ``V B V^T`` negative semidefinite: no fit exists."""
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = np.diag(B)
    if not np.trace(B) > 0:
        return False
    V = np.asarray(V, dtype=float)
    return np.linalg.eigvalsh(V @ B @ V.T)[-1] <= tol * np.linalg.norm(B) * max(1.0, np.linalg.norm(V) ** 2)


def mtfa_dual_ok(X, res, tol=1e-8, comp=1e-6):
    """Primal/dual feasibility and complementarity of an MTFA-type decomposition."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    Dm = np.diag(res.D) if np.ndim(res.D) == 1 else res.D
    blocks = res.partition.blocks if res.partition is not None else [[i] for i in range(n)]
    mask = block_mask(n, blocks)
    ok = np.linalg.norm(Dm + res.L - X) <= 1e-7 * (1 + np.linalg.norm(X))
    ok &= np.linalg.eigvalsh(res.L)[0] >= -1e-8 * max(1.0, np.linalg.norm(X))
    ok &= np.linalg.eigvalsh(res.Y)[0] >= -tol
    ok &= np.max(np.abs((res.Y - np.eye(n))[mask])) <= tol
    ok &= np.linalg.norm(res.Y @ res.L) <= comp * (1 + np.linalg.norm(res.L))
    return bool(ok)


# acceptance lines, filled by test_acceptance and echoed in the pytest summary
ACCEPTANCE_LINES: dict = {}
