"""Dense symmetric linear algebra shared by the rest of the package.

Symmetric matrices are plain ``numpy`` arrays; :func:`as_symmetric` is the
single validation gate. Subspaces and partitions are small immutable value
types.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_RANK_TOL = 1e-9
SUBSPACE_EQ_TOL = 1e-8


class NumericalFailure(RuntimeError):
    """An iterative kernel did not converge; ``residual`` is the last residual seen."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class DegenerateInputError(ValueError):
    """Input is singular or rank deficient where full rank is required."""


def as_symmetric(A, tol: float = 1e-9) -> np.ndarray:
    """Validate that ``A`` is square and symmetric within ``tol``; return its symmetric part.

    The tolerance is relative to ``1 + max|A_ij|``.
    """
    A = np.array(A, dtype=float, copy=True)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    asym = np.max(np.abs(A - A.T)) if A.size else 0.0
    if asym > tol * (1.0 + np.max(np.abs(A))):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (A + A.T)


def eig_sym(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix, eigenvalues in descending order.

    Returns
    -------
    w : ndarray, (n,)
        eigenvalues, largest first
    V : ndarray, (n, n)
        orthonormal eigenvectors as columns, ``A @ V[:, i] = w[i] * V[:, i]``

    Raises
    ------
    NumericalFailure
        if LAPACK fails to converge or the reconstruction residual is out of bounds.
    """
    A = np.asarray(A, dtype=float)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver did not converge: {exc}") from exc
    w = w[::-1]
    V = V[:, ::-1]
    scale = 1.0 + np.linalg.norm(A)
    resid = np.linalg.norm(A @ V - V * w) if A.size else 0.0
    if not np.isfinite(resid) or resid > 1e-8 * scale * max(1, A.shape[0]):
        raise NumericalFailure("eigen-decomposition residual too large", resid)
    return w, V


def lambda_min(A) -> float:
    return float(np.linalg.eigvalsh(np.asarray(A, dtype=float))[0])


def lambda_max(A) -> float:
    return float(np.linalg.eigvalsh(np.asarray(A, dtype=float))[-1])


def psd_check(A, tol: float = 0.0) -> bool:
    """True iff the smallest eigenvalue of ``A`` is at least ``-tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return lambda_min(A) >= -tol


def spectral_norm(A) -> float:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def orthonormalize(A, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis for the column span of ``A``.

    Gram-Schmidt, each column projected twice against the accepted basis.
    Columns whose remaining norm falls below ``tol`` times the largest column
    norm are dropped, so the result has as many columns as the numerical rank.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    n, p = A.shape
    scale = max((np.linalg.norm(A[:, j]) for j in range(p)), default=0.0)
    Q = np.zeros((n, 0))
    if scale == 0.0:
        return Q
    for j in range(p):
        v = A[:, j].copy()
        for _ in range(2):
            v -= Q @ (Q.T @ v)
        nv = np.linalg.norm(v)
        if nv > tol * scale:
            Q = np.column_stack([Q, v / nv])
    return Q


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of R^n stored by an orthonormal basis (``n x r``)."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        r = B.shape[1]
        if r > B.shape[0]:
            raise ValueError("more basis vectors than the ambient dimension")
        if r and np.max(np.abs(B.T @ B - np.eye(r))) > 1e-12 * max(1, B.shape[0]):
            raise ValueError("basis columns are not orthonormal; use Subspace.span")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @classmethod
    def span(cls, vectors, tol: float = DEFAULT_RANK_TOL) -> "Subspace":
        """Column span of ``vectors`` (an ``n x p`` array, or a single n-vector)."""
        return cls(orthonormalize(vectors, tol))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return projector(self)

    def complement(self) -> "Subspace":
        """Orthogonal complement in R^n."""
        if self.dim == 0:
            return Subspace.full(self.n)
        if self.dim == self.n:
            return Subspace.zero(self.n)
        # trailing left singular vectors span the complement
        Uf, _, _ = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(orthonormalize(Uf[:, self.dim:]))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.basis @ (self.basis.T @ x)) <= tol * (1 + np.linalg.norm(x))

    def __repr__(self):
        return f"Subspace(n={self.n}, dim={self.dim})"


def projector(U: Subspace) -> np.ndarray:
    """Orthogonal projector ``B B^T`` onto ``U``."""
    B = U.basis
    P = B @ B.T
    return 0.5 * (P + P.T)


def column_space(A, rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Span of the eigenvectors of symmetric ``A`` with ``|w| > rank_tol * max|w|``."""
    if not 0 < rank_tol < 1:
        raise ValueError("rank_tol must lie in (0, 1)")
    A = as_symmetric(A)
    w, V = eig_sym(A)
    top = np.max(np.abs(w))
    if top == 0.0:
        return Subspace.zero(A.shape[0])
    keep = np.abs(w) > rank_tol * top
    return Subspace(orthonormalize(V[:, keep]))


def numerical_rank(A, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    return column_space(A, rank_tol).dim


def same_subspace(U: Subspace, V: Subspace, tol: float = SUBSPACE_EQ_TOL) -> bool:
    if U.n != V.n:
        return False
    return np.linalg.norm(projector(U) - projector(V)) <= tol


@dataclass(frozen=True)
class Partition:
    """Disjoint non-empty index blocks (0-based) covering ``range(n)``."""

    n: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        if self.n < 1:
            raise ValueError("partition needs n >= 1")
        seen = []
        for b in blocks:
            if not b:
                raise ValueError("partition blocks must be non-empty")
            seen.extend(b)
        if sorted(seen) != list(range(self.n)):
            raise ValueError("blocks must be disjoint and cover 0..n-1 exactly")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_blocks(cls, blocks: Iterable[Sequence[int]]) -> "Partition":
        blocks = [list(b) for b in blocks]
        return cls(sum(len(b) for b in blocks), tuple(tuple(b) for b in blocks))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls(n, (tuple(range(n)),))

    @property
    def is_singletons(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def block_of(self) -> np.ndarray:
        """``label[i]`` = index of the block containing ``i``."""
        label = np.empty(self.n, dtype=int)
        for k, b in enumerate(self.blocks):
            label[list(b)] = k
        return label

    def mask(self) -> np.ndarray:
        """Boolean ``n x n`` mask of the block-diagonal pattern."""
        label = self.block_of()
        return label[:, None] == label[None, :]

    def blkdiag(self, A) -> list:
        """Principal submatrices of ``A`` indexed by the blocks."""
        A = np.asarray(A)
        return [A[np.ix_(b, b)] for b in self.blocks]

    def blkdiag_adjoint(self, blocks) -> np.ndarray:
        """Assemble the block-diagonal ``n x n`` matrix from per-block matrices."""
        out = np.zeros((self.n, self.n))
        for b, Xb in zip(self.blocks, blocks):
            out[np.ix_(b, b)] = Xb
        return out

    def block_norms(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.array([np.linalg.norm(u[list(b)]) for b in self.blocks])
