"""Exact rational scalars and small dense symmetric linear algebra.

Everything downstream leans on three guarantees provided here: rational
arithmetic never rounds, symmetric eigendecompositions come back sorted
and verified, and the negative-semidefinite projection is the honest
Frobenius-nearest one.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

import numpy as np

__all__ = [
    "Rational",
    "EigenDecomposition",
    "sym_eig",
    "lsq_solve",
    "project_nsd",
]


class Rational(Fraction):
    """Exact rational scalar, always in lowest terms with positive denominator.

    Accepts ints, "p/q" strings, decimal strings, and other rationals.
    ``serialize`` round-trips through ``parse`` without loss.
    """

    __slots__ = ()

    @classmethod
    def parse(cls, text: str) -> "Rational":
        return cls(str(text).strip())

    def serialize(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    def to_float(self) -> float:
        return self.numerator / self.denominator

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"Rational({self.serialize()!r})"


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # columns, orthonormal


def _as_square_sym(A, name: str, tol: float = 1e-12) -> np.ndarray:
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name}: expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name}: matrix contains non-finite entries")
    scale = max(1.0, np.abs(M).max())
    asym = np.abs(M - M.T).max()
    if asym > tol * scale:
        raise ValueError(
            f"{name}: matrix is not symmetric (max asymmetry {asym:.3e} "
            f"exceeds {tol:.0e} relative)"
        )
    return 0.5 * (M + M.T)


def sym_eig(A) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    The returned pair is verified: ``Q`` orthonormal to 1e-12 and
    ``Q diag(w) Q^T`` reproducing A to 1e-10 relative, else an error.
    """
    M = _as_square_sym(A, "sym_eig")
    w, Q = np.linalg.eigh(M)
    n = M.shape[0]
    orth = np.abs(Q.T @ Q - np.eye(n)).max()
    if orth > 1e-12:
        raise ArithmeticError(f"sym_eig: eigenvector orthonormality residual {orth:.3e}")
    rec = np.abs((Q * w) @ Q.T - M).max()
    if rec > 1e-10 * max(1.0, np.abs(M).max()):
        raise ArithmeticError(f"sym_eig: reconstruction residual {rec:.3e}")
    return EigenDecomposition(w, Q)


def lsq_solve(A, b, ridge: float = 0.0) -> np.ndarray:
    """Solve argmin ||Ax - b||^2 + ridge * ||x||^2.

    With ridge = 0 the system must have full column rank; a deficient
    system is rejected with the observed rank in the message.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    if A.ndim != 2:
        raise ValueError(f"lsq_solve: expected 2-D design matrix, got shape {A.shape}")
    if A.shape[0] != b.shape[0]:
        raise ValueError(
            f"lsq_solve: {A.shape[0]} rows in A but {b.shape[0]} entries in b"
        )
    if ridge < 0:
        raise ValueError("lsq_solve: ridge weight must be nonnegative")
    if ridge == 0.0:
        x, _, rank, _ = np.linalg.lstsq(A, b, rcond=None)
        if rank < A.shape[1]:
            raise np.linalg.LinAlgError(
                f"lsq_solve: rank-deficient system (rank {rank} < {A.shape[1]} "
                "columns) has no unique minimizer; pass ridge > 0"
            )
        return x
    # Augmented formulation keeps the conditioning of sqrt(ridge) rather
    # than forming the normal equations.
    m, n = A.shape
    A_aug = np.vstack([A, np.sqrt(ridge) * np.eye(n)])
    b_aug = np.concatenate([b, np.zeros(n)])
    x, _, _, _ = np.linalg.lstsq(A_aug, b_aug, rcond=None)
    return x


def project_nsd(M, eps1: float = 0.0) -> np.ndarray:
    """Frobenius-nearest symmetric matrix with all eigenvalues <= -eps1.

    Eigenvalues above -eps1 are clipped down to it; the eigenbasis is kept.
    eps1 = 0 is the plain projection onto the negative-semidefinite cone.
    """
    if eps1 < 0:
        raise ValueError("project_nsd: eps1 must be nonnegative")
    S = _as_square_sym(M, "project_nsd")
    w, Q = np.linalg.eigh(S)
    w_clipped = np.minimum(w, -eps1)
    R = (Q * w_clipped) @ Q.T
    return 0.5 * (R + R.T)
