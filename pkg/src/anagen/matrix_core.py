"""Dense complex linear algebra used by every other module.

The Hermitian eigensolver is a cyclic Jacobi iteration. It is slower than
LAPACK but has excellent relative accuracy on the small problems the package
deals with (d <= 64), and it keeps the functional calculus independent of the
routines that the test-suite uses as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceFailure, NotHermitian, NotPositive, ShapeMismatch
from .tolerances import DEFAULT

ComplexMatrix = np.ndarray

_EPS = np.finfo(float).eps
MAX_SWEEPS = 60


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(A, square: bool = False) -> np.ndarray:
    """Coerce ``A`` to a finite 2-D complex array."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got array of shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def op_norm(A) -> float:
    """Largest singular value of ``A``."""
    M = np.asarray(A, dtype=complex)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, ord=2))


def hermiticity_defect(A: np.ndarray) -> float:
    return op_norm(A - dagger(A))


def is_hermitian(A, rtol: float = DEFAULT.hermitian) -> bool:
    M = as_matrix(A, square=True)
    return hermiticity_defect(M) <= rtol * max(op_norm(M), 1e-300)


@dataclass(frozen=True)
class EigenDecomposition:
    """``A = V diag(eigenvalues) V*`` with ascending real eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "eigenvalues", _frozen(np.asarray(self.eigenvalues, dtype=float)))
        object.__setattr__(self, "eigenvectors", _frozen(np.asarray(self.eigenvectors, dtype=complex)))

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def apply_function(self, values: np.ndarray) -> np.ndarray:
        """Return ``V diag(values) V*`` for per-eigenvalue ``values``."""
        V = self.eigenvectors
        return (V * np.asarray(values)) @ dagger(V)

    def reconstruct(self) -> np.ndarray:
        return self.apply_function(self.eigenvalues)


def _jacobi_sweeps(a: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, np.ndarray]:
    d = a.shape[0]
    V = np.eye(d, dtype=complex)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(d), V
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= _EPS * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-3 * _EPS * scale:
                    continue
                phase = apq / r
                alpha = a[p, p].real
                beta = a[q, q].real
                tau = (beta - alpha) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # W = diag(1, conj(phase)) @ [[c, s], [-s, c]] makes the 2x2 block diagonal
                W = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ W
                a[idx, :] = dagger(W) @ a[idx, :]
                V[:, idx] = V[:, idx] @ W
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        raise ConvergenceFailure(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.real(np.diag(a)).copy(), V


def eig_hermitian(A, rtol: float = DEFAULT.hermitian, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations."""
    M = as_matrix(A, square=True)
    if M.shape[0] == 0:
        return EigenDecomposition(np.zeros(0), np.zeros((0, 0)))
    norm = op_norm(M)
    if hermiticity_defect(M) > rtol * max(norm, 1e-300):
        raise NotHermitian(f"matrix is not Hermitian (defect {hermiticity_defect(M):.3e})")
    a = (M + dagger(M)) / 2.0
    w, V = _jacobi_sweeps(a, max_sweeps)
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], V[:, order])


class PositiveMatrix:
    """A strictly positive Hermitian matrix, stored through its spectral data.

    Eigenvalues are kept as natural logarithms so that complex powers
    ``P**w = V diag(exp(w log p)) V*`` never overflow in intermediate steps.
    """

    __slots__ = ("log_eigenvalues", "eigenvectors")

    def __init__(self, A, rtol: float = DEFAULT.hermitian) -> None:
        dec = eig_hermitian(A, rtol=rtol)
        lam = dec.eigenvalues
        if lam.size and lam[0] <= rtol * max(lam[-1], 0.0):
            raise NotPositive(f"minimum eigenvalue {lam[0]:.3e} is not strictly positive")
        self._set(np.log(lam), dec.eigenvectors)

    def _set(self, logs: np.ndarray, V: np.ndarray) -> None:
        object.__setattr__(self, "log_eigenvalues", _frozen(logs))
        object.__setattr__(self, "eigenvectors", _frozen(V))

    def __setattr__(self, name, value):
        raise AttributeError("PositiveMatrix is immutable")

    @classmethod
    def from_log(cls, H, rtol: float = DEFAULT.hermitian) -> "PositiveMatrix":
        """The positive matrix ``exp(H)`` of a Hermitian ``H``."""
        dec = eig_hermitian(H, rtol=rtol)
        obj = cls.__new__(cls)
        obj._set(dec.eigenvalues, dec.eigenvectors)
        return obj

    @classmethod
    def from_spectrum(cls, log_eigenvalues, eigenvectors) -> "PositiveMatrix":
        obj = cls.__new__(cls)
        obj._set(np.asarray(log_eigenvalues, dtype=float), np.asarray(eigenvectors, dtype=complex))
        return obj

    @property
    def dim(self) -> int:
        return len(self.log_eigenvalues)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.exp(self.log_eigenvalues)

    @property
    def decomposition(self) -> EigenDecomposition:
        return EigenDecomposition(self.eigenvalues, self.eigenvectors)

    @property
    def matrix(self) -> np.ndarray:
        return self.power(1.0)

    def power(self, w: complex) -> np.ndarray:
        V = self.eigenvectors
        return (V * np.exp(complex(w) * self.log_eigenvalues)) @ dagger(V)

    def log(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.log_eigenvalues) @ dagger(V)

    def __repr__(self) -> str:
        return f"PositiveMatrix(eigenvalues={np.round(self.eigenvalues, 6).tolist()})"


def matrix_power(P: PositiveMatrix, w: complex) -> np.ndarray:
    """``P**w`` on the principal branch (real logarithm of the spectrum)."""
    return P.power(w)


def _columns(mats: Sequence[np.ndarray], shape: tuple | None) -> np.ndarray:
    cols = []
    for m in mats:
        m = np.asarray(m, dtype=complex)
        if shape is not None and m.shape != shape:
            raise ShapeMismatch(f"shape {m.shape} differs from {shape}")
        shape = m.shape
        v = m.reshape(-1)
        nv = np.linalg.norm(v)
        if nv > 0:
            cols.append(v / nv)
    if not cols:
        return np.zeros((int(np.prod(shape)) if shape else 0, 0), dtype=complex)
    return np.stack(cols, axis=1)


def orthonormal_basis(vectors: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as columns) for the column span of ``vectors``."""
    if vectors.shape[1] == 0:
        return vectors
    U, s, _ = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return U[:, :rank]


def null_space(M: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of ``M``."""
    M = np.asarray(M, dtype=complex)
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    if s.size == 0 or s[0] == 0:
        return np.eye(M.shape[1], dtype=complex)
    rank = int(np.sum(s > rank_tol * s[0]))
    return dagger(Vh[rank:, :])


def subspace_residual(S1: Sequence[np.ndarray], S2: Sequence[np.ndarray], rank_tol: float = 1e-10) -> tuple[int, int, float]:
    """Dimensions of both spans and the larger mutual projection residual."""
    shape = None
    for m in list(S1) + list(S2):
        shape = np.asarray(m).shape
        break
    Q1 = orthonormal_basis(_columns(S1, shape), rank_tol)
    Q2 = orthonormal_basis(_columns(S2, shape), rank_tol)
    if Q1.shape[1] != Q2.shape[1]:
        return Q1.shape[1], Q2.shape[1], float("inf")
    if Q1.shape[1] == 0:
        return 0, 0, 0.0
    r12 = op_norm(Q1 - Q2 @ (dagger(Q2) @ Q1))
    r21 = op_norm(Q2 - Q1 @ (dagger(Q1) @ Q2))
    return Q1.shape[1], Q2.shape[1], max(r12, r21)


def subspace_equal(S1: Sequence[np.ndarray], S2: Sequence[np.ndarray], tol: float = DEFAULT.subspace) -> bool:
    """True iff the spans of the flattened matrices in ``S1`` and ``S2`` coincide."""
    _, _, res = subspace_residual(S1, S2)
    return res <= tol


def matrix_unit(d: int, j: int, k: int, cols: int | None = None) -> np.ndarray:
    """The matrix unit ``e_jk`` (sends basis vector k to basis vector j), 0-based."""
    e = np.zeros((d, d if cols is None else cols), dtype=complex)
    e[j, k] = 1.0
    return e


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (G + dagger(G)) / 2.0


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
