"""Concrete one-parameter groups on finite-dimensional carriers.

Four carriers are provided:

* :class:`DiagonalGroup` -- multiplication by ``exp(i lambda_k t)`` on a
  truncated sequence space (an isometry group, *not* multiplicative).
* :class:`ImplementedGroup` -- ``x -> P^{it} x P^{-it}`` on ``M_d`` with
  ``P = exp(H)``; modular groups are the special case ``H = log rho``.
* :class:`EmbeddedCornerGroup` -- the 2x2 block algebra over a sequence
  model on which a diagonal isometry group becomes an inner automorphism
  group.
* :class:`GeometricSequence` -- a symbolic half-line sequence ``c r^n``
  that answers domain questions for the *infinite* c0 / l-infinity models
  exactly, without truncation.

Elements are plain numpy arrays of shape ``group.shape``.
"""

from __future__ import annotations

import enum
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import IsometryOnlyCarrier, NotAState, NotPositive, NotHermitian, ShapeMismatch, UnsupportedGroup
from .matrix_core import PositiveMatrix, as_matrix, dagger, matrix_power, op_norm
from .tolerances import DEFAULT


class SequenceModel(enum.Enum):
    C0 = "c0"
    LINF = "linf"


class OneParamGroup(ABC):
    """A one-parameter isometry group with an exact evaluation rule.

    Subclasses implement the analytic extension ``alpha(z, x)`` for complex
    ``z`` in closed form; ``apply`` is its restriction to real times.
    """

    kind: str = "abstract"
    is_automorphism: bool = False
    shape: tuple[int, ...]

    def check_element(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=complex)
        if arr.shape != self.shape:
            raise ShapeMismatch(f"{self.kind} group expects shape {self.shape}, got {arr.shape}")
        return arr

    def apply(self, t: float, x) -> np.ndarray:
        t = float(t)
        return self.alpha(t, x)

    @abstractmethod
    def alpha(self, z: complex, x) -> np.ndarray:
        """The analytic extension of the orbit of ``x`` evaluated at ``z``."""

    @abstractmethod
    def orbit(self, ts: np.ndarray, x) -> np.ndarray:
        """``alpha_t(x)`` for every real ``t`` in ``ts``, stacked on axis 0."""

    @abstractmethod
    def norm(self, x) -> float: ...

    @abstractmethod
    def frequencies(self) -> np.ndarray:
        """Real frequencies ``w`` such that every orbit is a sum of ``exp(i w t)`` terms."""

    @abstractmethod
    def dual(self) -> "OneParamGroup":
        """The adjoint group with respect to the bilinear pairing ``sum(mu * x)``."""

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def basis(self) -> list[np.ndarray]:
        out = []
        for k in range(self.dim):
            e = np.zeros(self.dim, dtype=complex)
            e[k] = 1.0
            out.append(e.reshape(self.shape))
        return out

    def operator_matrix(self, z: complex) -> np.ndarray:
        """Matrix of ``alpha_z`` acting on flattened elements."""
        return np.stack([self.alpha(z, e).reshape(-1) for e in self.basis()], axis=1)

    def max_frequency(self) -> float:
        f = self.frequencies()
        return float(np.max(np.abs(f))) if f.size else 0.0

    # algebra structure, only for automorphism carriers
    def multiply(self, x, y) -> np.ndarray:
        raise IsometryOnlyCarrier(f"{self.kind} group acts on a space without a compatible product")

    def adjoint(self, x) -> np.ndarray:
        raise IsometryOnlyCarrier(f"{self.kind} group acts on a space without an involution")

    def identity(self) -> np.ndarray:
        raise IsometryOnlyCarrier(f"{self.kind} group acts on a space without a unit")


def apply(group: OneParamGroup, t: float, x) -> np.ndarray:
    return group.apply(t, x)


class DiagonalGroup(OneParamGroup):
    """Multiplication by ``(p_k^{it}) = (exp(i lambda_k t))`` on N coordinates."""

    kind = "diagonal"
    is_automorphism = False

    def __init__(self, exponents, model: SequenceModel = SequenceModel.C0) -> None:
        lam = np.array(exponents, dtype=float).reshape(-1)
        if lam.size < 1:
            raise ValueError("carrier_size must be at least 1")
        if not np.all(np.isfinite(lam)):
            raise ValueError("exponents must be finite")
        lam.setflags(write=False)
        self.exponents = lam
        self.model = SequenceModel(model)
        self.shape = (lam.size,)

    @classmethod
    def integer_model(cls, N: int, start: int = 0, model: SequenceModel = SequenceModel.C0) -> "DiagonalGroup":
        """The ``lambda_k = k`` model on indices ``start .. start+N-1``."""
        return cls(np.arange(start, start + N, dtype=float), model)

    @property
    def carrier_size(self) -> int:
        return self.shape[0]

    def multipliers(self, z: complex) -> np.ndarray:
        return np.exp(1j * complex(z) * self.exponents)

    def alpha(self, z, x):
        return self.multipliers(z) * self.check_element(x)

    def orbit(self, ts, x):
        x = self.check_element(x)
        return np.exp(1j * np.outer(np.asarray(ts, dtype=float), self.exponents)) * x

    def norm(self, x) -> float:
        x = np.asarray(x)
        return float(np.max(np.abs(x))) if x.size else 0.0

    def frequencies(self):
        return self.exponents.copy()

    def dual(self):
        return DiagonalGroup(self.exponents, self.model)

    def is_integer_model(self) -> bool:
        return bool(np.array_equal(self.exponents, np.arange(self.carrier_size, dtype=float)))

    def __repr__(self) -> str:
        return f"DiagonalGroup(N={self.carrier_size}, model={self.model.value})"


class ImplementedGroup(OneParamGroup):
    """``tau_t(x) = P^{it} x P^{-it}`` on ``M_d``, with ``P = exp(H)``."""

    kind = "implemented"
    is_automorphism = True

    def __init__(self, generator, kind: str = "implemented") -> None:
        H = as_matrix(generator, square=True)
        self.P = PositiveMatrix.from_log(H)
        self.generator = self.P.log()
        self.kind = kind
        d = self.P.dim
        self.shape = (d, d)
        h = self.P.log_eigenvalues
        self._omega = h[:, None] - h[None, :]

    @classmethod
    def from_positive(cls, P: PositiveMatrix, kind: str = "implemented") -> "ImplementedGroup":
        obj = cls.__new__(cls)
        obj.P = P
        obj.generator = P.log()
        obj.kind = kind
        obj.shape = (P.dim, P.dim)
        h = P.log_eigenvalues
        obj._omega = h[:, None] - h[None, :]
        return obj

    @property
    def d(self) -> int:
        return self.shape[0]

    def alpha(self, z, x):
        x = self.check_element(x)
        z = complex(z)
        return matrix_power(self.P, 1j * z) @ x @ matrix_power(self.P, -1j * z)

    def orbit(self, ts, x):
        x = self.check_element(x)
        V = self.P.eigenvectors
        y = dagger(V) @ x @ V
        phases = np.exp(1j * np.asarray(ts, dtype=float)[:, None, None] * self._omega[None])
        return V @ (phases * y) @ dagger(V)

    def norm(self, x) -> float:
        return op_norm(x)

    def frequencies(self):
        return self._omega.reshape(-1).copy()

    def dual(self):
        return ImplementedGroup.from_positive(
            PositiveMatrix.from_spectrum(self.P.log_eigenvalues, np.conj(self.P.eigenvectors)), kind=self.kind
        )

    def multiply(self, x, y):
        return self.check_element(x) @ self.check_element(y)

    def adjoint(self, x):
        return dagger(self.check_element(x))

    def identity(self):
        return np.eye(self.d, dtype=complex)

    def __repr__(self) -> str:
        return f"ImplementedGroup(kind={self.kind}, d={self.d})"


def build_modular_group(rho, tol: float = 1e-10) -> ImplementedGroup:
    """The modular group ``sigma_t(x) = rho^{it} x rho^{-it}`` of a faithful density."""
    if isinstance(rho, PositiveMatrix):
        P = rho
    else:
        try:
            P = PositiveMatrix(rho)
        except (NotPositive, NotHermitian) as exc:
            raise NotAState(str(exc)) from exc
    tr = float(np.sum(P.eigenvalues))
    if abs(tr - 1.0) > tol:
        raise NotAState(f"trace {tr!r} differs from 1")
    return ImplementedGroup.from_positive(P, kind="modular")


class EmbeddedCornerGroup(OneParamGroup):
    """Inner automorphism group ``u_t (.) u_{-t}`` with ``u_t = diag(P^{it}, 1)``.

    Elements are arrays of shape ``(2, 2, N)``: ``X[i, j]`` is the sequence in
    block ``(i, j)`` and every block acts on ``l^2`` by multiplication. Under
    the group the diagonal blocks are fixed, the upper-right block is
    multiplied by ``p_n^{it}`` and the lower-left one by ``p_n^{-it}``.
    """

    kind = "corner"
    is_automorphism = True

    def __init__(self, inner: DiagonalGroup) -> None:
        self.inner = inner
        self.shape = (2, 2, inner.carrier_size)

    @property
    def exponents(self) -> np.ndarray:
        return self.inner.exponents

    def _mult(self, z: complex) -> np.ndarray:
        m = np.ones(self.shape, dtype=complex)
        m[0, 1] = np.exp(1j * complex(z) * self.exponents)
        m[1, 0] = np.exp(-1j * complex(z) * self.exponents)
        return m

    def alpha(self, z, x):
        return self._mult(z) * self.check_element(x)

    def orbit(self, ts, x):
        x = self.check_element(x)
        ts = np.asarray(ts, dtype=float)
        out = np.broadcast_to(x, (ts.size,) + self.shape).copy()
        ph = np.exp(1j * np.outer(ts, self.exponents))
        out[:, 0, 1] *= ph
        out[:, 1, 0] *= np.conj(ph)
        return out

    def pointwise_norms(self, x) -> np.ndarray:
        """Operator norm of the 2x2 scalar block at every index n."""
        x = self.check_element(x)
        return np.linalg.norm(np.moveaxis(x, 2, 0), ord=2, axis=(1, 2))

    def norm(self, x) -> float:
        norms = self.pointwise_norms(x)
        return float(norms.max()) if norms.size else 0.0

    def frequencies(self):
        lam = self.exponents
        return np.concatenate([np.zeros(2 * lam.size), lam, -lam])

    def dual(self):
        return EmbeddedCornerGroup(self.inner.dual())

    def multiply(self, x, y):
        return np.einsum("ikn,kjn->ijn", self.check_element(x), self.check_element(y))

    def adjoint(self, x):
        return np.conj(np.transpose(self.check_element(x), (1, 0, 2)))

    def identity(self):
        e = np.zeros(self.shape, dtype=complex)
        e[0, 0] = 1.0
        e[1, 1] = 1.0
        return e

    def __repr__(self) -> str:
        return f"EmbeddedCornerGroup(N={self.shape[2]})"


def build_corner(group: DiagonalGroup) -> EmbeddedCornerGroup:
    return EmbeddedCornerGroup(group)


def corner_element(a=None, b=None, c=None, d=None, N: int | None = None) -> np.ndarray:
    """Assemble a ``(2, 2, N)`` block element; missing blocks are zero."""
    blocks = [a, b, c, d]
    lengths = {len(np.atleast_1d(v)) for v in blocks if v is not None}
    if N is not None:
        lengths.add(N)
    if len(lengths) > 1:
        raise ShapeMismatch(f"corner blocks have mixed truncation lengths {sorted(lengths)}")
    if not lengths:
        raise ValueError("truncation length N is required when every block is empty")
    (n,) = lengths
    X = np.zeros((2, 2, n), dtype=complex)
    for (i, j), v in zip([(0, 0), (0, 1), (1, 0), (1, 1)], blocks):
        if v is not None:
            X[i, j] = np.asarray(v, dtype=complex)
    return X


@dataclass(frozen=True)
class GeometricSequence:
    """The half-line sequence ``x_n = c r^n`` for ``n >= n0`` (zero before).

    The ratio is held as ``log_ratio = log r`` so that borderline cases such
    as ``r = 1/e`` are represented exactly.
    """

    coefficient: complex
    log_ratio: float = 0.0
    start_index: int = 0

    def __post_init__(self) -> None:
        c = complex(self.coefficient)
        if not math.isfinite(self.log_ratio):
            raise ValueError("ratio must be a positive real number")
        if c == 0:
            object.__setattr__(self, "log_ratio", 0.0)
            object.__setattr__(self, "start_index", 0)
        object.__setattr__(self, "coefficient", c)
        object.__setattr__(self, "log_ratio", float(self.log_ratio))
        object.__setattr__(self, "start_index", int(self.start_index))

    @classmethod
    def from_ratio(cls, coefficient: complex, ratio: float, start_index: int = 0) -> "GeometricSequence":
        if not ratio > 0:
            raise ValueError("ratio must be positive")
        return cls(coefficient, math.log(ratio), start_index)

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio)

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    def values(self, N: int) -> np.ndarray:
        """Entries ``x_0 .. x_{N-1}`` (indices aligned with ``lambda_k = k``)."""
        n = np.arange(N)
        out = np.zeros(N, dtype=complex)
        mask = n >= self.start_index
        out[mask] = self.coefficient * np.exp(n[mask] * self.log_ratio)
        return out

    def in_c0(self) -> bool:
        return self.is_zero or self.log_ratio < 0

    def in_linf(self) -> bool:
        return self.is_zero or self.log_ratio <= 0

    def alpha(self, z: complex) -> "GeometricSequence":
        """``alpha_z`` of the ``lambda_k = k`` model for purely imaginary ``z``."""
        z = complex(z)
        if z.real != 0.0:
            raise UnsupportedGroup("symbolic continuation is only exact for purely imaginary z")
        # e^{i n (i s)} = e^{-n s}
        c = self.coefficient
        return GeometricSequence(c, self.log_ratio - z.imag, self.start_index)


class DomainMembership(NamedTuple):
    c0: bool
    linf: bool


def in_domain_sequence(seq: GeometricSequence, z: complex, group: DiagonalGroup | None = None) -> DomainMembership:
    """Exact membership of ``seq`` in ``D(alpha_z)`` for the infinite models.

    ``x`` lies in the domain for c0 iff both ``x`` and ``(e^{inz} x_n)`` are
    in c0, and likewise for l-infinity; for a geometric sequence this reduces
    to the sign of ``log r`` and ``log r - Im z``.
    """
    if group is not None and not group.is_integer_model():
        raise UnsupportedGroup("exact sequence predicates require the lambda_k = k model")
    if seq.is_zero:
        return DomainMembership(True, True)
    growth = seq.log_ratio - complex(z).imag
    c0 = seq.log_ratio < 0 and growth < 0
    linf = seq.log_ratio <= 0 and growth <= 0
    return DomainMembership(c0, linf)
