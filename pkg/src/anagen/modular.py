"""Finite-dimensional modular theory of a faithful state on ``M_d``.

Conventions (the matrix of every superoperator depends on them):

* GNS space ``M_d`` with ``<a, b> = Tr(a* b)`` and ``Lambda(x) = x rho^{1/2}``;
* vectors are row-major vectorisations, so ``vec(A X B) = (A kron B^T) vec(X)``;
* ``Delta(y) = rho y rho^{-1}``, ``J(y) = y*`` and ``S = J Delta^{1/2}``
  maps ``Lambda(x)`` to ``Lambda(x*)``.

Markov maps are realised as inclusions ``Phi: D -> M_d`` of block-diagonal
subalgebras with a block-compatible density.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AnagenError, NotAState, NotBlockCompatible, NotFaithful, NotHermitian, NotPositive, ShapeMismatch
from .group_models import ImplementedGroup, build_modular_group
from .matrix_core import PositiveMatrix, as_matrix, dagger, matrix_unit, op_norm, random_unitary
from .report import CheckReport
from .tolerances import DEFAULT, Tolerances

MIN_EIGENVALUE = 1e-8
HYPOTHESIS_TIMES = (0.7, -0.7, 2.3, -2.3)


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(d, d)


def sandwich(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> A X B`` on row-major vectors."""
    return np.kron(A, B.T)


def swap_matrix(d: int) -> np.ndarray:
    """Permutation with ``K vec(y) = vec(y^T)``."""
    K = np.zeros((d * d, d * d))
    for j in range(d):
        for k in range(d):
            K[k * d + j, j * d + k] = 1.0
    return K


@dataclass(frozen=True, eq=False)
class FaithfulState:
    """``phi(x) = Tr(rho x)`` with ``rho`` positive definite of unit trace."""

    density: PositiveMatrix
    trace_tol: float = field(default=1e-10, repr=False)
    min_eigenvalue: float = field(default=MIN_EIGENVALUE, repr=False)

    def __post_init__(self) -> None:
        lam = self.density.eigenvalues
        tr = float(np.sum(lam))
        if abs(tr - 1.0) > self.trace_tol:
            raise NotAState(f"trace {tr!r} differs from 1")
        if lam.min() < self.min_eigenvalue:
            raise NotFaithful(f"minimum eigenvalue {lam.min():.3e} below {self.min_eigenvalue:g}")

    @classmethod
    def from_matrix(cls, rho) -> "FaithfulState":
        rho = as_matrix(rho, square=True)
        try:
            P = PositiveMatrix(rho)
        except NotHermitian as exc:
            raise NotAState(str(exc)) from exc
        except NotPositive as exc:
            w = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
            if w.min() < -1e-12:
                raise NotAState(str(exc)) from exc
            raise NotFaithful(str(exc)) from exc
        return cls(P)

    @classmethod
    def from_eigenvalues(cls, values: Sequence[float], seed: int | None = None) -> "FaithfulState":
        """Diagonal density, optionally conjugated by a seeded random unitary."""
        lam = np.asarray(values, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise ShapeMismatch("eigenvalues must be a non-empty list")
        if np.any(lam <= 0):
            if np.any(lam < 0):
                raise NotAState("negative eigenvalue")
            raise NotFaithful("zero eigenvalue")
        d = lam.size
        U = np.eye(d, dtype=complex) if seed is None else random_unitary(np.random.default_rng(seed), d)
        return cls(PositiveMatrix.from_spectrum(np.log(lam), U))

    @classmethod
    def random(cls, rng: np.random.Generator, d: int, floor: float = 0.02) -> "FaithfulState":
        lam = rng.dirichlet(np.ones(d)) * (1 - d * floor) + floor
        return cls(PositiveMatrix.from_spectrum(np.log(lam), random_unitary(rng, d)))

    @property
    def d(self) -> int:
        return self.density.dim

    @property
    def rho(self) -> np.ndarray:
        return self.density.matrix

    def power(self, w: complex) -> np.ndarray:
        return self.density.power(w)

    def __call__(self, x) -> complex:
        return complex(np.trace(self.rho @ as_matrix(x)))


@dataclass(frozen=True, eq=False)
class ModularData:
    """GNS embedding, modular operator and conjugation of a faithful state."""

    state: FaithfulState
    sigma: ImplementedGroup
    residuals: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.state.d

    def Lambda(self, x) -> np.ndarray:
        return vec(as_matrix(x) @ self.state.power(0.5))

    def Lambda_matrix(self) -> np.ndarray:
        return sandwich(np.eye(self.d), self.state.power(0.5))

    def delta_power(self, w: complex) -> np.ndarray:
        """``Delta^w``: ``y -> rho^w y rho^{-w}`` as a ``d^2 x d^2`` matrix."""
        return sandwich(self.state.power(w), self.state.power(-w))

    @property
    def Delta(self) -> np.ndarray:
        return self.delta_power(1.0)

    def J(self, xi) -> np.ndarray:
        return vec(dagger(unvec(xi, self.d)))

    def S(self, xi) -> np.ndarray:
        return self.J(self.delta_power(0.5) @ np.asarray(xi, dtype=complex))

    @staticmethod
    def inner(a, b) -> complex:
        return complex(np.vdot(a, b))

    def invariance_residual(self, t: float, x) -> float:
        """``|phi(sigma_t(x)) - phi(x)|``."""
        return abs(self.state(self.sigma.apply(t, x)) - self.state(x))


def build_modular(state: FaithfulState, tol: float = DEFAULT.kms, spectrum_check_max_d: int = 8) -> ModularData:
    """Assemble modular data and verify its defining identities."""
    if not isinstance(state, FaithfulState):
        raise NotAState("build_modular expects a FaithfulState")
    md = ModularData(state, build_modular_group(state.density))
    d = state.d
    basis = [matrix_unit(d, j, k) for j in range(d) for k in range(d)]
    s_res = max(np.linalg.norm(md.S(md.Lambda(x)) - md.Lambda(dagger(x))) for x in basis)
    eye = np.eye(d * d, dtype=complex)
    s2_res = max(np.linalg.norm(md.S(md.S(e)) - e) for e in eye)
    rng = np.random.default_rng(0)
    xi = rng.normal(size=(4, d * d)) + 1j * rng.normal(size=(4, d * d))
    j_res = max(abs(md.inner(md.J(a), md.J(b)) - np.conj(md.inner(a, b))) for a in xi for b in xi)
    D = md.Delta
    herm = float(np.max(np.abs(D - dagger(D))))
    res = {"S_Lambda": float(s_res), "S_squared": float(s2_res), "J_antiunitary": float(j_res), "Delta_hermitian": herm}
    if d <= spectrum_check_max_d:
        spec = np.sort(np.linalg.eigvalsh((D + dagger(D)) / 2))
        p = state.density.eigenvalues
        ratios = np.sort((p[:, None] / p[None, :]).reshape(-1))
        res["Delta_spectrum"] = float(np.max(np.abs(spec - ratios) / ratios))
        if spec.min() <= 0:
            raise AnagenError("modular operator is not positive")
    bad = {k: v for k, v in res.items() if v > tol * max(1.0, op_norm(D) if k.startswith("Delta") else 1.0)}
    if bad:
        raise AnagenError(f"modular data failed its invariants: {bad}")
    return ModularData(state, md.sigma, res)


def _kms_residual(md: ModularData, a: np.ndarray, b: np.ndarray) -> float:
    # Tr(rho a e_jk) - Tr(rho e_jk b) = (rho a - b rho)_{kj}, evaluated on every matrix unit
    rho = md.state.rho
    d = md.d
    worst = 0.0
    for j in range(d):
        for k in range(d):
            x = matrix_unit(d, j, k)
            worst = max(worst, abs(np.trace(rho @ a @ x) - np.trace(rho @ x @ b)))
    return float(worst)


def verify_kms(md: ModularData, a, b, tol: float = DEFAULT.kms) -> bool:
    """``phi(a x) = phi(x b)`` for all ``x`` (``n_phi`` is all of ``M_d`` here).

    Cross-checks the answer against ``b = sigma_{-i}(a) = rho a rho^{-1}``.
    """
    a = as_matrix(a, square=True)
    b = as_matrix(b, square=True)
    scale = max(op_norm(a), 1e-300) * op_norm(md.state.rho)
    ok = _kms_residual(md, a, b) <= tol * scale
    dist = op_norm(b - md.sigma.alpha(-1j, a))
    inv = float(np.exp(-md.state.density.log_eigenvalues.min()))
    if ok and dist > md.d * tol * scale * inv:
        raise AnagenError("KMS identity holds but b differs from sigma_{-i}(a)")
    if not ok and dist <= tol * max(op_norm(a), 1e-300):
        raise AnagenError("KMS identity fails but b equals sigma_{-i}(a)")
    return bool(ok)


def kms_report(md: ModularData, a, b, tol: float = DEFAULT.kms) -> CheckReport:
    a = as_matrix(a, square=True)
    b = as_matrix(b, square=True)
    scale = max(op_norm(a), 1e-300) * op_norm(md.state.rho)
    res = _kms_residual(md, a, b) / scale
    return CheckReport.from_residual(
        "kms",
        "phi(a x) = phi(x b) <=> b = sigma_{-i}(a)",
        res,
        tol,
        inputs={"rho": md.state.rho, "a": a, "b": b},
        values={"n_phi": "all of M_d; the domain conditions are automatic"},
    )


class BlockAlgebra:
    """``D = M_{n_1} + ... + M_{n_r}`` embedded block-diagonally in ``M_d``."""

    def __init__(self, blocks: Sequence[int]) -> None:
        blocks = tuple(int(b) for b in blocks)
        if not blocks or any(b <= 0 for b in blocks):
            raise ShapeMismatch("block sizes must be positive")
        self.blocks = blocks
        self.offsets = tuple(int(v) for v in np.concatenate([[0], np.cumsum(blocks)]))
        self.d = self.offsets[-1]
        self.dim = sum(b * b for b in blocks)

    def slices(self):
        return [slice(self.offsets[i], self.offsets[i + 1]) for i in range(len(self.blocks))]

    def basis(self) -> list[list[np.ndarray]]:
        """Matrix units of D, as lists of blocks."""
        out = []
        for i, n in enumerate(self.blocks):
            for j in range(n):
                for k in range(n):
                    x = [np.zeros((m, m), dtype=complex) for m in self.blocks]
                    x[i][j, k] = 1.0
                    out.append(x)
        return out

    def embed(self, x: Sequence[np.ndarray]) -> np.ndarray:
        """``Phi``: block list -> block-diagonal ``d x d`` matrix."""
        out = np.zeros((self.d, self.d), dtype=complex)
        for s, xi in zip(self.slices(), x):
            out[s, s] = xi
        return out

    def vec(self, x: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([vec(xi) for xi in x])

    def unvec(self, v: np.ndarray) -> list[np.ndarray]:
        out, pos = [], 0
        for n in self.blocks:
            out.append(np.asarray(v[pos : pos + n * n], dtype=complex).reshape(n, n))
            pos += n * n
        return out


def _block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    size = sum(m.shape[0] for m in mats)
    out = np.zeros((size, size), dtype=complex)
    pos = 0
    for m in mats:
        n = m.shape[0]
        out[pos : pos + n, pos : pos + n] = m
        pos += n
    return out


@dataclass(frozen=True, eq=False)
class MarkovSetup:
    """Inclusion ``Phi: (D, rho_N) -> (M_d, phi)`` and its GNS intertwiner ``T``."""

    ambient: ModularData
    algebra: BlockAlgebra
    rho_blocks: tuple[PositiveMatrix, ...]
    T: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def blocks(self) -> tuple[int, ...]:
        return self.algebra.blocks

    def delta_N(self, w: complex) -> np.ndarray:
        return _block_diag([sandwich(P.power(w), P.power(-w)) for P in self.rho_blocks])

    def delta_M(self, w: complex) -> np.ndarray:
        return self.ambient.delta_power(w)

    def Lambda_N(self, x: Sequence[np.ndarray]) -> np.ndarray:
        return self.algebra.vec([xi @ P.power(0.5) for xi, P in zip(x, self.rho_blocks)])

    def Lambda_M(self, x) -> np.ndarray:
        return self.ambient.Lambda(x)

    def J_N(self, xi) -> np.ndarray:
        return self.algebra.vec([dagger(b) for b in self.algebra.unvec(xi)])

    def J_M(self, xi) -> np.ndarray:
        return self.ambient.J(xi)

    def sigma_N(self, z: complex, x: Sequence[np.ndarray]) -> list[np.ndarray]:
        z = complex(z)
        return [P.power(1j * z) @ xi @ P.power(-1j * z) for xi, P in zip(x, self.rho_blocks)]

    def sigma_M(self, z: complex, x) -> np.ndarray:
        return self.ambient.sigma.alpha(z, x)


def build_markov(ambient: FaithfulState, blocks: Sequence[int], block_tol: float = 1e-12, tol: float = DEFAULT.kms) -> MarkovSetup:
    """Inclusion of the block-diagonal subalgebra; ``T`` solves ``T Lambda_N(x) = Lambda_M(Phi(x))``."""
    alg = BlockAlgebra(blocks)
    if alg.d != ambient.d:
        raise ShapeMismatch(f"blocks sum to {alg.d}, state has dimension {ambient.d}")
    rho = ambient.rho
    mask = np.ones_like(rho, dtype=bool)
    for s in alg.slices():
        mask[s, s] = False
    off = float(np.max(np.abs(rho[mask]), initial=0.0))
    if off > block_tol:
        raise NotBlockCompatible(f"density has off-block entry of size {off:.3e}")
    md = build_modular(ambient, tol=tol)
    rho_blocks = tuple(PositiveMatrix(rho[s, s]) for s in alg.slices())

    # columns of Lambda_N over the matrix-unit basis of D, then solve for T
    basis = alg.basis()
    half = [P.power(0.5) for P in rho_blocks]
    LN = np.stack([alg.vec([xi @ h for xi, h in zip(x, half)]) for x in basis], axis=1)
    LM = np.stack([md.Lambda(alg.embed(x)) for x in basis], axis=1)
    T = LM @ np.linalg.inv(LN)

    ms = MarkovSetup(md, alg, rho_blocks, T)
    iso = float(op_norm(dagger(T) @ T - np.eye(alg.dim)))
    hyp = max(op_norm(T @ ms.delta_N(1j * t) - ms.delta_M(1j * t) @ T) for t in HYPOTHESIS_TIMES)
    if iso > tol:
        raise AnagenError(f"T is not an isometry (defect {iso:.3e})")
    if hyp > tol:
        raise AnagenError(f"T does not intertwine the modular unitaries (defect {hyp:.3e})")
    return MarkovSetup(md, alg, rho_blocks, T, {"isometry": iso, "hypothesis": float(hyp)})


def random_block_density(rng: np.random.Generator, blocks: Sequence[int], floor: float = 0.02) -> np.ndarray:
    d = int(sum(blocks))
    lam = rng.dirichlet(np.ones(d)) * (1 - d * floor) + floor
    us = [random_unitary(rng, n) for n in blocks]
    U = _block_diag(us)
    return (U * lam) @ dagger(U)


def random_blocks(rng: np.random.Generator, d: int) -> tuple[int, ...]:
    cuts = sorted(c for c in range(1, d) if rng.random() < 0.5)
    edges = [0, *cuts, d]
    return tuple(b - a for a, b in zip(edges, edges[1:]))


def random_markov_setup(rng: np.random.Generator, d: int) -> MarkovSetup:
    blocks = random_blocks(rng, d)
    rho = random_block_density(rng, blocks)
    return build_markov(FaithfulState.from_matrix((rho + dagger(rho)) / 2), blocks)


def verify_bcm_commutation(ms: MarkovSetup, t: float, tol: float = DEFAULT.markov) -> CheckReport:
    """``Delta_M^{-t} T Delta_N^{t} = T``."""
    t = float(t)
    T = ms.T
    res = op_norm(ms.delta_M(-t) @ T @ ms.delta_N(t) - T) / op_norm(T)
    return CheckReport.from_residual(
        "bcm_commutation",
        "Delta_K^{-t} T Delta_H^{t} = T",
        res,
        tol,
        inputs={"blocks": ms.blocks, "rho": ms.ambient.state.rho, "t": t},
    )


def verify_bcm_closure(ms: MarkovSetup, z: complex, tol: float | None = None) -> CheckReport:
    """``T Delta_N^z = Delta_M^z T`` (relative); the tolerance loosens for ``|z| > 2``."""
    z = complex(z)
    if tol is None:
        tol = DEFAULT.markov if abs(z) <= 2 else DEFAULT.markov_far
    lhs = ms.T @ ms.delta_N(z)
    rhs = ms.delta_M(z) @ ms.T
    scale = max(op_norm(lhs), op_norm(rhs), 1e-300)
    return CheckReport.from_residual(
        "bcm_closure",
        "T Delta_H^z = Delta_K^z T",
        op_norm(lhs - rhs) / scale,
        tol,
        inputs={"blocks": ms.blocks, "rho": ms.ambient.state.rho, "z": z},
    )


def verify_j_intertwine(ms: MarkovSetup, tol: float = DEFAULT.markov) -> CheckReport:
    """``J_phi T J_rho = T``, evaluated as a conjugate-linear composite on the GNS basis of D.

    The chain behind it is checked too: ``Phi sigma^rho_{i/2} = sigma^phi_{i/2} Phi`` on D, and
    ``T J_rho Lambda_N(x) = Lambda_M(sigma^phi_{i/2}(Phi x)^*) = J_phi T Lambda_N(x)``.
    """
    alg = ms.algebra
    T = ms.T
    eye = np.eye(alg.dim, dtype=complex)
    composite = np.stack([ms.J_M(T @ ms.J_N(e)) for e in eye], axis=1)
    res = op_norm(composite - T)
    chain_sigma = 0.0
    chain_j = 0.0
    for x in alg.basis():
        Phix = alg.embed(x)
        lhs = alg.embed(ms.sigma_N(0.5j, x))
        rhs = ms.sigma_M(0.5j, Phix)
        chain_sigma = max(chain_sigma, float(np.max(np.abs(lhs - rhs))))
        left = T @ ms.J_N(ms.Lambda_N(x))
        mid = ms.Lambda_M(dagger(rhs))
        right = ms.J_M(T @ ms.Lambda_N(x))
        chain_j = max(chain_j, float(np.linalg.norm(left - mid)), float(np.linalg.norm(mid - right)))
    worst = max(res, chain_sigma, chain_j)
    return CheckReport.from_residual(
        "j_intertwine",
        "J_phi T J_rho = T",
        worst,
        tol,
        inputs={"blocks": ms.blocks, "rho": ms.ambient.state.rho},
        values={"composite": res, "sigma_chain": chain_sigma, "j_chain": chain_j},
    )


MARKOV_TIMES = (0.7, -0.7, 2.3, -2.3)
MARKOV_EXPONENTS = (-0.5j, -1j, 1 + 1j)


def markov_checks(ms: MarkovSetup, tolerances: Tolerances = DEFAULT) -> list[CheckReport]:
    out = [verify_bcm_commutation(ms, t, tolerances.markov) for t in MARKOV_TIMES]
    for z in MARKOV_EXPONENTS:
        out.append(verify_bcm_closure(ms, z, tolerances.markov if abs(z) <= 2 else tolerances.markov_far))
    out.append(verify_j_intertwine(ms, tolerances.markov))
    return out


def markov_suite(
    seed: int = 42,
    count: int = 20,
    dims: Sequence[int] = (2, 3, 4),
    workers: int = 4,
    tolerances: Tolerances = DEFAULT,
) -> list[CheckReport]:
    """Seeded random block setups, checked in parallel; output order is deterministic."""
    rng = np.random.default_rng(seed)
    child_seeds = rng.integers(0, 2**63 - 1, size=count)
    dims_drawn = [int(dims[i % len(dims)]) for i in range(count)]

    def run(i: int) -> list[CheckReport]:
        ms = random_markov_setup(np.random.default_rng(int(child_seeds[i])), dims_drawn[i])
        return markov_checks(ms, tolerances)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, range(count)))
    return [r for group in results for r in group]
