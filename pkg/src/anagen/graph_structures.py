"""Graphs of analytic generators and the structures built on them.

A :class:`GraphElement` is a verified pair ``(a, alpha_z(a))``. For an
automorphism group the graph is an algebra under the componentwise product,
and for ``z = -i`` it carries the involution ``(a, b) -> (b*, a*)``. The
remaining functions compute spectral subspaces, truncation nets in the
corner model, dual graphs via annihilators, and intertwiner spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    IsometryOnlyCarrier,
    NotDiagonal,
    NotInGraph,
    NotInUnitBall,
    UnsupportedGroup,
    WrongExponent,
)
from .group_models import (
    EmbeddedCornerGroup,
    GeometricSequence,
    ImplementedGroup,
    OneParamGroup,
    in_domain_sequence,
)
from .matrix_core import dagger, matrix_unit, null_space, subspace_residual
from .report import CheckReport
from .tolerances import DEFAULT

MINUS_I = -1j


@dataclass(frozen=True, eq=False)
class GraphElement:
    """A pair ``(first, second)`` with ``second = alpha_z(first)``."""

    group: OneParamGroup
    z: complex
    first: np.ndarray
    second: np.ndarray
    tol: float = field(default=DEFAULT.membership, repr=False)

    def __post_init__(self) -> None:
        a = self.group.check_element(self.first)
        b = self.group.check_element(self.second)
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "first", a)
        object.__setattr__(self, "second", b)
        res = self.membership_residual()
        if res > self.tol:
            raise NotInGraph(f"second component differs from alpha_z(first) by {res:.3e} (relative)")

    def membership_residual(self) -> float:
        expected = self.group.alpha(self.z, self.first)
        scale = max(self.group.norm(expected), self.group.norm(self.second))
        diff = self.group.norm(self.second - expected)
        return diff / scale if scale > 0 else diff

    def distance(self, other: "GraphElement") -> float:
        g = self.group
        return max(g.norm(self.first - other.first), g.norm(self.second - other.second))

    def graph_norm(self) -> float:
        return max(self.group.norm(self.first), self.group.norm(self.second))


def graph_element(group: OneParamGroup, z: complex, a) -> GraphElement:
    return GraphElement(group, z, a, group.alpha(z, a))


def graph_unit(group: OneParamGroup, z: complex) -> GraphElement:
    one = group.identity()
    return GraphElement(group, z, one, one)


def _require_algebra(group: OneParamGroup) -> None:
    if not group.is_automorphism:
        raise IsometryOnlyCarrier(f"{group!r} is an isometry group, not an automorphism group")


def graph_product(g1: GraphElement, g2: GraphElement) -> GraphElement:
    """Componentwise product; membership of the result is re-verified."""
    if g1.group is not g2.group or g1.z != g2.z:
        raise ValueError("graph elements belong to different generators")
    _require_algebra(g1.group)
    g = g1.group
    return GraphElement(g, g1.z, g.multiply(g1.first, g2.first), g.multiply(g1.second, g2.second))


def natural_involution(g: GraphElement, tol: float = 1e-10) -> GraphElement:
    """``(a, b) -> (b*, a*)`` on the graph of ``alpha_{-i}``, i.e. ``a -> alpha_{-i}(a)*``."""
    if g.z != MINUS_I:
        raise WrongExponent(f"the involution is defined on the graph of alpha_(-i), not alpha_({g.z})")
    _require_algebra(g.group)
    grp = g.group
    out = GraphElement(grp, g.z, grp.adjoint(g.second), grp.adjoint(g.first))
    back_first = grp.adjoint(out.second)
    back_second = grp.adjoint(out.first)
    err = max(grp.norm(back_first - g.first), grp.norm(back_second - g.second))
    if err > tol * max(g.graph_norm(), 1.0):
        raise AssertionError(f"involution is not involutive (error {err:.3e})")
    return out


def _eigen_clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    order = np.argsort(values)
    clusters: list[list[int]] = []
    for idx in order:
        if clusters and abs(values[idx] - values[clusters[-1][-1]]) <= tol * max(1.0, abs(values[idx])):
            clusters[-1].append(int(idx))
        else:
            clusters.append([int(idx)])
    return clusters


def selfadjoint_part(group: ImplementedGroup, z: complex = MINUS_I, cluster_tol: float = 1e-9) -> list[np.ndarray]:
    """Basis of the fixed-point algebra ``{x : alpha_t(x) = x}``.

    The graph elements ``(x, x)`` built from it are exactly the pairs fixed
    by the involution; the basis is read off the eigenspaces of ``P``.
    """
    if not isinstance(group, ImplementedGroup):
        raise UnsupportedGroup("the fixed-point algebra is computed for implemented groups")
    h = group.P.log_eigenvalues
    V = group.P.eigenvectors
    d = group.d
    basis = []
    for cl in _eigen_clusters(h, cluster_tol):
        for j in cl:
            for k in cl:
                basis.append(V @ matrix_unit(d, j, k) @ dagger(V))
    for x in basis:
        g = GraphElement(group, z, x, x)
        if complex(z) == MINUS_I:
            natural_involution(g)
    return basis


def selfadjoint_density_check(group: ImplementedGroup, tol: float = DEFAULT.subspace, times=(1.0, 2.0**0.5, np.pi)) -> CheckReport:
    """``span(A + A*) = {(x, y) : x - y in span{v - alpha_t(v)}}`` for ``A`` the graph of ``alpha_{-i}``."""
    basis = group.basis()
    lhs = []
    for e in basis:
        a, b = e, group.alpha(MINUS_I, e)
        lhs.append(np.concatenate([a.reshape(-1), b.reshape(-1)]))
        lhs.append(np.concatenate([group.adjoint(a).reshape(-1), group.adjoint(b).reshape(-1)]))
    # fixed vectors give v - alpha_t(v) at rounding level; normalising those would add noise directions
    moved = [m for m in (v - group.apply(t, v) for v in basis for t in times) if group.norm(m) > 1e-12]
    zero = np.zeros(group.dim, dtype=complex)
    rhs = [np.concatenate([e.reshape(-1), e.reshape(-1)]) for e in basis]
    rhs += [np.concatenate([m.reshape(-1), zero]) for m in moved]
    d1, d2, res = subspace_residual(lhs, rhs)
    return CheckReport.from_residual(
        "selfadjoint_density",
        "span(A + A*) = {(x,y): x - y in span(v - alpha_t v)}",
        res,
        tol,
        inputs={"group": repr(group)},
        values={"dims": (d1, d2)},
    )


@dataclass(frozen=True)
class SpectralSubspace:
    """Matrix units ``e_jk`` (0-based) spanning ``H^infty(alpha)``."""

    units: tuple[tuple[int, int], ...]
    ratios: tuple[float, ...]
    limsup_residual: float = 0.0
    criteria_agree: bool = True

    def __post_init__(self) -> None:
        if any(r > 1 + 1e-12 for r in self.ratios):
            raise ValueError("every unit in H^infty must have ratio p_k/p_j <= 1")

    def __len__(self) -> int:
        return len(self.units)

    def matrices(self, d: int) -> list[np.ndarray]:
        return [matrix_unit(d, j, k) for j, k in self.units]


def hinfty_basis(group: ImplementedGroup, powers: int = 12, tol: float = 1e-9) -> SpectralSubspace:
    """Units ``e_jk`` with ``limsup ||alpha_{in}(e_jk)||^{1/n} <= 1``, for diagonal ``P``.

    Since ``alpha_{in}(e_jk) = (p_k/p_j)^n e_jk``, the criterion is
    ``p_k / p_j <= 1``; the numerical n-th roots are checked against it.
    """
    H = group.generator
    off = H - np.diag(np.diag(H))
    if np.max(np.abs(off), initial=0.0) > 1e-12 * max(np.max(np.abs(H)), 1.0):
        raise NotDiagonal("H^infty basis requires P diagonal in the standard basis")
    logp = np.real(np.diag(H))
    d = group.d
    units, ratios = [], []
    worst = 0.0
    agree = True
    for j in range(d):
        for k in range(d):
            ratio = float(np.exp(logp[k] - logp[j]))
            e = matrix_unit(d, j, k)
            roots = [group.norm(group.alpha(1j * n, e)) ** (1.0 / n) for n in range(1, powers + 1)]
            worst = max(worst, max(abs(r - ratio) / ratio for r in roots))
            numeric_in = roots[-1] <= 1 + tol
            ratio_in = ratio <= 1 + 1e-12
            agree = agree and (numeric_in == ratio_in)
            if ratio_in:
                units.append((j, k))
                ratios.append(ratio)
    return SpectralSubspace(tuple(units), tuple(ratios), worst, agree)


def graph_ball_norm(corner: EmbeddedCornerGroup, X, z: complex = MINUS_I) -> float:
    return max(corner.norm(X), corner.norm(corner.alpha(z, X)))


def kaplansky_truncation(
    corner: EmbeddedCornerGroup,
    X,
    cutoffs: Sequence[int],
    tol: float = DEFAULT.ball,
) -> CheckReport:
    """Finitely supported truncations of a unit graph-ball element stay in the ball."""
    X = corner.check_element(X)
    base = graph_ball_norm(corner, X)
    if base > 1 + tol:
        raise NotInUnitBall(f"graph-ball norm {base:.6g} exceeds 1")
    N = corner.shape[2]
    cutoffs = sorted(int(k) for k in cutoffs)
    norms, errors, supports = [], [], []
    agree_below = True
    for k in cutoffs:
        Xk = X.copy()
        Xk[..., k:] = 0.0
        norms.append(graph_ball_norm(corner, Xk))
        errors.append(float(np.max(np.abs(Xk - X), initial=0.0)))
        nz = np.flatnonzero(np.any(Xk.reshape(4, N) != 0, axis=0))
        supports.append(int(nz[-1]) + 1 if nz.size else 0)
        agree_below = agree_below and bool(np.array_equal(Xk[..., : min(k, N)], X[..., : min(k, N)]))
    excess = max([n - 1.0 for n in norms] + [0.0])
    monotone = all(b <= a for a, b in zip(errors, errors[1:]))
    converged = not cutoffs or cutoffs[-1] < N or errors[-1] == 0.0
    passed = excess <= tol and monotone and converged and agree_below and all(s <= k for s, k in zip(supports, cutoffs))
    return CheckReport(
        "kaplansky_truncation",
        "unit ball of G(alpha^A_z) is dense in unit ball of G(alpha^M_z)",
        excess,
        tol,
        passed,
        inputs={"N": N, "cutoffs": cutoffs, "X": X},
        values={"graph_norms": norms, "entry_errors": errors, "support": supports, "base_norm": base},
    )


def dual_generator_check(group: OneParamGroup, z: complex, tol: float = DEFAULT.subspace) -> CheckReport:
    """Graph of ``alpha_z^*`` via annihilators versus the generator of the dual group."""
    m = group.dim
    if m > 16:
        raise ValueError("dual_generator_check is limited to carriers of dimension <= 16")
    M = group.operator_matrix(z)
    # <mu, -alpha_z(e_k)> + <lam, e_k> = 0 for every basis e_k
    C = np.concatenate([-M.T, np.eye(m)], axis=1)
    C = C / np.linalg.norm(C, axis=1, keepdims=True)
    ann = null_space(C)
    annihilator = [ann[:, i] for i in range(ann.shape[1])]
    dual = group.dual()
    spectral = [np.concatenate([mu.reshape(-1), dual.alpha(z, mu).reshape(-1)]) for mu in dual.basis()]
    d1, d2, res = subspace_residual(annihilator, spectral)
    return CheckReport.from_residual(
        "dual_generator",
        "(alpha_z)^* = alpha_z of the adjoint group",
        res,
        tol,
        inputs={"group": repr(group), "z": complex(z)},
        values={"dims": (d1, d2)},
    )


def graph_intersection_check(corner: EmbeddedCornerGroup, seq: GeometricSequence, z: complex = MINUS_I, N: int | None = None) -> CheckReport:
    """Domain gap between the c0-model (A) and the l-infinity model (M).

    Asserts ``(x, y) in G^A  <=>  (x, y) in G^M  and  x, y in A``; the gap
    ``A cap D(alpha^M_z) != D(alpha^A_z)`` is reported as a boolean.
    """
    if not corner.inner.is_integer_model():
        raise UnsupportedGroup("graph_intersection_check needs the lambda_k = k model")
    mem = in_domain_sequence(seq, z)
    image = seq.alpha(z)
    seq_in_A = seq.in_c0()
    img_in_A = image.in_c0()
    img_in_M = image.in_linf()
    via_M = seq_in_A and mem.linf and img_in_A
    logic = mem.c0 == via_M
    gap = seq_in_A and mem.linf and not mem.c0
    n = N or corner.shape[2]
    b = seq.values(n)
    X = np.zeros((2, 2, n), dtype=complex)
    X[0, 1] = b
    if n == corner.shape[2]:
        tb = corner.alpha(z, X)[0, 1]
    else:
        tb = np.exp(1j * complex(z) * np.arange(n)) * b
    return CheckReport(
        "graph_intersection",
        "G^M cap (A + A) = G^A; A cap D(alpha^M_z) may exceed D(alpha^A_z)",
        0.0 if logic else 1.0,
        0.0,
        bool(logic),
        inputs={"coefficient": seq.coefficient, "log_ratio": seq.log_ratio, "start": seq.start_index, "z": complex(z)},
        values={
            "in_c0_domain": mem.c0,
            "in_linf_domain": mem.linf,
            "image_in_c0": img_in_A,
            "image_in_linf": img_in_M,
            "strict_gap": gap,
            "truncated_image": tb,
        },
    )


def tensor_uniqueness_check(
    gA: ImplementedGroup,
    gB: ImplementedGroup,
    samples: int = 16,
    t_values: Sequence[float] = (0.3, 1.7, -2.5),
    seed: int = 42,
    tol: float = DEFAULT.intertwiner,
) -> CheckReport:
    """Maps intertwining the ``-i`` generators intertwine the whole groups."""
    if gA.dim > 16 or gB.dim > 16:
        raise ValueError("tensor_uniqueness_check supports M_d with d <= 4")
    A = gA.operator_matrix(MINUS_I)
    B = gB.operator_matrix(MINUS_I)
    mA, mB = A.shape[0], B.shape[0]
    # theta is mB x mA; vec row-major: vec(theta A) = (I kron A^T) vec, vec(B theta) = (B kron I) vec
    K = np.kron(np.eye(mB), A.T) - np.kron(B, np.eye(mA))
    norms = np.linalg.norm(K, axis=1, keepdims=True)
    K = K / np.where(norms > 0, norms, 1.0)
    Nsp = null_space(K)
    inputs = {"A": repr(gA), "B": repr(gB), "samples": samples, "t": list(t_values), "seed": seed}
    if Nsp.shape[1] == 0:
        return CheckReport("tensor_uniqueness", "theta alpha_t = beta_t theta", 0.0, tol, True, inputs=inputs, values={"empty": True, "dimension": 0})
    rng = np.random.default_rng(seed)
    At = [gA.operator_matrix(t) for t in t_values]
    Bt = [gB.operator_matrix(t) for t in t_values]
    worst = 0.0
    gen_res = 0.0
    for _ in range(samples):
        c = rng.normal(size=Nsp.shape[1]) + 1j * rng.normal(size=Nsp.shape[1])
        theta = (Nsp @ c).reshape(mB, mA)
        theta /= np.linalg.norm(theta)
        gen_res = max(gen_res, float(np.max(np.linalg.norm(theta @ A - B @ theta, axis=0))))
        for a_t, b_t in zip(At, Bt):
            worst = max(worst, float(np.max(np.linalg.norm(theta @ a_t - b_t @ theta, axis=0))))
    return CheckReport.from_residual(
        "tensor_uniqueness",
        "theta alpha_t = beta_t theta",
        worst,
        tol,
        inputs=inputs,
        values={"empty": False, "dimension": int(Nsp.shape[1]), "generator_residual": gen_res},
    )


def intertwiner_space(gA: ImplementedGroup, gB: ImplementedGroup) -> np.ndarray:
    """Basis (columns, row-major vectorised) of maps theta with ``theta alpha_{-i} = beta_{-i} theta``."""
    A = gA.operator_matrix(MINUS_I)
    B = gB.operator_matrix(MINUS_I)
    K = np.kron(np.eye(B.shape[0]), A.T) - np.kron(B, np.eye(A.shape[0]))
    norms = np.linalg.norm(K, axis=1, keepdims=True)
    return null_space(K / np.where(norms > 0, norms, 1.0))


def algebra_closure_check(group: OneParamGroup, z: complex, x, y, tol: float = DEFAULT.multiplicative) -> CheckReport:
    """``alpha_z(xy) = alpha_z(x) alpha_z(y)`` and ``alpha_{conj z}(x*) = alpha_z(x)*`` (relative)."""
    _require_algebra(group)
    z = complex(z)
    ax, ay = group.alpha(z, x), group.alpha(z, y)
    lhs = group.alpha(z, group.multiply(x, y))
    rhs = group.multiply(ax, ay)
    mult = group.norm(lhs - rhs) / max(group.norm(rhs), group.norm(lhs), 1e-300)
    s_lhs = group.alpha(z.conjugate(), group.adjoint(x))
    s_rhs = group.adjoint(ax)
    star = group.norm(s_lhs - s_rhs) / max(group.norm(s_rhs), 1e-300)
    return CheckReport.from_residual(
        "algebra_closure",
        "alpha_z(xy) = alpha_z(x) alpha_z(y); alpha_{z*}(x*) = alpha_z(x)*",
        max(mult, star),
        tol,
        inputs={"group": repr(group), "z": z, "x": x, "y": y},
        values={"multiplicative": mult, "star": star},
    )
