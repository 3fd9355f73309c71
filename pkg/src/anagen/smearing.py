"""Gaussian smearing ``R_n(x) = (n/sqrt(pi)) int exp(-n^2 t^2) alpha_t(x) dt``.

Orbit integrals are evaluated by composite Gauss-Legendre quadrature on
``[-T, T]``. The truncation is certified before any evaluation: the mass of
``|exp(-n^2 (t - z)^2)|`` outside ``[-T, T]`` is bounded through ``erfc``,
including the ``exp(n^2 Im(z)^2)`` amplification of a shifted kernel.

The closed forms used as oracles follow from the Gaussian integral
``(n/sqrt(pi)) int exp(-n^2 (t-z)^2) exp(i w t) dt = exp(i w z - w^2/(4 n^2))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import AnagenError, NotDense, NotInvariant, PrecisionLoss, ShapeMismatch, TailBoundViolated
from .group_models import DiagonalGroup, EmbeddedCornerGroup, ImplementedGroup, OneParamGroup
from .matrix_core import dagger, orthonormal_basis, subspace_residual
from .report import CheckReport
from .tolerances import DEFAULT

# exp(n^2 Im(z)^2) times machine epsilon must stay well below the 1e-8 target
MAX_LOG_AMPLIFICATION = 18.0
_TAIL_MARGIN = 30.0
_CHUNK = 4096


class Rule(enum.Enum):
    TRAPEZOID = "trapezoid"
    GAUSS_LEGENDRE = "gauss-legendre"


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def log_gaussian_tail(n: float, z: complex, T: float) -> float:
    """Log of an upper bound on ``(n/sqrt(pi)) int_{|t|>T} |exp(-n^2 (t-z)^2)| dt``."""
    a, b = complex(z).real, complex(z).imag
    x = n * (T - abs(a))
    if x <= 0:
        return math.inf
    # erfc(x) <= exp(-x^2) / (x sqrt(pi))
    bound = -x * x - math.log(x * math.sqrt(math.pi))
    ec = math.erfc(x)
    if ec > 0:
        bound = min(bound, math.log(ec))
    return n * n * b * b + bound


@dataclass(frozen=True)
class QuadratureScheme:
    half_width: float
    step: float
    rule: Rule = Rule.GAUSS_LEGENDRE
    panel_order: int = 8

    def __post_init__(self) -> None:
        if not (self.half_width > 0 and self.step > 0):
            raise ValueError("half_width and step must be positive")
        if self.half_width / self.step < 8 * (1 - 1e-12):
            raise ValueError("half_width / step must be at least 8")
        object.__setattr__(self, "rule", Rule(self.rule))

    @classmethod
    def default(cls, n: float, z: complex = 0.0, max_frequency: float = 0.0, panel_order: int = 8) -> "QuadratureScheme":
        """Scheme sized for smearing parameter ``n``, shift ``z`` and orbit frequencies."""
        a, b = abs(complex(z).real), abs(complex(z).imag)
        x = math.sqrt(n * n * b * b + _TAIL_MARGIN)
        T = a + x / n
        # fastest phase variation where the shifted kernel is not negligible
        kappa = max_frequency + 2.0 * n * x * (1.0 + n * b)
        h = min(2.0 * T / 64.0, 2.0 / kappa)
        return cls(T, h, Rule.GAUSS_LEGENDRE, panel_order)

    def certified_tail(self, n: float, z: complex = 0.0) -> float:
        return math.exp(min(log_gaussian_tail(n, z, self.half_width), 700.0))

    def certify(self, n: float, z: complex = 0.0, tol: float = DEFAULT.tail) -> float:
        bound = self.certified_tail(n, z)
        if not bound <= tol:
            raise TailBoundViolated(f"discarded Gaussian mass {bound:.3e} exceeds {tol:.1e} (n={n}, z={z}, T={self.half_width})")
        return bound

    def panels(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights shaped ``(panels, points_per_panel)``."""
        T = self.half_width
        count = max(int(math.ceil(2 * T / self.step - 1e-9)), 1)
        if self.rule is Rule.TRAPEZOID:
            t = np.linspace(-T, T, count + 1)
            w = np.full(count + 1, 2 * T / count)
            w[0] = w[-1] = T / count
            return t[:, None], w[:, None]
        xs, ws = _legendre(self.panel_order)
        edges = np.linspace(-T, T, count + 1)
        half = (edges[1:] - edges[:-1]) / 2
        mid = (edges[1:] + edges[:-1]) / 2
        return mid[:, None] + half[:, None] * xs[None, :], half[:, None] * ws[None, :]

    @property
    def node_count(self) -> int:
        t, _ = self.panels()
        return t.size


def _pairwise_sum(parts: np.ndarray) -> np.ndarray:
    """Sum along axis 0 in a fixed binary-tree order."""
    while parts.shape[0] > 1:
        if parts.shape[0] % 2:
            parts = np.concatenate([parts, np.zeros_like(parts[:1])])
        parts = parts[0::2] + parts[1::2]
    return parts[0]


@dataclass(frozen=True)
class SmearingOperator:
    n: float
    scheme: QuadratureScheme | None = field(default=None)

    def __post_init__(self) -> None:
        if not self.n > 0:
            raise ValueError("smearing parameter n must be positive")
        object.__setattr__(self, "n", float(self.n))

    def scheme_for(self, group: OneParamGroup, z: complex = 0.0) -> QuadratureScheme:
        if self.scheme is not None:
            return self.scheme
        return QuadratureScheme.default(self.n, z, group.max_frequency())


def _check_amplification(n: float, z: complex) -> None:
    amp = (n * complex(z).imag) ** 2
    if amp > MAX_LOG_AMPLIFICATION:
        raise PrecisionLoss(
            f"shifted kernel amplifies rounding by exp({amp:.1f}); keep n*|Im z| <= {math.sqrt(MAX_LOG_AMPLIFICATION):.2f}"
        )


def _integrate(R: SmearingOperator, group: OneParamGroup, z: complex, x) -> np.ndarray:
    x = group.check_element(x)
    scheme = R.scheme_for(group, z)
    scheme.certify(R.n, z)
    nodes, weights = scheme.panels()
    n = R.n
    kernel = (n / math.sqrt(math.pi)) * np.exp(-(n * n) * (nodes - complex(z)) ** 2) * weights
    per_panel = np.empty((nodes.shape[0],) + group.shape, dtype=complex)
    rows = max(1, _CHUNK // nodes.shape[1])
    for start in range(0, nodes.shape[0], rows):
        t = nodes[start : start + rows]
        vals = group.orbit(t.reshape(-1), x).reshape(t.shape + group.shape)
        per_panel[start : start + rows] = np.einsum("pq,pq...->p...", kernel[start : start + rows], vals)
    return _pairwise_sum(per_panel)


def smear(R: SmearingOperator, group: OneParamGroup, x) -> np.ndarray:
    """Quadrature value of ``R_n(x)``."""
    return _integrate(R, group, 0.0, x)


def smear_shifted(R: SmearingOperator, group: OneParamGroup, z: complex, x) -> np.ndarray:
    """Quadrature value of ``alpha_z(R_n(x)) = (n/sqrt(pi)) int exp(-n^2 (t-z)^2) alpha_t(x) dt``."""
    _check_amplification(R.n, z)
    return _integrate(R, group, z, x)


def _to_frequency(group: OneParamGroup, x: np.ndarray) -> np.ndarray:
    if isinstance(group, ImplementedGroup):
        V = group.P.eigenvectors
        return dagger(V) @ x @ V
    if isinstance(group, (DiagonalGroup, EmbeddedCornerGroup)):
        return x
    raise TypeError(f"no frequency coordinates for {group!r}")


def _from_frequency(group: OneParamGroup, y: np.ndarray) -> np.ndarray:
    if isinstance(group, ImplementedGroup):
        V = group.P.eigenvectors
        return V @ y @ dagger(V)
    return y


def alpha_z_quadrature(group: OneParamGroup, z: complex, x, n: float = 1.0, floor: float = 1e-200) -> np.ndarray:
    """``alpha_z(x)`` with every frequency multiplier measured by quadrature.

    Each frequency coordinate of ``x`` is multiplied by the ratio of the
    shifted and unshifted smeared values of that coordinate, which equals
    ``exp(i omega z)`` for every frequency ``omega``. Coordinates whose
    smeared value falls below ``floor`` are reported as 0.
    """
    x = group.check_element(x)
    R = SmearingOperator(n)
    shifted = _to_frequency(group, smear_shifted(R, group, z, x))
    plain = _to_frequency(group, smear(R, group, x))
    coords = _to_frequency(group, x)
    out = np.zeros_like(coords)
    ok = np.abs(plain) > floor
    out[ok] = shifted[ok] / plain[ok] * coords[ok]
    return _from_frequency(group, out)


def log_multiplier(n: float, omega, z: complex = 0.0) -> np.ndarray:
    """Logarithm of the smearing multiplier on frequency ``omega`` followed by ``alpha_z``."""
    omega = np.asarray(omega, dtype=float)
    return 1j * omega * complex(z) - omega**2 / (4.0 * n * n)


def _exp_log(lg: np.ndarray) -> np.ndarray:
    out = np.zeros(lg.shape, dtype=complex)
    ok = lg.real > -745.0
    out[ok] = np.exp(lg[ok])
    return out


def smear_closed_form(n: float, group: OneParamGroup, x, z: complex = 0.0) -> np.ndarray:
    """``alpha_z(R_n(x))`` from the spectral decomposition of the orbit (no quadrature)."""
    x = group.check_element(x)
    if isinstance(group, DiagonalGroup):
        return _exp_log(log_multiplier(n, group.exponents, z)) * x
    if isinstance(group, EmbeddedCornerGroup):
        lam = group.exponents
        m = np.ones(group.shape, dtype=complex)
        m[0, 0] = m[1, 1] = _exp_log(log_multiplier(n, np.zeros_like(lam), z))
        m[0, 1] = _exp_log(log_multiplier(n, lam, z))
        m[1, 0] = _exp_log(log_multiplier(n, -lam, z))
        return m * x
    if isinstance(group, ImplementedGroup):
        V = group.P.eigenvectors
        omega = group.frequencies().reshape(group.shape)
        return V @ (_exp_log(log_multiplier(n, omega, z)) * (dagger(V) @ x @ V)) @ dagger(V)
    raise TypeError(f"no closed form for {group!r}")


def verify_commutation(
    R: SmearingOperator,
    group: OneParamGroup,
    t: float,
    x,
    z: complex | None = None,
    tol: float = DEFAULT.closed_form,
) -> CheckReport:
    """``alpha_t R_n = R_n alpha_t`` (and the same with complex ``z`` via spectral calculus)."""
    x = group.check_element(x)
    scale = max(group.norm(x), 1e-300)
    lhs = group.apply(t, smear(R, group, x))
    rhs = smear(R, group, group.apply(t, x))
    res = group.norm(lhs - rhs) / scale
    values = {"real_residual": res}
    if z is not None:
        lz = group.alpha(z, smear(R, group, x))
        rz = smear(R, group, group.alpha(z, x))
        zres = group.norm(lz - rz) / max(group.norm(lz), 1e-300)
        values["complex_residual"] = zres
        res = max(res, zres)
    return CheckReport.from_residual(
        "smearing_commutation",
        "alpha_z(R_n x) = R_n(alpha_z x)",
        res,
        tol,
        inputs={"group": repr(group), "n": R.n, "t": t, "z": z},
        values=values,
    )


def support_preservation(R: SmearingOperator, group: DiagonalGroup, x, tol: float = DEFAULT.closed_form) -> CheckReport:
    """On a diagonal carrier ``R_n`` multiplies coordinate k by ``exp(-lambda_k^2/(4n^2)) != 0``."""
    if not isinstance(group, DiagonalGroup):
        raise TypeError("support_preservation needs a diagonal carrier")
    x = group.check_element(x)
    logs = log_multiplier(R.n, group.exponents).real
    support_x = np.flatnonzero(x != 0)
    # log-space: a finite log multiplier is a non-zero multiplier
    support_rx = np.flatnonzero((x != 0) & np.isfinite(logs))
    quad = smear(R, group, x)
    closed = _exp_log(logs + 0j) * x
    quad_res = float(np.max(np.abs(quad - closed))) if x.size else 0.0
    same = np.array_equal(support_x, support_rx)
    min_log = float(np.min(logs[support_x])) if support_x.size else 0.0
    return CheckReport(
        "support_preservation",
        "span of alpha-orbit of R_n x = span of alpha-orbit of x",
        quad_res,
        tol,
        bool(same and quad_res <= tol),
        inputs={"group": repr(group), "n": R.n, "x": x},
        values={"support": support_x.tolist(), "smeared_support": support_rx.tolist(), "min_log_multiplier": min_log},
    )


def graph_criterion(
    R: SmearingOperator,
    group: OneParamGroup,
    z: complex,
    x,
    y,
    tol: float = DEFAULT.criterion,
) -> bool:
    """Decide ``(x, y)`` in the graph of ``alpha_z`` through ``alpha_z(R_n x) = R_n y``.

    The smeared decision is cross-checked against a direct comparison of
    ``y`` with ``alpha_z(x)``; the two can only disagree if the Gaussian
    damping ``exp(-w^2/(4n^2))`` hides the discrepancy, which is reported as
    an error rather than silently returned.
    """
    x = group.check_element(x)
    y = group.check_element(y)
    smeared = group.norm(smear_shifted(R, group, z, x) - smear(R, group, y))
    ok = smeared <= tol
    direct = group.norm(y - group.alpha(z, x))
    damping = math.exp(min(group.max_frequency() ** 2 / (4 * R.n * R.n), 700.0))
    if ok and direct > 10 * tol * damping:
        raise AnagenError(f"graph criterion accepted a pair off the graph (direct residual {direct:.3e})")
    if not ok and direct <= tol / 10:
        raise AnagenError(f"graph criterion rejected a pair on the graph (smeared residual {smeared:.3e})")
    return bool(ok)


def _graph_vectors(group: OneParamGroup, z: complex, elems) -> list[np.ndarray]:
    return [np.concatenate([e.reshape(-1), group.alpha(z, e).reshape(-1)]) for e in elems]


def core_theorem_check(
    R: SmearingOperator,
    group: OneParamGroup,
    z: complex,
    D,
    tol: float = DEFAULT.subspace,
    invariance_times=(0.37, 1.3, -2.1),
    invariance_tol: float = 1e-9,
) -> CheckReport:
    """An invariant spanning set D gives the whole graph of ``alpha_z``."""
    D = [group.check_element(d) for d in D]
    cols = np.stack([d.reshape(-1) for d in D], axis=1) if D else np.zeros((group.dim, 0))
    norms = np.linalg.norm(cols, axis=0)
    Q = orthonormal_basis(cols / np.where(norms > 0, norms, 1.0), 1e-10)
    if Q.shape[1] < group.dim:
        raise NotDense(f"D spans a {Q.shape[1]}-dimensional subspace of a {group.dim}-dimensional carrier")
    worst = 0.0
    for t in invariance_times:
        for d in D:
            v = group.apply(t, d).reshape(-1)
            worst = max(worst, float(np.linalg.norm(v - Q @ (dagger(Q) @ v)) / max(np.linalg.norm(v), 1e-300)))
    if worst > invariance_tol:
        raise NotInvariant(f"D is not invariant (residual {worst:.3e})")
    dim1, dim2, res = subspace_residual(_graph_vectors(group, z, D), _graph_vectors(group, z, group.basis()))
    return CheckReport.from_residual(
        "core",
        "invariant dense D inside D(alpha_z) is a core for alpha_z",
        res,
        tol,
        inputs={"group": repr(group), "n": R.n, "z": complex(z), "size": len(D)},
        values={"dims": (dim1, dim2), "invariance_residual": worst},
    )
