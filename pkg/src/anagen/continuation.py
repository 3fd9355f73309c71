"""Analytic extensions on horizontal strips.

Every carrier in :mod:`anagen.group_models` has a closed-form extension
``w -> alpha_w(x)``, so strip-interior values come straight from spectral
calculus. This module adds the strip geometry, the composition and
three-lines checks, and the disc-valued map ``F`` that is weakly regular
without being norm continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, SideMismatch
from .group_models import OneParamGroup
from .report import CheckReport
from .tolerances import DEFAULT


@dataclass(frozen=True)
class Strip:
    """The closed strip between the real axis and ``R + anchor``."""

    anchor: complex

    def contains(self, w: complex) -> bool:
        s = complex(self.anchor).imag
        wi = complex(w).imag
        if s == 0.0:
            return wi == 0.0
        return 0.0 <= wi / s <= 1.0

    def lattice(self, grid: int, real_half_width: float = math.pi) -> np.ndarray:
        """A ``grid x grid`` lattice of points of the strip (rows: heights)."""
        heights = np.linspace(0.0, complex(self.anchor).imag, grid)
        reals = np.linspace(-real_half_width, real_half_width, grid)
        return reals[None, :] + 1j * heights[:, None]


def alpha_z_spectral(group: OneParamGroup, z: complex, x) -> np.ndarray:
    """``alpha_z(x)`` from the closed-form (spectral) extension of the orbit."""
    return group.alpha(z, x)


def _rel(diff: float, scale: float) -> float:
    return diff / scale if scale > 0 else diff


def composition_check(
    group: OneParamGroup,
    z1: complex,
    z2: complex,
    x,
    tol: float = DEFAULT.multiplicative,
    inclusion_only: bool = False,
) -> CheckReport:
    """Compare ``alpha_{z1}(alpha_{z2}(x))`` with ``alpha_{z1+z2}(x)``.

    Equality of operators only holds when ``z1, z2`` sit on the same side of
    the real axis; otherwise only the inclusion is asserted, which must be
    requested explicitly with ``inclusion_only=True``.
    """
    s1, s2 = complex(z1).imag, complex(z2).imag
    straddles = s1 * s2 < 0
    if straddles and not inclusion_only:
        raise SideMismatch(f"z1={z1} and z2={z2} lie on opposite sides of the real axis")
    composed = group.alpha(z1, group.alpha(z2, x))
    direct = group.alpha(complex(z1) + complex(z2), x)
    res = _rel(group.norm(composed - direct), group.norm(direct))
    return CheckReport.from_residual(
        "composition",
        "alpha_{z1} o alpha_{z2} = alpha_{z1+z2} (same side) / inclusion otherwise",
        res,
        tol,
        inputs={"group": repr(group), "z1": complex(z1), "z2": complex(z2)},
        values={"composed": composed, "direct": direct, "relation": "inclusion" if straddles else "equality"},
    )


def three_lines_check(
    group: OneParamGroup,
    z: complex,
    x,
    grid: int = 21,
    tol: float = DEFAULT.three_lines,
    real_half_width: float = math.pi,
) -> CheckReport:
    """Bound ``||alpha_w(x)||`` on a lattice of ``S(z)`` by ``max(||x||, ||alpha_z(x)||)``."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    pts = Strip(z).lattice(grid, real_half_width)
    norms = np.array([[group.norm(group.alpha(w, x)) for w in row] for row in pts])
    bound = max(group.norm(x), group.norm(group.alpha(z, x)))
    excess = float(np.max(norms) - bound)
    return CheckReport.from_residual(
        "three_lines",
        "||alpha_w(x)|| <= max(||x||, ||alpha_z(x)||) on S(z)",
        max(excess, 0.0),
        tol,
        inputs={"group": repr(group), "z": complex(z), "grid": grid},
        values={"norms": norms, "bound": bound, "lattice": pts},
    )


@dataclass(frozen=True)
class CounterexampleF:
    """``F(w) = (exp(k_m (e^{-i pi/m} w - 1)))_{m>=1}`` truncated to N components."""

    k: tuple[int, ...] = field(default_factory=lambda: tuple(m**3 for m in range(1, 65)))

    def __post_init__(self) -> None:
        k = tuple(int(v) for v in self.k)
        if not k:
            raise ValueError("k must be non-empty")
        if any(v < 0 for v in k):
            raise ValueError("k must be non-negative")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise ValueError("k must be strictly increasing")
        object.__setattr__(self, "k", k)

    @classmethod
    def power_schedule(cls, N: int = 64, power: int = 3) -> "CounterexampleF":
        return cls(tuple(m**power for m in range(1, N + 1)))

    @property
    def N(self) -> int:
        return len(self.k)

    def log_components(self, w: complex) -> np.ndarray:
        w = complex(w)
        return self.log_components_polar(abs(w), math.atan2(w.imag, w.real))

    def log_components_polar(self, r: float, theta: float) -> np.ndarray:
        """``log F_m(r e^{i theta})``, cancellation-free near ``theta = pi/m``."""
        m = np.arange(1, self.N + 1)
        k = np.asarray(self.k, dtype=float)
        phi = theta - np.pi / m
        # e^{i phi} - 1 = -2 sin^2(phi/2) + i sin(phi)
        em1 = -2.0 * np.sin(phi / 2) ** 2 + 1j * np.sin(phi)
        return k * ((r - 1.0) * np.exp(1j * phi) + em1)

    def components(self, w: complex) -> np.ndarray:
        """Component values; terms whose modulus underflows are returned as 0."""
        return _exp_or_zero(self.log_components(w))

    def components_on_circle(self, theta: float) -> np.ndarray:
        return _exp_or_zero(self.log_components_polar(1.0, theta))


def _exp_or_zero(lg: np.ndarray) -> np.ndarray:
    out = np.zeros(lg.shape, dtype=complex)
    ok = lg.real > -745.0
    out[ok] = np.exp(lg[ok])
    return out


def _component_gaps(F: CounterexampleF, n: int) -> np.ndarray:
    return np.abs(F.components_on_circle(np.pi / n) - F.components_on_circle(0.0))


def counterexample_norm_gap(F: CounterexampleF, n: int) -> float:
    """``max_m |F_m(e^{i pi/n}) - F_m(1)|``, the sup-norm distance in c0."""
    if not 1 <= n <= F.N:
        raise IndexOutOfRange(f"n={n} outside 1..{F.N}")
    return float(np.max(_component_gaps(F, n)))


def spike_lower_bound(F: CounterexampleF, n: int) -> float:
    """``|1 - exp(k_n (e^{-i pi/n} - 1))|``, the n-th component gap."""
    if not 1 <= n <= F.N:
        raise IndexOutOfRange(f"n={n} outside 1..{F.N}")
    lg = F.k[n - 1] * (np.exp(-1j * np.pi / n) - 1.0)
    return float(abs(1.0 - np.exp(lg))) if lg.real > -745.0 else 1.0


def counterexample_weak_continuity(
    F: CounterexampleF,
    a,
    n_max: int,
    n_min: int = 2,
    tail_mass: float = 0.0,
    tol: float = DEFAULT.weak_pairing,
) -> CheckReport:
    """Pairings ``|<a, F(e^{i pi/n}) - F(1)>|`` for ``n = n_min .. n_max``.

    ``a`` is truncated to the first N components; ``tail_mass`` bounds
    ``sum_{m>N} |a_m|`` and enters the certified residual as ``2 * tail_mass``
    because every component of F has modulus at most 1.
    """
    a = np.asarray(a, dtype=complex).reshape(-1)
    if a.size > F.N:
        tail_mass += float(np.sum(np.abs(a[F.N:])))
        a = a[: F.N]
    coeffs = np.zeros(F.N, dtype=complex)
    coeffs[: a.size] = a
    ns = list(range(n_min, n_max + 1))
    pairings, spikes = [], []
    one = F.components_on_circle(0.0)
    for n in ns:
        diff = F.components_on_circle(np.pi / n) - one
        pairings.append(float(abs(np.sum(coeffs * diff))))
        spikes.append(float(abs(coeffs[n - 1] * diff[n - 1])) if n <= F.N else 0.0)
    final = pairings[-1] + 2.0 * tail_mass if pairings else 0.0
    return CheckReport.from_residual(
        "weak_continuity",
        "<a, F(e^{i pi/n}) - F(1)> -> 0 for a in l^1",
        final,
        tol,
        inputs={"k": list(F.k), "a": a, "n_min": n_min, "n_max": n_max},
        values={"n": ns, "pairing": pairings, "spike_pairing": spikes, "tail_bound": 2.0 * tail_mass},
    )
