"""The deterministic verification suite run by ``anagen verify``.

Each section draws from its own generator, seeded by the config seed and the
section label, so adding or removing a section never perturbs the others.
"""

from __future__ import annotations

import math
import zlib
from typing import Callable, Iterator

import numpy as np

from .config import SuiteConfig
from .continuation import (
    CounterexampleF,
    composition_check,
    counterexample_norm_gap,
    counterexample_weak_continuity,
    three_lines_check,
)
from .graph_structures import (
    algebra_closure_check,
    dual_generator_check,
    graph_ball_norm,
    graph_intersection_check,
    hinfty_basis,
    kaplansky_truncation,
    selfadjoint_density_check,
    tensor_uniqueness_check,
)
from .group_models import (
    DiagonalGroup,
    EmbeddedCornerGroup,
    GeometricSequence,
    ImplementedGroup,
    OneParamGroup,
    build_corner,
)
from .matrix_core import eig_hermitian, random_hermitian
from .modular import FaithfulState, build_modular, kms_report, markov_suite, verify_kms
from .report import CheckReport
from .smearing import (
    SmearingOperator,
    core_theorem_check,
    graph_criterion,
    smear,
    smear_shifted,
    support_preservation,
    verify_commutation,
)

# (n Im z)^2 above this is outside the double-precision budget of shifted smearing
SHIFT_BUDGET = 16.0


def section_rng(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(label.encode("utf-8"))])


def _cplx(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _zlabel(z: complex) -> str:
    z = complex(z)
    return f"{z.real:g}{z.imag:+g}i"


def _named(report: CheckReport, suffix: str) -> CheckReport:
    report.name = f"{report.name}[{suffix}]"
    return report


def random_element(rng: np.random.Generator, group: OneParamGroup) -> np.ndarray:
    return _cplx(rng, group.shape)


def sample_families(rng: np.random.Generator, d: int = 4, N: int = 6) -> list[tuple[str, OneParamGroup]]:
    return [
        ("diagonal", DiagonalGroup(rng.uniform(-6, 6, size=8))),
        ("implemented", ImplementedGroup(random_hermitian(rng, d, 0.6))),
        ("corner", build_corner(DiagonalGroup.integer_model(N))),
    ]


def check_eigensolver(cfg: SuiteConfig) -> Iterator[CheckReport]:
    tol = cfg.tolerances
    for d in cfg.dims:
        rng = section_rng(cfg.seed, f"eig{d}")
        H = random_hermitian(rng, d)
        dec = eig_hermitian(H)
        scale = max(np.linalg.norm(H, 2), 1e-300)
        recon = np.linalg.norm(dec.reconstruct() - H, 2) / scale
        yield CheckReport.from_residual(
            f"eig_reconstruction[d={d}]", "A = V diag(lambda) V*", recon, tol.reconstruction, inputs={"H": H}
        )
        cross = float(np.max(np.abs(dec.eigenvalues - np.linalg.eigvalsh(H)))) / scale
        yield CheckReport.from_residual(
            f"eig_cross_path[d={d}]", "spectrum agrees with an independent eigensolver", cross, tol.cross_path, inputs={"H": H}
        )


def check_group_law(cfg: SuiteConfig) -> Iterator[CheckReport]:
    rng = section_rng(cfg.seed, "group_law")
    for name, g in sample_families(rng, min(cfg.dims[0], 6)):
        x = random_element(rng, g)
        s, t = rng.uniform(-3, 3, size=2)
        lhs = g.apply(s, g.apply(t, x))
        rhs = g.apply(s + t, x)
        res = g.norm(lhs - rhs) / max(g.norm(rhs), 1e-300)
        yield CheckReport.from_residual(
            f"group_law[{name}]", "alpha_s alpha_t = alpha_{s+t}", res, cfg.tolerances.group_law, inputs={"group": repr(g), "s": s, "t": t}
        )


def check_smearing(cfg: SuiteConfig) -> Iterator[CheckReport]:
    tol = cfg.tolerances
    lam = np.linspace(-6.0, 6.0, 49)
    g = DiagonalGroup(lam)
    for n in cfg.n_values:
        got = smear(SmearingOperator(n), g, np.ones(lam.size))
        err = float(np.max(np.abs(got - np.exp(-(lam**2) / (4 * n * n)))))
        yield CheckReport.from_residual(
            f"smear_closed_form[n={n:g}]", "R_n e_lambda = exp(-lambda^2/(4n^2)) e_lambda", err, tol.closed_form, inputs={"n": n}
        )
    rng = section_rng(cfg.seed, "shifted")
    for name, grp in sample_families(rng):
        worst, cases, skipped = 0.0, 0, 0
        for n in cfg.n_values:
            for z in cfg.z_values:
                if (n * complex(z).imag) ** 2 > SHIFT_BUDGET:
                    skipped += 1
                    continue
                x = random_element(rng, grp)
                R = SmearingOperator(n)
                ref = grp.alpha(z, smear(R, grp, x))
                got = smear_shifted(R, grp, z, x)
                worst = max(worst, grp.norm(got - ref) / max(grp.norm(ref), 1e-300))
                cases += 1
        yield CheckReport.from_residual(
            f"smear_shifted[{name}]",
            "alpha_z(R_n x) = (n/sqrt(pi)) int exp(-n^2 (t-z)^2) alpha_t(x) dt",
            worst,
            tol.cross_path,
            inputs={"group": repr(grp), "n": list(cfg.n_values), "z": list(cfg.z_values)},
            values={"cases": cases, "skipped_precision_budget": skipped},
        )
    rng = section_rng(cfg.seed, "commutation")
    z0 = cfg.z_values[0]
    n0 = next((n for n in sorted(cfg.n_values) if (n * complex(z0).imag) ** 2 <= SHIFT_BUDGET), min(cfg.n_values))
    for name, grp in sample_families(rng):
        r = verify_commutation(SmearingOperator(n0), grp, 0.7, random_element(rng, grp), z0, tol.closed_form)
        yield _named(r, name)
    R = SmearingOperator(1.0)
    yield support_preservation(R, DiagonalGroup.integer_model(8, start=1), np.ones(8), tol.closed_form)
    g = DiagonalGroup.integer_model(6)
    x = random_element(rng, g)
    on = graph_criterion(R, g, -1j, x, g.alpha(-1j, x), tol.criterion)
    off = graph_criterion(R, g, -1j, x, g.alpha(-1j, x) + 1e-3, tol.criterion)
    yield CheckReport(
        "graph_criterion",
        "(x, y) in G(alpha_z) <=> alpha_z(R_n x) = R_n y",
        0.0 if (on and not off) else 1.0,
        0.0,
        bool(on and not off),
        inputs={"z": -1j, "x": x},
        values={"on_graph": on, "off_graph": off},
    )
    yield core_theorem_check(R, g, -1j, g.basis(), tol.subspace)


def check_continuation(cfg: SuiteConfig) -> Iterator[CheckReport]:
    tol = cfg.tolerances
    rng = section_rng(cfg.seed, "continuation")
    for d in cfg.dims:
        if d > 16:
            continue
        g = ImplementedGroup(random_hermitian(rng, d, 0.5))
        for z in cfg.z_values:
            x, y = random_element(rng, g), random_element(rng, g)
            yield _named(algebra_closure_check(g, z, x, y, tol.multiplicative), f"d={d},z={_zlabel(z)}")
    g = ImplementedGroup(random_hermitian(rng, min(cfg.dims[0], 6), 0.5))
    zs = list(cfg.z_values)
    for z1 in zs:
        for z2 in zs:
            x = random_element(rng, g)
            straddle = complex(z1).imag * complex(z2).imag < 0
            r = composition_check(g, z1, z2, x, tol.multiplicative, inclusion_only=straddle)
            yield _named(r, f"{_zlabel(z1)},{_zlabel(z2)}")
    for z in zs:
        if complex(z).imag == 0:
            continue
        x = random_element(rng, g)
        yield _named(three_lines_check(g, z, x, 21, tol.three_lines), _zlabel(z))


def check_counterexample(cfg: SuiteConfig) -> Iterator[CheckReport]:
    tol = cfg.tolerances
    F = CounterexampleF.power_schedule(64, 3)
    gaps = [counterexample_norm_gap(F, n) for n in range(10, 41)]
    deficit = 1.0 - min(gaps)
    yield CheckReport(
        "counterexample_norm_gap",
        "sup_m |F_m(e^{i pi/n}) - F_m(1)| stays near 1",
        deficit,
        1.0 - tol.norm_gap,
        bool(min(gaps) >= tol.norm_gap),
        inputs={"k": "m^3", "N": 64, "n": [10, 40]},
        values={"min_gap": min(gaps)},
    )
    a = 2.0 ** -np.arange(1, 65)
    yield counterexample_weak_continuity(F, a, 40, 10, tail_mass=2.0**-64, tol=tol.weak_pairing)


def check_domain_gap(cfg: SuiteConfig) -> Iterator[CheckReport]:
    corner = build_corner(DiagonalGroup.integer_model(16))
    r = graph_intersection_check(corner, GeometricSequence(1.0, -1.0))
    expected = (r.values["in_linf_domain"], r.values["in_c0_domain"], r.values["strict_gap"]) == (True, False, True)
    r.passed = bool(r.passed and expected)
    r.residual = 0.0 if r.passed else 1.0
    r.name = "domain_gap[e^-n]"
    yield r


def unit_ball_corner(rng: np.random.Generator, corner: EmbeddedCornerGroup) -> np.ndarray:
    """A random element on the unit sphere of the graph norm of ``alpha_{-i}``."""
    N = corner.shape[2]
    idx = np.arange(N)
    X = _cplx(rng, corner.shape)
    X[0, 1] *= np.exp(-idx) * rng.uniform(0.2, 1.0, size=N)
    return X / graph_ball_norm(corner, X)


def check_graph_structures(cfg: SuiteConfig) -> Iterator[CheckReport]:
    tol = cfg.tolerances
    rng = section_rng(cfg.seed, "kaplansky")
    for i in range(5):
        N = int(rng.integers(4, 13))
        corner = build_corner(DiagonalGroup.integer_model(N))
        X = unit_ball_corner(rng, corner)
        yield _named(kaplansky_truncation(corner, X, range(N + 1), tol.ball), f"{i}")
    rng = section_rng(cfg.seed, "dual")
    carriers: list[OneParamGroup] = [
        DiagonalGroup(rng.uniform(-3, 3, size=12)),
        ImplementedGroup(random_hermitian(rng, 3, 0.5)),
        ImplementedGroup(random_hermitian(rng, 4, 0.4)),
        build_corner(DiagonalGroup.integer_model(4)),
    ]
    for g in carriers:
        z = complex(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5))
        yield _named(dual_generator_check(g, z, tol.subspace), repr(g))
    for d in cfg.dims:
        if d > 8:
            continue
        h = np.cumsum(rng.uniform(0.1, 1.0, size=d))
        sub = hinfty_basis(ImplementedGroup(np.diag(h)))
        expected = tuple((j, k) for j in range(d) for k in range(d) if k <= j)
        ok = sub.units == expected and sub.criteria_agree
        yield CheckReport(
            f"hinfty_lower_triangular[d={d}]",
            "H^infty(alpha) = span{e_jk : k <= j} for increasing P",
            0.0 if ok else 1.0,
            0.0,
            bool(ok),
            inputs={"log_p": h},
            values={"size": len(sub), "limsup_residual": sub.limsup_residual},
        )
    rng = section_rng(cfg.seed, "tensor")
    for d in (2, 3):
        gA = ImplementedGroup(random_hermitian(rng, d, 0.5))
        pairs = [("same", gA, gA), ("other", gA, ImplementedGroup(random_hermitian(rng, d, 0.5)))]
        for label, a, b in pairs:
            yield _named(tensor_uniqueness_check(a, b, 16, seed=cfg.seed, tol=tol.intertwiner), f"d={d},{label}")
    g = ImplementedGroup(np.diag([0.0, 0.0, 0.7]))
    yield _named(selfadjoint_density_check(g, tol.subspace), "degenerate")


def check_modular(cfg: SuiteConfig) -> Iterator[CheckReport]:
    tol = cfg.tolerances
    rng = section_rng(cfg.seed, "modular")
    states = [(f"d={d}", FaithfulState.random(rng, d)) for d in cfg.dims if d <= 6]
    if cfg.state_eigenvalues:
        states.append(("config", FaithfulState.from_eigenvalues(cfg.state_eigenvalues, cfg.state_seed)))
    for label, st in states:
        md = build_modular(st)
        d = st.d
        yield CheckReport.from_residual(
            f"modular_data[{label}]",
            "S = J Delta^{1/2}, S Lambda(x) = Lambda(x*)",
            max(md.residuals.values()),
            tol.kms,
            inputs={"rho": st.rho},
            values=dict(md.residuals),
        )
        x = random_element(rng, md.sigma)
        inv = max(md.invariance_residual(t, x) for t in (0.4, -1.3, 2.9)) / max(np.linalg.norm(x, 2), 1e-300)
        yield CheckReport.from_residual(
            f"state_invariance[{label}]", "phi(sigma_t(x)) = phi(x)", inv, tol.kms, inputs={"rho": st.rho, "x": x}
        )
        a = random_element(rng, md.sigma)
        b = md.sigma.alpha(-1j, a)
        yield _named(kms_report(md, a, b, tol.kms), f"{label},positive")
        bad = b.copy()
        bad[0, 0] += 0.1 * np.linalg.norm(a, 2)
        neg = not verify_kms(md, a, bad, tol.kms)
        yield CheckReport(
            f"kms[{label},negative]",
            "phi(a x) = phi(x b) fails for b != sigma_{-i}(a)",
            0.0 if neg else 1.0,
            0.0,
            bool(neg),
            inputs={"rho": st.rho, "a": a, "b": bad},
        )
    for i, r in enumerate(markov_suite(cfg.seed, 20, tolerances=tol)):
        yield _named(r, f"setup {i // 8}")


SECTIONS: tuple[tuple[str, Callable[[SuiteConfig], Iterator[CheckReport]]], ...] = (
    ("matrix_core", check_eigensolver),
    ("group_models", check_group_law),
    ("smearing", check_smearing),
    ("continuation", check_continuation),
    ("counterexample", check_counterexample),
    ("domain_gap", check_domain_gap),
    ("graph_structures", check_graph_structures),
    ("modular", check_modular),
)


def run_suite(cfg: SuiteConfig, sections: tuple[str, ...] | None = None) -> list[CheckReport]:
    out: list[CheckReport] = []
    for name, fn in SECTIONS:
        if sections is None or name in sections:
            out.extend(fn(cfg))
    return out


def summarize(reports: list[CheckReport]) -> tuple[int, int]:
    passed = sum(1 for r in reports if r.passed)
    return passed, len(reports) - passed


def finite_or_text(v: float):
    return v if math.isfinite(v) else str(v)
