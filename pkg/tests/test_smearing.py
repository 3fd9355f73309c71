from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, special

from anagen.errors import NotDense, PrecisionLoss, TailBoundViolated
from anagen.group_models import DiagonalGroup, ImplementedGroup, build_corner
from anagen.matrix_core import matrix_unit, op_norm, random_hermitian
from anagen.smearing import (
    QuadratureScheme,
    Rule,
    SmearingOperator,
    alpha_z_quadrature,
    core_theorem_check,
    graph_criterion,
    log_gaussian_tail,
    smear,
    smear_closed_form,
    smear_shifted,
    support_preservation,
    verify_commutation,
)


def _delta(N: int, k: int) -> np.ndarray:
    x = np.zeros(N, dtype=complex)
    x[k] = 1.0
    return x


def _families(seed: int):
    rng = np.random.default_rng(seed)
    return [
        DiagonalGroup(rng.uniform(-6, 6, 7)),
        ImplementedGroup(random_hermitian(rng, 4, 0.6)),
        build_corner(DiagonalGroup.integer_model(5)),
    ]


def test_smear_examples():
    g = DiagonalGroup.integer_model(3)
    out = smear(SmearingOperator(1.0), g, _delta(3, 2))
    np.testing.assert_allclose(out, [0, 0, math.exp(-1)], atol=1e-14)
    fixed = DiagonalGroup([0.0, 0.0])
    np.testing.assert_allclose(smear(SmearingOperator(0.3), fixed, [2.0, -1.0]), [2.0, -1.0], atol=1e-14)
    h = ImplementedGroup(np.diag([0.0, 1.0]))
    np.testing.assert_allclose(
        smear(SmearingOperator(1.0), h, matrix_unit(2, 0, 1)), math.exp(-0.25) * matrix_unit(2, 0, 1), atol=1e-14
    )


def test_smear_against_scipy_quad():
    # independent adaptive integration of the scalar integrand
    for lam, n in ((2.5, 0.5), (-5.0, 3.0), (6.0, 0.25)):
        re = integrate.quad(lambda t: n / math.sqrt(math.pi) * math.exp(-n * n * t * t) * math.cos(lam * t), -np.inf, np.inf, limit=400)[0]
        got = smear(SmearingOperator(n), DiagonalGroup([lam]), [1.0])[0]
        assert abs(got - re) <= 1e-9


def test_smear_shifted_examples():
    g = DiagonalGroup.integer_model(3)
    R = SmearingOperator(1.0)
    np.testing.assert_allclose(smear_shifted(R, g, -1j, _delta(3, 2)), [0, 0, math.e], rtol=1e-10, atol=1e-14)
    x = np.array([1.0, 2.0, -1j])
    np.testing.assert_allclose(smear_shifted(R, g, 0.0, x), smear(R, g, x), atol=1e-15)
    fixed = DiagonalGroup([0.0])
    np.testing.assert_allclose(smear_shifted(R, fixed, 0.4 - 1.5j, [1.0]), [1.0], rtol=1e-10)


@pytest.mark.parametrize("g", _families(1), ids=repr)
def test_shifted_consistency_against_closed_form(g):
    rng = np.random.default_rng(2)
    for n in (0.25, 0.5, 1.0, 2.0):
        for z in (-1j, 1.3 + 2j, -0.5 - 1.7j):
            x = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
            R = SmearingOperator(n)
            got = smear_shifted(R, g, z, x)
            ref = g.alpha(z, smear(R, g, x))
            assert g.norm(got - ref) <= 1e-8 * g.norm(ref)
            assert g.norm(got - smear_closed_form(n, g, x, z)) <= 1e-8 * g.norm(ref)


def test_shift_outside_precision_budget_is_refused():
    with pytest.raises(PrecisionLoss):
        smear_shifted(SmearingOperator(4.0), DiagonalGroup([1.0]), -2j, [1.0])


def test_tail_bound_against_erfc():
    n, T = 1.3, 4.0
    # unshifted: (n/sqrt(pi)) int_{|t|>T} exp(-n^2 t^2) = erfc(n T)
    assert log_gaussian_tail(n, 0, T) >= math.log(special.erfc(n * T)) - 1e-12
    assert log_gaussian_tail(n, 0, T) <= math.log(special.erfc(n * T)) + 1e-9
    # shifted: |exp(-n^2 (t - a - ib)^2)| = exp(n^2 b^2) exp(-n^2 (t - a)^2)
    a, b = 0.5, -1.0
    exact = math.exp(n * n * b * b) * 0.5 * (special.erfc(n * (T - a)) + special.erfc(n * (T + a)))
    assert log_gaussian_tail(n, a + 1j * b, T) >= math.log(exact) - 1e-12


def test_certification_rejects_short_interval():
    scheme = QuadratureScheme(2.0, 0.25)
    with pytest.raises(TailBoundViolated):
        smear(SmearingOperator(1.0, scheme), DiagonalGroup([1.0]), [1.0])
    with pytest.raises(ValueError):
        QuadratureScheme(1.0, 0.5)


def test_default_scheme_certifies_and_reports_nodes():
    for n in (0.25, 1.0, 4.0):
        for z in (0, -1j, 2 - 1j):
            if (n * abs(complex(z).imag)) ** 2 > 16:
                continue
            s = QuadratureScheme.default(n, z, 6.0)
            assert s.certify(n, z) <= 1e-12
            assert s.half_width / s.step >= 8
            assert s.node_count % 8 == 0


def test_trapezoid_rule_also_converges():
    T = 7.0
    scheme = QuadratureScheme(T, 0.05, Rule.TRAPEZOID)
    got = smear(SmearingOperator(1.0, scheme), DiagonalGroup([2.0]), [1.0])[0]
    assert abs(got - math.exp(-1)) <= 1e-10


def test_contractivity_and_convergence_to_identity():
    rng = np.random.default_rng(3)
    for g in _families(4):
        x = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
        for n in (0.25, 1.0, 4.0):
            assert g.norm(smear(SmearingOperator(n), g, x)) <= g.norm(x) + 1e-9
    lam = np.array([0.5, -1.0, 2.0, 3.0])
    g = DiagonalGroup(lam)
    x = np.array([1.0, -2.0, 0.5j, 1.0])
    errs = []
    for n in (1, 2, 4, 8, 16):
        err = np.max(np.abs(smear(SmearingOperator(n), g, x) - x))
        assert err <= np.max(lam**2) / (4 * n * n) * np.max(np.abs(x)) * (1 + 1e-6)
        errs.append(err)
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_commutation_examples():
    R = SmearingOperator(1.0)
    g = DiagonalGroup.integer_model(3)
    x = _delta(3, 1) + _delta(3, 2)
    r = verify_commutation(R, g, 1.3, x, z=-1j)
    assert r.passed
    k = np.arange(3)
    lhs = g.apply(1.3, smear(R, g, x))
    np.testing.assert_allclose(lhs, np.exp(1j * k * 1.3 - k**2 / 4) * x, atol=1e-13)
    h = ImplementedGroup(random_hermitian(np.random.default_rng(5), 3))
    assert verify_commutation(R, h, -2.1, np.random.default_rng(6).normal(size=(3, 3))).passed
    triv = DiagonalGroup([0.0, 0.0])
    assert verify_commutation(R, triv, 0.7, [1.0, 2.0]).residual <= 1e-15


def test_support_preservation_examples():
    R = SmearingOperator(0.5)
    g = DiagonalGroup.integer_model(8, start=1)
    full = support_preservation(R, g, np.ones(8))
    assert full.passed
    assert full.values["min_log_multiplier"] == pytest.approx(-64.0)
    r = support_preservation(SmearingOperator(1.0), DiagonalGroup.integer_model(5), _delta(5, 3))
    assert r.passed and r.values["smeared_support"] == [3]
    assert r.values["min_log_multiplier"] == pytest.approx(-9 / 4)
    empty = support_preservation(R, g, np.zeros(8))
    assert empty.passed and empty.values["support"] == []


def test_graph_criterion_examples():
    R = SmearingOperator(1.0)
    g = DiagonalGroup.integer_model(4)
    x = np.array([1.0, -0.5, 0.25j, 0.1])
    assert graph_criterion(R, g, -1j, x, g.alpha(-1j, x))
    assert not graph_criterion(R, g, -1j, x, g.alpha(-1j, x) + 0.1 * _delta(4, 0))
    assert graph_criterion(R, g, -1j, np.zeros(4), np.zeros(4))


def test_core_theorem_examples():
    R = SmearingOperator(1.0)
    g = ImplementedGroup(random_hermitian(np.random.default_rng(7), 3, 0.5))
    assert core_theorem_check(R, g, -1j, g.basis()).passed
    smeared = [smear(R, g, e) for e in g.basis()]
    assert core_theorem_check(R, g, -1j, smeared).passed
    with pytest.raises(NotDense):
        core_theorem_check(R, g, -1j, g.basis()[:5])
    # a spanning set always spans an invariant space on a finite carrier, even if its elements move
    d = DiagonalGroup.integer_model(3)
    r = core_theorem_check(R, d, -1j, [np.ones(3), np.array([1, 1, 0]), np.array([1, 0, 0])])
    assert r.passed and r.values["invariance_residual"] <= 1e-12


def test_quadrature_continuation_path():
    g = DiagonalGroup.integer_model(4)
    np.testing.assert_allclose(alpha_z_quadrature(g, -1j, _delta(4, 1)), math.e * _delta(4, 1), rtol=1e-10)
    h = ImplementedGroup(random_hermitian(np.random.default_rng(8), 3, 0.5))
    x = np.random.default_rng(9).normal(size=(3, 3))
    ref = h.alpha(0.5 - 1j, x)
    assert op_norm(alpha_z_quadrature(h, 0.5 - 1j, x) - ref) <= 1e-8 * op_norm(ref)


def test_parallel_and_serial_reduction_agree():
    # evaluation is chunked; the pairwise reduction must not depend on chunking
    import anagen.smearing as sm

    g = DiagonalGroup(np.linspace(-6, 6, 13))
    x = np.ones(13)
    R = SmearingOperator(0.5)
    a = smear(R, g, x)
    old = sm._CHUNK
    try:
        sm._CHUNK = 8
        b = smear(R, g, x)
    finally:
        sm._CHUNK = old
    assert np.max(np.abs(a - b)) <= 1e-12
