from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg as sla

from anagen.errors import IsometryOnlyCarrier, NotDiagonal, NotInGraph, NotInUnitBall, WrongExponent
from anagen.graph_structures import (
    GraphElement,
    algebra_closure_check,
    dual_generator_check,
    graph_ball_norm,
    graph_element,
    graph_intersection_check,
    graph_product,
    graph_unit,
    hinfty_basis,
    intertwiner_space,
    kaplansky_truncation,
    natural_involution,
    selfadjoint_density_check,
    selfadjoint_part,
    tensor_uniqueness_check,
)
from anagen.group_models import (
    DiagonalGroup,
    GeometricSequence,
    ImplementedGroup,
    build_corner,
    build_modular_group,
    corner_element,
)
from anagen.matrix_core import matrix_unit, op_norm, random_hermitian, subspace_equal

E = math.e


def _h01():
    return ImplementedGroup(np.diag([0.0, 1.0]))


def _expm_alpha(H, z, x):
    # alpha_z(x) = e^{izH} x e^{-izH}, evaluated with scipy as an independent path
    return sla.expm(1j * z * H) @ x @ sla.expm(-1j * z * H)


def test_graph_element_membership():
    g = _h01()
    e12 = matrix_unit(2, 0, 1)
    GraphElement(g, -1j, e12, np.exp(-1) * e12)
    with pytest.raises(NotInGraph):
        GraphElement(g, -1j, e12, e12)
    rng = np.random.default_rng(0)
    H = random_hermitian(rng, 3, 0.5)
    x = rng.normal(size=(3, 3)) + 0j
    el = graph_element(ImplementedGroup(H), 0.4 - 1j, x)
    np.testing.assert_allclose(el.second, _expm_alpha(H, 0.4 - 1j, x), rtol=1e-10, atol=1e-12)


def test_graph_product_examples():
    g = _h01()
    e12, e21, e11 = matrix_unit(2, 0, 1), matrix_unit(2, 1, 0), matrix_unit(2, 0, 0)
    p = graph_product(GraphElement(g, -1j, e12, np.exp(-1) * e12), GraphElement(g, -1j, e21, E * e21))
    np.testing.assert_allclose(p.first, e11, atol=1e-15)
    np.testing.assert_allclose(p.second, e11, atol=1e-14)
    a = graph_element(g, -1j, np.array([[1.0, 2.0], [3.0, 4.0]]))
    u = graph_unit(g, -1j)
    assert graph_product(a, u).distance(a) <= 1e-14
    zero = graph_element(g, -1j, np.zeros((2, 2)))
    assert graph_product(a, zero).graph_norm() == 0.0


def test_graph_closed_under_products():
    rng = np.random.default_rng(1)
    for g in (ImplementedGroup(random_hermitian(rng, 4, 0.6)), build_corner(DiagonalGroup.integer_model(5))):
        for z in (-1j, 0.5 - 0.7j, 1.5j):
            a = graph_element(g, z, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
            b = graph_element(g, z, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
            assert graph_product(a, b).membership_residual() <= 1e-8


def test_product_rejects_isometry_carrier_and_mixed_generators():
    d = DiagonalGroup.integer_model(3)
    a = graph_element(d, -1j, np.ones(3))
    with pytest.raises(IsometryOnlyCarrier):
        graph_product(a, a)
    g = _h01()
    with pytest.raises(ValueError):
        graph_product(graph_element(g, -1j, np.eye(2)), graph_element(g, -0.5j, np.eye(2)))


def test_natural_involution_examples():
    g = _h01()
    e12, e21 = matrix_unit(2, 0, 1), matrix_unit(2, 1, 0)
    out = natural_involution(GraphElement(g, -1j, e12, np.exp(-1) * e12))
    np.testing.assert_allclose(out.first, np.exp(-1) * e21, atol=1e-15)
    np.testing.assert_allclose(out.second, e21, atol=1e-14)
    u = natural_involution(graph_unit(g, -1j))
    np.testing.assert_allclose(u.first, np.eye(2), atol=1e-15)
    fixed = np.diag([2.0, -1.0]) + 0j
    f = natural_involution(GraphElement(g, -1j, fixed, fixed))
    np.testing.assert_allclose(f.first, fixed, atol=1e-15)
    with pytest.raises(WrongExponent):
        natural_involution(graph_element(g, -0.5j, e12))


def test_natural_involution_is_anti_isomorphism():
    rng = np.random.default_rng(2)
    g = ImplementedGroup(random_hermitian(rng, 3, 0.5))
    for _ in range(5):
        a = graph_element(g, -1j, rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        b = graph_element(g, -1j, rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        lhs = natural_involution(graph_product(a, b))
        rhs = graph_product(natural_involution(b), natural_involution(a))
        assert lhs.distance(rhs) <= 1e-9 * lhs.graph_norm()
        assert natural_involution(natural_involution(a)).distance(a) <= 1e-10 * a.graph_norm()


def test_selfadjoint_part_examples():
    assert len(selfadjoint_part(build_modular_group(np.eye(3) / 3))) == 9
    basis = selfadjoint_part(_h01())
    assert subspace_equal(basis, [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)])
    rng = np.random.default_rng(3)
    H = random_hermitian(rng, 4)
    basis = selfadjoint_part(ImplementedGroup(H))
    assert len(basis) == 4
    for x in basis:
        assert op_norm(x @ H - H @ x) <= 1e-10
        g = GraphElement(ImplementedGroup(H), -1j, x, x)
        assert natural_involution(g).distance(GraphElement(ImplementedGroup(H), -1j, x.conj().T, x.conj().T)) <= 1e-12


def test_selfadjoint_part_degenerate_commutant():
    # commutant of P with eigenvalue multiplicities (2, 1) has dimension 4 + 1
    rng = np.random.default_rng(4)
    V = sla.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    H = V @ np.diag([0.2, 0.2, -0.7]) @ V.conj().T
    basis = selfadjoint_part(ImplementedGroup(H))
    assert len(basis) == 5
    oracle = sla.null_space(np.kron(np.eye(3), H.T) - np.kron(H, np.eye(3)))
    assert oracle.shape[1] == 5
    assert subspace_equal(basis, [oracle[:, i].reshape(3, 3) for i in range(5)], tol=1e-8)


def test_selfadjoint_density():
    rng = np.random.default_rng(5)
    for H in (np.diag([0.0, 1.0]), np.diag([0.3, 0.3, 1.0]), random_hermitian(rng, 3), np.zeros((2, 2))):
        r = selfadjoint_density_check(ImplementedGroup(H))
        assert r.passed, r


def test_hinfty_examples():
    sub = hinfty_basis(ImplementedGroup(np.diag(np.log([1.0, 2.0, 4.0]))))
    assert len(sub) == 6 and sorted(sub.units) == [(j, k) for j in range(3) for k in range(3) if k <= j]
    assert sub.criteria_agree and sub.limsup_residual <= 1e-9
    assert len(hinfty_basis(ImplementedGroup(np.zeros((4, 4))))) == 16
    sub = hinfty_basis(ImplementedGroup(np.diag(np.log([2.0, 1.0]))))
    assert (0, 1) in sub.units and (1, 0) not in sub.units
    assert sub.ratios[sub.units.index((0, 1))] == pytest.approx(0.5)
    with pytest.raises(NotDiagonal):
        hinfty_basis(ImplementedGroup(np.array([[0.0, 1.0], [1.0, 0.0]])))


def test_hinfty_closed_under_composable_products():
    rng = np.random.default_rng(6)
    logp = rng.normal(size=5)
    logp[3] = logp[1]
    sub = hinfty_basis(ImplementedGroup(np.diag(logp)))
    units = set(sub.units)
    for j, k in units:
        for k2, l in units:
            if k == k2:
                assert (j, l) in units


def test_kaplansky_examples():
    N = 30
    c = build_corner(DiagonalGroup.integer_model(N))
    X = corner_element(b=GeometricSequence(1.0, -1.0).values(N))
    assert graph_ball_norm(c, X) == pytest.approx(1.0, abs=1e-12)
    r = kaplansky_truncation(c, X, [1, 5, 10, 20, 30])
    assert r.passed
    assert max(r.values["graph_norms"]) <= 1 + 1e-12
    assert r.values["entry_errors"][-1] == 0.0
    assert r.values["entry_errors"][2] == pytest.approx(math.exp(-10), rel=1e-12)
    zero = kaplansky_truncation(c, np.zeros(c.shape), [3, 7])
    assert zero.passed and zero.values["graph_norms"] == [0.0, 0.0]
    D = corner_element(a=np.linspace(-1, 1, N), d=np.full(N, 0.5))
    np.testing.assert_array_equal(c.alpha(-1j, D), D)
    assert kaplansky_truncation(c, D, [4, 12]).passed
    with pytest.raises(NotInUnitBall):
        kaplansky_truncation(c, corner_element(b=GeometricSequence(1.0, -0.5).values(N)), [5])


def test_dual_generator_examples():
    assert dual_generator_check(DiagonalGroup([0.0, 0.0, 0.0]), -1j).passed
    r = dual_generator_check(DiagonalGroup.integer_model(4), -1j)
    assert r.passed and r.values["dims"] == (4, 4)
    # the dual multiplier on coordinate k is e^{k} at z = -i
    dual = DiagonalGroup.integer_model(4).dual()
    np.testing.assert_allclose(dual.alpha(-1j, np.ones(4)), np.exp(np.arange(4)), rtol=1e-14)
    rng = np.random.default_rng(7)
    for g in (ImplementedGroup(random_hermitian(rng, 3, 0.5)), build_corner(DiagonalGroup.integer_model(3))):
        for z in (0.0, -1j, 0.7 + 1.9j, -2j):
            assert dual_generator_check(g, z).passed


def test_graph_intersection_examples():
    c = build_corner(DiagonalGroup.integer_model(10))
    v = graph_intersection_check(c, GeometricSequence(1.0, -1.0)).values
    assert (v["in_linf_domain"], v["in_c0_domain"], v["image_in_linf"], v["image_in_c0"]) == (True, False, True, False)
    assert v["strict_gap"]
    np.testing.assert_allclose(v["truncated_image"], np.ones(10), rtol=1e-13)
    r = graph_intersection_check(c, GeometricSequence(1.0, -2.0))
    assert r.passed and r.values["in_c0_domain"] and not r.values["strict_gap"]
    np.testing.assert_allclose(r.values["truncated_image"], np.exp(-np.arange(10)), rtol=1e-13)
    z = graph_intersection_check(c, GeometricSequence(0.0))
    assert z.passed and all(z.values[k] for k in ("in_c0_domain", "in_linf_domain", "image_in_c0", "image_in_linf"))


def test_tensor_uniqueness_examples():
    g = _h01()
    r = tensor_uniqueness_check(g, g)
    assert r.passed and r.values["dimension"] == 6
    # scipy oracle: commutant of the 4x4 multiplier diag(1, e^-1, e, 1) has dimension 2^2 + 1 + 1
    A = g.operator_matrix(-1j)
    assert sla.null_space(np.kron(np.eye(4), A.T) - np.kron(A, np.eye(4))).shape[1] == 6
    rng = np.random.default_rng(8)
    c = rng.normal(size=(2, 2))
    theta = lambda x: c * x  # noqa: E731 - diagonal multiplier on matrix units
    for t in (0.3, 1.7, -2.5):
        x = rng.normal(size=(2, 2))
        assert op_norm(theta(g.apply(t, x)) - g.apply(t, theta(x))) <= 1e-12
    # different groups: only the shared multiplier 1 (diagonal units, 2-dim on each side) can be matched
    hA, hB = np.diag([0.0, 1.0]), np.diag([0.0, 2.5])
    other = tensor_uniqueness_check(ImplementedGroup(hA), ImplementedGroup(hB))
    assert other.passed and other.values["dimension"] == 4
    for H in (random_hermitian(rng, 3, 0.5), random_hermitian(rng, 2)):
        assert tensor_uniqueness_check(ImplementedGroup(H), ImplementedGroup(H)).passed
    Q = intertwiner_space(g, g)
    assert Q.shape == (16, 6)


def test_algebra_closure_on_automorphism_carriers():
    rng = np.random.default_rng(9)
    g = ImplementedGroup(random_hermitian(rng, 4, 0.5))
    x, y = rng.normal(size=(2, 4, 4))
    for z in (-1j, 1 - 0.5j, 2j):
        r = algebra_closure_check(g, z, x + 0j, y + 0j)
        assert r.passed, r
    with pytest.raises(IsometryOnlyCarrier):
        algebra_closure_check(DiagonalGroup.integer_model(3), -1j, np.ones(3), np.ones(3))
