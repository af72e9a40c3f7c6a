import numpy as np
import pytest

from gradflow.assembly import l2_error
from gradflow.felib import (
    FeField,
    build_space,
    eval_at_quad,
    interpolate,
    reference_element,
)
from gradflow.mesh import build_mesh
from gradflow.mms import exact_u
from gradflow.quadrature import MAX_DEGREE, quadrature_rule

from oracles import loglog_slope, reference_triangle_monomial


# --- quadrature -------------------------------------------------------------

def test_degree_two_monomial():
    rule = quadrature_rule(2)
    assert rule.integrate(lambda x, y: x**2 * y) == pytest.approx(1.0 / 60.0, abs=1e-15)


def test_centroid_rule():
    rule = quadrature_rule(1)
    assert len(rule) == 1
    np.testing.assert_allclose(rule.points, [[1 / 3, 1 / 3]])
    assert rule.integrate(lambda x, y: np.ones_like(x)) == pytest.approx(0.5, abs=1e-16)


@pytest.mark.parametrize("degree", range(1, MAX_DEGREE + 1))
def test_rule_exactness(degree):
    rule = quadrature_rule(degree)
    assert rule.exactness_degree >= degree
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(0.5, abs=1e-15)
    assert np.all(rule.points >= 0) and np.all(rule.points.sum(axis=1) <= 1)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            got = rule.integrate(lambda x, y: x**a * y**b)
            assert abs(got - reference_triangle_monomial(a, b)) < 1e-13, (a, b)


def test_symmetric_rules_are_symmetric():
    for degree in range(1, 9):
        rule = quadrature_rule(degree)
        swapped = rule.points[:, ::-1]
        order_a = np.lexsort(rule.points.T)
        order_b = np.lexsort(swapped.T)
        np.testing.assert_allclose(rule.points[order_a], swapped[order_b], atol=1e-14)


@pytest.mark.parametrize("degree", [0, 11, 2.5])
def test_rule_out_of_table(degree):
    with pytest.raises(ValueError):
        quadrature_rule(degree)


# --- reference elements -----------------------------------------------------

@pytest.mark.parametrize("r, n", [(1, 3), (2, 6), (3, 10)])
def test_reference_node_counts(r, n):
    elem = reference_element(r)
    assert elem.n_local == n == (r + 1) * (r + 2) // 2
    np.testing.assert_allclose(elem.node_coords[:3], [[0, 0], [1, 0], [0, 1]])


def test_p2_nodes_are_vertices_and_midpoints():
    nodes = reference_element(2).node_coords
    np.testing.assert_allclose(nodes[3:], [[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]])


def test_p3_partition_of_unity_at_centroid():
    vals = reference_element(3).basis([[1 / 3, 1 / 3]])
    assert abs(vals.sum() - 1.0) < 1e-13


@pytest.mark.parametrize("r", [1, 2, 3])
def test_kronecker_and_partition_of_unity(r):
    elem = reference_element(r)
    np.testing.assert_allclose(elem.basis(elem.node_coords), np.eye(elem.n_local), atol=1e-14)
    rng = np.random.default_rng(r)
    pts = rng.dirichlet(np.ones(3), size=50)[:, 1:]
    np.testing.assert_allclose(elem.basis(pts).sum(axis=1), 1.0, atol=1e-13)
    np.testing.assert_allclose(elem.basis_gradients(pts).sum(axis=1), 0.0, atol=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_basis_gradients_match_finite_differences(r):
    elem = reference_element(r)
    pts = np.array([[0.2, 0.3], [0.1, 0.05], [0.6, 0.25]])
    h = 1e-6
    fdx = (elem.basis(pts + [h, 0]) - elem.basis(pts - [h, 0])) / (2 * h)
    fdy = (elem.basis(pts + [0, h]) - elem.basis(pts - [0, h])) / (2 * h)
    grads = elem.basis_gradients(pts)
    np.testing.assert_allclose(grads[..., 0], fdx, atol=1e-8)
    np.testing.assert_allclose(grads[..., 1], fdy, atol=1e-8)


@pytest.mark.parametrize("r", [0, 4])
def test_unsupported_degree(r):
    with pytest.raises(ValueError):
        reference_element(r)
    with pytest.raises(ValueError):
        build_space(build_mesh(2), r)


# --- spaces -----------------------------------------------------------------

@pytest.mark.parametrize("m, r, ndof", [(8, 2, 289), (8, 3, 625), (1, 1, 4)])
def test_ndof_examples(m, r, ndof):
    assert build_space(build_mesh(m), r).ndof == ndof


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 3, 6])
def test_dof_sharing_consistent(m, r):
    space = build_space(build_mesh(m), r)
    assert space.ndof == (r * m + 1) ** 2
    # distinct DOFs sit at distinct points, and every DOF is used
    coords = np.round(space.dof_coords * 3 * m).astype(int)
    assert len({tuple(c) for c in coords}) == space.ndof
    assert set(np.unique(space.cell_to_dof)) == set(range(space.ndof))
    # each element's DOF coordinates are the images of the reference nodes
    mapped = space.map_points(space.element.node_coords)
    np.testing.assert_allclose(space.dof_coords[space.cell_to_dof], mapped, atol=1e-14)


def test_jacobians():
    space = build_space(build_mesh(5), 2)
    np.testing.assert_allclose(space.det_jac, 2 * space.mesh.signed_areas(), rtol=1e-13)
    np.testing.assert_allclose(np.einsum("tij,tjk->tik", space.jac, space.inv_jac),
                               np.broadcast_to(np.eye(2), space.jac.shape), atol=1e-13)


# --- fields -----------------------------------------------------------------

def test_interpolate_constant():
    space = build_space(build_mesh(3), 2)
    f = interpolate(space, lambda x, y: 1.0)
    np.testing.assert_array_equal(f.coeffs, 1.0)


def test_interpolate_manufactured_at_origin():
    space = build_space(build_mesh(4), 2)
    f = interpolate(space, lambda x, y: exact_u(x, y, 0.0))
    origin = np.flatnonzero(np.all(space.dof_coords == 0.0, axis=1))
    assert f.coeffs[origin[0]] == pytest.approx(0.25, abs=1e-16)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_polynomial_reproduction(r):
    space = build_space(build_mesh(3), r)
    rule = quadrature_rule(2 * r + 2)

    def poly(x, y):
        return (1.0 + x - 2 * y) ** r + 0.5 * x * y ** (r - 1)

    vals, _ = interpolate(space, poly).eval_all(rule)
    qp = space.map_points(rule.points)
    np.testing.assert_allclose(vals, poly(qp[..., 0], qp[..., 1]), atol=1e-12)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_affine_field_gradients(r):
    space = build_space(build_mesh(4), r)
    rule = quadrature_rule(5)
    field = interpolate(space, lambda x, y: x + 2 * y)
    vals, grads = field.eval_all(rule)
    np.testing.assert_allclose(grads, np.broadcast_to([1.0, 2.0], grads.shape), atol=1e-12)
    for tri in (0, 1, space.mesh.n_triangles - 1):
        v, g = eval_at_quad(field, tri, rule)
        np.testing.assert_allclose(v, vals[tri], atol=1e-14)
        np.testing.assert_allclose(g, grads[tri], atol=1e-14)


def test_affine_value_on_p2():
    space = build_space(build_mesh(3), 2)
    rule = quadrature_rule(6)
    vals, _ = interpolate(space, lambda x, y: x + y).eval_all(rule)
    qp = space.map_points(rule.points)
    np.testing.assert_allclose(vals, qp[..., 0] + qp[..., 1], atol=1e-13)


def test_constant_field():
    space = build_space(build_mesh(2), 3)
    v, g = FeField(space, np.full(space.ndof, 2.5)).eval_at_quad(3, quadrature_rule(4))
    np.testing.assert_allclose(v, 2.5, atol=1e-14)
    np.testing.assert_allclose(g, 0.0, atol=1e-13)


def test_quadratic_gradient_at_centroid():
    space = build_space(build_mesh(4), 2)
    field = interpolate(space, lambda x, y: x**2)
    rule = quadrature_rule(1)
    _, grads = field.eval_all(rule)
    centroids = space.map_points(rule.points)[:, 0, :]
    np.testing.assert_allclose(grads[:, 0, 0], 2 * centroids[:, 0], atol=1e-12)
    np.testing.assert_allclose(grads[:, 0, 1], 0.0, atol=1e-12)


def test_field_length_checked():
    space = build_space(build_mesh(2), 1)
    with pytest.raises(ValueError):
        FeField(space, np.zeros(space.ndof + 1))
    with pytest.raises(IndexError):
        eval_at_quad(FeField(space, np.zeros(space.ndof)), space.mesh.n_triangles, quadrature_rule(1))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_interpolation_rate(r):
    ms = [4, 8, 16]
    errs = []
    for m in ms:
        space = build_space(build_mesh(m), r)
        f = interpolate(space, lambda x, y: exact_u(x, y, 0.0))
        errs.append(l2_error(f, lambda x, y: exact_u(x, y, 0.0), quadrature_rule(2 * r + 4)))
    slope = loglog_slope([np.sqrt(2) / m for m in ms], errs)
    assert abs(slope - (r + 1)) <= 0.25
