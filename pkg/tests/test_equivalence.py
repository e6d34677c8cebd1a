import numpy as np
import pytest
from scipy.stats import special_ortho_group

from convexrev.bodies import ConvexBody, Ellipsoid, GeometryError
from convexrev.equivalence import (affine_equivalent, central_symmetry_center,
                                   dense_orthogonal_residual, linear_equivalent)
from convexrev.ops import support_batch, support_distance
from convexrev.sampling import child_rng, random_invertible, sphere_directions


def cube(dim=3):
    grid = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim))).reshape(dim, -1).T
    return ConvexBody.from_points(grid, symmetric=True)


def cross(dim=3):
    return ConvexBody.from_points(np.vstack([np.eye(dim), -np.eye(dim)]), symmetric=True)


# -- central symmetry ---------------------------------------------------------


def test_center_of_symmetric_polytope():
    c, resid = central_symmetry_center(cross())
    assert np.linalg.norm(c) <= 1e-10
    assert resid <= 1e-10


def test_center_of_translated_ball():
    t = np.array([0.7, -0.3, 0.2])
    body = ConvexBody.from_ellipsoid(Ellipsoid(t, np.eye(3)))
    c, resid = central_symmetry_center(body)
    assert np.linalg.norm(c - t) <= 1e-8
    assert resid <= 1e-8


def test_triangle_is_not_centrally_symmetric():
    tri = ConvexBody.from_points(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    c, resid = central_symmetry_center(tri)
    assert resid > 0.05
    # grid-search oracle over candidate centers inside the triangle
    dirs = sphere_directions(2, 256, seed=0)
    odd = support_batch(tri, dirs) - support_batch(tri, -dirs)
    best = np.inf
    for a in np.linspace(0.0, 1.0, 41):
        for b in np.linspace(0.0, 1.0 - a, max(int(41 * (1 - a)), 1)):
            cand = np.array([a, b])
            best = min(best, float(np.max(np.abs(odd - 2.0 * dirs @ cand))))
    assert best > 0.05
    assert resid <= best + 1e-9


# -- linear equivalence -------------------------------------------------------


def test_planted_rotation_recovered():
    rng = child_rng(31, 0)
    rot = special_ortho_group.rvs(3, random_state=rng)
    rotated = ConvexBody.from_points(cube().points @ rot.T, symmetric=True)
    verdict = linear_equivalent(cube(), rotated, seed=4)
    assert verdict.equivalent
    assert verdict.residual <= 1e-6
    # the witness maps the cube onto the rotated cube (up to cube symmetry)
    image = ConvexBody.from_points(verdict.witness.apply(cube().points), symmetric=True)
    dirs = sphere_directions(3, 256, seed=1)
    assert support_distance(image, rotated, dirs) <= 1e-6


def test_ball_vs_centered_ellipsoid():
    ball = ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), np.eye(3)))
    ell = ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), np.diag([0.2, 1.0, 5.0])))
    verdict = linear_equivalent(ball, ell, seed=4)
    assert verdict.equivalent and verdict.residual <= 1e-6


def test_cube_vs_cross_polytope_inequivalent():
    oracle = dense_orthogonal_residual(cube(), cross(), samples=100000, seed=3)
    assert oracle >= 0.15
    verdict = linear_equivalent(cube(), cross(), seed=4)
    assert not verdict.equivalent
    assert verdict.residual >= 0.15
    assert verdict.restarts_used == 50


def test_witness_inner_matrix_is_orthogonal():
    rng = child_rng(32, 0)
    a = random_invertible(3, rng, cond_max=20.0)
    other = ConvexBody.from_points(cube().points @ a.T, symmetric=True)
    from convexrev.mvee import canonicalize

    verdict = linear_equivalent(cube(), other, seed=4)
    _, f1, _ = canonicalize(cube())
    _, f2, _ = canonicalize(other)
    inner = f2.matrix @ verdict.witness.matrix @ np.linalg.inv(f1.matrix)
    assert np.max(np.abs(inner.T @ inner - np.eye(3))) <= 1e-8


def test_reflexivity_and_symmetry_of_verdicts():
    verdict = linear_equivalent(cube(), cube(), seed=4)
    assert verdict.equivalent and verdict.residual <= 1e-10
    v12 = linear_equivalent(cube(), cross(), seed=4, restarts=12)
    v21 = linear_equivalent(cross(), cube(), seed=4, restarts=12)
    assert v12.equivalent == v21.equivalent


def test_dimension_mismatch_rejected():
    with pytest.raises(GeometryError, match="dimension"):
        linear_equivalent(cube(3), cube(4))


def test_verdict_invariant_under_preapplied_affine():
    rng = child_rng(33, 0)
    a = random_invertible(3, rng, cond_max=50.0)
    mapped = ConvexBody.from_points(cross().points @ a.T, symmetric=True)
    v_base = linear_equivalent(cube(), cross(), seed=4, restarts=16)
    v_mapped = linear_equivalent(cube(), mapped, seed=4, restarts=16)
    assert v_base.equivalent == v_mapped.equivalent


# -- affine equivalence -------------------------------------------------------


def test_planted_affine_image_recovered():
    rng = child_rng(34, 0)
    a = random_invertible(3, rng, cond_max=20.0)
    t = rng.normal(size=3)
    image = ConvexBody.from_points(cube().points @ a.T + t)
    verdict = affine_equivalent(cube(), image, seed=4)
    assert verdict.equivalent and verdict.residual <= 1e-5
    mapped = verdict.witness.apply(cube().points)
    dirs = sphere_directions(3, 256, seed=2)
    got = (mapped @ dirs.T).max(axis=0)
    want = support_batch(image, dirs)
    assert np.max(np.abs(got - want)) <= 1e-5


def test_translated_ball_vs_ellipsoid():
    ball = ConvexBody.from_ellipsoid(Ellipsoid(np.array([0.4, -0.1, 0.9]), np.eye(3)))
    ell = ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), np.diag([0.5, 1.0, 2.0])))
    verdict = affine_equivalent(ball, ell, seed=4)
    assert verdict.equivalent and verdict.residual <= 1e-6


def test_square_vs_triangle_inequivalent():
    square = ConvexBody.from_points(np.array([[1.0, 1.0], [1.0, -1.0],
                                              [-1.0, 1.0], [-1.0, -1.0]]),
                                    symmetric=True)
    triangle = ConvexBody.from_points(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    oracle = dense_orthogonal_residual(
        _centered(square), _centered(triangle), samples=100000, seed=5)
    assert oracle >= 0.1
    verdict = affine_equivalent(square, triangle, seed=4)
    assert not verdict.equivalent
    assert verdict.residual >= 0.1


def _centered(body):
    from convexrev.equivalence import _reference_point
    from convexrev.ops import linear_image

    c = _reference_point(body)
    return linear_image(body, np.eye(body.dim), -c)


def test_canonical_reduction_soundness_smoke():
    # planting a linear map must always be recoverable by an orthogonal one
    rng = child_rng(35, 0)
    for dim in (2, 3, 4):
        for trial in range(3):
            pts = rng.standard_normal((3 * dim, dim))
            body = ConvexBody.from_points(np.vstack([pts, -pts]), symmetric=True)
            a = random_invertible(dim, rng, cond_max=10.0)
            image = ConvexBody.from_points(body.points @ a.T, symmetric=True)
            verdict = linear_equivalent(body, image, seed=trial)
            assert verdict.equivalent, (dim, trial, verdict.residual)
