import itertools

import numpy as np
import pytest

from convexrev.bodies import ConvexBody, Ellipsoid, GeometryError
from convexrev.mvee import canonicalize, is_ellipsoid, mvee, mvee_of_body
from convexrev.ops import linear_image, support_batch, support_distance
from convexrev.sampling import child_rng, random_invertible, sphere_directions

EPS = 1e-7


def cube(dim=3):
    grid = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim))).reshape(dim, -1).T
    return ConvexBody.from_points(grid, symmetric=True)


def test_cross_polytope_gives_unit_ball():
    pts = np.vstack([np.eye(3), -np.eye(3)])
    res = mvee(pts, eps=EPS, centered=True)
    assert np.allclose(res.ellipsoid.shape, np.eye(3), atol=1e-9)
    assert res.dual_gap <= EPS


def brute_force_min_ellipse(points, grid=40):
    """Smallest-volume centered ellipse containing the points, over a grid of
    shape matrices [[a, b], [b, c]]; volume ~ 1/sqrt(det)."""
    best = None
    for a in np.linspace(0.05, 1.2, grid):
        for c in np.linspace(0.05, 1.2, grid):
            for b in np.linspace(-0.5, 0.5, grid):
                det = a * c - b * b
                if det <= 1e-9:
                    continue
                q = np.array([[a, b], [b, c]])
                quad = np.einsum("ij,jk,ik->i", points, q, points)
                if np.max(quad) <= 1.0:
                    vol = 1.0 / np.sqrt(det)
                    if best is None or vol < best:
                        best = vol
    return best


def test_square_gives_disk_sqrt2():
    verts = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    res = mvee(verts, eps=EPS, centered=True)
    assert np.allclose(res.ellipsoid.shape, np.eye(2) / 2.0, atol=1e-8)
    assert res.dual_gap <= EPS
    # John optimality cross-checked against the brute-force ellipse grid
    oracle_vol = brute_force_min_ellipse(verts)
    got_vol = 1.0 / np.sqrt(np.linalg.det(res.ellipsoid.shape))
    assert got_vol <= oracle_vol * (1.0 + 1e-6)


def test_monotone_volume_against_oracle():
    rng = child_rng(21, 0)
    for trial in range(6):
        n = int(rng.integers(3, 9))
        pts = rng.standard_normal((n, 2))
        pts = np.vstack([pts, -pts])
        res = mvee(pts, eps=EPS, centered=True)
        got_vol = 1.0 / np.sqrt(np.linalg.det(res.ellipsoid.shape))
        oracle_vol = brute_force_min_ellipse(pts / np.abs(pts).max())
        if oracle_vol is None:
            continue
        oracle_vol *= np.abs(pts).max() ** 2
        assert got_vol <= oracle_vol * (1.0 + 1e-4)


def test_affine_equivariance_of_cross_polytope():
    rng = child_rng(22, 0)
    pts = np.vstack([np.eye(3), -np.eye(3)])
    a = random_invertible(3, rng, cond_max=20.0)
    fitted = mvee(pts @ a.T, eps=EPS, centered=True).ellipsoid
    mapped = linear_image(ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), np.eye(3))), a)
    dirs = sphere_directions(3, 500, seed=7)
    d = support_distance(ConvexBody.from_ellipsoid(fitted), mapped, dirs)
    assert d <= 1e-5


def test_containment_and_john_shrink():
    rng = child_rng(23, 0)
    for dim in (3, 4):
        pts = rng.standard_normal((20, dim))
        cloud = np.vstack([pts, -pts])
        res = mvee(cloud, eps=EPS, centered=True)
        e = res.ellipsoid
        quad = np.einsum("ij,jk,ik->i", cloud, e.shape, cloud)
        assert np.max(quad) <= 1.0 + EPS * (dim + 1) / dim + 1e-12
        dirs = sphere_directions(dim, 500, seed=dim)
        h_e = e.support(dirs)
        h_k = (cloud @ dirs.T).max(axis=0)
        assert np.min(h_k - h_e / np.sqrt(dim)) >= -1e-6


def test_general_mvee_with_center():
    rng = child_rng(24, 0)
    pts = rng.standard_normal((25, 3)) + np.array([2.0, -1.0, 0.5])
    res = mvee(pts, eps=EPS, centered=False)
    e = res.ellipsoid
    quad = np.einsum("ij,jk,ik->i", pts - e.center, e.shape, pts - e.center)
    assert np.max(quad) <= 1.0 + EPS * 2
    assert res.dual_gap <= EPS


def test_degenerate_points_rejected():
    flat = np.array([[1.0, 0.0], [2.0, 0.0], [-1.0, 0.0], [-2.0, 0.0]])
    with pytest.raises(GeometryError, match="points do not span"):
        mvee(flat, centered=True)


def test_canonicalize_examples():
    b = ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), np.eye(3)))
    image, f, _ = canonicalize(b)
    assert np.allclose(f.matrix, np.eye(3), atol=1e-9)

    q = np.diag([4.0, 1.0, 0.25])
    e = ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), q))
    image, f, _ = canonicalize(e)
    assert np.allclose(f.matrix, np.diag(np.sqrt(np.diag(q))), atol=1e-9)
    assert np.allclose(image.ellipsoid.shape, np.eye(3), atol=1e-9)

    image, f, res = canonicalize(cube())
    assert np.allclose(np.linalg.norm(image.points, axis=1), 1.0, atol=1e-6)
    assert res.dual_gap <= EPS


def test_canonicalize_idempotent():
    rng = child_rng(25, 0)
    for dim in (2, 3):
        pts = rng.standard_normal((12, dim))
        body = ConvexBody.from_points(np.vstack([pts, -pts]), symmetric=True)
        first, _, _ = canonicalize(body)
        _, second_map, _ = canonicalize(first)
        w = second_map.matrix
        assert np.max(np.abs(w.T @ w - np.eye(dim))) <= 1e-5


def test_is_ellipsoid_examples():
    b = ConvexBody.from_ellipsoid(Ellipsoid(np.zeros(3), np.eye(3)))
    ok, resid = is_ellipsoid(b)
    assert ok and resid <= 1e-8

    rng = child_rng(26, 0)
    a = random_invertible(3, rng, cond_max=10.0)
    cloud = to_cloud_of_ball(a)
    ok, resid = is_ellipsoid(cloud, tol=1e-2)
    assert ok and resid <= 1e-2

    verdict, resid = is_ellipsoid(cube())
    # closed form: the MVEE is the sqrt(3)-ball and the worst relative gap,
    # attained at +-e_i, equals 1 - 1/sqrt(3)
    exact = 1.0 - 1.0 / np.sqrt(3.0)
    assert not verdict
    assert 0.8 * exact <= resid <= exact + 1e-9


def to_cloud_of_ball(a, n=400):
    dirs = sphere_directions(3, n, seed=5)
    return ConvexBody.from_points(dirs @ a.T, symmetric=False)


def test_is_ellipsoid_scale_free():
    verdict1, r1 = is_ellipsoid(cube())
    big = ConvexBody.from_points(cube().points * 1000.0, symmetric=True)
    verdict2, r2 = is_ellipsoid(big)
    assert verdict1 == verdict2
    assert r1 == pytest.approx(r2, rel=1e-6)


def test_ill_conditioned_flag():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1e-5], [0.0, -1e-5]])
    res = mvee(pts, eps=EPS, centered=True)
    assert res.ill_conditioned


def test_oracle_body_mvee_encloses_true_body():
    from convexrev.generators import gen_body

    body = gen_body({"kind": "revolution", "dim": 3,
                     "profile": {"type": "piecewise-linear",
                                 "knots_t": [0.0, 2.0], "knots_r": [1.0, 0.0]}}, seed=0)
    res = mvee_of_body(body, eps=1e-6)
    dirs = sphere_directions(3, 4000, seed=9)
    h_body = support_batch(body, dirs)
    h_e = res.ellipsoid.support(dirs)
    scale = float(np.max(h_body))
    assert np.max(h_body - h_e) <= 1e-6 * scale * 1.01
