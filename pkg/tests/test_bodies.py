import numpy as np
import pytest

from convexrev.bodies import (AffineMap, ConvexBody, Ellipsoid, GeometryError,
                              Line, Subspace, canonical_direction)


def cube_points(dim=3):
    grid = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim))).reshape(dim, -1).T
    return grid


def test_point_cloud_needs_full_dimension():
    with pytest.raises(GeometryError, match="degenerate body"):
        ConvexBody.from_points(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(GeometryError, match="degenerate body"):
        ConvexBody.from_points(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                                         [0.0, 1.0, 0.0]]))


def test_symmetric_flag_requires_negation_closure():
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    ConvexBody.from_points(pts, symmetric=True)
    with pytest.raises(GeometryError, match="negation"):
        ConvexBody.from_points(pts + np.array([0.25, 0.0]), symmetric=True)


def test_nonfinite_values_rejected():
    pts = cube_points()
    pts[0, 0] = np.nan
    with pytest.raises(GeometryError, match="non-finite"):
        ConvexBody.from_points(pts)
    with pytest.raises(GeometryError):
        Ellipsoid(np.array([0.0, np.inf]), np.eye(2))


def test_support_sample_validation():
    dirs = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    vals = np.ones(4)
    body = ConvexBody(dim=2, representation="support-sample", symmetric=True,
                      sample_dirs=dirs, sample_values=vals)
    assert body.sample_values.shape == (4,)
    with pytest.raises(GeometryError, match="unit"):
        ConvexBody(dim=2, representation="support-sample",
                   sample_dirs=2.0 * dirs, sample_values=vals)


def test_ellipsoid_invariants():
    with pytest.raises(GeometryError, match="symmetric"):
        Ellipsoid(np.zeros(2), np.array([[1.0, 0.5], [0.1, 1.0]]))
    with pytest.raises(GeometryError, match="positive definite"):
        Ellipsoid(np.zeros(2), np.diag([1.0, -2.0]))
    e = Ellipsoid(np.zeros(3), np.diag([1.0, 4.0, 0.25]))
    vol_ball = Ellipsoid(np.zeros(3), np.eye(3)).volume()
    assert e.volume() == pytest.approx(vol_ball / np.sqrt(np.linalg.det(e.shape)))


def test_json_round_trip_all_representations(tmp_path):
    bodies = [
        ConvexBody.from_points(cube_points(), symmetric=True),
        ConvexBody.from_ellipsoid(Ellipsoid(np.array([0.1, -0.2]), np.diag([1.0, 2.0]))),
        ConvexBody(dim=2, representation="support-sample", symmetric=True,
                   sample_dirs=np.array([[1.0, 0], [0, 1.0], [-1.0, 0], [0, -1.0]]),
                   sample_values=np.ones(4),
                   sample_touch=np.array([[1.0, 0], [0, 1.0], [-1.0, 0], [0, -1.0]])),
    ]
    for i, body in enumerate(bodies):
        path = tmp_path / f"body{i}.json"
        body.save(path)
        back = ConvexBody.load(path)
        assert back.dim == body.dim
        assert back.representation == body.representation
        assert back.symmetric == body.symmetric
    # readers reject non-finite payloads
    bad = bodies[0].to_json_dict()
    bad["points"][0][0] = float("nan")
    with pytest.raises(GeometryError):
        ConvexBody.from_json_dict(bad)


def test_affine_map_algebra():
    rng = np.random.default_rng(3)
    a = AffineMap(rng.standard_normal((3, 3)) + 3 * np.eye(3), rng.standard_normal(3))
    b = AffineMap(rng.standard_normal((3, 3)) + 3 * np.eye(3), rng.standard_normal(3))
    x = rng.standard_normal((5, 3))
    ab = a.compose(b)
    assert np.allclose(ab.apply(x), a.apply(b.apply(x)), atol=1e-12)
    ident = a.compose(a.inverse())
    assert np.allclose(ident.matrix, np.eye(3), atol=1e-12)
    assert np.allclose(ident.translation, 0.0, atol=1e-12)
    with pytest.raises(GeometryError, match="singular"):
        AffineMap(np.zeros((2, 2)))


def test_subspace_orthonormality_and_coords():
    with pytest.raises(GeometryError, match="orthonormal"):
        Subspace(np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]))
    s = Subspace(np.eye(3)[:, :2], base_point=np.array([0.0, 0.0, 1.0]))
    x = np.array([0.3, -0.5, 1.0])
    y = s.to_coords(x)[0]
    assert np.allclose(s.from_coords(y)[0], x)
    assert np.allclose(s.project_point(np.array([0.3, -0.5, 7.0])), x)


def test_line_sign_canonicalization():
    line = Line(np.array([0.0, -2.0, 0.0]))
    assert np.allclose(line.direction, [0.0, 1.0, 0.0])
    assert line.angle_to(Line(np.array([0.0, 1.0, 1.0]))) == pytest.approx(np.pi / 4)
    with pytest.raises(GeometryError, match="zero"):
        canonical_direction(np.zeros(3))
