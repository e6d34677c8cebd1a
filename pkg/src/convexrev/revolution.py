"""Bodies of revolution: rotational-invariance residuals, axis detection,
the projected-ball axis formula, projection of affine bodies of revolution,
and shadow boundaries.

Rotational symmetry about an axis is measured through support-function orbit
invariance (exact for point clouds) rather than through sections.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .bodies import ConvexBody, GeometryError, Line, Subspace, canonical_direction
from .mvee import canonicalize
from .ops import diameter, project, project_along, support_batch, touch_points
from .sampling import complement_basis, rotations_fixing_axis, sphere_directions

DEGENERATE_FLOOR = 1e-6


@dataclass(frozen=True)
class RevolutionCertificate:
    """Detected axis of revolution with its quality measures.

    ``degenerate`` marks near-ties among axes (balls, ellipsoids of
    revolution with extra symmetry); when it is False the second-best
    distinct axis had at least twice the best residual.  ``hyperplane`` is
    the associated hyperplane of revolution.
    """

    axis: Line
    residual: float
    degenerate: bool
    hyperplane: Subspace

    def to_json_dict(self):
        return {"axis": self.axis.direction.tolist(),
                "residual": self.residual,
                "degenerate": self.degenerate,
                "hyperplane_basis": self.hyperplane.basis.tolist()}


@dataclass(frozen=True)
class ShadowBoundary:
    """Touching points of supporting hyperplanes with normals orthogonal to
    the given direction, plus how planar they are (total-least-squares fit,
    normalized by the body diameter)."""

    points: np.ndarray
    direction: Line
    planarity_residual: float
    normals: np.ndarray = None


def revolution_residual(body, axis, ndirs=128, nrot=6, seed=0, base_point=None):
    """How far the body is from being a body of revolution about the axis.

    max over sampled directions u and sampled rotations R fixing the axis of
    |h(R u) - h(u)|, normalized by the diameter; zero (in the dense-sampling
    limit) exactly when the body is a body of revolution about the axis.
    """
    if isinstance(axis, Line):
        if base_point is None and not axis.is_linear:
            base_point = axis.base_point
        axis_dir = axis.direction
    else:
        axis_dir = np.asarray(axis, dtype=float).reshape(-1)
        axis_dir = axis_dir / np.linalg.norm(axis_dir)
    b = np.zeros(body.dim) if base_point is None else np.asarray(base_point, dtype=float)
    dirs = sphere_directions(body.dim, ndirs, seed=seed)
    h0 = support_batch(body, dirs)
    worst = 0.0
    for rot in rotations_fixing_axis(axis_dir, nrot, seed=seed):
        turned = dirs @ rot  # rows R^T u
        vals = support_batch(body, turned) + dirs @ b - turned @ b
        worst = max(worst, float(np.max(np.abs(vals - h0))))
    return worst / max(diameter(body), 1e-300)


def _orbit_spread(body, axes, n_polar=6, n_azimuth=16, scale=None):
    """Cheap orbit-invariance measure for a batch of candidate axes.

    For each axis, supports are sampled on rings u = cos(psi) a + sin(psi) w
    with w running over the unit sphere of the axis complement; the spread
    max-min over each ring, normalized by the diameter, bounds the deviation
    from rotational symmetry.
    """
    axes = np.atleast_2d(np.asarray(axes, dtype=float))
    k, dim = axes.shape
    psis = np.deg2rad(np.linspace(20.0, 90.0, n_polar))
    if dim == 2:
        ws = np.array([[1.0], [-1.0]])  # O(1) orbit: reflection across the axis
    elif dim == 3:
        phi = 2.0 * np.pi * (np.arange(n_azimuth) + 0.37) / n_azimuth
        ws = np.column_stack([np.cos(phi), np.sin(phi)])
    else:
        ws = sphere_directions(dim - 1, n_azimuth, seed=2)
    n_azimuth = ws.shape[0]
    all_dirs = np.empty((k, n_polar, n_azimuth, dim))
    for i, a in enumerate(axes):
        t = complement_basis(a.reshape(-1, 1))
        tang = ws @ t.T
        for j, psi in enumerate(psis):
            all_dirs[i, j] = np.cos(psi) * a[None, :] + np.sin(psi) * tang
    h = support_batch(body, all_dirs.reshape(-1, dim)).reshape(k, n_polar, n_azimuth)
    spread = (h.max(axis=2) - h.min(axis=2)).max(axis=1)
    if scale is None:
        scale = diameter(body)
    return spread / max(scale, 1e-300)


def revolution_axis(body, accept_tol=1e-3, grid=2000, seed=0, top_k=4,
                    refine_polar=8, refine_azimuth=24,
                    degenerate_floor=DEGENERATE_FLOOR):
    """Search for an axis of revolution of a symmetric body.

    Coarse grid over the projective sphere, local refinement of the leading
    distinct candidates, and a returned certificate; None when no axis
    reaches ``accept_tol``.  Near-ties (balls) are flagged degenerate.
    """
    if not body.symmetric:
        raise GeometryError("axis search expects a symmetric body (axis through origin)")
    dim = body.dim
    scale = diameter(body)
    axes = sphere_directions(dim, grid, seed=seed)
    coarse = _orbit_spread(body, axes, n_polar=5, n_azimuth=12, scale=scale)
    order = np.argsort(coarse)

    # keep the best well-separated coarse cells
    picked = []
    for idx in order:
        a = axes[idx]
        if all(np.arccos(min(1.0, abs(float(a @ b)))) > 0.26 for b in picked):
            picked.append(a)
        if len(picked) >= top_k:
            break

    refined = []
    for a0 in picked:
        t = complement_basis(a0.reshape(-1, 1))

        def objective(xi, _a0=a0, _t=t):
            v = _a0 + _t @ xi
            v = v / np.linalg.norm(v)
            return float(_orbit_spread(body, v[None, :], n_polar=refine_polar,
                                       n_azimuth=refine_azimuth, scale=scale)[0])

        # two-stage refinement: a wide simplex to cross the grid cell, then a
        # tight one for the final digits (NM's default simplex at 0 is tiny)
        xi = np.zeros(dim - 1)
        for simplex_scale, xatol in ((0.12, 1e-5), (2e-3, 1e-10)):
            simplex = np.vstack([xi, xi + simplex_scale * np.eye(dim - 1)])
            res = minimize(objective, xi, method="Nelder-Mead",
                           options={"xatol": xatol, "fatol": 1e-14,
                                    "maxfev": 300 * (dim - 1),
                                    "initial_simplex": simplex})
            xi = res.x
        v = a0 + t @ xi
        refined.append((float(res.fun), v / np.linalg.norm(v)))
    refined.sort(key=lambda item: item[0])

    distinct = []
    for value, a in refined:
        if all(np.arccos(min(1.0, abs(float(a @ b)))) > np.deg2rad(1.0)
               for _v, b in distinct):
            distinct.append((value, a))
    best_val, best_axis = distinct[0]
    if best_val > accept_tol:
        return None
    second_val = distinct[1][0] if len(distinct) > 1 else np.inf
    degenerate = second_val < max(2.0 * best_val, degenerate_floor)
    axis = Line(best_axis)
    residual = revolution_residual(body, axis, seed=seed)
    return RevolutionCertificate(axis=axis, residual=residual, degenerate=degenerate,
                                 hyperplane=Subspace(complement_basis(axis.direction.reshape(-1, 1))))


def affine_revolution_axis(body, accept_tol=1e-3, grid=2000, seed=0,
                           **axis_kwargs):
    """Axis of an affine body of revolution.

    Canonicalizes the body (its MVEE becomes the unit ball, so an affine body
    of revolution becomes an orthogonal one by MVEE equivariance), finds the
    axis there, and maps axis and hyperplane of revolution back through the
    inverse canonicalizing map.
    """
    canon, f, _ = canonicalize(body, seed=seed)
    cert = revolution_axis(canon, accept_tol=accept_tol, grid=grid, seed=seed,
                           **axis_kwargs)
    if cert is None:
        return None
    a_prime = cert.axis.direction
    back = np.linalg.solve(f.matrix, a_prime)
    axis = Line(canonical_direction(back))
    normal = canonical_direction(f.matrix.T @ a_prime)
    hyperplane = Subspace(complement_basis(normal.reshape(-1, 1)))
    return RevolutionCertificate(axis=axis, residual=cert.residual,
                                 degenerate=cert.degenerate, hyperplane=hyperplane)


def predicted_projection_axis(gamma, x, h):
    """Axis of revolution of the shadow of a ball living in the affine
    hyperplane ``gamma`` centered at ``x``, projected orthogonally onto the
    hyperplane subspace ``h``: the line (x + (gamma^perp + h^perp)) meet h.

    Pure linear algebra; the result is the affine line through the projected
    center with direction the projection of gamma's normal onto h.
    """
    dim = gamma.ambient_dim
    if gamma.k != dim - 1 or h.k != dim - 1:
        raise GeometryError("both flats must be hyperplanes")
    if not h.is_linear:
        raise GeometryError("projection target must be a hyperplane subspace")
    x = np.asarray(x, dtype=float).reshape(-1)
    n_g = complement_basis(gamma.basis)[:, 0]
    n_h = complement_basis(h.basis)[:, 0]
    if abs(float((x - gamma.base_point) @ n_g)) > 1e-9 * max(1.0, np.linalg.norm(x)):
        raise GeometryError("center must lie on the source hyperplane")
    direction = n_g - float(n_g @ n_h) * n_h
    if np.linalg.norm(direction) < 1e-10:
        raise GeometryError("parallel flats")
    base = x - float(x @ n_h) * n_h
    return Line(direction=canonical_direction(direction), base_point=base)


def project_revolution(body, axis, direction, parallel_tol=1e-6):
    """Shadow of a body of revolution along ``direction`` together with the
    projection law's prediction: the tag 'ellipsoid' when the axis is
    parallel to the direction, else the projected axis line (in the shadow's
    hyperplane coordinates)."""
    if isinstance(axis, Line):
        axis_line = axis
    else:
        axis_line = Line(np.asarray(axis, dtype=float))
    if isinstance(direction, Line):
        ell = direction.direction
    else:
        ell = np.asarray(direction, dtype=float).reshape(-1)
        ell = ell / np.linalg.norm(ell)
    shadow, frame = project_along(body, ell)
    angle = np.arccos(np.clip(abs(float(axis_line.direction @ ell)), -1.0, 1.0))
    if angle <= parallel_tol:
        return shadow, "ellipsoid"
    dir_coords = frame.basis.T @ axis_line.direction
    base_coords = frame.basis.T @ axis_line.base_point
    return shadow, Line(direction=canonical_direction(dir_coords), base_point=base_coords)


def shadow_boundary(body, direction, ndirs=256, band_frac=1e-4, spread_tol=0.05,
                    seed=0):
    """Boundary points of the body lying on tangent lines parallel to the
    direction, sampled through outer normals orthogonal to it.

    Requires strict convexity to tolerance: if the supporting set for some
    normal has spread above ``spread_tol`` (relative to the diameter), as for
    polytope facets and edges, the operation refuses.
    """
    if isinstance(direction, Line):
        ell_line = direction
        ell = direction.direction
    else:
        ell = np.asarray(direction, dtype=float).reshape(-1)
        ell = ell / np.linalg.norm(ell)
        ell_line = Line(ell)
    frame = complement_basis(ell.reshape(-1, 1))
    ws = sphere_directions(body.dim - 1, ndirs, seed=seed)
    normals = ws @ frame.T
    scale = diameter(body)

    if body.representation == "point-cloud":
        pts = _cloud_touch_strict(body, normals, band_frac, spread_tol, scale)
    elif body.representation == "ellipsoid":
        pts = body.ellipsoid.boundary_touch(normals)
    elif body.oracle is not None:
        pts = _oracle_touch_strict(body, normals, frame, ws, spread_tol, scale)
    else:
        raise GeometryError("shadow boundary needs touch-point data "
                            "(point cloud, ellipsoid, or oracle-backed body)")

    center = pts.mean(axis=0)
    _u, _s, vt = np.linalg.svd(pts - center[None, :], full_matrices=False)
    plane_normal = vt[-1]
    residual = float(np.max(np.abs((pts - center[None, :]) @ plane_normal))) / scale
    return ShadowBoundary(points=pts, direction=ell_line,
                          planarity_residual=residual, normals=normals)


def _cloud_touch_strict(body, normals, band_frac, spread_tol, scale):
    pts = body.points
    dots = pts @ normals.T
    h = dots.max(axis=0)
    band = band_frac * scale
    out = np.empty((normals.shape[0], body.dim))
    worst = 0.0
    for j in range(normals.shape[0]):
        near = np.flatnonzero(dots[:, j] >= h[j] - band)
        top = pts[int(np.argmax(dots[:, j]))]
        if near.size > 1:
            spread = float(np.max(np.linalg.norm(pts[near] - top[None, :], axis=1)))
            worst = max(worst, spread / scale)
            if worst > spread_tol:
                raise GeometryError("shadow boundary is a band")
        out[j] = top
    return out


def _oracle_touch_strict(body, normals, frame, ws, spread_tol, scale):
    _vals, pts = body.oracle(normals)
    # probe each normal a hair along the tangent circle: a jump in the
    # touching point reveals a flat spot (band) in that direction
    eta = 1e-5
    ws2 = np.roll(ws, 1, axis=0)
    tang = ws2 - (np.einsum("ij,ij->i", ws2, ws))[:, None] * ws
    norms = np.linalg.norm(tang, axis=1)
    good = norms > 1e-9
    tang[good] /= norms[good][:, None]
    tang[~good] = 0.0
    probe = (np.cos(eta) * ws + np.sin(eta) * tang) @ frame.T
    _v2, pts2 = body.oracle(probe)
    jump = np.linalg.norm(pts2 - pts, axis=1) / scale
    if float(np.max(jump[good])) > spread_tol:
        raise GeometryError("shadow boundary is a band")
    return pts
