"""Elementary operations on convex bodies: support values, projections,
oblique projections, hyperplane sections, and support-based distances."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .bodies import ConvexBody, Ellipsoid, GeometryError, Line, Subspace
from .sampling import complement_basis, sphere_directions


def support_batch(body, dirs):
    """Support values of the body for each row of ``dirs``.

    Directions need not be unit vectors; the support function is positively
    homogeneous and all representations honor that.
    """
    u = np.atleast_2d(np.asarray(dirs, dtype=float))
    if u.shape[1] != body.dim:
        raise GeometryError("direction dimension mismatch")
    if body.representation == "point-cloud":
        return (body.points @ u.T).max(axis=0)
    if body.representation == "ellipsoid":
        return body.ellipsoid.support(u)
    if body.oracle is not None:
        vals, _ = body.oracle(u)
        return np.asarray(vals, dtype=float)
    return _sample_support_lp(body, u)


def support(body, u):
    """Support value h_K(u) = max_{x in K} <x, u> for a single direction."""
    u = np.asarray(u, dtype=float).reshape(-1)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise GeometryError("direction must be a unit vector")
    return float(support_batch(body, u.reshape(1, -1))[0])


def touch_points(body, dirs):
    """Boundary points attaining the support in each direction.

    For point clouds this is the maximizing point (unique for generic
    directions); for ellipsoids and oracle-backed bodies it is exact.
    """
    u = np.atleast_2d(np.asarray(dirs, dtype=float))
    if body.representation == "point-cloud":
        idx = np.argmax(body.points @ u.T, axis=0)
        return body.points[idx]
    if body.representation == "ellipsoid":
        return body.ellipsoid.boundary_touch(u)
    if body.oracle is not None:
        _, pts = body.oracle(u)
        return np.asarray(pts, dtype=float)
    raise GeometryError("plain support samples carry no touch-point data")


def _sample_support_lp(body, dirs):
    """Support of the outer polyhedron cut out by the stored samples.

    This is the canonical convex-consistent interpolation of a support
    sample: max <x,u> subject to <x, u_i> <= h_i.
    """
    a_ub = body.sample_dirs
    b_ub = body.sample_values
    out = np.empty(dirs.shape[0])
    for i, u in enumerate(dirs):
        res = linprog(-u, A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * body.dim,
                      method="highs")
        if res.status == 3:
            raise GeometryError("support sample does not bound this direction")
        if not res.success:
            raise GeometryError(f"support interpolation failed: {res.message}")
        out[i] = -res.fun
    return out


def to_point_cloud(body, ndirs=None, seed=0):
    """Explicit conversion to a point-cloud body.

    Support samples convert through their boundary touch points when known
    (exact for oracle-backed bodies) and through the radial points h(u) u
    otherwise; the accuracy loss is bounded by the sample density.
    """
    if body.representation == "point-cloud":
        return body
    if body.representation == "ellipsoid":
        dirs = sphere_directions(body.dim, ndirs or 64 * body.dim, seed=seed)
        pts = body.ellipsoid.boundary_touch(dirs)
        return ConvexBody.from_points(pts, symmetric=False, meta=dict(body.meta))
    if body.oracle is not None and ndirs is not None:
        dirs = sphere_directions(body.dim, ndirs, seed=seed)
        _, pts = body.oracle(dirs)
    elif body.sample_touch is not None:
        pts = body.sample_touch
    else:
        pts = body.sample_values[:, None] * body.sample_dirs
    if body.symmetric:
        pts = np.vstack([pts, -pts])
    return ConvexBody.from_points(pts, symmetric=body.symmetric, meta=dict(body.meta))


def linear_image(body, matrix, translation=None):
    """Image of the body under x -> M x + t for M with full row rank.

    M may be rectangular (k x d with k <= d), in which case the image lives
    in R^k.  Point clouds map exactly; ellipsoids map in closed form; oracle
    bodies map by composing the oracle.
    """
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    k, d = m.shape
    if d != body.dim or k > d:
        raise GeometryError("matrix shape incompatible with body dimension")
    if np.linalg.matrix_rank(m, tol=1e-12) < k:
        raise GeometryError("image map must have full row rank")
    t = np.zeros(k) if translation is None else np.asarray(translation, dtype=float)
    sym = body.symmetric and np.linalg.norm(t) <= 1e-14

    if body.representation == "point-cloud":
        return ConvexBody.from_points(body.points @ m.T + t, symmetric=sym)
    if body.representation == "ellipsoid":
        e = body.ellipsoid
        cov = m @ e.inverse_shape() @ m.T
        new = Ellipsoid(center=m @ e.center + t, shape=np.linalg.inv(cov))
        return ConvexBody(dim=k, representation="ellipsoid",
                          symmetric=sym, ellipsoid=new)
    if body.oracle is not None:
        inner = body.oracle

        def mapped(dirs, _m=m, _t=t, _inner=inner):
            u = np.atleast_2d(np.asarray(dirs, dtype=float))
            vals, pts = _inner(u @ _m)
            return vals + u @ _t, pts @ _m.T + _t[None, :]

        return ConvexBody.from_support_oracle(k, mapped, symmetric=sym)
    # plain sample: resample a fresh direction set in the image space
    dirs = sphere_directions(k, max(body.sample_dirs.shape[0], 32 * k), seed=1)
    vals = support_batch(body, dirs @ m) + dirs @ t
    return ConvexBody(dim=k, representation="support-sample", symmetric=sym,
                      sample_dirs=dirs, sample_values=vals)


def translate(body, t):
    return linear_image(body, np.eye(body.dim), t)


def project(body, subspace):
    """Orthogonal shadow of the body in the given linear subspace, expressed
    in that subspace's basis coordinates."""
    if isinstance(subspace, Line):
        subspace = subspace.as_subspace()
    if not subspace.is_linear:
        raise GeometryError("projection target must be a linear subspace")
    if subspace.ambient_dim != body.dim:
        raise GeometryError("subspace ambient dimension mismatch")
    if subspace.k == body.dim:
        raise GeometryError("projection onto full space")
    return linear_image(body, subspace.basis.T)


def project_along(body, direction):
    """Shadow of the body on the hyperplane orthogonal to ``direction``,
    returned together with the hyperplane subspace used as its frame."""
    direction = np.asarray(direction, dtype=float).reshape(-1)
    basis = complement_basis(direction.reshape(-1, 1) / np.linalg.norm(direction))
    sub = Subspace(basis)
    return project(body, sub), sub


def oblique_project(body, line, hyperplane):
    """Image of the body under the linear projector onto ``hyperplane`` with
    kernel ``line``, in hyperplane coordinates.

    Realizes (K + line) intersected with the hyperplane.  Coincides with
    ``project`` when the line is orthogonal to the hyperplane.
    """
    if isinstance(line, Line):
        v = line.direction
    else:
        v = np.asarray(line, dtype=float).reshape(-1)
        v = v / np.linalg.norm(v)
    if hyperplane.k != body.dim - 1 or hyperplane.ambient_dim != body.dim:
        raise GeometryError("oblique target must be a hyperplane subspace")
    if not hyperplane.is_linear:
        raise GeometryError("oblique target must be linear")
    n = complement_basis(hyperplane.basis)[:, 0]
    vn = float(np.dot(v, n))
    if abs(vn) < 1e-10:
        raise GeometryError("degenerate oblique direction")
    proj = np.eye(body.dim) - np.outer(v, n) / vn
    return linear_image(body, hyperplane.basis.T @ proj)


@dataclass(frozen=True)
class SliceResult:
    """Section of a body by an affine hyperplane; ``kind`` is one of
    'body', 'point', 'empty' (degenerate sections are tagged, not errors)."""

    kind: str
    body: ConvexBody = None
    point: np.ndarray = None


def slice_body(body, hyperplane, rays=180, seed=0, tol=1e-9):
    """Section K with an affine hyperplane, in hyperplane coordinates.

    Exact for ellipsoids.  For point clouds the section is approximated by
    ray-shooting from an interior point of the section, with LP membership
    in the hull; ``rays`` controls the resolution.
    """
    if hyperplane.k != body.dim - 1 or hyperplane.ambient_dim != body.dim:
        raise GeometryError("slice needs an affine hyperplane")
    if body.representation == "ellipsoid":
        return _slice_ellipsoid(body.ellipsoid, hyperplane, tol)
    if body.representation == "support-sample":
        cloud = to_point_cloud(body, ndirs=96 * body.dim, seed=seed)
        return slice_body(cloud, hyperplane, rays=rays, seed=seed, tol=tol)
    return _slice_cloud(body, hyperplane, rays, seed, tol)


def _slice_ellipsoid(e, hyperplane, tol):
    b = hyperplane.basis
    p = hyperplane.base_point
    rel = p - e.center
    a = b.T @ e.shape @ b
    g = b.T @ e.shape @ rel
    gamma = float(rel @ e.shape @ rel)
    y0 = -np.linalg.solve(a, g)
    rho = 1.0 - gamma - float(g @ y0)
    if rho < -tol:
        return SliceResult(kind="empty")
    if rho <= tol:
        return SliceResult(kind="point", point=hyperplane.from_coords(y0)[0])
    section = Ellipsoid(center=y0, shape=a / rho)
    return SliceResult(kind="body", body=ConvexBody.from_ellipsoid(section))


def _slice_cloud(body, hyperplane, rays, seed, tol):
    pts = body.points
    n_pts, dim = pts.shape
    b = hyperplane.basis
    p = hyperplane.base_point
    k = dim - 1
    central = body.symmetric and np.linalg.norm(p - b @ (b.T @ p)) <= 1e-12
    if central:
        # the origin is interior to a symmetric body, so it is a valid
        # ray-shooting center; mirrored rays keep the output negation-closed
        y0 = -(b.T @ p)
        x0 = np.zeros(dim)
    else:
        found = _section_interior_point(pts, b, p)
        if found is None:
            return SliceResult(kind="empty")
        y0, x0, margin = found
        if margin <= 1e-12:
            return SliceResult(kind="point", point=x0)
    half = rays // 2 if central else rays
    dirs = sphere_directions(k, max(half, 3), seed=seed)
    boundary = np.empty((dirs.shape[0], k))
    max_t = 0.0
    for i, w in enumerate(dirs):
        t = _max_step_inside(pts, x0, b @ w)
        if t is None:
            return SliceResult(kind="point", point=x0)
        boundary[i] = y0 + t * w
        max_t = max(max_t, t)
    if max_t <= tol:
        return SliceResult(kind="point", point=x0)
    if central:
        boundary = np.vstack([boundary, 2.0 * y0 - boundary])
        sym = bool(np.linalg.norm(y0) <= 1e-14)
    else:
        sym = False
    return SliceResult(kind="body", body=ConvexBody.from_points(boundary, symmetric=sym))


def _section_interior_point(pts, b, p):
    """Point of conv(pts) on the affine hyperplane maximizing the minimum
    barycentric weight; None when the hyperplane misses the hull."""
    n_pts, dim = pts.shape
    k = b.shape[1]
    n_var = n_pts + k + 1  # lambdas, y, s
    c = np.zeros(n_var)
    c[-1] = -1.0
    a_eq = np.zeros((dim + 1, n_var))
    a_eq[:dim, :n_pts] = pts.T
    a_eq[:dim, n_pts:n_pts + k] = -b
    a_eq[dim, :n_pts] = 1.0
    b_eq = np.concatenate([p, [1.0]])
    a_ub = np.zeros((n_pts, n_var))
    a_ub[:, :n_pts] = -np.eye(n_pts)
    a_ub[:, -1] = 1.0
    bounds = [(0, None)] * n_pts + [(None, None)] * k + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(n_pts), A_eq=a_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status == 2:
        return None
    if not res.success:
        raise GeometryError(f"section membership LP failed: {res.message}")
    y0 = res.x[n_pts:n_pts + k]
    return y0, p + b @ y0, -res.fun


def _max_step_inside(pts, x0, d):
    """max t with x0 + t d inside conv(pts); None if x0 itself is outside."""
    n_pts = pts.shape[0]
    c = np.zeros(n_pts + 1)
    c[-1] = -1.0
    a_eq = np.zeros((pts.shape[1] + 1, n_pts + 1))
    a_eq[:-1, :n_pts] = pts.T
    a_eq[:-1, -1] = -d
    a_eq[-1, :n_pts] = 1.0
    b_eq = np.concatenate([x0, [1.0]])
    res = linprog(c, A_eq=a_eq, b_eq=b_eq,
                  bounds=[(0, None)] * n_pts + [(0, None)], method="highs")
    if not res.success:
        return None
    return -res.fun


def support_distance(body_a, body_b, dirs):
    """max over the given directions of |h_A(u) - h_B(u)|; approaches the
    Hausdorff distance as the direction set grows dense."""
    if body_a.dim != body_b.dim:
        raise GeometryError("dimension mismatch")
    u = np.atleast_2d(np.asarray(dirs, dtype=float))
    if u.shape[0] == 0:
        raise GeometryError("direction set is empty")
    return float(np.max(np.abs(support_batch(body_a, u) - support_batch(body_b, u))))


def diameter(body, ndirs=256, seed=0):
    """Diameter of the body.

    Exact for symmetric bodies (2 max ||x||) and for point clouds (max
    pairwise distance); support-based estimate otherwise.
    """
    if body.representation == "point-cloud":
        pts = body.points
        if body.symmetric:
            return 2.0 * float(np.max(np.linalg.norm(pts, axis=1)))
        if pts.shape[0] <= 1024:
            diff = pts[:, None, :] - pts[None, :, :]
            return float(np.sqrt((diff ** 2).sum(axis=2).max()))
    if body.representation == "ellipsoid":
        vals = np.linalg.eigvalsh(body.ellipsoid.shape)
        return 2.0 / float(np.sqrt(vals[0]))
    dirs = sphere_directions(body.dim, ndirs, seed=seed)
    h = support_batch(body, dirs)
    hm = support_batch(body, -dirs)
    return float(np.max(h + hm))
