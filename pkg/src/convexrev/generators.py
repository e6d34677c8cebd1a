"""Deterministic instance factory for all suites.

A descriptor (dict or ``kind:dim`` shorthand) plus a seed fully determines the
generated body.  Bodies of revolution come in two flavors: exact
hull-of-spheres oracles for piecewise-linear radius profiles, and smooth
strictly convex spheroid-sum oracles; both expose exact support values and
touch points.  Planted construction data (axis, applied map) rides along in
``body.meta``.
"""

import hashlib
import json

import numpy as np

from .bodies import ConvexBody, Ellipsoid, GeometryError, Line, canonical_direction
from .ops import linear_image
from .sampling import child_rng, complement_basis, random_invertible, sphere_directions

_KINDS = ("ball", "ellipsoid", "cube", "cross-polytope", "random-symmetric-polytope",
          "revolution", "affine-image")


def _spec_entropy(spec):
    blob = json.dumps(spec, sort_keys=True, separators=(",", ":")).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:6], "big")


def _spec_rng(spec, seed):
    return child_rng(seed, _spec_entropy(spec))


def parse_descriptor(text):
    """Shorthand 'kind:dim' or a JSON object string."""
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    if ":" in text:
        kind, _, dim = text.partition(":")
        return {"kind": kind.strip(), "dim": int(dim)}
    return {"kind": text}


def gen_body(spec, seed=0):
    """Deterministic convex body for (descriptor, seed)."""
    if isinstance(spec, str):
        spec = parse_descriptor(spec)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise GeometryError("descriptor must be a dict with a 'kind' field")
    kind = spec["kind"]
    if kind not in _KINDS:
        raise GeometryError(f"unknown generator kind {kind!r}")
    builder = {
        "ball": _gen_ball,
        "ellipsoid": _gen_ellipsoid,
        "cube": _gen_cube,
        "cross-polytope": _gen_cross,
        "random-symmetric-polytope": _gen_random_polytope,
        "revolution": _gen_revolution,
        "affine-image": _gen_affine_image,
    }[kind]
    return builder(spec, seed)


def _dim_of(spec, default=3):
    dim = int(spec.get("dim", default))
    if dim < 2:
        raise GeometryError("descriptor field 'dim' must be >= 2")
    return dim


def _gen_ball(spec, seed):
    dim = _dim_of(spec)
    radius = float(spec.get("radius", 1.0))
    if radius <= 0:
        raise GeometryError("descriptor field 'radius' must be positive")
    e = Ellipsoid(np.zeros(dim), np.eye(dim) / radius ** 2)
    return ConvexBody.from_ellipsoid(e, meta={"spec": dict(spec)})


def _gen_ellipsoid(spec, seed):
    dim = _dim_of(spec)
    if "shape" in spec:
        shape = np.asarray(spec["shape"], dtype=float)
    elif "semi_axes" in spec:
        s = np.asarray(spec["semi_axes"], dtype=float)
        if s.shape != (dim,) or np.any(s <= 0):
            raise GeometryError("descriptor field 'semi_axes' must be dim positive values")
        shape = np.diag(1.0 / s ** 2)
        if spec.get("rotate", False):
            rng = _spec_rng(spec, seed)
            from .sampling import random_rotation

            rot = random_rotation(dim, rng)
            shape = rot @ shape @ rot.T
    else:
        rng = _spec_rng(spec, seed)
        m = random_invertible(dim, rng, cond_max=float(spec.get("cond", 10.0)))
        shape = np.linalg.inv(m @ m.T)
    center = np.asarray(spec.get("center", np.zeros(dim)), dtype=float)
    return ConvexBody.from_ellipsoid(Ellipsoid(center, shape), meta={"spec": dict(spec)})


def _gen_cube(spec, seed):
    dim = _dim_of(spec)
    if dim > 12:
        raise GeometryError("descriptor field 'dim' too large for explicit cube vertices")
    grid = np.array(np.meshgrid(*([[-1.0, 1.0]] * dim))).reshape(dim, -1).T
    return ConvexBody.from_points(grid, symmetric=True, meta={"spec": dict(spec)})


def _gen_cross(spec, seed):
    dim = _dim_of(spec)
    pts = np.vstack([np.eye(dim), -np.eye(dim)])
    return ConvexBody.from_points(pts, symmetric=True, meta={"spec": dict(spec)})


def _gen_random_polytope(spec, seed):
    dim = _dim_of(spec)
    m = int(spec.get("points", 8 * dim))
    if m < dim + 1:
        raise GeometryError("descriptor field 'points' must be at least dim + 1")
    rng = _spec_rng(spec, seed)
    half = rng.standard_normal((m, dim))
    half /= np.max(np.linalg.norm(half, axis=1))
    pts = np.vstack([half, -half])
    return ConvexBody.from_points(pts, symmetric=True, meta={"spec": dict(spec)})


# -- bodies of revolution ---------------------------------------------------


def spheres_profile_oracle(knots_t, knots_r, axis):
    """Exact support oracle for the hull of spheres of radius r_k centered at
    t_k * axis: h(u) = max_k (r_k |u_perp| + t_k <u, axis>)."""
    t = np.asarray(knots_t, dtype=float)
    r = np.asarray(knots_r, dtype=float)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    b1 = complement_basis(a.reshape(-1, 1))[:, 0]

    def oracle(dirs):
        u = np.atleast_2d(np.asarray(dirs, dtype=float))
        ax = u @ a
        perp = u - ax[:, None] * a[None, :]
        pn = np.linalg.norm(perp, axis=1)
        vals_k = pn[:, None] * r[None, :] + ax[:, None] * t[None, :]
        k = np.argmax(vals_k, axis=1)
        vals = vals_k[np.arange(u.shape[0]), k]
        unit = np.where(pn[:, None] > 1e-14, perp / np.maximum(pn, 1e-300)[:, None],
                        b1[None, :])
        touch = t[k][:, None] * a[None, :] + r[k][:, None] * unit
        return vals, touch

    return oracle


def spheroid_sum_oracle(radial, axial, axis):
    """Exact support oracle for a Minkowski sum of coaxial spheroids: smooth,
    strictly convex, a body of revolution, and non-elliptical whenever the
    semi-axis pairs are not all proportional."""
    alphas = np.asarray(radial, dtype=float)
    betas = np.asarray(axial, dtype=float)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)

    def oracle(dirs):
        u = np.atleast_2d(np.asarray(dirs, dtype=float))
        ax = u @ a
        rad2 = np.maximum(np.einsum("ij,ij->i", u, u) - ax ** 2, 0.0)
        vals = np.zeros(u.shape[0])
        touch = np.zeros_like(u)
        for al, be in zip(alphas, betas):
            h = np.sqrt(al ** 2 * rad2 + be ** 2 * ax ** 2)
            h = np.maximum(h, 1e-300)
            du = al ** 2 * u + (be ** 2 - al ** 2) * ax[:, None] * a[None, :]
            vals += h
            touch += du / h[:, None]
        return vals, touch

    return oracle


def revolution_profile_points(knots_t, knots_r, axis, circle_points=128, seed=0):
    """Point cloud on the boundary of the hull-of-spheres body: each knot
    sphere sampled with a negation-closed set in the axis complement."""
    t = np.asarray(knots_t, dtype=float)
    r = np.asarray(knots_r, dtype=float)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    dim = a.shape[0]
    comp = complement_basis(a.reshape(-1, 1))
    half = max(circle_points // 2, dim)
    if dim == 3:
        phi = np.pi * np.arange(half) / half
        ws = np.column_stack([np.cos(phi), np.sin(phi)])
    else:
        ws = sphere_directions(dim - 1, half, seed=seed)
    ws = np.vstack([ws, -ws])
    rows = []
    for tk, rk in zip(t, r):
        if rk <= 1e-14:
            rows.append(tk * a[None, :])
        else:
            rows.append(tk * a[None, :] + rk * (ws @ comp.T))
    return np.vstack(rows)


def _even_profile(knots_t, knots_r):
    t = np.asarray(knots_t, dtype=float)
    r = np.asarray(knots_r, dtype=float)
    if t.shape != r.shape or t.size < 2:
        raise GeometryError("profile needs matching knots_t / knots_r with >= 2 knots")
    if np.any(r < 0):
        raise GeometryError("profile radii must be nonnegative")
    order = np.argsort(t)
    t, r = t[order], r[order]
    # mirror so the body is symmetric under x -> -x
    tm = np.concatenate([-t[::-1], t])
    rm = np.concatenate([r[::-1], r])
    keep = np.ones(tm.size, dtype=bool)
    for i in range(1, tm.size):
        if abs(tm[i] - tm[i - 1]) < 1e-14:
            keep[i] = False
    return tm[keep], rm[keep]


def random_concave_profile(rng, knots=4, t_max=None, r_max=None):
    """Half-profile (t >= 0) of a random even concave piecewise-linear radius
    function with a pole at t_max: knots (t_k, r_k), r decreasing with
    increasing marginal drops so the mirrored profile is concave."""
    t_max = float(rng.uniform(0.8, 1.3)) if t_max is None else t_max
    r0 = float(rng.uniform(0.7, 1.2)) if r_max is None else r_max
    ts = np.concatenate([[0.0], np.sort(rng.uniform(0.15, 0.95, size=knots - 2)), [1.0]]) * t_max
    slopes = -np.cumsum(rng.uniform(0.1, 1.0, size=knots - 1))
    rs = [r0]
    for i in range(knots - 1):
        rs.append(rs[-1] + slopes[i] * (ts[i + 1] - ts[i]))
    rs = np.asarray(rs)
    if rs[-1] < 0:  # rescale drops so the profile ends exactly at the pole
        rs = r0 - (r0 - rs) * (r0 / (r0 - rs[-1]))
    rs[-1] = 0.0
    rs = np.maximum(rs, 0.0)
    return ts, rs


def _gen_revolution(spec, seed):
    dim = _dim_of(spec)
    profile = spec.get("profile")
    if not isinstance(profile, dict):
        raise GeometryError("descriptor field 'profile' must be an object")
    axis = np.asarray(spec.get("axis", np.eye(dim)[-1]), dtype=float)
    if axis.shape != (dim,):
        raise GeometryError("descriptor field 'axis' has wrong dimension")
    axis = axis / np.linalg.norm(axis)
    rng = _spec_rng(spec, seed)
    ptype = profile.get("type", "piecewise-linear")
    meta = {"spec": dict(spec), "axis": Line(canonical_direction(axis))}

    if ptype == "spheroid-sum":
        radial = profile.get("radial")
        axial = profile.get("axial")
        if radial is None or axial is None or len(radial) != len(axial):
            raise GeometryError("spheroid-sum profile needs matching 'radial'/'axial' lists")
        oracle = spheroid_sum_oracle(radial, axial, axis)
        return ConvexBody.from_support_oracle(dim, oracle, symmetric=True, meta=meta)

    if ptype == "random-concave":
        ts, rs = random_concave_profile(rng, knots=int(profile.get("knots", 4)))
    elif ptype == "piecewise-linear":
        if "knots_t" not in profile or "knots_r" not in profile:
            raise GeometryError("piecewise-linear profile needs 'knots_t' and 'knots_r'")
        ts, rs = np.asarray(profile["knots_t"], float), np.asarray(profile["knots_r"], float)
    else:
        raise GeometryError(f"unknown profile type {ptype!r}")
    tm, rm = _even_profile(ts, rs)
    meta["profile"] = (tm, rm)
    if spec.get("representation", "oracle") == "point-cloud":
        pts = revolution_profile_points(tm, rm, axis,
                                        circle_points=int(spec.get("circle_points", 128)),
                                        seed=seed)
        return ConvexBody.from_points(pts, symmetric=True, meta=meta)
    oracle = spheres_profile_oracle(tm, rm, axis)
    return ConvexBody.from_support_oracle(dim, oracle, symmetric=True, meta=meta)


def _gen_affine_image(spec, seed):
    inner_spec = spec.get("body")
    if inner_spec is None:
        raise GeometryError("affine-image descriptor needs an inner 'body'")
    inner = gen_body(inner_spec, seed=seed)
    dim = inner.dim
    rng = _spec_rng(spec, seed)
    if "matrix" in spec:
        a = np.asarray(spec["matrix"], dtype=float)
    else:
        a = random_invertible(dim, rng, cond_max=float(spec.get("cond", 20.0)))
    if "translation" in spec:
        t = np.asarray(spec["translation"], dtype=float)
    elif spec.get("translate", False):
        t = rng.normal(scale=0.5, size=dim)
    else:
        t = np.zeros(dim)
    body = linear_image(inner, a, t)
    meta = {"spec": dict(spec), "planted_matrix": a, "planted_translation": t}
    if "axis" in inner.meta:
        direction = canonical_direction(a @ inner.meta["axis"].direction)
        meta["axis"] = Line(direction, base_point=t + a @ inner.meta["axis"].base_point)
    return body.with_meta(**meta)
