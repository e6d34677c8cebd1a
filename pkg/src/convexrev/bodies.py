"""Core geometric types: convex bodies, flats, affine maps, ellipsoids.

Bodies are immutable after construction and all operations on them are pure,
so instances can be shared freely across threads.
"""

import json
from dataclasses import dataclass, field

import numpy as np

SYM_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for degenerate or inconsistent geometric input."""


def _as_array(x, name="array"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise GeometryError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class Ellipsoid:
    """The set {x : (x-c)^T Q (x-c) <= 1} with Q symmetric positive definite."""

    center: np.ndarray
    shape: np.ndarray

    def __post_init__(self):
        c = _as_array(self.center, "center").reshape(-1)
        q = _as_array(self.shape, "shape")
        if q.shape != (c.shape[0], c.shape[0]):
            raise GeometryError("shape matrix size does not match center")
        if np.max(np.abs(q - q.T)) > 1e-10 * max(1.0, np.max(np.abs(q))):
            raise GeometryError("shape matrix is not symmetric")
        q = 0.5 * (q + q.T)
        if np.min(np.linalg.eigvalsh(q)) <= 0.0:
            raise GeometryError("shape matrix is not positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", q)

    @property
    def dim(self):
        return self.center.shape[0]

    def inverse_shape(self):
        cached = getattr(self, "_inv_shape", None)
        if cached is None:
            cached = np.linalg.inv(self.shape)
            object.__setattr__(self, "_inv_shape", cached)
        return cached

    def support(self, dirs):
        """Support values h(u) = <c,u> + sqrt(u^T Q^-1 u) for unit rows of dirs."""
        u = np.atleast_2d(np.asarray(dirs, dtype=float))
        qi = self.inverse_shape()
        quad = np.einsum("ij,jk,ik->i", u, qi, u)
        return u @ self.center + np.sqrt(np.maximum(quad, 0.0))

    def boundary_touch(self, dirs):
        """Points of the ellipsoid where the supporting hyperplane with outer
        normal u touches; one row per direction."""
        u = np.atleast_2d(np.asarray(dirs, dtype=float))
        qi = self.inverse_shape()
        w = u @ qi.T
        quad = np.sqrt(np.maximum(np.einsum("ij,ij->i", w, u), 1e-300))
        return self.center[None, :] + w / quad[:, None]

    def contains(self, points, slack=0.0):
        p = np.atleast_2d(np.asarray(points, dtype=float)) - self.center[None, :]
        quad = np.einsum("ij,jk,ik->i", p, self.shape, p)
        return np.all(quad <= 1.0 + slack)

    def volume(self):
        import math

        d = self.dim
        unit = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        return unit / np.sqrt(np.linalg.det(self.shape))

    def principal_axes(self):
        """(eigenvalues of Q ascending, eigenvector columns).  Semi-axis
        lengths are eigenvalue**-0.5, so the first column is the longest axis."""
        vals, vecs = np.linalg.eigh(self.shape)
        return vals, vecs

    def to_json_dict(self):
        return {"center": self.center.tolist(), "shape": self.shape.tolist()}

    @classmethod
    def from_json_dict(cls, data):
        return cls(center=np.array(data["center"], dtype=float),
                   shape=np.array(data["shape"], dtype=float))


@dataclass(frozen=True)
class Subspace:
    """Linear or affine flat: orthonormal column basis plus a base point
    (zero for linear subspaces)."""

    basis: np.ndarray
    base_point: np.ndarray = None

    def __post_init__(self):
        b = _as_array(self.basis, "basis")
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        dim, k = b.shape
        if not (1 <= k <= dim):
            raise GeometryError("basis must have between 1 and dim columns")
        gram = b.T @ b
        if np.max(np.abs(gram - np.eye(k))) > 1e-10:
            raise GeometryError("basis columns are not orthonormal")
        if self.base_point is None:
            p = np.zeros(dim)
        else:
            p = _as_array(self.base_point, "base_point").reshape(-1)
            if p.shape[0] != dim:
                raise GeometryError("base point dimension mismatch")
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "base_point", p)

    @property
    def ambient_dim(self):
        return self.basis.shape[0]

    @property
    def k(self):
        return self.basis.shape[1]

    @property
    def is_linear(self):
        return np.all(self.base_point == 0.0)

    def project_point(self, x):
        """Orthogonal projection of x onto the flat, in ambient coordinates."""
        x = np.asarray(x, dtype=float)
        rel = x - self.base_point
        return self.base_point + self.basis @ (self.basis.T @ rel)

    def to_coords(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (x - self.base_point[None, :]) @ self.basis

    def from_coords(self, y):
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return self.base_point[None, :] + y @ self.basis.T


def canonical_direction(v, tol=1e-12):
    """Unit vector for an unoriented line: first nonzero coordinate positive."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < tol:
        raise GeometryError("zero direction")
    v = v / n
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


@dataclass(frozen=True)
class Line:
    """1-dimensional flat; direction is unit and sign-canonicalized."""

    direction: np.ndarray
    base_point: np.ndarray = None

    def __post_init__(self):
        d = canonical_direction(_as_array(self.direction, "direction").reshape(-1))
        if self.base_point is None:
            p = np.zeros(d.shape[0])
        else:
            p = _as_array(self.base_point, "base_point").reshape(-1)
            if p.shape[0] != d.shape[0]:
                raise GeometryError("base point dimension mismatch")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "base_point", p)

    @property
    def ambient_dim(self):
        return self.direction.shape[0]

    @property
    def is_linear(self):
        return np.all(self.base_point == 0.0)

    def as_subspace(self):
        return Subspace(self.direction.reshape(-1, 1), self.base_point)

    def angle_to(self, other):
        """Acute angle between two lines (directions are unsigned)."""
        if isinstance(other, Line):
            other = other.direction
        other = np.asarray(other, dtype=float)
        other = other / np.linalg.norm(other)
        c = abs(float(np.dot(self.direction, other)))
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def distance_to_point(self, x):
        rel = np.asarray(x, dtype=float) - self.base_point
        rel = rel - self.direction * np.dot(rel, self.direction)
        return float(np.linalg.norm(rel))


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + translation, with invertible matrix."""

    matrix: np.ndarray
    translation: np.ndarray = None

    def __post_init__(self):
        m = _as_array(self.matrix, "matrix")
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GeometryError("matrix must be square")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise GeometryError("matrix is singular")
        if self.translation is None:
            t = np.zeros(m.shape[0])
        else:
            t = _as_array(self.translation, "translation").reshape(-1)
            if t.shape[0] != m.shape[0]:
                raise GeometryError("translation dimension mismatch")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", t)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.zeros(dim))

    def apply(self, points):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return p @ self.matrix.T + self.translation[None, :]

    def compose(self, other):
        """self after other: (self . other)(x) = self(other(x))."""
        return AffineMap(self.matrix @ other.matrix,
                         self.matrix @ other.translation + self.translation)

    def inverse(self):
        minv = np.linalg.inv(self.matrix)
        return AffineMap(minv, -minv @ self.translation)

    def to_json_dict(self):
        return {"matrix": self.matrix.tolist(), "translation": self.translation.tolist()}

    @classmethod
    def from_json_dict(cls, data):
        return cls(np.array(data["matrix"], dtype=float),
                   np.array(data["translation"], dtype=float))


REPRESENTATIONS = ("point-cloud", "support-sample", "ellipsoid")


@dataclass(frozen=True)
class ConvexBody:
    """A convex body in one of three representations.

    point-cloud:     points (N, d); the body is their convex hull.
    support-sample:  unit directions (m, d) with support values (m,); optional
                     boundary touch points and an optional exact support
                     oracle ``oracle(U) -> (values, touch_points)`` used by
                     generated smooth bodies (not serialized).
    ellipsoid:       an Ellipsoid instance.

    ``symmetric`` promises invariance under x -> -x (about the origin).
    """

    dim: int
    representation: str
    symmetric: bool = False
    points: np.ndarray = None
    sample_dirs: np.ndarray = None
    sample_values: np.ndarray = None
    sample_touch: np.ndarray = None
    oracle: object = None
    ellipsoid: Ellipsoid = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise GeometryError("bodies must live in dimension >= 1")
        if self.representation not in REPRESENTATIONS:
            raise GeometryError(f"unknown representation {self.representation!r}")
        if self.representation == "point-cloud":
            self._init_point_cloud()
        elif self.representation == "support-sample":
            self._init_support_sample()
        else:
            self._init_ellipsoid()

    def _init_point_cloud(self):
        pts = _as_array(self.points, "points")
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise GeometryError("points must be an (N, dim) array")
        if pts.shape[0] < self.dim + 1:
            raise GeometryError("degenerate body")
        centered = pts - pts.mean(axis=0)
        if np.linalg.matrix_rank(centered, tol=1e-10) < self.dim:
            raise GeometryError("degenerate body")
        if self.symmetric:
            _check_negation_closed(pts)
        object.__setattr__(self, "points", pts)

    def _init_support_sample(self):
        dirs = _as_array(self.sample_dirs, "sample directions")
        vals = _as_array(self.sample_values, "sample values").reshape(-1)
        if dirs.ndim != 2 or dirs.shape[1] != self.dim or dirs.shape[0] != vals.shape[0]:
            raise GeometryError("sample directions/values mismatch")
        norms = np.linalg.norm(dirs, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            raise GeometryError("sample directions must be unit vectors")
        if self.sample_touch is not None:
            touch = _as_array(self.sample_touch, "touch points")
            if touch.shape != dirs.shape:
                raise GeometryError("touch points shape mismatch")
            object.__setattr__(self, "sample_touch", touch)
        if self.symmetric:
            _check_negation_closed_sample(dirs, vals)
        object.__setattr__(self, "sample_dirs", dirs)
        object.__setattr__(self, "sample_values", vals)

    def _init_ellipsoid(self):
        if not isinstance(self.ellipsoid, Ellipsoid):
            raise GeometryError("ellipsoid representation needs an Ellipsoid")
        if self.ellipsoid.dim != self.dim:
            raise GeometryError("ellipsoid dimension mismatch")
        if self.symmetric and np.linalg.norm(self.ellipsoid.center) > SYM_TOL:
            raise GeometryError("symmetric flag requires a centered ellipsoid")

    def with_meta(self, **kv):
        merged = dict(self.meta)
        merged.update(kv)
        return ConvexBody(dim=self.dim, representation=self.representation,
                          symmetric=self.symmetric, points=self.points,
                          sample_dirs=self.sample_dirs, sample_values=self.sample_values,
                          sample_touch=self.sample_touch, oracle=self.oracle,
                          ellipsoid=self.ellipsoid, meta=merged)

    @classmethod
    def from_points(cls, points, symmetric=False, meta=None):
        points = np.asarray(points, dtype=float)
        return cls(dim=points.shape[1], representation="point-cloud",
                   symmetric=symmetric, points=points, meta=meta or {})

    @classmethod
    def from_ellipsoid(cls, ellipsoid, meta=None):
        symmetric = bool(np.linalg.norm(ellipsoid.center) <= SYM_TOL)
        return cls(dim=ellipsoid.dim, representation="ellipsoid",
                   symmetric=symmetric, ellipsoid=ellipsoid, meta=meta or {})

    @classmethod
    def from_support_oracle(cls, dim, oracle, symmetric=False, cache_dirs=None, meta=None):
        """Support-sample body backed by an exact oracle.

        ``oracle(U)`` must accept an (m, dim) array of directions (not
        necessarily unit) and return (support values (m,), touch points
        (m, dim)), positively homogeneous in each row of U.
        """
        from .sampling import sphere_directions

        if cache_dirs is None:
            half = sphere_directions(dim, 32 * dim, seed=0)
            cache_dirs = np.vstack([half, -half]) if symmetric else sphere_directions(
                dim, 64 * dim, seed=0)
        vals, touch = oracle(cache_dirs)
        return cls(dim=dim, representation="support-sample", symmetric=symmetric,
                   sample_dirs=cache_dirs, sample_values=np.asarray(vals, dtype=float),
                   sample_touch=np.asarray(touch, dtype=float), oracle=oracle,
                   meta=meta or {})

    # -- serialization ----------------------------------------------------

    def to_json_dict(self):
        out = {"type": self.representation, "dim": self.dim, "symmetric": self.symmetric}
        if self.representation == "point-cloud":
            out["points"] = self.points.tolist()
        elif self.representation == "support-sample":
            out["directions"] = self.sample_dirs.tolist()
            out["values"] = self.sample_values.tolist()
            if self.sample_touch is not None:
                out["touch_points"] = self.sample_touch.tolist()
        else:
            out["ellipsoid"] = self.ellipsoid.to_json_dict()
        return out

    @classmethod
    def from_json_dict(cls, data):
        rep = data["type"]
        dim = int(data["dim"])
        symmetric = bool(data["symmetric"])
        if rep == "point-cloud":
            return cls(dim=dim, representation=rep, symmetric=symmetric,
                       points=_as_array(data["points"], "points"))
        if rep == "support-sample":
            touch = data.get("touch_points")
            return cls(dim=dim, representation=rep, symmetric=symmetric,
                       sample_dirs=_as_array(data["directions"], "directions"),
                       sample_values=_as_array(data["values"], "values"),
                       sample_touch=None if touch is None else _as_array(touch, "touch"))
        if rep == "ellipsoid":
            return cls(dim=dim, representation=rep, symmetric=symmetric,
                       ellipsoid=Ellipsoid.from_json_dict(data["ellipsoid"]))
        raise GeometryError(f"unknown representation {rep!r}")

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def _check_negation_closed(points, tol=SYM_TOL):
    scale = max(1.0, float(np.max(np.abs(points))))
    # sort rows of P and -P and compare: cheap exact check for +/- closure
    a = np.array(sorted(map(tuple, np.round(points / scale, 14))))
    b = np.array(sorted(map(tuple, np.round(-points / scale, 14))))
    if a.shape != b.shape or np.max(np.abs(a - b)) > tol:
        raise GeometryError("symmetric flag requires a negation-closed point set")


def _check_negation_closed_sample(dirs, vals, tol=1e-9):
    order_a = np.lexsort(np.round(dirs, 12).T)
    order_b = np.lexsort(np.round(-dirs, 12).T)
    if np.max(np.abs(dirs[order_a] + dirs[order_b])) > tol:
        raise GeometryError("symmetric flag requires negation-closed sample directions")
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.max(np.abs(vals[order_a] - vals[order_b])) > tol * scale:
        raise GeometryError("symmetric flag requires even support values")
