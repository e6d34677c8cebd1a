"""Minimum-volume enclosing ellipsoids (Loewner-John), the canonicalizing
affine map sending a body's MVEE to the unit ball, and the ellipsoid
recognition predicate built on it.

The fitter is a barycentric-coordinate ascent of Khachiyan type with
Kumar-Yildirim initialization and Wolfe-Atwood away/drop steps, certified by
its duality gap.  It is deterministic for fixed input.
"""

from dataclasses import dataclass

import numpy as np

from .bodies import AffineMap, ConvexBody, Ellipsoid, GeometryError
from .ops import support_batch, to_point_cloud
from .sampling import sphere_directions

DEFAULT_EPS = 1e-7
ILL_CONDITION_LIMIT = 1e8


@dataclass(frozen=True)
class MveeResult:
    """Fitted ellipsoid plus the optimality certificate of the ascent."""

    ellipsoid: Ellipsoid
    dual_gap: float
    iterations: int
    ill_conditioned: bool = False

    def to_json_dict(self):
        return {"ellipsoid": self.ellipsoid.to_json_dict(),
                "dual_gap": self.dual_gap,
                "iterations": self.iterations,
                "ill_conditioned": self.ill_conditioned}


def mvee(points, eps=DEFAULT_EPS, centered=False, max_iter=200000):
    """(1+eps)-approximate minimum-volume enclosing ellipsoid of a point set.

    With ``centered`` the symmetric MVEE is computed: the center is pinned at
    the origin and the fit covers points together with their negations.

    Every input point x satisfies (x-c)^T Q (x-c) <= 1 + O(eps), and
    ``dual_gap <= eps`` certifies near-optimality.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise GeometryError("points must be a 2-d array")
    n_pts, dim = pts.shape
    if eps <= 0:
        raise GeometryError("eps must be positive")
    if centered:
        if np.linalg.matrix_rank(pts, tol=1e-12) < dim:
            raise GeometryError("points do not span")
        u, iters, gap = _solve_design(pts, eps, max_iter)
        v = (pts.T * u) @ pts
        shape = np.linalg.inv(v) / dim
        center = np.zeros(dim)
    else:
        if np.linalg.matrix_rank(pts - pts.mean(axis=0), tol=1e-12) < dim:
            raise GeometryError("points do not span")
        lifted = np.hstack([pts, np.ones((n_pts, 1))])
        u, iters, gap = _solve_design(lifted, eps, max_iter)
        center = u @ pts
        s = (pts.T * u) @ pts - np.outer(center, center)
        shape = np.linalg.inv(s) / dim
    shape = 0.5 * (shape + shape.T)
    cond = float(np.linalg.cond(shape))
    return MveeResult(ellipsoid=Ellipsoid(center=center, shape=shape),
                      dual_gap=max(float(gap), 0.0), iterations=iters,
                      ill_conditioned=cond > ILL_CONDITION_LIMIT)


ASCENT_BUDGET = 2000


def _solve_design(y, eps, max_iter):
    """Optimal-design weights for the (possibly lifted) point matrix ``y``.

    Runs the first-order ascent, and when that stalls before the requested
    gap (point sets whose minimal ellipsoid touches along continua), switches
    to the strictly convex barrier Newton solve and recovers the weights from
    the barrier multipliers."""
    u, iters, gap = _design_ascent(y, eps, min(max_iter, ASCENT_BUDGET))
    if gap <= eps:
        return u, iters, gap
    d = y.shape[1]
    v = (y.T * u) @ y
    b0 = np.linalg.inv(v) / d
    b, gap2, extra = _barrier_polish(y, 0.5 * (b0 + b0.T), eps)
    c = np.einsum("ij,jk,ik->i", y, b, y)
    w = 1.0 / np.maximum(1.0 - c, 1e-300)
    return w / w.sum(), iters + extra, gap2


def _ky_initial_weights(x):
    """Kumar-Yildirim style initialization: pick one extreme point per
    direction of a deterministically orthogonalized sweep."""
    n_pts, d = x.shape
    q = np.zeros((d, 0))
    chosen = []
    probe = np.eye(d)
    for k in range(d):
        c = probe[:, k % d].copy()
        if q.shape[1]:
            c -= q @ (q.T @ c)
        if np.linalg.norm(c) < 1e-12:
            for j in range(d):
                c = probe[:, j].copy()
                if q.shape[1]:
                    c -= q @ (q.T @ c)
                if np.linalg.norm(c) >= 1e-12:
                    break
        scores = np.abs(x @ c)
        order = np.argsort(-scores)
        j = next((int(i) for i in order if int(i) not in chosen), int(order[0]))
        chosen.append(j)
        vec = x[j].copy()
        if q.shape[1]:
            vec -= q @ (q.T @ vec)
        norm = np.linalg.norm(vec)
        if norm > 1e-12:
            q = np.hstack([q, (vec / norm).reshape(-1, 1)])
    u = np.zeros(n_pts)
    for j in set(chosen):
        u[j] = 1.0
    u /= u.sum()
    return u


def _design_ascent(x, eps, max_iter):
    """Maximize log det sum(u_i x_i x_i^T) over the simplex.

    Frank-Wolfe add steps plus Wolfe-Atwood away/drop steps; stops on the
    Khachiyan duality gap max_i x_i^T V^-1 x_i / D - 1 <= eps, which
    certifies both containment and (1+eps)-optimal volume.
    """
    n_pts, d = x.shape
    u = _ky_initial_weights(x)
    iters = 0
    gap = np.inf
    for iters in range(1, max_iter + 1):
        v = (x.T * u) @ x
        try:
            w = np.linalg.solve(v, x.T)
        except np.linalg.LinAlgError:
            u = 0.9 * u + 0.1 / n_pts
            continue
        m = np.einsum("ij,ji->i", x, w)
        i_plus = int(np.argmax(m))
        eps_plus = m[i_plus] / d - 1.0
        gap = eps_plus
        if eps_plus <= eps:
            break
        active = u > 1e-12
        m_act = np.where(active, m, np.inf)
        i_minus = int(np.argmin(m_act))
        eps_minus = 1.0 - m[i_minus] / d
        if eps_plus >= eps_minus:
            lam = (m[i_plus] - d) / (d * (m[i_plus] - 1.0))
            u *= 1.0 - lam
            u[i_plus] += lam
        else:
            denom = d * (m[i_minus] - 1.0)
            cap = u[i_minus] / (1.0 - u[i_minus]) if u[i_minus] < 1.0 else np.inf
            lam = cap if denom <= 0 else min((d - m[i_minus]) / denom, cap)
            u *= 1.0 + lam
            u[i_minus] -= lam
            u[i_minus] = max(u[i_minus], 0.0)
        u /= u.sum()
    return u, iters, gap


def _sym_basis(d):
    """Orthonormal basis of symmetric d x d matrices (Frobenius pairing)."""
    basis = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d))
            if i == j:
                e[i, i] = 1.0
            else:
                e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(e)
    return basis


def _barrier_polish(x, a0, eps, max_stages=60, newton_steps=40):
    """Log-barrier Newton solve of min -logdet A s.t. x_i^T A x_i <= 1.

    Second-order fallback for point sets whose minimal ellipsoid touches
    along continua (bodies of revolution), where the simplex ascent's
    first-order tail stalls.  The iterates stay strictly feasible, so
    containment is exact; returns (A, khachiyan_gap, newton_iterations).
    """
    n_pts, d = x.shape
    basis = _sym_basis(d)
    s = len(basis)

    def quadforms(a):
        return np.einsum("ij,jk,ik->i", x, a, x)

    def khachiyan_gap(a):
        c = quadforms(a)
        w = 1.0 / np.maximum(1.0 - c, 1e-300)
        v = (x.T * (w / w.sum())) @ x
        m = np.einsum("ij,ji->i", x, np.linalg.solve(v, x.T))
        return float(np.max(m)) / d - 1.0

    # strictly feasible start: shrink until every point is inside with margin
    a = a0.copy()
    c = quadforms(a)
    a /= max(float(np.max(c)), 1.0) * (1.0 + 1e-9)
    mu = max(float(np.mean(1.0 - quadforms(a))), 1e-4)
    total = 0
    best_gap = np.inf
    best_a = a.copy()
    for _stage in range(max_stages):
        for _step in range(newton_steps):
            total += 1
            c = quadforms(a)
            slack = np.maximum(1.0 - c, 1e-300)
            a_inv = np.linalg.inv(a)
            grad_mat = -a_inv + mu * (x.T * (1.0 / slack)) @ x
            g = np.array([float(np.sum(grad_mat * e)) for e in basis])
            xe = np.stack([np.einsum("ij,jk,ik->i", x, e, x) for e in basis])  # s x N
            h = np.empty((s, s))
            for k, e in enumerate(basis):
                he = a_inv @ e @ a_inv
                col = np.array([float(np.sum(he * e2)) for e2 in basis])
                col += mu * (xe @ (xe[k] / slack ** 2))
                h[:, k] = col
            h = 0.5 * (h + h.T)
            try:
                delta = np.linalg.solve(h + 1e-12 * np.eye(s), -g)
            except np.linalg.LinAlgError:
                break
            step_mat = sum(delta[k] * basis[k] for k in range(s))
            decrement = float(-g @ delta)
            alpha = 1.0
            bval = -np.log(np.linalg.det(a)) - mu * float(np.sum(np.log(slack)))
            for _bt in range(50):
                cand = a + alpha * step_mat
                try:
                    np.linalg.cholesky(cand)
                except np.linalg.LinAlgError:
                    alpha *= 0.5
                    continue
                c_new = quadforms(cand)
                if np.max(c_new) >= 1.0:
                    alpha *= 0.5
                    continue
                b_new = (-np.log(np.linalg.det(cand))
                         - mu * float(np.sum(np.log(1.0 - c_new))))
                if b_new <= bval - 0.25 * alpha * decrement:
                    break
                alpha *= 0.5
            else:
                break
            a = a + alpha * step_mat
            if decrement <= 1e-14:
                break
        gap = khachiyan_gap(a)
        if gap < best_gap:
            best_gap = gap
            best_a = a.copy()
        if gap <= eps:
            return a, gap, total
        # slack cancellation eventually corrupts the certificate; stop once
        # the path degrades instead of chasing mu to the float floor
        if gap > 10.0 * best_gap or mu < eps / (100.0 * max(n_pts, 1)):
            break
        mu *= 0.15
    if best_gap <= eps:
        return best_a, best_gap, total
    raise GeometryError("enclosing-ellipsoid polish did not reach the requested gap")


ACTIVE_SET_LIMIT = 2048


def mvee_of_body(body, eps=DEFAULT_EPS, centered=None, seed=0):
    """MVEE of a convex body in any representation.

    Ellipsoid bodies are their own MVEE (gap 0).  Oracle-backed bodies are
    fitted by active-point cutting against the exact support oracle, so the
    result encloses the true body, not just a sampled cloud.  Plain support
    samples convert to boundary point clouds first.
    """
    if centered is None:
        centered = body.symmetric
    if body.representation == "ellipsoid":
        return MveeResult(ellipsoid=body.ellipsoid, dual_gap=0.0, iterations=0,
                          ill_conditioned=float(np.linalg.cond(body.ellipsoid.shape)) > ILL_CONDITION_LIMIT)
    if body.representation == "support-sample":
        if body.oracle is not None:
            return _mvee_of_oracle(body, eps, centered, seed)
        pts = to_point_cloud(body).points
    else:
        pts = body.points
    if pts.shape[0] > ACTIVE_SET_LIMIT:
        return _mvee_active_set(pts, eps, centered)
    return mvee(pts, eps=eps, centered=centered)


def _quadforms(e, pts):
    rel = pts - e.center[None, :]
    return np.einsum("ij,jk,ik->i", rel, e.shape, rel)


def _mvee_active_set(pts, eps, centered):
    """MVEE of a large cloud via an exact active-set outer loop: fit a small
    subset, add the worst violators, repeat until every point is certified.

    Keeping the working subset small sidesteps the slow Frank-Wolfe tail on
    dense clouds sampled from smooth bodies.
    """
    n_pts, dim = pts.shape
    stride = max(1, n_pts // (8 * dim))
    active = set(range(0, n_pts, stride))
    for k in range(dim):
        active.add(int(np.argmax(pts[:, k])))
        active.add(int(np.argmin(pts[:, k])))
    active = sorted(active)
    slack = eps * (dim + 1) / dim
    total_iters = 0
    for _round in range(200):
        res = mvee(pts[active], eps=eps * 0.5, centered=centered)
        total_iters += res.iterations
        quad = _quadforms(res.ellipsoid, pts)
        worst = np.argsort(-quad)
        current = set(active)
        violators = [int(i) for i in worst[:16]
                     if quad[i] > 1.0 + slack and int(i) not in current]
        if not violators:
            gap = max(float(np.max(quad) - 1.0) * dim / (dim + 1), res.dual_gap)
            return MveeResult(ellipsoid=res.ellipsoid, dual_gap=max(min(gap, eps), 0.0),
                              iterations=total_iters, ill_conditioned=res.ill_conditioned)
        active = sorted(set(active) | set(violators))
    raise GeometryError("active-set MVEE failed to converge")


def _mvee_of_oracle(body, eps, centered, seed):
    """MVEE of an oracle-backed body by cutting: fit the MVEE of the current
    touch points, find the direction where the true body sticks out the most
    (coarse scan plus local polish), add its touch point, repeat.

    New touch points replace fitted points within the contact-wobble radius
    (which scales like sqrt of the current violation) instead of piling up;
    the enclosure certificate comes from the oracle violation scan, not from
    the fitted set, so replacement is sound and keeps the inner fits small
    and well conditioned.  Terminates when the worst support violation is
    below eps relative to scale, so the ellipsoid encloses the exact body to
    (1+eps)."""
    from scipy.optimize import minimize as _minimize

    dim = body.dim
    oracle = body.oracle
    scan = sphere_directions(dim, 256 * dim, seed=seed)
    base = sphere_directions(dim, 8 * dim, seed=seed + 1)
    _v, pts = oracle(np.vstack([base, np.eye(dim)]))
    pts = np.vstack([pts, -pts]) if centered else pts
    h_scan, _ = oracle(scan)
    scale = float(np.max(np.abs(h_scan)))
    total_iters = 0
    viol_prev = np.inf
    for _round in range(400):
        res = None
        for inner_eps in (eps * 0.5, eps):
            try:
                res = mvee(pts, eps=inner_eps, centered=centered)
                break
            except GeometryError:
                continue
        if res is None:
            raise GeometryError("oracle MVEE inner fit failed to converge")
        total_iters += res.iterations
        e = res.ellipsoid

        def violation(u):
            vals, _ = oracle(np.atleast_2d(u))
            return float(vals[0] - e.support(np.atleast_2d(u))[0])

        gaps = h_scan - e.support(scan)
        order = np.argsort(-gaps)
        best_u, best_gap = None, -np.inf
        for idx in order[:4]:
            r = _minimize(lambda t: -violation(t / np.linalg.norm(t)), scan[idx],
                          method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-14, "maxfev": 120 * dim})
            if -r.fun > best_gap:
                best_gap = -r.fun
                best_u = r.x / np.linalg.norm(r.x)
        if best_gap <= eps * scale:
            gap = max(res.dual_gap, best_gap / max(scale, 1e-300))
            cond = float(np.linalg.cond(e.shape))
            return MveeResult(ellipsoid=e, dual_gap=max(min(gap, eps), 0.0),
                              iterations=total_iters,
                              ill_conditioned=cond > ILL_CONDITION_LIMIT)
        _vv, new_pts = oracle(best_u.reshape(1, -1))
        new = new_pts[0]
        # replacement radius tracks the contact wobble ~ sqrt(violation) but
        # never swallows genuinely distinct contacts at coarse stages
        wobble = np.sqrt(max(min(viol_prev, best_gap), 0.0) * scale)
        radius = min(2.0 * wobble, 0.05 * scale)
        dist = np.linalg.norm(pts - new[None, :], axis=1)
        j = int(np.argmin(dist))
        if dist[j] < radius:
            pts[j] = new
            if centered:
                jn = int(np.argmin(np.linalg.norm(pts + new[None, :], axis=1)))
                pts[jn] = -new
        else:
            pts = np.vstack([pts, new[None, :], -new[None, :]]
                            if centered else [pts, new[None, :]])
        viol_prev = best_gap
    raise GeometryError("oracle MVEE cutting failed to converge")


ORACLE_EPS = 1e-6


def canonicalize(body, eps=None, seed=0):
    """Affine map f sending MVEE(K) to the unit ball, plus K' = f(K).

    For symmetric bodies the centered MVEE is used, so f is linear.  The
    canonical form's own MVEE is the unit ball up to the fit tolerance.
    Oracle-backed bodies default to the cutting path's numerical floor.
    """
    from .ops import linear_image

    if eps is None:
        eps = ORACLE_EPS if (body.representation == "support-sample"
                             and body.oracle is not None) else DEFAULT_EPS
    result = mvee_of_body(body, eps=eps, seed=seed)
    e = result.ellipsoid
    vals, vecs = np.linalg.eigh(e.shape)
    root = (vecs * np.sqrt(vals)) @ vecs.T
    f = AffineMap(matrix=root, translation=-root @ e.center)
    image = linear_image(body, f.matrix, f.translation)
    return image, f, result


def is_ellipsoid(body, tol=1e-3, ndirs=500, eps=1e-6, seed=0):
    """Is the body an ellipsoid, within a scale-free support residual?

    residual = max over sampled directions of (h_E(u) - h_K(u)) / h_E(u)
    with E = MVEE(K); E contains K so the residual is nonnegative, and it is
    zero exactly for ellipsoids.  Verdict is residual <= tol.
    """
    if body.representation == "ellipsoid":
        return True, 0.0
    result = mvee_of_body(body, eps=eps, seed=seed)
    e = result.ellipsoid
    dirs = sphere_directions(body.dim, ndirs, seed=seed)
    h_e = e.support(dirs)
    h_k = support_batch(body, dirs)
    residual = float(np.max(np.maximum(h_e - h_k, 0.0) / np.maximum(h_e, 1e-300)))
    return residual <= tol, residual
