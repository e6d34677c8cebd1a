"""Randomized property suites replaying the geometric lemmas.

Each suite generates seeded random instances, computes both sides of its
lemma with the library operations, and records residuals and pass/fail
against a tolerance.  Instances that cannot be made non-degenerate within
100 resampling attempts are marked skipped, never silently passed; a skipped
fraction above 5% fails the whole run.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .bodies import GeometryError, Line, Subspace, canonical_direction
from .equivalence import central_symmetry_center, linear_equivalent
from .generators import gen_body
from .mvee import canonicalize, is_ellipsoid
from .ops import diameter, project_along, support_batch
from .revolution import (affine_revolution_axis, predicted_projection_axis,
                         project_revolution, revolution_residual)
from .sampling import child_rng, complement_basis, orthonormalize, sphere_directions

MAX_RESAMPLE = 100
MAX_SKIP_FRACTION = 0.05
ANGLE_FLOOR = np.deg2rad(5.0)

LEMMA_IDS = ("lemma-3.2", "lemma-3.3", "lemma-3.4-planarity",
             "lemma-3.4-contrapositive", "lemma-3.5", "cor-2.2-consistency",
             "thm-4-ellipsoid-criterion")


@dataclass
class TrialRecord:
    lemma_id: str
    trial: int
    seed: int
    params: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    passed: bool = False
    skipped: bool = False
    skip_reason: str = ""
    runtime: float = 0.0

    def to_json_dict(self, include_runtime=False):
        out = {"lemma_id": self.lemma_id, "trial": self.trial, "seed": self.seed,
               "params": self.params, "residuals": self.residuals,
               "passed": self.passed, "skipped": self.skipped,
               "skip_reason": self.skip_reason}
        if include_runtime:
            out["runtime"] = self.runtime
        return out


def _angle_between_lines(u, v):
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(np.arccos(np.clip(abs(float(u @ v)), -1.0, 1.0)))


def _unit(rng, dim):
    while True:
        v = rng.standard_normal(dim)
        n = np.linalg.norm(v)
        if n > 1e-9:
            return v / n


def _sample_with_floor(rng, dim, avoid, floor, max_tries=MAX_RESAMPLE):
    """Random unit vector keeping an acute angle of at least ``floor`` to
    every line in ``avoid``; None when the floor cannot be met."""
    for _ in range(max_tries):
        v = _unit(rng, dim)
        if all(_angle_between_lines(v, a) >= floor for a in avoid):
            return v
    return None


# -- lemma 3.2: axis of the projected ball ----------------------------------


def _trial_lemma_32(trial, dim, seed, tol):
    rng = child_rng(seed, 32, trial)
    for _ in range(MAX_RESAMPLE):
        n_g = _unit(rng, dim)
        n_h = _unit(rng, dim)
        theta = _angle_between_lines(n_g, n_h)
        if ANGLE_FLOOR <= theta <= np.pi / 2 - ANGLE_FLOOR:
            break
    else:
        return None, {"reason": "no non-degenerate hyperplane pair"}
    x = rng.normal(scale=0.5, size=dim)
    rho = float(rng.uniform(0.5, 2.0))
    gamma = Subspace(complement_basis(n_g.reshape(-1, 1)), base_point=x)
    h = Subspace(complement_basis(n_h.reshape(-1, 1)))
    predicted = predicted_projection_axis(gamma, x, h)

    # independent oracle: principal axes of the projected ball, which is the
    # image of the rho-ball of gamma under the basis-to-basis linear map
    m0 = h.basis.T @ gamma.basis
    cov = rho ** 2 * (m0 @ m0.T)
    vals, vecs = np.linalg.eigh(cov)
    big = vals[-1]
    multiplicity = int(np.sum(vals >= big * (1.0 - 1e-9)))
    distinguished = h.basis @ vecs[:, 0]
    angle = _angle_between_lines(distinguished, predicted.direction)
    center_gap = float(np.linalg.norm(
        h.basis @ (h.basis.T @ x) - predicted.base_point))
    ok = (multiplicity == dim - 2) and angle <= tol and center_gap <= 1e-9
    return ok, {"axis_angle": angle, "center_gap": center_gap,
                "dihedral_deg": float(np.rad2deg(theta)),
                "eigen_multiplicity": multiplicity}


# -- lemma 3.3: projection of a body of revolution ---------------------------


def _trial_lemma_33(trial, dim, seed, tol):
    """Genuine bodies of revolution with a random axis: parallel projections
    give ellipsoids, oblique ones give bodies of revolution about the
    projected axis.  (The affine case is checked end to end through
    affine_revolution_axis in the scan and its tests.)"""
    rng = child_rng(seed, 33, trial)
    axis_dir = _unit(rng, dim)
    spec = {"kind": "revolution", "dim": dim, "axis": axis_dir.tolist(),
            "profile": {"type": "random-concave", "knots": 4}}
    body = gen_body(spec, seed=seed + 7919 * trial)
    axis = body.meta["axis"]
    parallel = trial % 5 == 0
    if parallel:
        ell = axis.direction.copy()
    else:
        ell = _sample_with_floor(rng, dim, [axis.direction], np.deg2rad(10.0))
        if ell is None:
            return None, {"reason": "no direction clear of the axis"}
    shadow, prediction = project_revolution(body, axis, ell)
    if parallel:
        ok, resid = is_ellipsoid(shadow, tol=tol, eps=1e-5)
        return ok, {"case": "parallel", "is_ellipsoid_residual": resid}
    resid = revolution_residual(shadow, prediction, seed=seed)
    return resid <= tol, {"case": "oblique", "axis_residual": resid,
                          "axis_angle_to_ell": _angle_between_lines(axis.direction, ell)}


# -- lemma 3.4: shadow boundaries and the contrapositive ---------------------


def _random_smooth_revolution(rng, dim, require_nonelliptical=None):
    """Spheroid-sum body of revolution about a random axis; the semi-axis
    brackets keep it strongly non-elliptical."""
    axis = _unit(rng, dim)
    radial = [float(rng.uniform(0.9, 1.1)), float(rng.uniform(0.22, 0.35))]
    axial = [float(rng.uniform(0.32, 0.45)), float(rng.uniform(1.0, 1.3))]
    spec = {"kind": "revolution", "dim": dim,
            "profile": {"type": "spheroid-sum", "radial": radial, "axial": axial},
            "axis": axis.tolist()}
    return gen_body(spec, seed=0), Line(canonical_direction(axis))


def _trial_lemma_34_planarity(trial, dim, seed, tol):
    from .revolution import shadow_boundary

    rng = child_rng(seed, 341, trial)
    body, axis = _random_smooth_revolution(rng, dim)
    comp = complement_basis(axis.direction.reshape(-1, 1))
    w = _unit(rng, dim - 1)
    ell = comp @ w  # direction inside the hyperplane of revolution
    sb = shadow_boundary(body, ell, ndirs=192)
    return sb.planarity_residual <= tol, {
        "planarity_residual": sb.planarity_residual}


def _trial_lemma_34_contrapositive(trial, dim, seed, tol):
    rng = child_rng(seed, 342, trial)
    body, axis = _random_smooth_revolution(rng, dim)
    comp = complement_basis(axis.direction.reshape(-1, 1))
    w = _unit(rng, dim - 1)
    ell = comp @ w
    shadow, _frame = project_along(body, ell)
    verdict, resid = is_ellipsoid(shadow, tol=tol, eps=1e-5)
    return (not verdict) and resid >= tol, {"is_ellipsoid_residual": resid}


# -- lemma 3.5: compatibility of projected axes ------------------------------


def _shadow_axis_data(body, ell, seed, grid=1500):
    """Measured axis line and hyperplane normal (both ambient) of the shadow
    of the body along ``ell``; None when no axis is certified."""
    shadow, frame = project_along(body, ell)
    cert = affine_revolution_axis(shadow, seed=seed, grid=grid)
    if cert is None:
        return None
    axis_amb = canonical_direction(frame.basis @ cert.axis.direction)
    n_shadow = complement_basis(cert.hyperplane.basis)[:, 0]
    n_amb = canonical_direction(frame.basis @ n_shadow)
    return axis_amb, n_amb, cert


def _true_shadow_frame_data(planted_matrix, ell, frame):
    """Constructed axis and hyperplane normal of the shadow of A K0 (axis
    e_d) along ell, used to build non-degenerate direction pairs."""
    dim = planted_matrix.shape[0]
    e_last = np.eye(dim)[-1]
    m = frame.basis.T @ planted_matrix  # shadow = m K0 in frame coordinates
    kernel = np.linalg.solve(planted_matrix, ell)
    w_hat = kernel - kernel[-1] * e_last  # component inside e_d-perp
    w_norm = np.linalg.norm(w_hat)
    if w_norm < 1e-12:
        return None  # ell parallel to the planted axis image
    w_hat = w_hat / w_norm
    axis_true = canonical_direction(frame.basis @ (m @ e_last))
    # hyperplane of revolution of the shadow: image of e_d-perp meet w-perp
    v3 = complement_basis(np.column_stack([e_last, w_hat]))
    h_basis = orthonormalize(m @ v3)
    n_shadow = complement_basis(h_basis)[:, 0]
    n_true = canonical_direction(frame.basis @ n_shadow)
    return axis_true, n_true


def _trial_lemma_35(trial, dim, seed, tol):
    rng = child_rng(seed, 35, trial)
    t1 = float(rng.uniform(0.8, 1.3))
    r1 = float(rng.uniform(0.8, 1.2))
    spec = {"kind": "affine-image", "cond": 4.0,
            "body": {"kind": "revolution", "dim": dim,
                     "profile": {"type": "piecewise-linear",
                                 "knots_t": [0.0, t1], "knots_r": [r1, 0.0]}}}
    body = gen_body(spec, seed=seed + 104729 * trial)
    axis = body.meta["axis"]
    a_mat = body.meta["planted_matrix"]
    floor = np.deg2rad(15.0)

    ell1 = _sample_with_floor(rng, dim, [axis.direction], floor)
    if ell1 is None:
        return None, {"reason": "no direction clear of the axis"}
    shadow1, frame1 = project_along(body, ell1)
    true1 = _true_shadow_frame_data(a_mat, ell1, frame1)
    if true1 is None:
        return None, {"reason": "degenerate first shadow"}
    _axis1_true, n1_true = true1

    # second direction orthogonal to N_l1 so the lemma hypothesis holds
    comp_n = complement_basis(n1_true.reshape(-1, 1))
    ell2 = None
    for _ in range(MAX_RESAMPLE):
        cand = comp_n @ _unit(rng, dim - 1)
        if (_angle_between_lines(cand, ell1) >= floor
                and _angle_between_lines(cand, axis.direction) >= floor):
            ell2 = cand
            break
    if ell2 is None:
        return None, {"reason": "no second direction satisfying the floors"}

    data1 = _shadow_axis_data(body, ell1, seed)
    data2 = _shadow_axis_data(body, ell2, seed)
    if data1 is None or data2 is None:
        return False, {"reason": "shadow axis not certified"}
    l1_meas, n1_meas, _ = data1
    l2_meas, _n2, _ = data2

    p_basis = orthonormalize(np.column_stack([ell1, ell2]))
    proj = np.eye(dim) - p_basis @ p_basis.T
    v1 = proj @ l1_meas
    v2 = proj @ l2_meas
    if min(np.linalg.norm(v1), np.linalg.norm(v2)) < 0.2:
        return None, {"reason": "axis nearly inside the projection plane"}
    angle = _angle_between_lines(v1, v2)
    hyp_angle = float(np.arcsin(np.clip(abs(float(n1_true @ ell2)), 0.0, 1.0)))
    meas_gap = _angle_between_lines(n1_meas, n1_true)
    return angle <= tol, {"projected_axis_angle": angle,
                          "hypothesis_angle": hyp_angle,
                          "normal_measurement_gap": meas_gap}


# -- corollary 2.2 consistency and the section-4 criterion -------------------


def _trial_cor_22(trial, dim, seed, tol):
    rng = child_rng(seed, 22, trial)
    spec = {"kind": "ellipsoid", "dim": dim, "cond": 6.0,
            "center": (rng.normal(scale=0.4, size=dim)).tolist()}
    body = gen_body(spec, seed=seed + 31 * trial)
    dirs = sphere_directions(dim, 4, seed=seed + trial)
    shadow_resids = []
    canonicals = []
    for u in dirs:
        shadow, _ = project_along(body, u)
        _ok, resid = is_ellipsoid(shadow)
        shadow_resids.append(resid)
        canonicals.append(canonicalize(shadow)[0])
    pair_max = 0.0
    for i in range(len(canonicals)):
        for j in range(i + 1, len(canonicals)):
            v = linear_equivalent(canonicals[i], canonicals[j], restarts=4, seed=seed)
            pair_max = max(pair_max, v.residual)
    center, sym_resid = central_symmetry_center(body, seed=seed)
    center_gap = float(np.linalg.norm(center - body.ellipsoid.center))
    ok = (max(shadow_resids) <= 1e-6 and pair_max <= 1e-6 and sym_resid <= tol)
    return ok, {"max_shadow_residual": float(max(shadow_resids)),
                "max_pairwise_residual": pair_max,
                "symmetry_residual": sym_resid,
                "center_gap": center_gap}


def _trial_thm4(trial, dim, seed, tol):
    rng = child_rng(seed, 4, trial)
    kind = trial % 3
    if kind == 0:
        spec = {"kind": "ellipsoid", "dim": dim, "cond": 8.0}
        expect_ellipsoid = True
    elif kind == 1:
        spec = {"kind": "cube" if trial % 2 else "cross-polytope", "dim": dim}
        expect_ellipsoid = False
    else:
        spec = {"kind": "random-symmetric-polytope", "dim": dim, "points": 4 * dim}
        expect_ellipsoid = False
    body = gen_body(spec, seed=seed + 17 * trial)
    dirs = sphere_directions(dim, 6, seed=seed + trial)
    resids = []
    for u in dirs:
        shadow, _ = project_along(body, u)
        _ok, resid = is_ellipsoid(shadow, tol=tol, eps=1e-5)
        resids.append(resid)
    worst = float(max(resids))
    if expect_ellipsoid:
        ok = worst <= tol
    else:
        ok = worst >= 10.0 * tol
    return ok, {"kind": spec["kind"], "max_shadow_residual": worst,
                "expected_ellipsoid": expect_ellipsoid}


_SUITES = {
    "lemma-3.2": (_trial_lemma_32, dict(dim=3, tol=1e-6, min_dim=3)),
    "lemma-3.3": (_trial_lemma_33, dict(dim=4, tol=1e-3, min_dim=3)),
    "lemma-3.4-planarity": (_trial_lemma_34_planarity, dict(dim=3, tol=5e-3, min_dim=3)),
    "lemma-3.4-contrapositive": (_trial_lemma_34_contrapositive,
                                 dict(dim=3, tol=1e-2, min_dim=3)),
    "lemma-3.5": (_trial_lemma_35, dict(dim=5, tol=2e-2, min_dim=5, max_dim=5)),
    "cor-2.2-consistency": (_trial_cor_22, dict(dim=3, tol=1e-6, min_dim=3)),
    "thm-4-ellipsoid-criterion": (_trial_thm4, dict(dim=3, tol=1e-3, min_dim=3)),
}


def default_params(lemma_id):
    if lemma_id not in _SUITES:
        raise GeometryError(f"unknown lemma id {lemma_id!r}")
    return dict(_SUITES[lemma_id][1])


def verify(lemma_id, trials=20, dim=None, seed=1, tol=None):
    """Run one lemma suite and return its trial records."""
    if lemma_id not in _SUITES:
        raise GeometryError(f"unknown lemma id {lemma_id!r}")
    func, defaults = _SUITES[lemma_id]
    if trials < 1:
        raise GeometryError("trials must be >= 1")
    dim = defaults["dim"] if dim is None else int(dim)
    if dim < defaults.get("min_dim", 2):
        raise GeometryError(f"{lemma_id} needs dim >= {defaults['min_dim']}")
    if dim > defaults.get("max_dim", 16):
        raise GeometryError(f"{lemma_id} runs at dim <= {defaults['max_dim']}")
    tol = defaults["tol"] if tol is None else float(tol)

    records = []
    for trial in range(trials):
        start = time.perf_counter()
        outcome, info = func(trial, dim, seed, tol)
        elapsed = time.perf_counter() - start
        rec = TrialRecord(lemma_id=lemma_id, trial=trial, seed=seed,
                          params={"dim": dim, "tol": tol}, runtime=elapsed)
        if outcome is None:
            rec.skipped = True
            rec.skip_reason = f"skipped: degenerate ({info.get('reason', '')})"
        else:
            rec.passed = bool(outcome)
            rec.residuals = {k: v for k, v in info.items() if k != "reason"}
            if "kind" in info:
                rec.params["kind"] = info["kind"]
                rec.residuals.pop("kind", None)
        records.append(rec)
    return records


def summarize(records):
    """Aggregate verdict for a list of trial records; ``ok`` requires every
    non-skipped trial to pass and the skipped fraction to stay under 5%."""
    total = len(records)
    skipped = sum(1 for r in records if r.skipped)
    failed = sum(1 for r in records if not r.skipped and not r.passed)
    frac = skipped / total if total else 0.0
    return {"trials": total, "passed": total - skipped - failed,
            "failed": failed, "skipped": skipped,
            "skipped_fraction": frac,
            "ok": failed == 0 and frac <= MAX_SKIP_FRACTION}
