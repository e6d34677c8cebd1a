"""Projection-field scan: for sampled directions u, the shadow of a symmetric
body, its centered least-volume ellipsoid F(u), the normalizing map beta_u,
the canonical shadow, pairwise equivalence residuals between canonical
shadows, and each shadow's revolution-axis data (L, H, N lines)."""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, GeometryError, Line, canonical_direction
from .equivalence import linear_equivalent
from .mvee import canonicalize, is_ellipsoid
from .ops import project_along, support_batch
from .revolution import affine_revolution_axis
from .sampling import complement_basis, sphere_directions

DIGEST_DIRS = 96
DIGEST_SEED = 987


def _shadow_digest(body):
    dirs = sphere_directions(body.dim, DIGEST_DIRS, seed=DIGEST_SEED)
    vals = support_batch(body, dirs)
    blob = ",".join(f"{v:.12e}" for v in vals).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ShadowRecord:
    """Per-direction scan data; lines are in ambient coordinates."""

    direction: np.ndarray
    mvee: object  # MveeResult for F(u), in shadow coordinates
    beta: object  # AffineMap normalizing F(u) to the unit ball
    canonical_digest: str
    is_ellipsoid_residual: float
    axis: Line = None          # L_l, or None when no axis was certified
    axis_degenerate: bool = True
    hyperplane_normal: np.ndarray = None
    normal_line: Line = None   # N_l = H_l-perp meet l-perp

    def to_json_dict(self):
        out = {"direction": self.direction.tolist(),
               "F": self.mvee.ellipsoid.to_json_dict(),
               "dual_gap": self.mvee.dual_gap,
               "beta": self.beta.to_json_dict(),
               "canonical_digest": self.canonical_digest,
               "is_ellipsoid_residual": self.is_ellipsoid_residual,
               "axis_degenerate": self.axis_degenerate}
        out["axis"] = None if self.axis is None else self.axis.direction.tolist()
        out["N"] = None if self.normal_line is None else self.normal_line.direction.tolist()
        return out


@dataclass(frozen=True)
class ScanReport:
    body_id: str
    directions: np.ndarray
    shadows: list
    pairwise_residuals: np.ndarray
    verdict: dict = field(default_factory=dict)

    def to_json_dict(self):
        return {"body_id": self.body_id,
                "directions": self.directions.tolist(),
                "shadows": [s.to_json_dict() for s in self.shadows],
                "pairwise_residuals": self.pairwise_residuals.tolist(),
                "verdict": self.verdict}


def scan_projection_field(body, m=6, seed=0, directions=None, body_id="body",
                          equiv_restarts=12, equiv_tol=1e-3, ellipsoid_tol=1e-3,
                          axis_tol=1e-3):
    """Scan the field of shadows of a symmetric body.

    For each sampled direction: the orthogonal shadow, its centered minimal
    ellipsoid and normalizer, a digest of the canonical shadow, an
    is-ellipsoid residual, and the shadow's revolution axis L, hyperplane of
    revolution H, and normal N = H-perp meet l-perp (when an axis exists).
    Pairwise linear-equivalence residuals between canonical shadows fill a
    symmetric matrix with zero diagonal.
    """
    if not body.symmetric:
        raise GeometryError("projection-field scan expects a symmetric body")
    if directions is None:
        if m < 2:
            raise GeometryError("need at least two scan directions")
        directions = sphere_directions(body.dim, m, seed=seed)
    else:
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        m = directions.shape[0]

    shadows = []
    canonicals = []
    for u in directions:
        shadow, frame = project_along(body, u)
        canon, beta, fit = canonicalize(shadow)
        _ok, resid = is_ellipsoid(shadow, tol=ellipsoid_tol)
        cert = affine_revolution_axis(shadow, accept_tol=axis_tol, seed=seed)
        if cert is None or cert.degenerate:
            axis_line = None
            normal_line = None
            hyper_n = None
            degenerate = True
        else:
            axis_line = Line(canonical_direction(frame.basis @ cert.axis.direction))
            n_shadow = complement_basis(cert.hyperplane.basis)[:, 0]
            hyper_n = frame.basis @ n_shadow
            normal_line = Line(canonical_direction(hyper_n))
            degenerate = False
        shadows.append(ShadowRecord(direction=u, mvee=fit, beta=beta,
                                    canonical_digest=_shadow_digest(canon),
                                    is_ellipsoid_residual=resid,
                                    axis=axis_line, axis_degenerate=degenerate,
                                    hyperplane_normal=hyper_n,
                                    normal_line=normal_line))
        canonicals.append(canon)

    pairwise = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            verdict = linear_equivalent(canonicals[i], canonicals[j],
                                        tol=equiv_tol, restarts=equiv_restarts,
                                        seed=seed)
            pairwise[i, j] = pairwise[j, i] = verdict.residual

    max_resid = float(np.max([s.is_ellipsoid_residual for s in shadows]))
    verdict = {
        "all_shadows_ellipsoidal": bool(max_resid <= ellipsoid_tol),
        "max_is_ellipsoid_residual": max_resid,
        "max_pairwise_residual": float(pairwise.max()) if m > 1 else 0.0,
        "any_nondegenerate_axis": bool(any(not s.axis_degenerate for s in shadows)),
    }
    return ScanReport(body_id=body_id, directions=directions, shadows=shadows,
                      pairwise_residuals=pairwise, verdict=verdict)
