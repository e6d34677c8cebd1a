"""Computational toolkit for convex-body shadows: minimal enclosing
ellipsoids, canonicalization, affine equivalence, bodies of revolution, and a
deterministic harness replaying the supporting geometric lemmas."""

from .bodies import AffineMap, ConvexBody, Ellipsoid, GeometryError, Line, Subspace
from .equivalence import (EquivalenceVerdict, affine_equivalent,
                          central_symmetry_center, linear_equivalent)
from .generators import gen_body
from .mvee import MveeResult, canonicalize, is_ellipsoid, mvee, mvee_of_body
from .ops import (diameter, oblique_project, project, project_along, slice_body,
                  support, support_batch, support_distance, to_point_cloud)
from .revolution import (RevolutionCertificate, ShadowBoundary,
                         affine_revolution_axis, predicted_projection_axis,
                         project_revolution, revolution_axis,
                         revolution_residual, shadow_boundary)
from .scan import ScanReport, scan_projection_field
from .verify import TrialRecord, summarize, verify

__all__ = [
    "AffineMap", "ConvexBody", "Ellipsoid", "GeometryError", "Line", "Subspace",
    "EquivalenceVerdict", "affine_equivalent", "central_symmetry_center",
    "linear_equivalent", "gen_body", "MveeResult", "canonicalize", "is_ellipsoid",
    "mvee", "mvee_of_body", "diameter", "oblique_project", "project",
    "project_along", "slice_body", "support", "support_batch", "support_distance",
    "to_point_cloud", "RevolutionCertificate", "ShadowBoundary",
    "affine_revolution_axis", "predicted_projection_axis", "project_revolution",
    "revolution_axis", "revolution_residual", "shadow_boundary", "ScanReport",
    "scan_projection_field", "TrialRecord", "summarize", "verify",
]

__version__ = "0.1.0"
