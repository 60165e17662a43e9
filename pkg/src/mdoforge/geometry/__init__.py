"""Geometry kernel: B-splines, mapped arrays, measures, camber meshes."""

from .bspline import (
    BSplineCurve,
    BSplineSurface,
    basis_matrix,
    clamped_knots,
    fit_curve,
    fit_surface,
    greville_abscissae,
)
from .camber import CamberMesh, build_camber_mesh, chordwise_sites
from .io import GeometryModel, load_geometry, save_geometry
from .mapping import (
    MappedArray,
    apply_map,
    parametric_grid_map,
    parametric_map,
    project_points,
)
from .measures import aspect_ratio, distance, grid_area, measure, polyline_length

__all__ = [
    "BSplineCurve",
    "BSplineSurface",
    "CamberMesh",
    "GeometryModel",
    "MappedArray",
    "apply_map",
    "aspect_ratio",
    "basis_matrix",
    "build_camber_mesh",
    "chordwise_sites",
    "clamped_knots",
    "distance",
    "fit_curve",
    "fit_surface",
    "greville_abscissae",
    "grid_area",
    "load_geometry",
    "measure",
    "parametric_grid_map",
    "parametric_map",
    "polyline_length",
    "project_points",
    "save_geometry",
]
