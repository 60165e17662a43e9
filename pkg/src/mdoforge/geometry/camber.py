"""Camber mesh construction for lifting surfaces.

The camber mesh is the midsurface between the upper and lower skins,
discretized as a structured grid.  Upper and lower points are taken at
matched parametric coordinates, so every mesh node is the midpoint of a
matched skin pair and the whole mesh remains a linear map of the two
control grids.
"""

from dataclasses import dataclass

import numpy as np

from ..backend import jnp
from ..exceptions import DegenerateGeometryError
from .mapping import MappedArray, parametric_grid_map

# Skins closer than this (relative to mean chordwise extent) are treated as
# a collapsed section rather than a thin airfoil.
_THICKNESS_FLOOR = 1e-6


def chordwise_sites(n_panels):
    """Cosine-clustered chordwise parameter sites, n_panels + 1 values."""
    k = np.arange(n_panels + 1)
    return 0.5 * (1.0 - np.cos(np.pi * k / n_panels))


@dataclass(frozen=True)
class CamberMesh:
    """Midsurface grid tied to an upper and a lower skin surface."""

    upper_map: MappedArray
    lower_map: MappedArray
    n_chord: int
    n_span: int

    @property
    def grid_shape(self):
        return (self.n_chord + 1, self.n_span + 1)

    def points(self, upper_control_points, lower_control_points):
        """Evaluate the mesh, shape (n_chord+1, n_span+1, 3)."""
        up = self.upper_map.apply(upper_control_points)
        lo = self.lower_map.apply(lower_control_points)
        pts = 0.5 * (up + lo)
        return jnp.reshape(pts, (*self.grid_shape, 3))


def build_camber_mesh(upper, lower, n_chord, n_span):
    """Create a CamberMesh between two skins sharing a parameterization.

    Chordwise sites are cosine clustered; spanwise sites are uniform.
    Raises DegenerateGeometryError if the skins coincide (zero thickness
    everywhere), which would make the midsurface meaningless.
    """
    us = chordwise_sites(n_chord)
    vs = np.linspace(0.0, 1.0, n_span + 1)
    upper_map = parametric_grid_map(upper, us, vs)
    lower_map = parametric_grid_map(lower, us, vs)

    up = upper_map.apply(upper.control_points)
    lo = lower_map.apply(lower.control_points)
    gap = np.abs(np.asarray(up) - np.asarray(lo)).max()
    extent = np.linalg.norm(np.asarray(up).max(axis=0) - np.asarray(up).min(axis=0))
    if extent <= 0.0 or gap < _THICKNESS_FLOOR * extent:
        raise DegenerateGeometryError(
            "upper and lower skins coincide; camber mesh undefined"
        )
    return CamberMesh(
        upper_map=upper_map, lower_map=lower_map, n_chord=n_chord, n_span=n_span
    )
