"""Geometry definition files.

A geometry file is JSON with a schema marker, a dictionary of named
B-spline surfaces, and a dictionary of named probes.  Probes are stored by
parametric coordinates so a round trip reproduces the same MappedArrays
without re-running projection.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError
from .bspline import BSplineSurface
from .mapping import MappedArray, parametric_map

SCHEMA_VERSION = 1


@dataclass
class GeometryModel:
    """Named surfaces plus named probes bound to them."""

    surfaces: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)
    probe_surface: dict = field(default_factory=dict)

    def add_surface(self, surface):
        self.surfaces[surface.name] = surface

    def add_probe(self, name, surface_name, mapped):
        if surface_name not in self.surfaces:
            raise ConfigError(f"probe {name!r} references unknown surface "
                              f"{surface_name!r}")
        mapped.check_compatible(self.surfaces[surface_name])
        self.probes[name] = mapped
        self.probe_surface[name] = surface_name

    def probe_points(self, name, control_points=None):
        mapped = self.probes[name]
        if control_points is None:
            control_points = self.surfaces[self.probe_surface[name]].control_points
        return mapped.apply(control_points)


def save_geometry(model, path):
    doc = {"schema": SCHEMA_VERSION, "surfaces": {}, "probes": {}}
    for name, srf in model.surfaces.items():
        doc["surfaces"][name] = {
            "degree_u": srf.degree_u,
            "degree_v": srf.degree_v,
            "knots_u": srf.knots_u.tolist(),
            "knots_v": srf.knots_v.tolist(),
            "control_points": srf.control_points.tolist(),
        }
    for name, mapped in model.probes.items():
        doc["probes"][name] = {
            "surface": model.probe_surface[name],
            "uv": mapped.parametric_coords.tolist(),
        }
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))


def load_geometry(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"geometry file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError(f"geometry file is not valid JSON: {err}") from err
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported geometry schema {doc.get('schema')!r}; "
            f"expected {SCHEMA_VERSION}"
        )
    model = GeometryModel()
    for name, spec in doc.get("surfaces", {}).items():
        model.add_surface(
            BSplineSurface(
                degree_u=int(spec["degree_u"]),
                degree_v=int(spec["degree_v"]),
                knots_u=np.asarray(spec["knots_u"], dtype=float),
                knots_v=np.asarray(spec["knots_v"], dtype=float),
                control_points=np.asarray(spec["control_points"], dtype=float),
                name=name,
            )
        )
    for name, spec in doc.get("probes", {}).items():
        surface_name = spec["surface"]
        if surface_name not in model.surfaces:
            raise ConfigError(
                f"probe {name!r} references unknown surface {surface_name!r}"
            )
        mapped = parametric_map(
            model.surfaces[surface_name], np.asarray(spec["uv"], dtype=float)
        )
        model.add_probe(name, surface_name, mapped)
    return model
