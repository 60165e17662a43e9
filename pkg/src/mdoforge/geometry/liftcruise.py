"""Parametric stand-in OML for the lift-plus-cruise configuration.

Wing and horizontal tail are cambered B-spline skins built from planform
parameters; the fuselage is a static body of revolution; eight lift-rotor
disks ride boom positions tied to the wing span, with one pusher disk at
the tail.  Fitting matrices are factored once at construction, so control
grids are differentiable functions of the design parameters (area, aspect
ratio, spanwise twist) with no solves inside the traced path.

Frame: x aft, y starboard, z up, origin at the nose.
"""

from dataclasses import dataclass, field

import numpy as np

from ..backend import jnp
from ..exceptions import ContractError
from .bspline import (
    BSplineSurface,
    basis_matrix,
    clamped_knots,
    greville_abscissae,
)
from .camber import CamberMesh, build_camber_mesh, chordwise_sites
from .io import GeometryModel
from .mapping import parametric_map

# Chordwise control-point count per skin and spanwise column count.  Nine
# cubic control points resolve the camber line to well under 0.1% chord.
N_CHORD_CP = 9
N_SPAN_CP = 9

TWIST_STATIONS = np.array([0.0, 0.25, 0.5, 0.75, 1.0])


def camber_line(x, camber=0.04, camber_pos=0.4):
    """Four-digit-style camber line z_c(x/c) on [0, 1]."""
    x = jnp.asarray(x)
    m, p = camber, camber_pos
    fwd = m / p**2 * (2.0 * p * x - x * x)
    aft = m / (1.0 - p) ** 2 * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x)
    return jnp.where(x < p, fwd, aft)


def thickness_profile(x, thickness=0.12):
    """Four-digit half-thickness distribution with a closed trailing edge."""
    x = jnp.asarray(x)
    yt = (
        0.2969 * jnp.sqrt(jnp.maximum(x, 0.0))
        - 0.1260 * x
        - 0.3516 * x**2
        + 0.2843 * x**3
        - 0.1036 * x**4
    )
    return 5.0 * thickness * yt


@dataclass(frozen=True)
class SurfaceSkeleton:
    """Knots, degrees and fit matrices for one parametric skin pair."""

    name: str
    knots_u: np.ndarray
    knots_v: np.ndarray
    fit_u: np.ndarray  # inverse chordwise collocation matrix
    fit_v: np.ndarray  # inverse spanwise collocation matrix
    sites_u: np.ndarray  # chordwise sample stations s in [0, 1]
    sites_v: np.ndarray  # spanwise sample stations eta in [0, 1]
    camber: float
    camber_pos: float
    thickness: float

    @classmethod
    def build(cls, name, camber, camber_pos, thickness):
        ku = clamped_knots(N_CHORD_CP, 3)
        kv = clamped_knots(N_SPAN_CP, 3)
        gu = greville_abscissae(ku, 3)
        gv = greville_abscissae(kv, 3)
        # Chordwise samples at cosine stations for leading-edge resolution;
        # collocation still happens at the Greville parameter sites.
        su = chordwise_sites(N_CHORD_CP - 1)
        sv = gv  # spanwise samples at Greville sites keep linear laws exact
        fit_u = np.linalg.inv(basis_matrix(ku, 3, gu))
        fit_v = np.linalg.inv(basis_matrix(kv, 3, gv))
        return cls(
            name=name,
            knots_u=ku,
            knots_v=kv,
            fit_u=fit_u,
            fit_v=fit_v,
            sites_u=su,
            sites_v=sv,
            camber=camber,
            camber_pos=camber_pos,
            thickness=thickness,
        )

    def control_grids(self, area, aspect_ratio, twist, x_le_root, z_ref,
                      taper):
        """Upper and lower control grids as jax arrays, shape (nu, nv, 3).

        twist holds section pitch (rad, positive nose-up) at TWIST_STATIONS
        of |2 eta - 1|, mirrored about the centerline and applied as a shear
        about the local quarter chord (small-angle).
        """
        area = jnp.asarray(area)
        aspect_ratio = jnp.asarray(aspect_ratio)
        twist = jnp.asarray(twist)
        span = jnp.sqrt(area * aspect_ratio)
        c_root = 2.0 * area / (span * (1.0 + taper))

        xi = 2.0 * self.sites_v - 1.0  # -1 .. 1 across the span
        y = 0.5 * span * xi
        chord = c_root * (1.0 - (1.0 - taper) * jnp.abs(xi))
        x_le = x_le_root + 0.25 * (c_root - chord)
        theta = jnp.interp(jnp.abs(xi), TWIST_STATIONS, twist)

        s = self.sites_u[:, None]
        zc = camber_line(s, self.camber, self.camber_pos)
        ht = thickness_profile(s, self.thickness)

        x = x_le[None, :] + s * chord[None, :]
        yy = jnp.broadcast_to(y[None, :], x.shape)
        # pitch shear about the quarter chord, positive twist lifts the LE
        dz = (x - (x_le + 0.25 * chord)[None, :]) * (-jnp.tan(theta)[None, :])
        z_up = z_ref + (zc + ht) * chord[None, :] + dz
        z_lo = z_ref + (zc - ht) * chord[None, :] + dz

        fu = jnp.asarray(self.fit_u)
        fv = jnp.asarray(self.fit_v)

        def fit(sample_grid):
            return fu @ sample_grid @ fv.T

        up = jnp.stack([fit(x), fit(yy), fit(z_up)], axis=-1)
        lo = jnp.stack([fit(x), fit(yy), fit(z_lo)], axis=-1)
        return up, lo

    def surfaces(self, area, aspect_ratio, twist, x_le_root, z_ref, taper):
        """Concrete numpy-backed surfaces (for export and map construction)."""
        up, lo = self.control_grids(
            area, aspect_ratio, twist, x_le_root, z_ref, taper
        )
        common = dict(degree_u=3, degree_v=3, knots_u=self.knots_u,
                      knots_v=self.knots_v)
        return (
            BSplineSurface(control_points=np.asarray(up),
                           name=f"{self.name}_upper", **common),
            BSplineSurface(control_points=np.asarray(lo),
                           name=f"{self.name}_lower", **common),
        )


def _fuselage_surface(length, radius):
    """Static body of revolution with an elliptic-ish radius law."""
    ns, na = 9, 9
    s = np.linspace(0.0, 1.0, ns)
    xi = 2.0 * s - 1.0
    r = radius * np.maximum(1.0 - xi * xi, 0.0) ** 0.6
    psi = np.linspace(0.0, 2.0 * np.pi, na)
    X = np.broadcast_to((s * length)[:, None], (ns, na))
    Y = r[:, None] * np.cos(psi)[None, :]
    Z = r[:, None] * np.sin(psi)[None, :]
    grid = np.stack([X, Y, Z], axis=-1)
    from .bspline import fit_surface

    return fit_surface(grid, 3, 3, name="fuselage")


class LiftCruiseGeometry:
    """Geometry engine for one aircraft instance.

    Construction freezes discretization (map matrices, mesh shapes) at the
    baseline parameters; the *_points and measure methods are pure functions
    of the design parameters and can be traced.
    """

    def __init__(self, config):
        g = config
        self.taper = float(g.get("wing_taper", 0.6))
        self.x_wing = float(g.get("wing_x_le", 4.0))
        self.z_wing = float(g.get("wing_z", 1.3))
        self.ht_taper = float(g.get("ht_taper", 0.8))
        self.x_ht = float(g.get("ht_x_le", 8.6))
        self.z_ht = float(g.get("ht_z", 1.5))
        self.baseline = {
            "wing_area": float(g["wing_area"]),
            "wing_aspect_ratio": float(g["wing_aspect_ratio"]),
            "ht_area": float(g.get("ht_area", 4.0)),
            "ht_aspect_ratio": float(g.get("ht_aspect_ratio", 5.0)),
        }
        self.n_chord_panels = int(g.get("mesh_chord_panels", 5))
        self.n_span_panels = int(g.get("mesh_span_panels", 15))

        self.rotor_rows_x = np.asarray(g.get("rotor_rows_x", [2.6, 6.4]),
                                       dtype=float)
        self.rotor_span_fractions = np.asarray(
            g.get("rotor_span_fractions", [0.34, 0.78]), dtype=float
        )
        self.rotor_z = float(g.get("rotor_z", 1.75))
        self.pusher_x = float(g.get("pusher_x", 9.4))
        self.pusher_z = float(g.get("pusher_z", 1.0))
        self.fuselage_length = float(g.get("fuselage_length", 9.2))
        self.fuselage_radius = float(g.get("fuselage_radius", 0.85))

        self.wing_skel = SurfaceSkeleton.build(
            "wing",
            camber=float(g.get("wing_camber", 0.04)),
            camber_pos=float(g.get("wing_camber_pos", 0.4)),
            thickness=float(g.get("wing_thickness", 0.12)),
        )
        self.ht_skel = SurfaceSkeleton.build(
            "ht",
            camber=0.0,
            camber_pos=0.4,
            thickness=float(g.get("ht_thickness", 0.10)),
        )

        # Baseline surfaces pin the parameterization for maps and probes.
        wing_up, wing_lo = self.wing_skel.surfaces(
            self.baseline["wing_area"],
            self.baseline["wing_aspect_ratio"],
            np.zeros(5),
            self.x_wing,
            self.z_wing,
            self.taper,
        )
        ht_up, ht_lo = self.ht_skel.surfaces(
            self.baseline["ht_area"],
            self.baseline["ht_aspect_ratio"],
            np.zeros(5),
            self.x_ht,
            self.z_ht,
            self.ht_taper,
        )
        self.fuselage = _fuselage_surface(self.fuselage_length,
                                          self.fuselage_radius)

        self.wing_mesh_def = build_camber_mesh(
            wing_up, wing_lo, self.n_chord_panels, self.n_span_panels
        )
        self.ht_mesh_def = build_camber_mesh(
            ht_up, ht_lo, self.n_chord_panels, self.n_span_panels
        )
        # Tip probes at the quarter-chord parameter site of each extreme
        # spanwise station; span is the distance between them.
        self._wing_tip_maps = (
            parametric_map(wing_up, [[0.25, 0.0]]),
            parametric_map(wing_up, [[0.25, 1.0]]),
        )
        self._fus_end_maps = (
            parametric_map(self.fuselage, [[0.0, 0.0]]),
            parametric_map(self.fuselage, [[1.0, 0.0]]),
        )

    # ---- differentiable evaluation ------------------------------------

    def wing_grids(self, wing_area, wing_aspect_ratio, wing_twist):
        return self.wing_skel.control_grids(
            wing_area, wing_aspect_ratio, wing_twist,
            self.x_wing, self.z_wing, self.taper,
        )

    def ht_grids(self, ht_area=None, ht_aspect_ratio=None, deflection=0.0):
        """Tail control grids; deflection pitches the whole surface (rad,
        positive nose-up) about its quarter chord."""
        return self.ht_skel.control_grids(
            self.baseline["ht_area"] if ht_area is None else ht_area,
            self.baseline["ht_aspect_ratio"]
            if ht_aspect_ratio is None else ht_aspect_ratio,
            deflection * jnp.ones(5),
            self.x_ht,
            self.z_ht,
            self.ht_taper,
        )

    def wing_mesh(self, wing_area, wing_aspect_ratio, wing_twist):
        up, lo = self.wing_grids(wing_area, wing_aspect_ratio, wing_twist)
        return self.wing_mesh_def.points(up, lo)

    def ht_mesh(self, ht_area=None, ht_aspect_ratio=None, deflection=0.0):
        up, lo = self.ht_grids(ht_area, ht_aspect_ratio, deflection)
        return self.ht_mesh_def.points(up, lo)

    def wing_span_measure(self, wing_up_cp):
        left = self._wing_tip_maps[0].apply(wing_up_cp)[0]
        right = self._wing_tip_maps[1].apply(wing_up_cp)[0]
        d = right - left
        return jnp.sqrt(jnp.sum(d * d))

    def fuselage_length_measure(self):
        nose = self._fus_end_maps[0].apply(self.fuselage.control_points)[0]
        tail = self._fus_end_maps[1].apply(self.fuselage.control_points)[0]
        return float(np.linalg.norm(tail - nose))

    def lift_hub_positions(self, span):
        """Eight lift-rotor hub positions, differentiable in span.

        Ordering: rows (front, rear) x sides (left -y, right +y) x
        (inner, outer) -> index = row*4 + side*2 + station.
        """
        half = 0.5 * span
        hubs = []
        for x_row in self.rotor_rows_x:
            for sign in (-1.0, 1.0):
                for frac in self.rotor_span_fractions:
                    hubs.append(
                        jnp.stack(
                            [
                                jnp.asarray(x_row),
                                sign * frac * half,
                                jnp.asarray(self.rotor_z),
                            ]
                        )
                    )
        return jnp.stack(hubs)

    def pusher_hub_position(self):
        return jnp.array([self.pusher_x, 0.0, self.pusher_z])

    # ---- export --------------------------------------------------------

    def export_model(self, wing_area=None, wing_aspect_ratio=None,
                     wing_twist=None, lift_radius=1.5, pusher_radius=1.35):
        """Concrete GeometryModel at given (default baseline) parameters."""
        area = self.baseline["wing_area"] if wing_area is None else wing_area
        ar = (self.baseline["wing_aspect_ratio"]
              if wing_aspect_ratio is None else wing_aspect_ratio)
        twist = np.zeros(5) if wing_twist is None else np.asarray(wing_twist)

        model = GeometryModel()
        wing_up, wing_lo = self.wing_skel.surfaces(
            area, ar, twist, self.x_wing, self.z_wing, self.taper
        )
        ht_up, ht_lo = self.ht_skel.surfaces(
            self.baseline["ht_area"], self.baseline["ht_aspect_ratio"],
            np.zeros(5), self.x_ht, self.z_ht, self.ht_taper,
        )
        for srf in (wing_up, wing_lo, ht_up, ht_lo, self.fuselage):
            model.add_surface(srf)
        model.add_probe("wing_tip_left", "wing_upper",
                        parametric_map(wing_up, [[0.25, 0.0]]))
        model.add_probe("wing_tip_right", "wing_upper",
                        parametric_map(wing_up, [[0.25, 1.0]]))
        model.add_probe("fuselage_nose", "fuselage",
                        parametric_map(self.fuselage, [[0.0, 0.0]]))
        model.add_probe("fuselage_tail", "fuselage",
                        parametric_map(self.fuselage, [[1.0, 0.0]]))

        span = float(np.sqrt(area * ar))
        hubs = np.asarray(self.lift_hub_positions(span))
        disks = np.vstack([hubs, np.asarray(self.pusher_hub_position())])
        radii = [lift_radius] * 8 + [pusher_radius]
        for k, (hub, radius) in enumerate(zip(disks, radii)):
            name = f"rotor_disk_{k}" if k < 8 else "pusher_disk"
            cp = np.array(
                [
                    [hub + [-radius, -radius, 0.0], hub + [-radius, radius, 0.0]],
                    [hub + [radius, -radius, 0.0], hub + [radius, radius, 0.0]],
                ]
            )
            disk = BSplineSurface(
                degree_u=1, degree_v=1,
                knots_u=clamped_knots(2, 1), knots_v=clamped_knots(2, 1),
                control_points=cp, name=name,
            )
            model.add_surface(disk)
            model.add_probe(f"{name}_hub", name,
                            parametric_map(disk, [[0.5, 0.5]]))
            model.add_probe(f"{name}_tip", name,
                            parametric_map(disk, [[1.0, 0.5]]))
        return model


def planform_area(mesh_points):
    """Reference (projected) planform area of a camber mesh."""
    from .measures import grid_area

    pts = jnp.asarray(mesh_points)
    flat = jnp.concatenate([pts[..., :2], jnp.zeros_like(pts[..., :1])], axis=-1)
    return grid_area(flat)
