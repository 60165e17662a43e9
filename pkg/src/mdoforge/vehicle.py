"""Mass properties, structural-mass regression, frames, and trim residual.

Two frames appear throughout.  The design frame (geometry) has x aft, y
starboard, z up, origin at the nose.  The body frame used for flight
mechanics has x forward, y starboard, z down, origin at the center of
gravity.  Steady segments carry zero angular velocity, so the trim residual
reduces to specific force and specific moment.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .acoustics import AcousticConfig
from .airfoil import PolarModel
from .backend import jnp
from .exceptions import ConfigError, ContractError
from .geometry.liftcruise import LiftCruiseGeometry
from .powertrain import MotorSizing

GRAVITY = 9.80665
VEHICLE_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# frames

def design_to_body_points(points, cg_design):
    """Map design-frame points to body axes centered at the CG."""
    points = jnp.asarray(points)
    rel = points - jnp.asarray(cg_design)
    return jnp.stack([-rel[..., 0], rel[..., 1], -rel[..., 2]], axis=-1)


def design_to_body_vector(vec):
    """Rotate a design-frame vector (x aft, z up) into body axes."""
    vec = jnp.asarray(vec)
    return jnp.stack([-vec[..., 0], vec[..., 1], -vec[..., 2]], axis=-1)


def gravity_force_body(mass, pitch):
    """Weight in body axes for pitch attitude (level wings, no sideslip)."""
    w = mass * GRAVITY
    return jnp.stack([-w * jnp.sin(pitch), 0.0 * pitch, w * jnp.cos(pitch)])


# ---------------------------------------------------------------------------
# mass properties

@dataclass(frozen=True)
class MassProperties:
    """Mass, CG (body or design frame as documented by the caller), and
    inertia tensor about the CG."""

    mass: float
    cg: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cg", jnp.asarray(self.cg, dtype=jnp.float64))
        object.__setattr__(
            self, "inertia", jnp.asarray(self.inertia, dtype=jnp.float64)
        )


def point_mass(mass, position, inertia=None):
    if inertia is None:
        inertia = jnp.zeros((3, 3))
    return MassProperties(mass=mass, cg=jnp.asarray(position), inertia=inertia)


def _parallel_axis(inertia, mass, offset):
    d = jnp.asarray(offset)
    d2 = jnp.dot(d, d)
    return inertia + mass * (d2 * jnp.eye(3) - jnp.outer(d, d))


def aggregate_mass(components):
    """Combine named (id, MassProperties) pairs about the combined CG.

    Components are summed in sorted-id order so any input ordering produces
    bit-identical totals.
    """
    items = sorted(components, key=lambda kv: kv[0])
    if not items:
        raise ContractError("aggregate_mass requires at least one component")
    names = [k for k, _ in items]
    if len(set(names)) != len(names):
        raise ContractError(f"duplicate component ids in {names}")
    total = sum(mp.mass for _, mp in items)
    cg = sum(mp.mass * mp.cg for _, mp in items) / total
    inertia = jnp.zeros((3, 3))
    for _, mp in items:
        inertia = inertia + _parallel_axis(mp.inertia, mp.mass, mp.cg - cg)
    return MassProperties(mass=total, cg=cg, inertia=inertia)


# ---------------------------------------------------------------------------
# structural regression

REGRESSION_INPUTS = (
    "wing_area",
    "wing_aspect_ratio",
    "fuselage_length",
    "cruise_speed",
    "battery_mass",
    "ht_area",
    "vt_area",
)


@dataclass(frozen=True)
class StructuralRegression:
    """Affine structural mass and CG model about a trained baseline.

    Sensitivities are synthetic, physically signed placeholders (documented
    in the vehicle file); the prediction at the baseline inputs reproduces
    the baseline outputs exactly.
    """

    baseline_inputs: np.ndarray
    baseline_mass: float
    baseline_cg_x: float
    mass_sensitivity: np.ndarray
    cg_sensitivity: np.ndarray
    trained_fraction: float = 0.10
    valid_fraction: float = 0.25

    def __post_init__(self):
        for name in ("baseline_inputs", "mass_sensitivity", "cg_sensitivity"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (len(REGRESSION_INPUTS),):
                raise ConfigError(
                    f"{name} must have {len(REGRESSION_INPUTS)} entries"
                )
            object.__setattr__(self, name, arr)

    def predict(self, inputs):
        """Pure affine prediction: (structural mass, cg x). Safe under jit."""
        delta = jnp.asarray(inputs) - self.baseline_inputs
        mass = self.baseline_mass + jnp.dot(self.mass_sensitivity, delta)
        cg_x = self.baseline_cg_x + jnp.dot(self.cg_sensitivity, delta)
        return mass, cg_x

    def predict_checked(self, inputs):
        """Driver-level prediction with the trained-box checks applied."""
        inputs = np.asarray(inputs, dtype=float)
        rel = np.abs(inputs - self.baseline_inputs) / np.abs(self.baseline_inputs)
        if np.any(rel > self.valid_fraction):
            bad = [REGRESSION_INPUTS[i] for i in np.where(rel > self.valid_fraction)[0]]
            raise ContractError(
                f"regression inputs {bad} outside the valid box "
                f"(+/-{self.valid_fraction:.0%} of baseline)"
            )
        if np.any(rel > self.trained_fraction):
            soft = [REGRESSION_INPUTS[i] for i in np.where(rel > self.trained_fraction)[0]]
            warnings.warn(
                f"regression inputs {soft} beyond the trained "
                f"+/-{self.trained_fraction:.0%} box; extrapolating",
                stacklevel=2,
            )
        mass, cg_x = self.predict(inputs)
        if float(mass) <= 0.0:
            raise ContractError(f"regression predicts non-positive mass {float(mass)}")
        return mass, cg_x

    @classmethod
    def from_config(cls, cfg):
        try:
            baseline = [cfg["baseline"][k] for k in REGRESSION_INPUTS]
            mass_sens = [cfg["mass_sensitivity"][k] for k in REGRESSION_INPUTS]
            cg_sens = [cfg["cg_sensitivity"][k] for k in REGRESSION_INPUTS]
            return cls(
                baseline_inputs=np.array(baseline, dtype=float),
                baseline_mass=float(cfg["baseline_mass"]),
                baseline_cg_x=float(cfg["baseline_cg_x"]),
                mass_sensitivity=np.array(mass_sens, dtype=float),
                cg_sensitivity=np.array(cg_sens, dtype=float),
            )
        except KeyError as err:
            raise ConfigError(f"regression config missing key {err}") from err


# ---------------------------------------------------------------------------
# trim residual

def trim_residual(force, moment, mass_props, angular_velocity=None,
                  velocity=None):
    """Six-component steady-flight residual.

    [F/m - omega x v ; I^-1 (M - omega x (I omega))].  Forces and moments are
    body-frame totals including gravity, taken about the CG.
    """
    force = jnp.asarray(force)
    moment = jnp.asarray(moment)
    omega = jnp.zeros(3) if angular_velocity is None else jnp.asarray(angular_velocity)
    vel = jnp.zeros(3) if velocity is None else jnp.asarray(velocity)
    linear = force / mass_props.mass - jnp.cross(omega, vel)
    inertia = mass_props.inertia
    angular = jnp.linalg.solve(
        inertia, moment - jnp.cross(omega, inertia @ omega)
    )
    return jnp.concatenate([linear, angular])


def check_inertia(inertia, tol=1e-9):
    """Validate symmetry and invertibility before entering traced code."""
    inertia = np.asarray(inertia, dtype=float)
    if not np.allclose(inertia, inertia.T, atol=tol):
        raise ContractError("inertia tensor must be symmetric")
    eig = np.linalg.eigvalsh(inertia)
    if np.min(eig) <= tol * max(1.0, np.max(np.abs(eig))):
        raise ContractError(f"inertia tensor is singular (eigenvalues {eig})")
    return inertia


# ---------------------------------------------------------------------------
# vehicle assembly

def load_vehicle_config(path):
    """Read and minimally validate a vehicle JSON file."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"vehicle file not found: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"vehicle file is not valid JSON: {err}") from err
    if cfg.get("schema") != VEHICLE_SCHEMA_VERSION:
        raise ConfigError(
            f"vehicle schema {cfg.get('schema')!r} != {VEHICLE_SCHEMA_VERSION}"
        )
    for key in ("geometry", "airfoil", "rotors", "motors", "battery",
                "masses", "regression", "drag_areas", "acoustics", "design"):
        if key not in cfg:
            raise ConfigError(f"vehicle file missing section '{key}'")
    return cfg


class VehicleModel:
    """Immutable model bundle: geometry, polars, blades, motors, masses.

    Everything that varies during optimization lives in a separate design
    state dict (see baseline_state); methods taking a state are pure and
    trace-safe.
    """

    def __init__(self, cfg):
        self.config = cfg
        self.geometry = LiftCruiseGeometry(cfg["geometry"])
        self.polar = PolarModel.from_config(cfg["airfoil"])

        rotors = cfg["rotors"]
        self.lift_blade_count = int(rotors["lift"]["blade_count"])
        self.lift_hub_fraction = float(rotors["lift"]["hub_radius_fraction"])
        self.pusher_blade_count = int(rotors["pusher"]["blade_count"])
        self.pusher_hub_fraction = float(rotors["pusher"]["hub_radius_fraction"])
        self.pusher_twist_shape = np.asarray(
            rotors["pusher"]["twist_shape"], dtype=float
        )
        self.pusher_chord_cp = np.asarray(
            rotors["pusher"]["chord_cp"], dtype=float
        )
        # alternating spin directions so reaction torques can cancel
        self.lift_spin = np.array(rotors["lift"].get(
            "spin", [1, -1, -1, 1, -1, 1, 1, -1]), dtype=float)

        self.battery_specific_energy = float(cfg["battery"]["specific_energy"])
        self.battery_z = float(cfg["battery"]["z"])

        masses = cfg["masses"]
        self.non_structural_mass = float(masses["non_structural_mass"])
        self.non_structural_cg = np.asarray(masses["non_structural_cg"], float)
        self.structure_cg_z = float(masses["structure_cg_z"])
        self.structural_inertia = check_inertia(masses["structural_inertia"])

        self.regression = StructuralRegression.from_config(cfg["regression"])
        self.fuselage_length = float(
            cfg["regression"]["baseline"]["fuselage_length"]
        )
        self.vt_area = float(cfg["regression"]["baseline"]["vt_area"])

        self.drag_areas = {k: float(v) for k, v in cfg["drag_areas"].items()}
        ac = cfg["acoustics"]
        self.acoustic_config = AcousticConfig(
            harmonics=int(ac.get("harmonics", 10)),
            broadband_offset_db=float(ac.get("broadband_offset_db", 0.0)),
        )
        self.noise_angle_deg = float(ac.get("constraint_angle_deg", 85.0))

        self.design_defaults = {
            k: np.asarray(v, dtype=float) for k, v in cfg["design"].items()
        }

    def baseline_state(self):
        """Fresh copy of the design-state dict (plain float64 arrays)."""
        return {k: jnp.asarray(v) for k, v in self.design_defaults.items()}

    # ---- mass buildup ---------------------------------------------------

    def motor_sizings(self, state):
        lift = MotorSizing(diameter=state["lift_motor_diameter"],
                           length=state["lift_motor_length"])
        pusher = MotorSizing(diameter=state["pusher_motor_diameter"],
                             length=state["pusher_motor_length"])
        return lift, pusher

    def mass_properties(self, state, cruise_speed):
        """Gross mass and design-frame mass properties for a design state."""
        lift_motor, pusher_motor = self.motor_sizings(state)
        reg_inputs = jnp.stack([
            state["wing_area"],
            state["wing_aspect_ratio"],
            jnp.asarray(self.fuselage_length),
            jnp.asarray(cruise_speed),
            state["battery_mass"],
            jnp.asarray(self.regression.baseline_inputs[5]),
            jnp.asarray(self.vt_area),
        ])
        struct_mass, struct_cg_x = self.regression.predict(reg_inputs)

        span = jnp.sqrt(state["wing_area"] * state["wing_aspect_ratio"])
        hubs = self.geometry.lift_hub_positions(span)
        pusher_hub = self.geometry.pusher_hub_position()

        components = [
            ("battery", point_mass(
                state["battery_mass"],
                jnp.stack([state["battery_x"],
                           jnp.asarray(0.0),
                           jnp.asarray(self.battery_z)]))),
            ("non_structural", point_mass(
                self.non_structural_mass, self.non_structural_cg)),
            ("pusher_motor", point_mass(pusher_motor.mass, pusher_hub)),
            ("structure", MassProperties(
                struct_mass,
                jnp.stack([struct_cg_x,
                           jnp.asarray(0.0),
                           jnp.asarray(self.structure_cg_z)]),
                self.structural_inertia)),
        ]
        for k in range(8):
            components.append(
                (f"lift_motor_{k}", point_mass(lift_motor.mass, hubs[k]))
            )
        total = aggregate_mass(components)
        return total.mass, total
