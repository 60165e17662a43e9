"""Mission segments, atmosphere, and the vectorized vehicle evaluator.

A mission is a list of steady trim-state segments (hover, climb, cruise).
Every segment runs through one uniform physics function: all nine rotors and
both lifting surfaces are always evaluated with safe inputs, and per-segment
activity flags zero out the groups that are shut down (lift rotors in
forward flight, pusher in hover).  That keeps the whole mission a single
vmapped, jit-compiled, differentiable computation.

Conventions: design frame x aft / z up; body frame x forward / z down.
Lift rotors thrust along +z design; the pusher thrusts along -x design.
The hover-noise constraint observer sits on the ground at the configured
polar angle from the rotor plane (85 degrees by default), displaced along
+x design from the vehicle reference point.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import acoustics
from .aero import drag_buildup, solve_vlm_arrays, stall_speed
from .backend import jax, jnp
from .exceptions import ConfigError, SolverError
from .powertrain import BatteryState, PowerProfile, battery_soc, motor_performance
from .rotor import control_basis, solve_rotor_arrays, station_sites
from .vehicle import (
    GRAVITY,
    design_to_body_points,
    gravity_force_body,
    trim_residual,
)

MISSION_SCHEMA_VERSION = 1
N_STATIONS = 25
_SAFE_RPM = 900.0


# ---------------------------------------------------------------------------
# atmosphere (ISA troposphere)

_T0 = 288.15
_P0 = 101325.0
_LAPSE = 0.0065
_R_AIR = 287.05
_GAMMA = 1.4


def atmosphere(altitude):
    """ISA troposphere state at a geometric altitude in meters."""
    temp = _T0 - _LAPSE * jnp.asarray(altitude)
    pressure = _P0 * (temp / _T0) ** (GRAVITY / (_R_AIR * _LAPSE))
    density = pressure / (_R_AIR * temp)
    sound_speed = jnp.sqrt(_GAMMA * _R_AIR * temp)
    viscosity = 1.458e-6 * temp**1.5 / (temp + 110.4)
    return {
        "temperature": temp,
        "pressure": pressure,
        "density": density,
        "sound_speed": sound_speed,
        "kinematic_viscosity": viscosity / density,
    }


# ---------------------------------------------------------------------------
# mission definition

@dataclass(frozen=True)
class MissionSegment:
    """One steady segment.  Exactly one of duration/distance is set; climb
    segments use the configured rate and take their end altitude from the
    design state (climb-cruise continuity is an optimizer constraint)."""

    kind: str
    altitude: float = 0.0
    speed: float = 0.0
    duration: float = None
    distance: float = None
    climb_rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("hover", "climb", "cruise"):
            raise ConfigError(f"unknown segment kind '{self.kind}'")
        if (self.duration is None) == (self.distance is None):
            raise ConfigError(
                f"segment '{self.kind}' needs exactly one of duration/distance"
            )
        if self.altitude < 0.0:
            raise ConfigError("segment altitude must be nonnegative")


def default_mission_config():
    return {
        "schema": MISSION_SCHEMA_VERSION,
        "hover_altitude": 76.2,
        "hover_duration": 90.0,
        "climb_rate": 2.54,
        "climb_speed": 58.0,
        "cruise_speed": 58.0,
        "cruise_distance": 30000.0,
        "repeat": 1,
        "reserve_distance": 69200.0,
    }


def build_mission(config=None):
    """Expand a mission config into the flat segment list.

    Default: [hover, climb, cruise] plus `repeat` extra passes, then a
    reserve cruise leg; 7 segments in total for the default config.
    """
    cfg = dict(default_mission_config())
    if config:
        unknown = set(config) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown mission keys {sorted(unknown)}")
        cfg.update(config)
    if cfg.get("schema") != MISSION_SCHEMA_VERSION:
        raise ConfigError(f"mission schema must be {MISSION_SCHEMA_VERSION}")

    leg = [
        MissionSegment("hover", altitude=cfg["hover_altitude"],
                       duration=cfg["hover_duration"]),
        MissionSegment("climb", altitude=cfg["hover_altitude"],
                       speed=cfg["climb_speed"], duration=0.0,
                       climb_rate=cfg["climb_rate"]),
        MissionSegment("cruise", speed=cfg["cruise_speed"],
                       distance=cfg["cruise_distance"]),
    ]
    passes = 1 + int(cfg["repeat"])
    segments = leg * passes
    if cfg["reserve_distance"] > 0.0:
        segments = segments + [
            MissionSegment("cruise", speed=cfg["cruise_speed"],
                           distance=cfg["reserve_distance"]),
        ]
    return segments


def hover_only_mission(altitude=76.2, duration=90.0):
    return [MissionSegment("hover", altitude=altitude, duration=duration)]


def load_mission_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as err:
        raise ConfigError(f"mission file not found: {path}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"mission file is not valid JSON: {err}") from err
    return cfg


# ---------------------------------------------------------------------------
# the uniform segment physics

def _blade_stations(cp, n_ctrl_basis):
    return n_ctrl_basis @ cp


def _segment_physics(model, state, seg, seg_arrays):
    """Forces, moments, power, and rotor states for one segment.

    seg_arrays carries the traced per-segment quantities (altitude, rpm
    vectors, attitude, flags); seg carries the static ones (kind).
    All rotors and surfaces are evaluated with safe inputs and masked by
    the activity flags, so hover and forward segments share one graph.
    """
    atm = atmosphere(seg_arrays["altitude"])
    rho, nu, sound = atm["density"], atm["kinematic_viscosity"], atm["sound_speed"]

    speed = seg_arrays["speed"]
    gamma = seg_arrays["climb_angle"]
    pitch = seg_arrays["pitch"]
    alpha = pitch - gamma
    lift_on = seg_arrays["lift_on"]
    pusher_on = seg_arrays["pusher_on"]

    gross_mass, mp = seg_arrays["gross_mass"], seg_arrays["mass_props"]
    cg = mp.cg

    sites = station_sites(N_STATIONS)
    lift_chord = _blade_stations(state["lift_chord_cp"],
                                 control_basis(state["lift_chord_cp"].shape[0], sites))
    lift_twist = _blade_stations(state["lift_twist_cp"],
                                 control_basis(state["lift_twist_cp"].shape[0], sites))
    pusher_chord = _blade_stations(
        jnp.asarray(model.pusher_chord_cp),
        control_basis(len(model.pusher_chord_cp), sites))
    pusher_twist = (
        _blade_stations(jnp.asarray(model.pusher_twist_shape),
                        control_basis(len(model.pusher_twist_shape), sites))
        + state["pusher_pitch"]
    )

    # lift rotors: shared blade, per-rotor rpm
    lift_rpm = jnp.where(lift_on > 0.5, seg_arrays["lift_rpm"], _SAFE_RPM)
    lift_omega = lift_rpm * (2.0 * jnp.pi / 60.0)

    def lift_solve(omega):
        return solve_rotor_arrays(
            lift_chord, lift_twist, state["lift_radius"],
            model.lift_hub_fraction, model.lift_blade_count, omega,
            0.0, rho, nu, model.polar, N_STATIONS,
        )

    lift_out = jax.vmap(lift_solve)(lift_omega)
    lift_thrust = lift_out["thrust"] * lift_on
    lift_torque = lift_out["torque"] * lift_on

    # pusher: axial inflow at flight speed
    pusher_rpm = jnp.where(pusher_on > 0.5, seg_arrays["pusher_rpm"], _SAFE_RPM)
    pusher_omega = pusher_rpm * (2.0 * jnp.pi / 60.0)
    pusher_out = solve_rotor_arrays(
        pusher_chord, pusher_twist, state["pusher_radius"],
        model.pusher_hub_fraction, model.pusher_blade_count, pusher_omega,
        speed * pusher_on, rho, nu, model.polar, N_STATIONS,
    )
    pusher_thrust = pusher_out["thrust"] * pusher_on
    pusher_torque = pusher_out["torque"] * pusher_on

    # lifting surfaces (VLM is linear in speed; zero speed gives zero loads)
    wing_mesh = model.geometry.wing_mesh(
        state["wing_area"], state["wing_aspect_ratio"], jnp.zeros(5))
    ht_mesh = model.geometry.ht_mesh(deflection=seg_arrays["tail"])
    span = jnp.sqrt(state["wing_area"] * state["wing_aspect_ratio"])
    c_ref = state["wing_area"] / span
    aero = solve_vlm_arrays(
        (wing_mesh, ht_mesh), jnp.maximum(speed, 1e-6), alpha, rho,
        state["wing_area"], c_ref, cg,
    )

    q_dyn = 0.5 * rho * speed**2
    f_area = drag_buildup(model.drag_areas, 1.0)
    drag_parasite = q_dyn * f_area

    # body-frame force/moment assembly
    force = gravity_force_body(gross_mass, pitch)
    moment = jnp.zeros(3)

    hubs = model.geometry.lift_hub_positions(span)
    hubs_b = design_to_body_points(hubs, cg)
    spin = jnp.asarray(model.lift_spin)
    f_lift = jnp.stack(
        [jnp.zeros(8), jnp.zeros(8), -lift_thrust], axis=-1)
    force = force + jnp.sum(f_lift, axis=0)
    moment = moment + jnp.sum(jnp.cross(hubs_b, f_lift), axis=0)
    moment = moment + jnp.array([0.0, 0.0, 1.0]) * jnp.sum(spin * lift_torque)

    pusher_hub_b = design_to_body_points(
        model.geometry.pusher_hub_position(), cg)
    f_pusher = jnp.stack([pusher_thrust, 0.0 * pusher_thrust, 0.0 * pusher_thrust])
    force = force + f_pusher
    moment = moment + jnp.cross(pusher_hub_b, f_pusher)
    moment = moment + jnp.array([1.0, 0.0, 0.0]) * pusher_torque

    # VLM force comes back in the design frame; parasite drag acts along the
    # freestream through the CG
    f_aero_design = aero["force"]
    f_aero_body = jnp.stack(
        [-f_aero_design[0], f_aero_design[1], -f_aero_design[2]])
    force = force + f_aero_body
    moment = moment + jnp.array([0.0, 1.0, 0.0]) * aero["moment"][1]
    drag_dir_design = jnp.stack([jnp.cos(alpha), 0.0 * alpha, jnp.sin(alpha)])
    force = force + jnp.stack(
        [-drag_dir_design[0], drag_dir_design[1], -drag_dir_design[2]]
    ) * drag_parasite

    residual = trim_residual(force, moment, mp)

    # electrical power
    lift_sizing, pusher_sizing = model.motor_sizings(state)
    p_lift, eta_lift, _ = motor_performance(
        lift_sizing, lift_out["torque"], lift_omega)
    p_pusher, eta_pusher, pusher_margin = motor_performance(
        pusher_sizing, pusher_out["torque"], pusher_omega)
    power = jnp.sum(p_lift * lift_on) + p_pusher * pusher_on

    return {
        "residual": residual,
        "power": power,
        "lift_thrust": lift_thrust,
        "lift_torque": lift_torque,
        "lift_omega": lift_omega,
        "lift_fom": lift_out["figure_of_merit"],
        "pusher_thrust": pusher_thrust,
        "pusher_torque": pusher_out["torque"],
        "pusher_omega": pusher_omega,
        "pusher_efficiency": pusher_out["efficiency"],
        "pusher_margin": pusher_margin,
        "motor_eta_pusher": eta_pusher,
        "cl": aero["cl"],
        "cdi": aero["cdi"],
        "drag_parasite": drag_parasite,
        "density": rho,
        "sound_speed": sound,
        "residual_max_section": jnp.max(jnp.abs(lift_out["residual"])),
    }


def _segment_control_arrays(model, state, segments):
    """Stack the traced per-segment quantities for vmap."""
    alt_list, speed_list, angle_list = [], [], []
    rpm_list, prpm_list, pitch_list, tail_list = [], [], [], []
    lift_on, pusher_on, durations = [], [], []

    hover_alt = None
    for seg in segments:
        if seg.kind == "hover":
            hover_alt = seg.altitude
            alt = jnp.asarray(seg.altitude)
            speed = jnp.asarray(0.0)
            angle = jnp.asarray(0.0)
            rpm = jnp.stack([state["hover_rpm_front"]] * 4
                            + [state["hover_rpm_rear"]] * 4)
            prpm = jnp.asarray(_SAFE_RPM)
            pitch = jnp.asarray(0.0)
            tail = jnp.asarray(0.0)
            l_on, p_on = 1.0, 0.0
            dur = jnp.asarray(seg.duration)
        elif seg.kind == "climb":
            start = seg.altitude
            end = state["climb_end_altitude"]
            alt = 0.5 * (start + end)
            speed = jnp.asarray(seg.speed)
            angle = jnp.arcsin(seg.climb_rate / seg.speed)
            rpm = jnp.full(8, _SAFE_RPM)
            prpm = state["climb_pusher_rpm"]
            pitch = state["climb_pitch"]
            tail = state["climb_tail"]
            l_on, p_on = 0.0, 1.0
            dur = (end - start) / seg.climb_rate
        else:
            alt = state["cruise_altitude"]
            speed = jnp.asarray(seg.speed)
            angle = jnp.asarray(0.0)
            rpm = jnp.full(8, _SAFE_RPM)
            prpm = state["cruise_pusher_rpm"]
            pitch = state["cruise_pitch"]
            tail = state["cruise_tail"]
            l_on, p_on = 0.0, 1.0
            dur = jnp.asarray(seg.distance) / seg.speed
        alt_list.append(alt)
        speed_list.append(speed)
        angle_list.append(angle)
        rpm_list.append(rpm)
        prpm_list.append(prpm)
        pitch_list.append(pitch)
        tail_list.append(tail)
        lift_on.append(l_on)
        pusher_on.append(p_on)
        durations.append(dur)

    arrays = {
        "altitude": jnp.stack(alt_list),
        "speed": jnp.stack(speed_list),
        "climb_angle": jnp.stack(angle_list),
        "lift_rpm": jnp.stack(rpm_list),
        "pusher_rpm": jnp.stack(prpm_list),
        "pitch": jnp.stack(pitch_list),
        "tail": jnp.stack(tail_list),
        "lift_on": jnp.asarray(lift_on),
        "pusher_on": jnp.asarray(pusher_on),
    }
    return arrays, jnp.stack(durations), hover_alt


def _constraint_segment_indices(segments):
    """First occurrence of each kind; these carry the trim constraints."""
    first = {}
    for i, seg in enumerate(segments):
        first.setdefault(seg.kind, i)
    return first


_TRIM_COMPONENTS = {"hover": (2, 4), "climb": (0, 2, 4), "cruise": (0, 2, 4)}


def evaluate_mission(model, segments, state, cruise_speed=None):
    """All mission-level outputs for one design state (pure, trace-safe).

    Returns a dict of scalars and arrays: per-segment residuals and power,
    trim equality components (scaled), energy, final state of charge, hover
    noise at the constraint observer, stall margin, clearances, and motor
    torque margins.
    """
    if cruise_speed is None:
        cruise_speed = max(
            [s.speed for s in segments if s.kind == "cruise"], default=58.0)

    gross_mass, mp = model.mass_properties(state, cruise_speed)
    seg_arrays, durations, hover_alt = _segment_control_arrays(
        model, state, segments)

    def one(arrays_slice):
        full = dict(arrays_slice)
        full["gross_mass"] = gross_mass
        full["mass_props"] = mp
        return _segment_physics(model, state, None, full)

    per_seg = jax.vmap(one)(seg_arrays)

    # energy and state of charge
    energy = jnp.dot(per_seg["power"], durations)
    battery = BatteryState(mass=state["battery_mass"],
                           specific_energy=model.battery_specific_energy)
    soc = 1.0 - energy / battery.capacity

    # trim equality components, nondimensionalized: linear residuals by g,
    # angular by g / reference chord
    span = jnp.sqrt(state["wing_area"] * state["wing_aspect_ratio"])
    c_ref = state["wing_area"] / span
    weight = gross_mass * GRAVITY
    first = _constraint_segment_indices(segments)
    trim_eqs = []
    trim_labels = []
    for kind, idx in sorted(first.items(), key=lambda kv: kv[1]):
        res = per_seg["residual"][idx]
        for comp in _TRIM_COMPONENTS[kind]:
            scale = 1.0 / GRAVITY if comp < 3 else c_ref / GRAVITY
            trim_eqs.append(res[comp] * scale)
            trim_labels.append(f"{kind}_{'xyzlmn'[comp]}")
    trim_eqs = jnp.stack(trim_eqs)

    # hover noise at the constraint observer
    hover_idx = first.get("hover")
    if hover_idx is not None:
        noise_dba = hover_noise_dba(
            model, state,
            thrust=per_seg["lift_thrust"][hover_idx],
            torque=per_seg["lift_torque"][hover_idx],
            omega=per_seg["lift_omega"][hover_idx],
            density=per_seg["density"][hover_idx],
            sound_speed=per_seg["sound_speed"][hover_idx],
            altitude=hover_alt,
            angle_deg=model.noise_angle_deg,
        )["total"]
    else:
        noise_dba = jnp.asarray(-jnp.inf)

    # stall buffer at cruise density
    cruise_idx = first.get("cruise")
    if cruise_idx is not None:
        v_stall = stall_speed(weight, per_seg["density"][cruise_idx],
                              state["wing_area"], model.polar.cl_max)
        stall_buffer = seg_arrays["speed"][cruise_idx] - v_stall
    else:
        v_stall = jnp.asarray(0.0)
        stall_buffer = jnp.asarray(jnp.inf)

    # geometric clearances (adjacent spanwise stations and fuselage)
    fracs = model.geometry.rotor_span_fractions
    half = 0.5 * span
    station_gap = (fracs[1] - fracs[0]) * half - 2.0 * state["lift_radius"]
    fuselage_gap = (fracs[0] * half - state["lift_radius"]
                    - model.geometry.fuselage_radius)
    clearances = jnp.stack([station_gap, fuselage_gap])

    # pusher torque margins for the forward segments
    margins = []
    for kind in ("climb", "cruise"):
        if kind in first:
            margins.append(per_seg["pusher_margin"][first[kind]])
    torque_margins = jnp.stack(margins) if margins else jnp.zeros(0)

    return {
        "gross_mass": gross_mass,
        "cg": mp.cg,
        "residuals": per_seg["residual"],
        "trim_eqs": trim_eqs,
        "trim_labels": tuple(trim_labels),
        "power": per_seg["power"],
        "durations": durations,
        "energy": energy,
        "soc": soc,
        "noise_dba": noise_dba,
        "stall_speed": v_stall,
        "stall_buffer": stall_buffer,
        "clearances": clearances,
        "torque_margins": torque_margins,
        "lift_fom": per_seg["lift_fom"],
        "lift_thrust": per_seg["lift_thrust"],
        "lift_torque": per_seg["lift_torque"],
        "lift_omega": per_seg["lift_omega"],
        "pusher_thrust": per_seg["pusher_thrust"],
        "pusher_torque": per_seg["pusher_torque"],
        "pusher_efficiency": per_seg["pusher_efficiency"],
        "motor_eta_pusher": per_seg["motor_eta_pusher"],
        "cl": per_seg["cl"],
        "cdi": per_seg["cdi"],
        "drag_parasite": per_seg["drag_parasite"],
        "density": per_seg["density"],
        "sound_speed": per_seg["sound_speed"],
        "max_section_residual": jnp.max(per_seg["residual_max_section"]),
    }


def hover_noise_dba(model, state, thrust, torque, omega, density, sound_speed,
                    altitude=None, angle_deg=85.0, slant_distance=None):
    """Total, tonal, and broadband dB-A for the 8 lift rotors at one observer.

    The observer sits at angle_deg from the rotor plane (90 = on axis,
    straight down), displaced along +x design from the mean hub position:
    either on the ground `altitude` below the vehicle (constraint form) or
    at a fixed `slant_distance` (directivity form).
    """
    cfg = model.acoustic_config
    theta = jnp.deg2rad(angle_deg)
    span = jnp.sqrt(state["wing_area"] * state["wing_aspect_ratio"])
    hubs = model.geometry.lift_hub_positions(span)
    ref = jnp.mean(hubs, axis=0)
    if (altitude is None) == (slant_distance is None):
        raise ConfigError("specify exactly one of altitude/slant_distance")
    if slant_distance is None:
        drop = jnp.asarray(altitude)
        reach = altitude / jnp.tan(theta)
    else:
        drop = slant_distance * jnp.sin(theta)
        reach = slant_distance * jnp.cos(theta)
    observer = jnp.stack([
        ref[0] + reach,
        jnp.asarray(0.0),
        ref[2] - drop,
    ])

    sites = station_sites(N_STATIONS)
    chord_basis = control_basis(state["lift_chord_cp"].shape[0], sites)
    chord_st = chord_basis @ state["lift_chord_cp"]
    xi_e = ((cfg.effective_radius_fraction - model.lift_hub_fraction)
            / (1.0 - model.lift_hub_fraction))
    chord_e = jnp.interp(xi_e, sites, chord_st)
    blade_area = (model.lift_blade_count
                  * jnp.trapezoid(chord_st, sites)
                  * state["lift_radius"] * (1.0 - model.lift_hub_fraction))

    tonal_levels = []
    broadband_levels = []
    for k in range(8):
        vec = observer - hubs[k]
        slant = jnp.sqrt(jnp.sum(vec * vec))
        sin_theta = (hubs[k][2] - observer[2]) / slant
        t_a, b_a = acoustics.rotor_noise_dba(
            thrust[k], torque[k], omega[k], model.lift_blade_count,
            state["lift_radius"], model.lift_hub_fraction, chord_e,
            blade_area, slant, sin_theta, 0.0, density, sound_speed, cfg,
        )
        tonal_levels.append(t_a)
        broadband_levels.append(b_a)
    tonal = acoustics.combine_levels(jnp.stack(tonal_levels))
    broadband = acoustics.combine_levels(jnp.stack(broadband_levels))
    total = acoustics.combine_levels(jnp.stack([tonal, broadband]))
    return {"total": total, "tonal": tonal, "broadband": broadband}


# ---------------------------------------------------------------------------
# trim solvers (driver-level Newton; used by the CLI and calibration)

def solve_hover_trim(model, segments, state, tol=1e-10, max_iter=30):
    """Adjust (front, rear) hover rpm until hover [Fz, My] vanish."""
    hover_idx = _constraint_segment_indices(segments).get("hover")
    if hover_idx is None:
        raise ConfigError("mission has no hover segment to trim")
    sub = [segments[hover_idx]]

    @jax.jit
    def residual(u):
        trial = dict(state)
        trial["hover_rpm_front"] = u[0]
        trial["hover_rpm_rear"] = u[1]
        out = evaluate_mission(model, sub, trial)
        res = out["residuals"][0]
        return jnp.stack([res[2], res[4]])

    u = jnp.stack([state["hover_rpm_front"], state["hover_rpm_rear"]])
    u = _newton(residual, u, tol, max_iter, "hover trim")
    solved = dict(state)
    solved["hover_rpm_front"] = u[0]
    solved["hover_rpm_rear"] = u[1]
    return solved


def solve_forward_trim(model, segments, state, kind, tol=1e-10, max_iter=40):
    """Adjust (pusher rpm, pitch, tail) for a forward segment's [Fx,Fz,My]."""
    idx = _constraint_segment_indices(segments).get(kind)
    if idx is None:
        raise ConfigError(f"mission has no {kind} segment to trim")
    keys = (f"{kind}_pusher_rpm", f"{kind}_pitch", f"{kind}_tail")
    sub = [segments[idx]]

    @jax.jit
    def residual(u):
        trial = dict(state)
        for key, val in zip(keys, u):
            trial[key] = val
        out = evaluate_mission(model, sub, trial)
        res = out["residuals"][0]
        return jnp.stack([res[0], res[2], res[4]])

    u = jnp.stack([state[k] for k in keys])
    scale = jnp.array([1000.0, 0.05, 0.05])
    u = _newton(residual, u, tol, max_iter, f"{kind} trim", step_scale=scale)
    solved = dict(state)
    for key, val in zip(keys, u):
        solved[key] = val
    return solved


def _newton(residual, u0, tol, max_iter, label, step_scale=None):
    u = jnp.asarray(u0, dtype=jnp.float64)
    jac = jax.jit(jax.jacfwd(residual))
    best_u, best_norm = u, float(jnp.linalg.norm(residual(u)))
    for _ in range(max_iter):
        r = residual(u)
        norm = float(jnp.linalg.norm(r))
        if norm < best_norm:
            best_u, best_norm = u, norm
        if norm < tol:
            return u
        j = jac(u)
        try:
            step = jnp.linalg.solve(j, r)
        except Exception as err:
            raise SolverError(f"{label}: singular Jacobian") from err
        if step_scale is not None:
            step = jnp.clip(step, -10.0 * step_scale, 10.0 * step_scale)
        damping = 1.0
        for _ in range(8):
            trial = u - damping * step
            if float(jnp.linalg.norm(residual(trial))) < norm:
                u = trial
                break
            damping *= 0.5
        else:
            u = u - 0.25 * step
    norm = float(jnp.linalg.norm(residual(u)))
    if norm < best_norm:
        best_u, best_norm = u, norm
    if best_norm < tol * 100.0:
        return best_u
    raise SolverError(f"{label}: Newton stalled at |r| = {best_norm:.3e}")


def evaluate_mission_checked(model, segments, state):
    """Driver-level evaluation that tags discipline errors per segment."""
    for i, seg in enumerate(segments):
        try:
            evaluate_mission(model, [seg], state)
        except Exception as err:
            raise SolverError(
                f"segment {i} ({seg.kind}): {err}"
            ) from err
    return evaluate_mission(model, segments, state)


def write_segment_csv(path, segments, outputs):
    """Per-segment results table."""
    power = np.asarray(outputs["power"])
    durations = np.asarray(outputs["durations"])
    residuals = np.asarray(outputs["residuals"])
    with open(path, "w", newline="") as fh:
        fh.write("# schema_version: 1\n")
        writer = csv.writer(fh)
        writer.writerow(
            ["segment", "kind", "duration_s", "power_w", "energy_j",
             "trim_residual_norm"])
        for i, seg in enumerate(segments):
            writer.writerow([
                i, seg.kind, f"{durations[i]:.6g}", f"{power[i]:.6g}",
                f"{power[i] * durations[i]:.6g}",
                f"{np.linalg.norm(residuals[i]):.6g}",
            ])
