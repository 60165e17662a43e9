"""Optimization presets: hover blade aeroacoustics and gross-weight reduction.

The aeroacoustic preset retunes every lift-rotor blade (per-rotor twist and
chord control points plus rotor speeds) in hover, trading the A-weighted
level at ground observers against the mean figure of merit under a force
and moment trim equality.  The gross-weight preset shrinks the takeoff mass
of the whole vehicle over the sizing mission while holding trim, battery
margin, stall margin, noise, geometric clearance, and motor limits.
"""

import jax
import jax.numpy as jnp
import numpy as np

from . import acoustics
from .exceptions import ConfigError
from .mission import (atmosphere, build_mission, default_mission_config,
                      evaluate_mission, N_STATIONS)
from .optimizer import DesignSpace, OptProblem, VariableSpec
from .rotor import control_basis, solve_rotor_arrays, station_sites
from .vehicle import GRAVITY

__all__ = [
    "OBJECTIVE_ANGLES",
    "REPORT_ANGLE_DEG",
    "REPORT_DISTANCE_M",
    "make_aeroacoustic_problem",
    "aeroacoustic_metrics",
    "make_gross_weight_problem",
    "gross_weight_metrics",
    "preset_names",
    "make_preset",
]

# the blade objective averages several observer angles so that no single
# interference direction dominates; reports quote the middle angle
OBJECTIVE_ANGLES = (30.0, 45.0, 60.0)
REPORT_ANGLE_DEG = 45.0
REPORT_DISTANCE_M = 76.2

_N_ROTORS = 8
_N_TWIST = 4
_N_CHORD = 3


def _fit_control_points(basis, values):
    cp, *_ = np.linalg.lstsq(np.asarray(basis), np.asarray(values), rcond=None)
    return cp


def _hover_rotor_batch(model, state, rho, nu):
    """Closure evaluating the 8 lift rotors with per-rotor blades."""
    sites = station_sites(N_STATIONS)
    chord_basis = jnp.asarray(control_basis(_N_CHORD, sites))
    twist_basis = jnp.asarray(control_basis(_N_TWIST, sites))
    radius = state["lift_radius"]
    hub = model.lift_hub_fraction
    blades = model.lift_blade_count
    polar = model.polar

    def one(chord_cp, twist_cp, omega):
        chord = chord_basis @ chord_cp
        twist = twist_basis @ twist_cp
        out = solve_rotor_arrays(chord, twist, radius, hub, blades, omega,
                                 0.0, rho, nu, polar, N_STATIONS)
        return (out["thrust"], out["torque"], out["figure_of_merit"], chord)

    return jax.vmap(one), sites


def _per_rotor_noise(model, state, hubs, sites, chords, thrust, torque, omega,
                     rho, sound_speed, observer):
    """(tonal, broadband) A-levels per rotor for blades given per rotor."""
    cfg = model.acoustic_config
    radius = state["lift_radius"]
    hub_frac = model.lift_hub_fraction
    xi_e = ((cfg.effective_radius_fraction - hub_frac) / (1.0 - hub_frac))
    tonal = []
    broadband = []
    for k in range(_N_ROTORS):
        chord_e = jnp.interp(xi_e, sites, chords[k])
        blade_area = (model.lift_blade_count * jnp.trapezoid(chords[k], sites)
                      * radius * (1.0 - hub_frac))
        vec = observer - hubs[k]
        slant = jnp.sqrt(jnp.sum(vec * vec))
        sin_theta = (hubs[k][2] - observer[2]) / slant
        t_a, b_a = acoustics.rotor_noise_dba(
            thrust[k], torque[k], omega[k], model.lift_blade_count, radius,
            hub_frac, chord_e, blade_area, slant, sin_theta, 0.0, rho,
            sound_speed, cfg)
        tonal.append(t_a)
        broadband.append(b_a)
    return jnp.stack(tonal), jnp.stack(broadband)


def _observer_at(ref, angle_deg, slant_distance):
    theta = jnp.deg2rad(angle_deg)
    return jnp.stack([
        ref[0] + slant_distance * jnp.cos(theta),
        jnp.asarray(0.0),
        ref[2] - slant_distance * jnp.sin(theta),
    ])


def make_aeroacoustic_problem(model, weight, state=None, altitude=76.2,
                              distance=REPORT_DISTANCE_M,
                              rpm_bounds=(1700.0, 2000.0),
                              chord_bounds=(0.05, 0.16),
                              twist_bounds=(0.02, 0.45),
                              cruise_speed=58.0):
    """Blade-noise/efficiency trade at fixed gross mass, hover trim enforced.

    weight=0 maximizes the mean hover figure of merit, weight=1 minimizes
    the observer-averaged A-level; intermediate values trace the front.
    """
    if not 0.0 <= weight <= 1.0:
        raise ConfigError("weight must lie in [0, 1]")
    state = dict(model.baseline_state() if state is None else state)

    gross, mp = model.mass_properties(state, cruise_speed)
    mg = float(gross) * GRAVITY
    cg = mp.cg
    span = jnp.sqrt(state["wing_area"] * state["wing_aspect_ratio"])
    hubs = model.geometry.lift_hub_positions(span)
    c_ref = float(state["wing_area"] / span)
    atm = atmosphere(jnp.asarray(altitude))
    rho, nu = atm["density"], atm["kinematic_viscosity"]
    sound_speed = atm["sound_speed"]
    spin = jnp.asarray(model.lift_spin, dtype=float)
    dx = hubs[:, 0] - cg[0]
    dy = hubs[:, 1] - cg[1]
    ref = jnp.mean(hubs, axis=0)

    batch, sites = _hover_rotor_batch(model, state, rho, nu)

    sites_np = np.asarray(sites)
    chord_basis_np = np.asarray(control_basis(_N_CHORD, sites_np))
    base_chord = (np.asarray(control_basis(
        len(np.asarray(state["lift_chord_cp"])), sites_np))
        @ np.asarray(state["lift_chord_cp"]))
    chord_cp0 = _fit_control_points(chord_basis_np, base_chord)
    twist_cp0 = np.asarray(state["lift_twist_cp"])
    rpm0 = np.concatenate([
        np.full(4, float(state["hover_rpm_front"])),
        np.full(4, float(state["hover_rpm_rear"])),
    ])

    lo_c, hi_c = chord_bounds
    lo_t, hi_t = twist_bounds
    if not (np.all(chord_cp0 > lo_c) and np.all(chord_cp0 < hi_c)):
        raise ConfigError("baseline chord lies outside the chord bounds")
    if not (np.all(twist_cp0 > lo_t) and np.all(twist_cp0 < hi_t)):
        raise ConfigError("baseline twist lies outside the twist bounds")

    space = DesignSpace([
        VariableSpec.build("twist", _N_ROTORS * _N_TWIST, lo_t, hi_t),
        VariableSpec.build("chord", _N_ROTORS * _N_CHORD, lo_c, hi_c),
        VariableSpec.build("rpm", _N_ROTORS, rpm_bounds[0], rpm_bounds[1]),
    ])
    x0 = {
        "twist": np.tile(twist_cp0, _N_ROTORS),
        "chord": np.tile(chord_cp0, _N_ROTORS),
        "rpm": rpm0,
    }

    def physics(v):
        twist_cp = v["twist"].reshape(_N_ROTORS, _N_TWIST)
        chord_cp = v["chord"].reshape(_N_ROTORS, _N_CHORD)
        omega = v["rpm"] * (2.0 * jnp.pi / 60.0)
        thrust, torque, fom, chords = batch(chord_cp, twist_cp, omega)
        return thrust, torque, fom, chords, omega

    def objective(v):
        thrust, torque, fom, chords, omega = physics(v)
        totals = []
        for ang in OBJECTIVE_ANGLES:
            obs = _observer_at(ref, ang, distance)
            t_a, b_a = _per_rotor_noise(model, state, hubs, sites, chords,
                                        thrust, torque, omega, rho,
                                        sound_speed, obs)
            totals.append(acoustics.combine_levels(
                jnp.concatenate([t_a, b_a])))
        mean_spl = 10.0 * jnp.log10(
            jnp.mean(10.0 ** (jnp.stack(totals) / 10.0)))
        return weight * 0.1 * mean_spl - (1.0 - weight) * 10.0 * jnp.mean(fom)

    def equalities(v):
        thrust, torque, _, _, _ = physics(v)
        return jnp.stack([
            (jnp.sum(thrust) - mg) / mg,
            jnp.sum(thrust * dy) / (mg * c_ref),
            jnp.sum(thrust * dx) / (mg * c_ref),
            jnp.sum(spin * torque) / (mg * c_ref),
        ])

    return OptProblem(space=space, objective=objective, x0=x0,
                      equalities=equalities,
                      name=f"aeroacoustic(w={weight:g})")


def aeroacoustic_metrics(model, variables, state=None, altitude=76.2,
                         distance=REPORT_DISTANCE_M,
                         angle_deg=REPORT_ANGLE_DEG, cruise_speed=58.0):
    """Report SPL at the quoted observer, mean FOM, and trim residuals."""
    state = dict(model.baseline_state() if state is None else state)
    gross, mp = model.mass_properties(state, cruise_speed)
    mg = float(gross) * GRAVITY
    cg = mp.cg
    span = jnp.sqrt(state["wing_area"] * state["wing_aspect_ratio"])
    hubs = model.geometry.lift_hub_positions(span)
    c_ref = float(state["wing_area"] / span)
    atm = atmosphere(jnp.asarray(altitude))
    rho, nu = atm["density"], atm["kinematic_viscosity"]
    batch, sites = _hover_rotor_batch(model, state, rho, nu)

    twist_cp = jnp.asarray(variables["twist"]).reshape(_N_ROTORS, _N_TWIST)
    chord_cp = jnp.asarray(variables["chord"]).reshape(_N_ROTORS, _N_CHORD)
    omega = jnp.asarray(variables["rpm"]) * (2.0 * jnp.pi / 60.0)
    thrust, torque, fom, chords = batch(chord_cp, twist_cp, omega)

    ref = jnp.mean(hubs, axis=0)
    obs = _observer_at(ref, angle_deg, distance)
    t_a, b_a = _per_rotor_noise(model, state, hubs, sites, chords, thrust,
                                torque, omega, rho, atm["sound_speed"], obs)
    total = acoustics.combine_levels(jnp.concatenate([t_a, b_a]))
    spin = jnp.asarray(model.lift_spin, dtype=float)
    eqs = jnp.stack([
        (jnp.sum(thrust) - mg) / mg,
        jnp.sum(thrust * (hubs[:, 1] - cg[1])) / (mg * c_ref),
        jnp.sum(thrust * (hubs[:, 0] - cg[0])) / (mg * c_ref),
        jnp.sum(spin * torque) / (mg * c_ref),
    ])
    return {
        "spl_dba": float(total),
        "tonal_dba": float(acoustics.combine_levels(t_a)),
        "broadband_dba": float(acoustics.combine_levels(b_a)),
        "fom_mean": float(jnp.mean(fom)),
        "fom": np.asarray(fom),
        "thrust": np.asarray(thrust),
        "torque": np.asarray(torque),
        "rpm": np.asarray(variables["rpm"]),
        "trim_norm": float(jnp.linalg.norm(eqs)),
    }


_GW_VARIABLES = [
    # name, size, lower, upper
    ("wing_area", 1, 15.0, 24.0),
    ("wing_aspect_ratio", 1, 9.5, 15.0),
    ("lift_radius", 1, 1.1, 1.75),
    ("pusher_radius", 1, 1.05, 1.55),
    ("lift_chord_cp", 2, 0.05, 0.2),
    ("lift_twist_cp", 4, 0.02, 0.45),
    ("pusher_pitch", 1, -0.1, 0.3),
    ("lift_motor_diameter", 1, 0.1, 0.45),
    ("lift_motor_length", 1, 0.04, 0.3),
    ("pusher_motor_diameter", 1, 0.15, 0.55),
    ("pusher_motor_length", 1, 0.08, 0.4),
    ("battery_mass", 1, 450.0, 1600.0),
    ("battery_x", 1, 3.2, 6.2),
    ("hover_rpm_front", 1, 1250.0, 2050.0),
    ("hover_rpm_rear", 1, 1250.0, 2050.0),
    ("climb_pusher_rpm", 1, 850.0, 1500.0),
    ("cruise_pusher_rpm", 1, 850.0, 1500.0),
    ("climb_pitch", 1, -0.05, 0.35),
    ("cruise_pitch", 1, -0.05, 0.35),
    ("climb_tail", 1, -0.3, 0.3),
    ("cruise_tail", 1, -0.3, 0.3),
    ("cruise_altitude", 1, 400.0, 2000.0),
    ("climb_end_altitude", 1, 400.0, 2000.0),
]


def make_gross_weight_problem(model, mission_config=None, noise_limit_dba=67.0,
                              soc_floor=0.2, stall_margin=5.0,
                              tip_mach_limit=0.93, state=None):
    """Minimize takeoff mass over the sizing mission.

    Equalities: the eight segment trim components plus climb-to-cruise
    altitude continuity.  Inequalities: battery state of charge, hover
    noise at the ground observer, stall margin at cruise, rotor tip Mach,
    spanwise/fuselage rotor clearance, and pusher motor torque margins.
    """
    base = dict(model.baseline_state() if state is None else state)
    segments = build_mission(mission_config if mission_config is not None
                             else default_mission_config())

    specs = []
    x0 = {}
    for name, size, lo, hi in _GW_VARIABLES:
        specs.append(VariableSpec.build(name, size, lo, hi))
        v = np.atleast_1d(np.asarray(base[name], dtype=float))
        if not (np.all(v >= lo) and np.all(v <= hi)):
            raise ConfigError(f"baseline {name}={v} outside bounds [{lo},{hi}]")
        x0[name] = v
    space = DesignSpace(specs)

    def to_state(v):
        s = dict(base)
        for name, size, _, _ in _GW_VARIABLES:
            s[name] = v[name][0] if size == 1 else v[name]
        return s

    def run(v):
        return evaluate_mission(model, segments, to_state(v))

    def objective(v):
        return run(v)["gross_mass"] / 1000.0

    def equalities(v):
        out = run(v)
        continuity = (v["cruise_altitude"][0]
                      - v["climb_end_altitude"][0]) / 100.0
        return jnp.concatenate([out["trim_eqs"],
                                jnp.stack([continuity])])

    def inequalities(v):
        out = run(v)
        s = to_state(v)
        a_hover = out["sound_speed"][0]
        omega_f = s["hover_rpm_front"] * (2.0 * jnp.pi / 60.0)
        omega_r = s["hover_rpm_rear"] * (2.0 * jnp.pi / 60.0)
        tip_f = omega_f * s["lift_radius"] / a_hover
        tip_r = omega_r * s["lift_radius"] / a_hover
        return jnp.concatenate([
            jnp.stack([
                (out["soc"] - soc_floor) * 5.0,
                (noise_limit_dba - out["noise_dba"]) / 10.0,
                (out["stall_buffer"] - stall_margin) / 10.0,
                (tip_mach_limit - tip_f) * 5.0,
                (tip_mach_limit - tip_r) * 5.0,
            ]),
            out["torque_margins"] / 1000.0,
            out["clearances"] / 0.5,
        ])

    return OptProblem(space=space, objective=objective, x0=x0,
                      equalities=equalities, inequalities=inequalities,
                      name="gross-weight")


def gross_weight_metrics(model, variables, mission_config=None, state=None):
    """Mission summary at a design point of the gross-weight problem."""
    base = dict(model.baseline_state() if state is None else state)
    segments = build_mission(mission_config if mission_config is not None
                             else default_mission_config())
    s = dict(base)
    for name, size, _, _ in _GW_VARIABLES:
        v = jnp.asarray(variables[name])
        s[name] = v[0] if size == 1 else v
    out = evaluate_mission(model, segments, s)
    return {
        "gross_mass": float(out["gross_mass"]),
        "trim_norm": float(jnp.linalg.norm(out["trim_eqs"])),
        "soc": float(out["soc"]),
        "noise_dba": float(out["noise_dba"]),
        "stall_buffer": float(out["stall_buffer"]),
        "energy": float(out["energy"]),
        "torque_margins": np.asarray(out["torque_margins"]),
        "clearances": np.asarray(out["clearances"]),
        "state": s,
    }


def preset_names():
    return ["aeroacoustic", "gross-weight"]


def make_preset(name, model, weight=1.0, **kwargs):
    """Build a preset problem by name (CLI entry point)."""
    if name == "aeroacoustic":
        return make_aeroacoustic_problem(model, weight, **kwargs)
    if name == "gross-weight":
        return make_gross_weight_problem(model, **kwargs)
    raise ConfigError(f"unknown preset {name!r}; choices: {preset_names()}")
