"""Map FOM*(rpm) and tonal/broadband SPL along best-FOM blades at fixed thrust.

For each rpm: scan chord scale, solve collective twist for target thrust,
record the best figure of merit and the matching noise at 45 deg / 76.2 m.
"""
import numpy as np
import jax
import jax.numpy as jnp

from mdoforge import acoustics
from mdoforge.airfoil import PolarModel
from mdoforge.rotor import solve_rotor_arrays, station_sites, control_basis
from mdoforge.vehicle import load_vehicle_config, VehicleModel

model = VehicleModel(load_vehicle_config("src/mdoforge/data/vehicle.json"))
polar = model.polar
R = 1.5
B = 2
hub = 0.15
rho = 1.225
nu = 1.46e-5
a_snd = 340.3
T_target = 4172.0
cfg = model.acoustic_config

sites = station_sites(25)
chord_basis = control_basis(2, sites)
twist_basis = control_basis(4, sites)
chord_cp0 = jnp.asarray([0.135, 0.09])
twist_cp0 = jnp.asarray([0.32, 0.22, 0.14, 0.1])


def blade(scale, toff):
    chord = chord_basis @ (chord_cp0 * scale)
    twist = twist_basis @ twist_cp0 + toff
    return chord, twist


@jax.jit
def run(scale, toff, rpm):
    chord, twist = blade(scale, toff)
    omega = rpm * 2.0 * jnp.pi / 60.0
    out = solve_rotor_arrays(chord, twist, R, hub, B, omega, 0.0, rho, nu,
                             polar, 25)
    return out["thrust"], out["torque"], out["figure_of_merit"]


def trim_toff(scale, rpm):
    lo, hi = -0.25, 0.35
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        t, _, _ = run(scale, mid, rpm)
        if float(t) < T_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def noise45(thrust, torque, rpm, scale):
    omega = rpm * 2.0 * np.pi / 60.0
    chord, _ = blade(scale, 0.0)
    xi_e = (0.8 - hub) / (1.0 - hub)
    chord_e = float(jnp.interp(xi_e, sites, chord))
    blade_area = B * float(jnp.trapezoid(chord, sites)) * R * (1.0 - hub)
    s = 76.2
    sin_t = np.sin(np.deg2rad(45.0))
    tonal, bb = acoustics.rotor_noise_dba(
        thrust, torque, omega, B, R, hub, chord_e, blade_area, s, sin_t, 0.0,
        rho, a_snd, cfg)
    t8 = float(tonal) + 10.0 * np.log10(8.0)
    b8 = float(bb) + 10.0 * np.log10(8.0)
    tot = 10.0 * np.log10(10 ** (t8 / 10.0) + 10 ** (b8 / 10.0))
    return t8, b8, tot


print("rpm   best_scale  FOM*    T       Q      clbar  tonal8  bb8   total8")
for rpm in (1300, 1400, 1500, 1600, 1700, 1800, 1900, 2000):
    best = None
    for scale in np.linspace(0.5, 0.16 / 0.135, 16):
        toff = trim_toff(scale, rpm)
        t, q, fom = run(scale, toff, rpm)
        t, q, fom = float(t), float(q), float(fom)
        if abs(t - T_target) > 40.0:
            continue
        if best is None or fom > best[2]:
            best = (scale, toff, fom, t, q)
    if best is None:
        print(f"{rpm}   -- no trim --")
        continue
    scale, toff, fom, t, q = best
    vtip = rpm * 2 * np.pi / 60 * R
    ab = B * float(jnp.trapezoid(chord_basis @ (chord_cp0 * scale), sites)) \
        * R * (1 - hub)
    clbar = 6 * t / (rho * ab * vtip ** 2 / (1 - hub) * (1 - hub))
    t8, b8, tot = noise45(t, q, rpm, scale)
    print(f"{rpm}  {scale:8.3f}  {fom:.4f}  {t:7.1f} {q:7.1f}  "
          f"{clbar:.3f}  {t8:6.2f} {b8:6.2f} {tot:6.2f}")
