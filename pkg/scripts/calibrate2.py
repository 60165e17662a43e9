"""Re-trim with the thinner lift blade and check noise directivity."""
import time

import jax.numpy as jnp

from mdoforge import mission
from mdoforge.vehicle import load_vehicle_config, VehicleModel

t0 = time.time()
model = VehicleModel(load_vehicle_config("src/mdoforge/data/vehicle.json"))
state = model.baseline_state()
segments = mission.build_mission(mission.default_mission_config())

state = mission.solve_hover_trim(model, segments, state)
print("hover rpm:", float(state["hover_rpm_front"]), float(state["hover_rpm_rear"]))
state = mission.solve_forward_trim(model, segments, state, "climb")
state = mission.solve_forward_trim(model, segments, state, "cruise")
print("climb:", float(state["climb_pusher_rpm"]), float(state["climb_pitch"]),
      float(state["climb_tail"]))
print("cruise:", float(state["cruise_pusher_rpm"]), float(state["cruise_pitch"]),
      float(state["cruise_tail"]))

out = mission.evaluate_mission(model, segments, state)
print("gross:", float(out["gross_mass"]))
print("trim eqs:", [f"{float(v):.2e}" for v in out["trim_eqs"]])
print("soc:", float(out["soc"]), " energy MJ:", float(out["energy"]) / 1e6)
print("noise85:", float(out["noise_dba"]))
print("fom:", float(jnp.mean(out["lift_fom"][0])),
      " stall buffer:", float(out["stall_buffer"]))
print("cl cruise:", float(out["cl"][2]))
print("torque margins:", [float(v) for v in out["torque_margins"]])
print("tip mach:", float(jnp.mean(out["lift_omega"][0])) * 1.5
      / float(out["sound_speed"][0]))

# directivity at fixed slant 76.2 m using the trimmed hover condition
hov = 0
thrust = out["lift_thrust"][hov]
torque = out["lift_torque"][hov]
omega = out["lift_omega"][hov]
rho = out["density"][hov]
a = out["sound_speed"][hov]
for ang in (20.0, 30.0, 45.0, 60.0, 75.0, 85.0, 90.0):
    n = mission.hover_noise_dba(model, state, thrust, torque, omega, rho, a,
                                angle_deg=ang, slant_distance=76.2)
    print(f"  ang {ang:4.0f}: total {float(n['total']):6.2f}  "
          f"tonal {float(n['tonal']):6.2f}  bb {float(n['broadband']):6.2f}")

n45 = mission.hover_noise_dba(model, state, thrust, torque, omega, rho, a,
                              angle_deg=45.0, slant_distance=76.2)
n90 = mission.hover_noise_dba(model, state, thrust, torque, omega, rho, a,
                              angle_deg=90.0, slant_distance=76.2)
print("dip 45->90:", float(n45["total"]) - float(n90["total"]))
print("elapsed:", time.time() - t0)
