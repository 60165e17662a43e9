"""Run the aeroacoustic preset endpoints (w=0 efficient, w=1 quiet)."""
import time

from mdoforge.optimizer import check_gradients, solve
from mdoforge.problems import aeroacoustic_metrics, make_aeroacoustic_problem
from mdoforge.vehicle import VehicleModel, load_vehicle_config

model = VehicleModel(load_vehicle_config("src/mdoforge/data/vehicle.json"))

base = make_aeroacoustic_problem(model, 0.5)
m0 = aeroacoustic_metrics(model, base.x0)
print("baseline:", {k: round(v, 4) for k, v in m0.items()
                    if isinstance(v, float)})

for w in (0.0, 1.0):
    t0 = time.time()
    prob = make_aeroacoustic_problem(model, w)
    res = solve(prob, tol_violation=1e-8, tol_grad=1e-6, verbose=True,
                max_outer=20)
    met = aeroacoustic_metrics(model, res.x)
    dt = time.time() - t0
    print(f"w={w}: conv={res.converged} viol={res.max_violation:.2e} "
          f"f={res.objective:.5f}  [{dt:.0f}s]")
    print("   spl45={spl_dba:.2f} tonal={tonal_dba:.2f} bb={broadband_dba:.2f}"
          " fom={fom_mean:.4f} trim_norm={trim_norm:.2e}".format(**met))
    print("   rpm:", [round(float(r), 1) for r in met["rpm"]])

err = check_gradients(base, n_directions=3)
print("gradient check (merit, 3 dirs):", err)
