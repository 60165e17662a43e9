"""Optimizer smoke tests with known KKT solutions."""
import jax.numpy as jnp
import numpy as np

from mdoforge.optimizer import (DesignSpace, OptProblem, VariableSpec,
                                check_gradients, solve)

# 1) min (x-3)^2 st x <= 2 -> x*=2
space = DesignSpace([VariableSpec.build("x", 1, 0.0, 5.0)])
p1 = OptProblem(
    space=space,
    objective=lambda v: jnp.sum((v["x"] - 3.0) ** 2),
    inequalities=lambda v: 2.0 - v["x"],
    x0={"x": jnp.asarray([0.5])},
    name="qp-ineq",
)
r1 = solve(p1)
print("p1:", r1.x["x"], r1.objective, r1.converged, r1.outer_iterations)
assert abs(float(r1.x["x"][0]) - 2.0) < 1e-6

# 2) min x^2+y^2 st x+y=1 -> (0.5, 0.5)
space2 = DesignSpace([VariableSpec.build("v", 2, -2.0, 2.0)])
p2 = OptProblem(
    space=space2,
    objective=lambda v: jnp.sum(v["v"] ** 2),
    equalities=lambda v: jnp.sum(v["v"]) - 1.0,
    x0={"v": jnp.asarray([1.5, -0.5])},
    name="qp-eq",
)
r2 = solve(p2)
print("p2:", r2.x["v"], r2.objective, r2.converged, r2.outer_iterations)
assert np.allclose(r2.x["v"], [0.5, 0.5], atol=1e-6)

# 3) Rosenbrock in a box, unconstrained otherwise -> (1,1)
space3 = DesignSpace([VariableSpec.build("v", 2, -2.0, 2.0)])
p3 = OptProblem(
    space=space3,
    objective=lambda v: (1 - v["v"][0]) ** 2
    + 100.0 * (v["v"][1] - v["v"][0] ** 2) ** 2,
    x0={"v": jnp.asarray([-1.2, 1.0])},
    name="rosen",
)
r3 = solve(p3)
print("p3:", r3.x["v"], r3.objective, r3.converged)
assert np.allclose(r3.x["v"], [1.0, 1.0], atol=1e-5)

# 4) gradient checker on the constrained quadratic
err = check_gradients(p2, n_directions=6)
print("grad check:", err)
assert err < 1e-6

# 5) active inequality at optimum with both kinds:
#    min (x-2)^2 + (y-2)^2 st x + y = 2, x - y >= 0.5 -> x=1.25, y=0.75
space5 = DesignSpace([VariableSpec.build("v", 2, -3.0, 3.0)])
p5 = OptProblem(
    space=space5,
    objective=lambda v: jnp.sum((v["v"] - 2.0) ** 2),
    equalities=lambda v: jnp.sum(v["v"]) - 2.0,
    inequalities=lambda v: v["v"][0] - v["v"][1] - 0.5,
    x0={"v": jnp.asarray([0.0, 0.0])},
    name="qp-both",
)
r5 = solve(p5)
print("p5:", r5.x["v"], r5.objective, r5.converged, r5.max_violation)
assert np.allclose(r5.x["v"], [1.25, 0.75], atol=1e-6)
print("all optimizer smoke tests passed")
