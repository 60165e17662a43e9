"""Bound-constrained augmented-Lagrangian optimizer over named design vectors.

A design space maps between named variable blocks (with bounds) and a flat
vector normalized to the unit cube.  Problems expose a scalar objective,
equality constraints driven to zero, and inequality constraints kept
nonnegative, all as functions of the named-block dict so they can be built
directly on the differentiable models.  The solver wraps scipy's L-BFGS-B
as the inner loop and classic multiplier updates outside it; everything is
deterministic for fixed inputs.
"""

from dataclasses import dataclass, field

import jax
import jax.numpy as jnp
import numpy as np
from scipy.optimize import minimize

from .exceptions import ConfigError, SolverError

__all__ = [
    "VariableSpec",
    "DesignSpace",
    "OptProblem",
    "OptResult",
    "solve",
    "check_gradients",
    "pareto_sweep",
    "parameter_sweep",
]


@dataclass(frozen=True)
class VariableSpec:
    """One named block of design variables with elementwise bounds."""

    name: str
    size: int
    lower: tuple
    upper: tuple

    @staticmethod
    def build(name, size, lower, upper):
        lo = np.broadcast_to(np.asarray(lower, dtype=float), (size,))
        hi = np.broadcast_to(np.asarray(upper, dtype=float), (size,))
        if not np.all(hi > lo):
            raise ConfigError(f"variable {name}: upper bound must exceed lower")
        return VariableSpec(name, int(size), tuple(lo.tolist()), tuple(hi.tolist()))


class DesignSpace:
    """Ordered collection of variable blocks; packs dicts to flat vectors."""

    def __init__(self, specs):
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate design variable names")
        if not specs:
            raise ConfigError("design space needs at least one variable")
        self.specs = tuple(specs)
        self.size = int(sum(s.size for s in specs))
        self._slices = {}
        start = 0
        for s in specs:
            self._slices[s.name] = slice(start, start + s.size)
            start += s.size
        self.lower = jnp.asarray(
            np.concatenate([np.asarray(s.lower) for s in specs]))
        self.upper = jnp.asarray(
            np.concatenate([np.asarray(s.upper) for s in specs]))

    def names(self):
        return [s.name for s in self.specs]

    def block(self, name):
        return self._slices[name]

    def pack(self, values):
        """Named dict -> flat physical vector."""
        missing = [s.name for s in self.specs if s.name not in values]
        if missing:
            raise ConfigError(f"missing design variables: {missing}")
        parts = []
        for s in self.specs:
            v = jnp.ravel(jnp.asarray(values[s.name], dtype=float))
            if v.shape[0] != s.size:
                raise ConfigError(
                    f"variable {s.name}: expected size {s.size}, got {v.shape[0]}")
            parts.append(v)
        return jnp.concatenate(parts)

    def unpack(self, x):
        """Flat physical vector -> named dict (traceable)."""
        return {s.name: x[self._slices[s.name]] for s in self.specs}

    def to_unit(self, x):
        return (x - self.lower) / (self.upper - self.lower)

    def from_unit(self, z):
        return self.lower + z * (self.upper - self.lower)

    def clip_unit(self, z):
        return jnp.clip(z, 0.0, 1.0)


@dataclass
class OptProblem:
    """Objective with equality (== 0) and inequality (>= 0) constraints.

    The callables take the named-variable dict.  Constraint functions may be
    None when a problem has none of that kind.  Constraints should be
    pre-scaled to O(1) so a single violation tolerance is meaningful.
    """

    space: DesignSpace
    objective: callable
    x0: dict
    equalities: callable = None
    inequalities: callable = None
    name: str = "problem"

    def __post_init__(self):
        space = self.space

        def f_flat(x):
            return self.objective(space.unpack(x))

        def c_flat(x):
            if self.equalities is None:
                return jnp.zeros((0,))
            return jnp.atleast_1d(self.equalities(space.unpack(x)))

        def g_flat(x):
            if self.inequalities is None:
                return jnp.zeros((0,))
            return jnp.atleast_1d(self.inequalities(space.unpack(x)))

        self._f = f_flat
        self._c = c_flat
        self._g = g_flat

        x0 = space.pack(self.x0)
        eps = 1e-9
        z0 = jnp.clip(space.to_unit(x0), eps, 1.0 - eps)
        self._z0 = z0
        self.n_eq = int(c_flat(x0).shape[0])
        self.n_ineq = int(g_flat(x0).shape[0])

        def merit(z, lam, mu, rho):
            x = space.from_unit(z)
            f = f_flat(x)
            c = c_flat(x)
            g = g_flat(x)
            term_eq = jnp.dot(lam, c) + 0.5 * rho * jnp.dot(c, c)
            shifted = jnp.maximum(0.0, mu - rho * g)
            term_in = (0.5 / rho) * jnp.sum(shifted * shifted - mu * mu)
            return f + term_eq + term_in

        self._merit_val_grad = jax.jit(jax.value_and_grad(merit))
        self._eval_all = jax.jit(
            lambda z: (f_flat(space.from_unit(z)),
                       c_flat(space.from_unit(z)),
                       g_flat(space.from_unit(z))))

    def evaluate(self, z):
        f, c, g = self._eval_all(jnp.asarray(z))
        return float(f), np.asarray(c), np.asarray(g)


@dataclass
class OptResult:
    x: dict
    z: np.ndarray
    objective: float
    equalities: np.ndarray
    inequalities: np.ndarray
    max_violation: float
    grad_norm: float
    outer_iterations: int
    converged: bool
    history: list = field(default_factory=list)

    def variables(self, space):
        return {k: np.asarray(v) for k, v in space.unpack(jnp.asarray(
            space.from_unit(jnp.asarray(self.z)))).items()}


def _violation(c, g):
    viol = 0.0
    if c.size:
        viol = max(viol, float(np.max(np.abs(c))))
    if g.size:
        viol = max(viol, float(np.max(np.maximum(0.0, -g))))
    return viol


def solve(problem, tol_violation=1e-8, tol_grad=1e-6, max_outer=30,
          inner_maxiter=600, rho0=10.0, rho_growth=10.0, rho_max=1e8,
          z0=None, verbose=False):
    """Augmented-Lagrangian solve; returns an OptResult.

    Multipliers update classically (lambda += rho*c, mu = max(0, mu - rho*g));
    the penalty grows only when the violation fails to shrink fourfold
    between outer iterations.  Raises SolverError if the inner solver cannot
    decrease the merit at all on the first iteration.
    """
    space = problem.space
    z = np.asarray(problem._z0 if z0 is None else np.clip(z0, 1e-9, 1 - 1e-9))
    lam = np.zeros(problem.n_eq)
    mu = np.zeros(problem.n_ineq)
    rho = float(rho0)
    history = []
    prev_viol = np.inf
    converged = False
    bounds = [(0.0, 1.0)] * space.size

    grad_norm = np.inf
    for outer in range(1, max_outer + 1):
        lam_j = jnp.asarray(lam)
        mu_j = jnp.asarray(mu)

        def fun(zv):
            val, grad = problem._merit_val_grad(jnp.asarray(zv), lam_j, mu_j, rho)
            return float(val), np.asarray(grad, dtype=float)

        res = minimize(fun, z, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": inner_maxiter, "ftol": 1e-14,
                                "gtol": 1e-10})
        if outer == 1 and not np.isfinite(res.fun):
            raise SolverError(f"{problem.name}: inner solve diverged")
        z = np.clip(res.x, 0.0, 1.0)

        f, c, g = problem.evaluate(z)
        viol = _violation(c, g)

        # projected gradient of the merit at the solution
        _, grad = problem._merit_val_grad(jnp.asarray(z), lam_j, mu_j, rho)
        grad = np.asarray(grad)
        proj = z - np.clip(z - grad, 0.0, 1.0)
        grad_norm = float(np.max(np.abs(proj))) if proj.size else 0.0

        history.append({"outer": outer, "objective": f, "violation": viol,
                        "rho": rho, "grad_norm": grad_norm,
                        "inner_iters": int(res.nit)})
        if verbose:
            print(f"[{problem.name}] outer {outer:2d}  f={f: .6e}  "
                  f"viol={viol:.3e}  rho={rho:.1e}  pg={grad_norm:.2e}")

        if viol < tol_violation and grad_norm < tol_grad:
            converged = True
            break

        lam = lam + rho * c
        mu = np.maximum(0.0, mu - rho * g)
        if viol > 0.25 * prev_viol and rho < rho_max:
            rho = min(rho * rho_growth, rho_max)
        prev_viol = viol

    f, c, g = problem.evaluate(z)
    x = {k: np.asarray(v)
         for k, v in space.unpack(space.from_unit(jnp.asarray(z))).items()}
    return OptResult(x=x, z=np.asarray(z), objective=f, equalities=c,
                     inequalities=g, max_violation=_violation(c, g),
                     grad_norm=grad_norm, outer_iterations=len(history),
                     converged=converged, history=history)


def check_gradients(problem, n_directions=5, step=1e-6, seed=0, z=None):
    """Max relative error between AD and central differences of the merit.

    Probes the full augmented merit (objective plus both constraint kinds)
    along random directions at an interior point, so one number covers every
    model the problem touches.
    """
    rng = np.random.default_rng(seed)
    n = problem.space.size
    z0 = np.asarray(problem._z0 if z is None else z)
    z0 = np.clip(z0, 0.05, 0.95)
    lam = jnp.asarray(rng.normal(size=problem.n_eq))
    mu = jnp.asarray(np.abs(rng.normal(size=problem.n_ineq)))
    rho = 7.3

    val0, grad0 = problem._merit_val_grad(jnp.asarray(z0), lam, mu, rho)
    grad0 = np.asarray(grad0)
    worst = 0.0
    for _ in range(n_directions):
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        vp, _ = problem._merit_val_grad(jnp.asarray(z0 + step * d), lam, mu, rho)
        vm, _ = problem._merit_val_grad(jnp.asarray(z0 - step * d), lam, mu, rho)
        fd = (float(vp) - float(vm)) / (2.0 * step)
        ad = float(np.dot(grad0, d))
        denom = max(abs(fd), abs(ad), 1e-12)
        worst = max(worst, abs(fd - ad) / denom)
    return worst


def pareto_sweep(problem_for_weight, weights, warm_start=True, **solve_kwargs):
    """Solve a weighted family, warm-starting each point from the previous."""
    results = []
    z_prev = None
    for w in weights:
        problem = problem_for_weight(float(w))
        z_init = z_prev if (warm_start and z_prev is not None) else None
        res = solve(problem, z0=z_init, **solve_kwargs)
        results.append(res)
        z_prev = res.z
    return results


def parameter_sweep(problem_for_value, values, warm_start=True, **solve_kwargs):
    """Solve the same problem at several parameter values.

    Returns (results, feasible_flags); feasibility is re-verified from the
    returned point rather than trusted from the solver status.
    """
    results = []
    feasible = []
    z_prev = None
    for v in values:
        problem = problem_for_value(v)
        z_init = z_prev if (warm_start and z_prev is not None) else None
        res = solve(problem, z0=z_init, **solve_kwargs)
        f, c, g = problem.evaluate(res.z)
        feasible.append(_violation(c, g) < 1e-6)
        results.append(res)
        z_prev = res.z
    return results, feasible
