"""Blade-element momentum analysis of a single rotor.

The section inflow angle phi is found as the root of a one-variable
residual that merges the momentum and blade-element expressions, with the
Prandtl tip-loss factor folded in so the root is guaranteed to be bracketed
for thrusting states.  A fixed-count bisection (gradient-free) locates the
root; two Newton steps through the differentiable residual then polish it,
which restores exact sensitivities via the implicit function theorem.

Sign conventions: positive axial inflow is climb/advance, positive thrust
pulls along the rotor axis, twist and inflow angles are measured from the
rotor plane.
"""

from dataclasses import dataclass, field

import numpy as np

from .airfoil import PolarModel
from .backend import jax, jnp
from .exceptions import ContractError, NonPhysicalSectionError

N_STATIONS = 25
_BISECT_ITERS = 75
_SIN_GUARD = 1e-9


def station_sites(n=N_STATIONS):
    """Radial stations as fractions of (hub, tip), cosine-clustered at the tip."""
    k = np.arange(1, n + 1)
    return np.sin(0.5 * np.pi * k / (n + 1))


def control_basis(n_ctrl, sites):
    """Basis matrix mapping spanwise control points to station values."""
    from .geometry.bspline import basis_matrix, clamped_knots

    degree = min(3, n_ctrl - 1)
    return basis_matrix(clamped_knots(n_ctrl, degree), degree, sites)


def prandtl_tip_loss(phi, r, radius, blade_count):
    """Prandtl tip-loss factor F in (0, 1]."""
    s = jnp.abs(jnp.sin(phi)) + _SIN_GUARD
    f = blade_count * (radius - r) / (2.0 * r * s)
    return (2.0 / jnp.pi) * jnp.arccos(jnp.exp(-jnp.minimum(f, 50.0)))


@dataclass(frozen=True)
class RotorOperatingPoint:
    rpm: float
    axial_velocity: float = 0.0
    density: float = 1.225
    kinematic_viscosity: float = 1.46e-5
    speed_of_sound: float = 340.3

    @property
    def omega(self):
        return self.rpm * 2.0 * np.pi / 60.0


@dataclass(frozen=True)
class BladeDesign:
    """Spanwise chord/twist control points plus radius and blade count."""

    radius: float
    chord_cp: np.ndarray
    twist_cp: np.ndarray
    hub_radius_fraction: float = 0.15
    blade_count: int = 2

    def __post_init__(self):
        object.__setattr__(self, "chord_cp",
                           np.atleast_1d(np.asarray(self.chord_cp, float)))
        object.__setattr__(self, "twist_cp",
                           np.atleast_1d(np.asarray(self.twist_cp, float)))
        if self.radius <= 0.0:
            raise ContractError("rotor radius must be positive")
        if not 0.0 < self.hub_radius_fraction < 1.0:
            raise ContractError("hub radius fraction must lie in (0, 1)")

    def section_values(self, n_stations=N_STATIONS):
        sites = station_sites(n_stations)
        chord = control_basis(len(self.chord_cp), sites) @ self.chord_cp
        twist = control_basis(len(self.twist_cp), sites) @ self.twist_cp
        return sites, chord, twist


def section_residual(phi, r, chord, twist, radius, blade_count,
                     axial_velocity, tangential_velocity, reynolds, polar):
    """Inflow-angle residual; its root satisfies momentum = blade element.

    Normalized by the local inflow speed scale so tolerances are
    dimensionless.
    """
    sin = jnp.sin(phi)
    cos = jnp.cos(phi)
    F = prandtl_tip_loss(phi, r, radius, blade_count)
    alpha = twist - phi
    cl, cd = polar.coefficients(alpha, reynolds)
    cx = cl * cos - cd * sin
    ct = cl * sin + cd * cos
    sigma = blade_count * chord / (2.0 * jnp.pi * r)
    res = (tangential_velocity * (4.0 * F * sin * sin - sigma * cx)
           - axial_velocity * (4.0 * F * sin * cos + sigma * ct))
    return res / (jnp.abs(axial_velocity) + jnp.abs(tangential_velocity))


def solve_section_inflow(residual_fn, phi_lo=0.0, phi_hi=0.5 * np.pi - 1e-6):
    """Bisection root of a scalar residual on [phi_lo, phi_hi].

    Maintains residual(lo) <= 0 <= residual(hi); the returned angle carries
    no gradient (callers polish with Newton for differentiability).
    """
    lo = jnp.asarray(phi_lo, dtype=jnp.float64)
    hi = jnp.asarray(phi_hi, dtype=jnp.float64)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        pos = residual_fn(mid) > 0.0
        hi = jnp.where(pos, mid, hi)
        lo = jnp.where(pos, lo, mid)
    return jax.lax.stop_gradient(0.5 * (lo + hi))


def _solve_phi_vector(resid, n):
    """Vectorized bracketed bisection plus Newton polish.

    resid maps a station vector of angles to a station vector of residuals
    (elementwise).  Returns (phi, bracket_ok).
    """
    # Sign checks carry a tolerance so exactly-zero-loading sections (root
    # at phi = 0 up to roundoff) count as bracketed.
    tol = 1e-9
    lo1 = jnp.zeros(n)
    hi1 = jnp.full(n, 0.5 * jnp.pi - 1e-6)
    r_lo1 = resid(lo1)
    r_hi1 = resid(hi1)
    ok1 = (r_lo1 <= tol) & (r_hi1 >= -tol)

    # Widened bracket for lightly or negatively loaded sections.
    lo2 = jnp.full(n, -0.25 * jnp.pi)
    hi2 = jnp.zeros(n)
    ok2 = (resid(lo2) <= tol) & (r_lo1 >= -tol)

    ok = ok1 | ok2
    lo = jnp.where(ok1, lo1, lo2)
    hi = jnp.where(ok1, hi1, hi2)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        pos = resid(mid) > 0.0
        hi = jnp.where(pos, mid, hi)
        lo = jnp.where(pos, lo, mid)
    phi = jax.lax.stop_gradient(0.5 * (lo + hi))

    # Two Newton steps restore the gradient path through the residual.
    dresid = jax.grad(lambda p: jnp.sum(resid(p)))
    for _ in range(2):
        r = resid(phi)
        dr = dresid(phi)
        safe = jnp.abs(dr) > 1e-30
        phi = phi - jnp.where(safe, r / jnp.where(safe, dr, 1.0), 0.0)
    return phi, ok


def solve_rotor_arrays(chord_st, twist_st, radius, hub_fraction, blade_count,
                       omega, axial_velocity, density, kinematic_viscosity,
                       polar, n_stations=N_STATIONS):
    """Array-level BEM solve; fully traceable.

    Returns a dict of jax values including per-span loads and the bracket
    success mask (callers outside jit turn failures into exceptions).
    """
    xi = jnp.asarray(station_sites(n_stations))
    r = radius * (hub_fraction + (1.0 - hub_fraction) * xi)
    vx = jnp.asarray(axial_velocity)
    vy = omega * r
    w_ref = jnp.sqrt(vx * vx + vy * vy)
    reynolds = jnp.maximum(w_ref * chord_st / kinematic_viscosity, 1e4)

    def resid(phi):
        return section_residual(phi, r, chord_st, twist_st, radius,
                                blade_count, vx, vy, reynolds, polar)

    phi, ok = _solve_phi_vector(resid, n_stations)

    sin = jnp.sin(phi)
    cos = jnp.cos(phi)
    F = prandtl_tip_loss(phi, r, radius, blade_count)
    alpha = twist_st - phi
    cl, cd = polar.coefficients(alpha, reynolds)
    cx = cl * cos - cd * sin
    ct = cl * sin + cd * cos
    sigma = blade_count * chord_st / (2.0 * jnp.pi * r)
    w = (4.0 * F * sin * vy) / (4.0 * F * sin * cos + sigma * ct)

    q_sec = 0.5 * density * w * w * blade_count * chord_st
    dT_dr = q_sec * cx
    dQ_dr = q_sec * ct * r
    thrust = jnp.trapezoid(dT_dr, r)
    torque = jnp.trapezoid(dQ_dr, r)
    power = omega * torque

    n_rev = omega / (2.0 * jnp.pi)
    diam = 2.0 * radius
    ct_coef = thrust / (density * n_rev**2 * diam**4)
    cq_coef = torque / (density * n_rev**2 * diam**5)
    disk_area = jnp.pi * radius * radius
    fom = jnp.where(
        (thrust > 0.0) & (power > 0.0),
        thrust * jnp.sqrt(jnp.maximum(thrust, 1e-30) / (2.0 * density * disk_area))
        / jnp.where(power > 0.0, power, 1.0),
        jnp.nan,
    )
    efficiency = jnp.where(power != 0.0, thrust * vx / jnp.where(power != 0.0, power, 1.0), 0.0)
    return {
        "phi": phi,
        "bracket_ok": ok,
        "residual": resid(phi),
        "r": r,
        "tip_loss": F,
        "cl": cl,
        "cd": cd,
        "dT_dr": dT_dr,
        "dQ_dr": dQ_dr,
        "thrust": thrust,
        "torque": torque,
        "power": power,
        "ct": ct_coef,
        "cq": cq_coef,
        "figure_of_merit": fom,
        "efficiency": efficiency,
    }


@dataclass(frozen=True)
class RotorPerformance:
    thrust: float
    torque: float
    power: float
    ct: float
    cq: float
    figure_of_merit: float
    fom_applicable: bool
    efficiency: float
    stations: np.ndarray = field(repr=False)
    thrust_per_span: np.ndarray = field(repr=False)
    torque_per_span: np.ndarray = field(repr=False)
    inflow_angle: np.ndarray = field(repr=False)
    tip_loss: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)

    @property
    def residual_scale(self):
        return float(np.abs(self.residual).max())


# Axial speeds above this are forward flight; the hover figure of merit is
# not meaningful there and is reported as not applicable.
FOM_AXIAL_LIMIT = 0.5


def evaluate_rotor(blade, operating_point, polar=None, n_stations=N_STATIONS):
    """Solve one rotor and package the result.

    Raises NonPhysicalSectionError when any station has no inflow root even
    after bracket widening (deeply negative loading states).
    """
    polar = polar or PolarModel()
    _, chord, twist = blade.section_values(n_stations)
    out = solve_rotor_arrays(
        jnp.asarray(chord), jnp.asarray(twist), blade.radius,
        blade.hub_radius_fraction, blade.blade_count,
        operating_point.omega, operating_point.axial_velocity,
        operating_point.density, operating_point.kinematic_viscosity,
        polar, n_stations,
    )
    ok = np.asarray(out["bracket_ok"])
    if not ok.all():
        bad = np.flatnonzero(~ok)
        raise NonPhysicalSectionError(
            f"no inflow-angle root at stations {bad.tolist()} "
            "(section loading outside the momentum-theory envelope)"
        )
    applicable = abs(operating_point.axial_velocity) <= FOM_AXIAL_LIMIT
    return RotorPerformance(
        thrust=float(out["thrust"]),
        torque=float(out["torque"]),
        power=float(out["power"]),
        ct=float(out["ct"]),
        cq=float(out["cq"]),
        figure_of_merit=float(out["figure_of_merit"]) if applicable else float("nan"),
        fom_applicable=applicable,
        efficiency=float(out["efficiency"]),
        stations=np.asarray(out["r"]),
        thrust_per_span=np.asarray(out["dT_dr"]),
        torque_per_span=np.asarray(out["dQ_dr"]),
        inflow_angle=np.asarray(out["phi"]),
        tip_loss=np.asarray(out["tip_loss"]),
        residual=np.asarray(out["residual"]),
    )
