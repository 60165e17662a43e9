"""Lifting-surface aerodynamics: a vortex-ring lattice with a frozen wake.

Vortex rings sit shifted a quarter panel-chord aft of the camber mesh,
collocation is at panel three-quarter chord, and each trailing-edge ring
sheds a semi-infinite horseshoe along the freestream (frozen wake, Kutta
condition by construction).  Panel forces come from Kutta-Joukowski
products on every bound segment using locally induced velocity, so induced
drag is a near-field quantity.

Frame: x aft, y starboard, z up.  Freestream arrives along
(cos alpha, 0, sin alpha), so positive incidence lifts toward +z.
"""

from dataclasses import dataclass, field

import numpy as np

from .backend import jnp
from .exceptions import ContractError

_EPS = 1e-10


def _segment_velocity(p1, p2, x):
    """Unit-circulation Biot-Savart velocity of finite segments.

    Broadcasts over leading axes; returns zero on the segment axis
    (including its own midpoint), which excludes self-influence naturally.
    """
    r1 = x - p1
    r2 = x - p2
    cr = jnp.cross(r1, r2)
    n1 = jnp.linalg.norm(r1, axis=-1)
    n2 = jnp.linalg.norm(r2, axis=-1)
    denom = n1 * n2 * (n1 * n2 + jnp.sum(r1 * r2, axis=-1)) + _EPS
    k = (n1 + n2) / denom
    return cr * k[..., None] / (4.0 * jnp.pi)


def _semi_infinite_velocity(p, direction, x):
    """Velocity of a unit filament from p to infinity along a unit vector."""
    r = x - p
    nr = jnp.linalg.norm(r, axis=-1)
    dr = jnp.sum(direction * r, axis=-1)
    cr = jnp.cross(direction, r)
    denom = nr * (nr - dr) + _EPS
    return cr / denom[..., None] / (4.0 * jnp.pi)


def _mesh_system(points):
    """Ring corners, collocation points, normals and TE corners of one mesh."""
    p = points
    nc = p.shape[0] - 1
    ns = p.shape[1] - 1
    q = p[:-1] + 0.25 * (p[1:] - p[:-1])  # ring front-corner grid (nc, ns+1, 3)
    rear_last = p[-1] + 0.25 * (p[-1] - p[-2])  # beyond-TE corner row (ns+1, 3)
    qr = jnp.concatenate([q[1:], rear_last[None]], axis=0)  # rear corners

    fl = q[:, :-1]
    fr = q[:, 1:]
    rr = qr[:, 1:]
    rl = qr[:, :-1]
    corners = jnp.stack([fl, fr, rr, rl], axis=2).reshape(nc * ns, 4, 3)

    front_mid = 0.5 * (p[:-1, :-1] + p[:-1, 1:])
    rear_mid = 0.5 * (p[1:, :-1] + p[1:, 1:])
    cps = (front_mid + 0.75 * (rear_mid - front_mid)).reshape(nc * ns, 3)

    d1 = p[1:, 1:] - p[:-1, :-1]
    d2 = p[:-1, 1:] - p[1:, :-1]
    nrm = jnp.cross(d1, d2)
    nrm = nrm / jnp.linalg.norm(nrm, axis=-1, keepdims=True)
    normals = nrm.reshape(nc * ns, 3)

    te_cols = jnp.arange(ns) + (nc - 1) * ns  # panel index of each TE column
    te_rl = rl[-1]
    te_rr = rr[-1]
    return corners, cps, normals, te_cols, te_rl, te_rr


@dataclass(frozen=True)
class VlmProblem:
    """One or more camber meshes in a shared freestream."""

    meshes: tuple
    speed: float
    alpha: float
    density: float
    s_ref: float
    c_ref: float
    x_ref: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.meshes:
            raise ContractError("at least one mesh is required")
        for m in self.meshes:
            if m.ndim != 3 or m.shape[2] != 3 or m.shape[0] < 2 or m.shape[1] < 2:
                raise ContractError("meshes must have shape (nc+1, ns+1, 3)")


@dataclass(frozen=True)
class AeroLoads:
    cl: float
    cdi: float
    cd0: float
    cm: float
    force: np.ndarray = field(repr=False)
    moment: np.ndarray = field(repr=False)
    circulation: np.ndarray = field(repr=False)

    @property
    def cd(self):
        return self.cd0 + self.cdi


def solve_vlm_arrays(meshes, speed, alpha, density, s_ref, c_ref,
                     x_ref=(0.0, 0.0, 0.0)):
    """Array-level lattice solve; fully traceable.

    Returns a dict with dimensional force/moment (design frame) and the
    usual coefficients (cd0 is not aero-resolved here and is reported 0).
    """
    vhat = jnp.stack([jnp.cos(alpha), jnp.asarray(0.0) * alpha, jnp.sin(alpha)])
    vinf = speed * vhat

    sys = [_mesh_system(jnp.asarray(m)) for m in meshes]
    corners = jnp.concatenate([s[0] for s in sys], axis=0)
    cps = jnp.concatenate([s[1] for s in sys], axis=0)
    normals = jnp.concatenate([s[2] for s in sys], axis=0)
    offsets = np.cumsum([0] + [s[0].shape[0] for s in sys])
    te_cols = jnp.concatenate(
        [s[3] + offsets[i] for i, s in enumerate(sys)], axis=0
    )
    te_rl = jnp.concatenate([s[4] for s in sys], axis=0)
    te_rr = jnp.concatenate([s[5] for s in sys], axis=0)

    n_panel = corners.shape[0]
    p1 = corners
    p2 = jnp.roll(corners, -1, axis=1)

    def ring_velocity(x):
        """Velocity at points x (E, 3) per unit ring circulation: (E, K, 3)."""
        xe = x[:, None, None, :]
        v = _segment_velocity(p1[None], p2[None], xe)
        return jnp.sum(v, axis=2)

    def wake_velocity(x):
        """Velocity per unit wake circulation for each TE column: (E, T, 3)."""
        xe = x[:, None, :]
        near = _segment_velocity(te_rl[None], te_rr[None], xe)
        out_r = _semi_infinite_velocity(te_rr[None], vhat[None, None], xe)
        out_l = _semi_infinite_velocity(te_rl[None], vhat[None, None], xe)
        return near + out_r - out_l

    aic = jnp.einsum("mkc,mc->mk", ring_velocity(cps), normals)
    wake_aic = jnp.einsum("mtc,mc->mt", wake_velocity(cps), normals)
    aic = aic.at[:, te_cols].add(wake_aic)
    rhs = -(normals @ vinf)  # flow tangency
    gamma = jnp.linalg.solve(aic, rhs)

    # Kutta-Joukowski on every bound ring edge plus the wake near segment
    # (which cancels the TE edge), with fully induced local velocity.
    seg_a = jnp.concatenate([p1.reshape(-1, 3), te_rl], axis=0)
    seg_b = jnp.concatenate([p2.reshape(-1, 3), te_rr], axis=0)
    seg_gamma = jnp.concatenate(
        [jnp.repeat(gamma, 4), gamma[te_cols]], axis=0
    )
    mids = 0.5 * (seg_a + seg_b)
    v_mid = (
        vinf[None, :]
        + jnp.einsum("ekc,k->ec", ring_velocity(mids), gamma)
        + jnp.einsum("etc,t->ec", wake_velocity(mids), gamma[te_cols])
    )
    lvec = seg_b - seg_a
    df = density * seg_gamma[:, None] * jnp.cross(v_mid, lvec)
    force = jnp.sum(df, axis=0)
    arm = mids - jnp.asarray(x_ref)
    moment = jnp.sum(jnp.cross(arm, df), axis=0)

    q = 0.5 * density * speed * speed
    lift_dir = jnp.stack([-jnp.sin(alpha), jnp.asarray(0.0) * alpha,
                          jnp.cos(alpha)])
    cl = force @ lift_dir / (q * s_ref)
    cdi = force @ vhat / (q * s_ref)
    cm = moment[1] / (q * s_ref * c_ref)
    return {
        "force": force,
        "moment": moment,
        "gamma": gamma,
        "cl": cl,
        "cdi": cdi,
        "cm": cm,
    }


def solve_vlm(problem):
    """Solve a VlmProblem and package the loads."""
    out = solve_vlm_arrays(
        problem.meshes, problem.speed, problem.alpha, problem.density,
        problem.s_ref, problem.c_ref, problem.x_ref,
    )
    return AeroLoads(
        cl=float(out["cl"]),
        cdi=float(out["cdi"]),
        cd0=0.0,
        cm=float(out["cm"]),
        force=np.asarray(out["force"]),
        moment=np.asarray(out["moment"]),
        circulation=np.asarray(out["gamma"]),
    )


def drag_buildup(drag_areas, s_ref):
    """Parasite drag coefficient from summed component drag areas (m^2)."""
    total = 0.0
    for value in (drag_areas.values() if hasattr(drag_areas, "values")
                  else drag_areas):
        total = total + jnp.asarray(value)
    return total / s_ref


def stall_speed(weight, density, s_ref, cl_max):
    """Level-flight 1g stall speed."""
    return jnp.sqrt(2.0 * weight / (density * s_ref * cl_max))
