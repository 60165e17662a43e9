"""Mapped arrays: points expressed as fixed linear maps of control points.

A MappedArray freezes *where* on a surface a set of points lives (parametric
coordinates found once, by projection or by construction) together with the
basis matrix that evaluates them.  After that, every geometry update is just
eval_matrix @ control_points, which is linear, cheap, and differentiable.
"""

from dataclasses import dataclass

import numpy as np

from ..backend import jnp
from ..exceptions import ContractError, IncompatibilityError
from .bspline import BSplineSurface, basis_matrix


@dataclass(frozen=True)
class MappedArray:
    """Points on a surface as a linear map of its flattened control points."""

    signature: tuple
    parametric_coords: np.ndarray
    eval_matrix: np.ndarray

    def __post_init__(self):
        uv = np.atleast_2d(np.asarray(self.parametric_coords, dtype=float))
        mat = np.asarray(self.eval_matrix, dtype=float)
        if mat.shape[0] != uv.shape[0]:
            raise ContractError("eval matrix rows must match point count")
        object.__setattr__(self, "parametric_coords", uv)
        object.__setattr__(self, "eval_matrix", mat)

    @property
    def n_points(self):
        return self.eval_matrix.shape[0]

    def check_compatible(self, surface):
        if surface.signature() != self.signature:
            raise IncompatibilityError(
                "mapped array was built against a different parameterization "
                f"({self.signature[0]!r} vs {surface.name!r})"
            )

    def apply(self, control_points):
        """Evaluate against a control grid (numpy or jax, shape (nu, nv, 3))."""
        cp = control_points.reshape(-1, 3)
        if isinstance(cp, np.ndarray):
            return self.eval_matrix @ cp
        return jnp.asarray(self.eval_matrix) @ cp


def apply_map(mapped, surface_or_control_points):
    """Evaluate a MappedArray; accepts a surface (checked) or a raw grid."""
    if isinstance(surface_or_control_points, BSplineSurface):
        mapped.check_compatible(surface_or_control_points)
        return mapped.apply(surface_or_control_points.control_points)
    return mapped.apply(surface_or_control_points)


def parametric_map(surface, uv):
    """MappedArray at known parametric coordinates (projection-free)."""
    uv = np.atleast_2d(np.asarray(uv, dtype=float))
    return MappedArray(
        signature=surface.signature(),
        parametric_coords=uv,
        eval_matrix=surface.basis_rows(uv),
    )


def parametric_grid_map(surface, us, vs):
    """MappedArray over the tensor grid us x vs, rows in C order (u major)."""
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    uv = np.column_stack([uu.ravel(), vv.ravel()])
    return parametric_map(surface, uv)


def _newton_project(surface, target, uv0, tol, max_iter=60):
    """Damped Newton refinement of the squared-distance minimum."""
    uv = np.array(uv0, dtype=float)
    lo_u, hi_u = surface.knots_u[0], surface.knots_u[-1]
    lo_v, hi_v = surface.knots_v[0], surface.knots_v[-1]

    def residual(uv_):
        return surface.evaluate(uv_[None, :])[0] - target

    d = residual(uv)
    dist2 = d @ d
    for _ in range(max_iter):
        su = surface.evaluate(uv[None, :], der_u=1)[0]
        sv = surface.evaluate(uv[None, :], der_v=1)[0]
        suu = surface.evaluate(uv[None, :], der_u=2)[0]
        svv = surface.evaluate(uv[None, :], der_v=2)[0]
        suv = surface.evaluate(uv[None, :], der_u=1, der_v=1)[0]
        grad = 2.0 * np.array([su @ d, sv @ d])
        hess = 2.0 * np.array(
            [
                [su @ su + suu @ d, su @ sv + suv @ d],
                [su @ sv + suv @ d, sv @ sv + svv @ d],
            ]
        )
        # Regularize toward gradient descent if the Hessian is indefinite.
        try:
            step = np.linalg.solve(hess + 1e-12 * np.eye(2), -grad)
        except np.linalg.LinAlgError:
            step = -grad
        if not np.all(np.isfinite(step)):
            step = -grad
        alpha = 1.0
        improved = False
        for _ in range(30):
            cand = np.array(
                [
                    np.clip(uv[0] + alpha * step[0], lo_u, hi_u),
                    np.clip(uv[1] + alpha * step[1], lo_v, hi_v),
                ]
            )
            d_new = residual(cand)
            dist2_new = d_new @ d_new
            if dist2_new <= dist2:
                moved = np.abs(cand - uv).max()
                uv, d, dist2 = cand, d_new, dist2_new
                improved = True
                break
            alpha *= 0.5
        if not improved or moved < tol:
            break
    return uv, np.sqrt(dist2)


def project_points(surface, targets, tol=1e-8, grid=64):
    """Closest-point projection of physical targets onto a surface.

    Seeds each point from a grid x grid parametric sample, then refines with
    damped Newton on the squared distance.  If refinement fails to improve
    on the seed, the seed itself is kept, so the result never regresses the
    grid-search answer.

    Returns a MappedArray; projected coordinates are recovered by apply_map.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.shape[1] != 3:
        raise ContractError("targets must have shape (n, 3)")
    us = np.linspace(surface.knots_u[0], surface.knots_u[-1], grid)
    vs = np.linspace(surface.knots_v[0], surface.knots_v[-1], grid)
    samples = surface.evaluate_grid(us, vs).reshape(-1, 3)
    uv_out = np.empty((targets.shape[0], 2))
    for k, x in enumerate(targets):
        d2 = np.einsum("ij,ij->i", samples - x, samples - x)
        best = int(np.argmin(d2))
        seed = np.array([us[best // grid], vs[best % grid]])
        uv, dist = _newton_project(surface, x, seed, tol)
        if dist > np.sqrt(d2[best]) + tol:
            uv = seed
        uv_out[k] = uv
    return parametric_map(surface, uv_out)
