"""B-spline curves and tensor-product surfaces.

Evaluation goes through explicit basis matrices: a dense matrix that sends
control points to evaluated points.  Keeping the map explicit is what lets
the rest of the code treat meshes as linear functions of control points and
differentiate through geometry updates without re-running any fitting.
"""

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ContractError


def clamped_knots(n_ctrl, degree):
    """Uniform clamped knot vector on [0, 1] for n_ctrl control points."""
    if n_ctrl < degree + 1:
        raise ContractError(
            f"need at least {degree + 1} control points for degree {degree}"
        )
    n_interior = n_ctrl - degree - 1
    interior = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    return np.concatenate(
        [np.zeros(degree + 1), interior, np.ones(degree + 1)]
    )


def _validate_knots(knots, degree, n_ctrl):
    knots = np.asarray(knots, dtype=float)
    if knots.ndim != 1 or len(knots) != n_ctrl + degree + 1:
        raise ContractError(
            f"knot vector length {len(knots)} does not match "
            f"{n_ctrl} control points at degree {degree}"
        )
    if np.any(np.diff(knots) < 0):
        raise ContractError("knot vector must be nondecreasing")
    if not (
        np.allclose(knots[: degree + 1], knots[0])
        and np.allclose(knots[-degree - 1 :], knots[-1])
    ):
        raise ContractError("knot vector must be clamped")
    return knots


def _find_span(knots, degree, u):
    """Index of the knot span containing u, last span closed."""
    n = len(knots) - degree - 2
    if u >= knots[n + 1]:
        return n
    if u <= knots[degree]:
        return degree
    return int(np.searchsorted(knots, u, side="right")) - 1


def _basis_ders(knots, degree, span, u, nders):
    """Nonzero basis functions and derivatives at u (rows: order 0..nders)."""
    p = degree
    ndu = np.empty((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nders + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.empty((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, nders + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = float(p)
    for k in range(1, nders + 1):
        ders[k, :] *= fac
        fac *= p - k
    return ders


def basis_matrix(knots, degree, params, der=0):
    """Dense basis (or basis-derivative) matrix.

    Parameters
    ----------
    knots : array
        Clamped nondecreasing knot vector.
    degree : int
        Spline degree.
    params : array
        Parameter values in [knots[0], knots[-1]].
    der : int
        Derivative order of the returned basis rows.

    Returns
    -------
    ndarray of shape (len(params), n_ctrl).  Row k holds the (derivative of
    the) basis functions at params[k]; at der=0 each row sums to 1.
    """
    knots = np.asarray(knots, dtype=float)
    params = np.atleast_1d(np.asarray(params, dtype=float))
    n_ctrl = len(knots) - degree - 1
    lo, hi = knots[0], knots[-1]
    if np.any(params < lo - 1e-12) or np.any(params > hi + 1e-12):
        raise ContractError("parameter outside the knot range")
    params = np.clip(params, lo, hi)
    out = np.zeros((len(params), n_ctrl))
    for k, u in enumerate(params):
        span = _find_span(knots, degree, u)
        ders = _basis_ders(knots, degree, span, u, der)
        out[k, span - degree : span + 1] = ders[der]
    return out


def greville_abscissae(knots, degree):
    """Averaged-knot parameter sites, one per control point."""
    knots = np.asarray(knots, dtype=float)
    n_ctrl = len(knots) - degree - 1
    return np.array(
        [knots[i + 1 : i + degree + 1].mean() for i in range(n_ctrl)]
    )


@dataclass(frozen=True)
class BSplineCurve:
    """Clamped B-spline curve with control points of any coordinate width."""

    degree: int
    knots: np.ndarray
    control_points: np.ndarray

    def __post_init__(self):
        cp = np.atleast_2d(np.asarray(self.control_points, dtype=float))
        knots = _validate_knots(self.knots, self.degree, cp.shape[0])
        object.__setattr__(self, "control_points", cp)
        object.__setattr__(self, "knots", knots)

    @property
    def n_ctrl(self):
        return self.control_points.shape[0]

    def evaluate(self, u, der=0):
        mat = basis_matrix(self.knots, self.degree, u, der)
        return mat @ self.control_points


@dataclass(frozen=True)
class BSplineSurface:
    """Tensor-product surface S(u, v) with a (nu, nv, 3) control grid."""

    degree_u: int
    degree_v: int
    knots_u: np.ndarray
    knots_v: np.ndarray
    control_points: np.ndarray
    name: str = field(default="surface")

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=float)
        if cp.ndim != 3 or cp.shape[2] != 3:
            raise ContractError("control grid must have shape (nu, nv, 3)")
        ku = _validate_knots(self.knots_u, self.degree_u, cp.shape[0])
        kv = _validate_knots(self.knots_v, self.degree_v, cp.shape[1])
        object.__setattr__(self, "control_points", cp)
        object.__setattr__(self, "knots_u", ku)
        object.__setattr__(self, "knots_v", kv)

    @property
    def shape(self):
        return self.control_points.shape[:2]

    def signature(self):
        """Hashable identity of the parameterization (not the shape)."""
        return (
            self.name,
            self.degree_u,
            self.degree_v,
            self.shape,
            self.knots_u.tobytes(),
            self.knots_v.tobytes(),
        )

    def basis_rows(self, uv, der_u=0, der_v=0):
        """Tensor basis rows for parameter pairs uv of shape (n, 2).

        Returns (n, nu*nv); evaluation is rows @ control_points.reshape(-1, 3).
        """
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        bu = basis_matrix(self.knots_u, self.degree_u, uv[:, 0], der_u)
        bv = basis_matrix(self.knots_v, self.degree_v, uv[:, 1], der_v)
        return (bu[:, :, None] * bv[:, None, :]).reshape(uv.shape[0], -1)

    def evaluate(self, uv, der_u=0, der_v=0):
        rows = self.basis_rows(uv, der_u, der_v)
        return rows @ self.control_points.reshape(-1, 3)

    def evaluate_grid(self, us, vs):
        """Evaluate on the tensor grid us x vs, returning (nu_s, nv_s, 3)."""
        bu = basis_matrix(self.knots_u, self.degree_u, us)
        bv = basis_matrix(self.knots_v, self.degree_v, vs)
        return np.einsum("ui,vj,ijc->uvc", bu, bv, self.control_points)


def fit_curve(points, degree, params=None):
    """Interpolating curve through points at Greville parameter sites."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    knots = clamped_knots(n, degree)
    if params is None:
        params = greville_abscissae(knots, degree)
    coll = basis_matrix(knots, degree, params)
    ctrl = np.linalg.solve(coll, points)
    return BSplineCurve(degree=degree, knots=knots, control_points=ctrl)


def fit_surface(grid, degree_u, degree_v, name="surface"):
    """Interpolating surface through a (nu, nv, 3) grid of points.

    Collocation at Greville sites in both directions; the returned surface
    passes through every input point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 3 or grid.shape[2] != 3:
        raise ContractError("point grid must have shape (nu, nv, 3)")
    nu, nv = grid.shape[:2]
    ku = clamped_knots(nu, degree_u)
    kv = clamped_knots(nv, degree_v)
    au = basis_matrix(ku, degree_u, greville_abscissae(ku, degree_u))
    av = basis_matrix(kv, degree_v, greville_abscissae(kv, degree_v))
    # Tensor interpolation: solve along u for every v column, then along v.
    tmp = np.linalg.solve(au, grid.reshape(nu, -1)).reshape(nu, nv, 3)
    tmp = np.moveaxis(tmp, 0, 1).reshape(nv, -1)
    ctrl = np.linalg.solve(av, tmp).reshape(nv, nu, 3)
    ctrl = np.moveaxis(ctrl, 0, 1)
    return BSplineSurface(
        degree_u=degree_u,
        degree_v=degree_v,
        knots_u=ku,
        knots_v=kv,
        control_points=ctrl,
        name=name,
    )
