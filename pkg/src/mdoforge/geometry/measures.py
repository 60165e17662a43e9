"""Scalar measures of mapped point sets.

These operate on evaluated point arrays (numpy or jax), so they can sit
inside traced code.  Area uses the cross-product quadrilateral rule, which
is exact for planar panels and is the same rule the aerodynamic meshes use.
"""

from ..backend import jnp
from ..exceptions import ContractError

MEASURE_KINDS = ("distance", "span", "radius", "length", "area", "aspect_ratio")


def distance(p0, p1):
    """Euclidean distance between two points. Also used for span and radius."""
    d = jnp.asarray(p1) - jnp.asarray(p0)
    return jnp.sqrt(jnp.sum(d * d))


def polyline_length(points):
    """Arc length of an ordered point chain, shape (n, 3)."""
    pts = jnp.asarray(points)
    seg = pts[1:] - pts[:-1]
    return jnp.sum(jnp.sqrt(jnp.sum(seg * seg, axis=1)))


def grid_area(grid_points):
    """Total area of a structured quad grid, shape (m, n, 3).

    Each quad contributes 0.5 * |d1 x d2| with d1, d2 its diagonals.
    """
    g = jnp.asarray(grid_points)
    if g.ndim != 3 or g.shape[0] < 2 or g.shape[1] < 2:
        raise ContractError("area needs a structured grid of at least 2x2 points")
    d1 = g[1:, 1:] - g[:-1, :-1]
    d2 = g[1:, :-1] - g[:-1, 1:]
    cr = jnp.cross(d1, d2)
    return 0.5 * jnp.sum(jnp.sqrt(jnp.sum(cr * cr, axis=-1)))


def aspect_ratio(span, area):
    """Planform aspect ratio span^2 / area."""
    return span * span / area


def measure(kind, *args):
    """Dispatch a named measure; kinds: distance/span/radius/length/area/aspect_ratio."""
    if kind in ("distance", "span", "radius"):
        return distance(*args)
    if kind == "length":
        return polyline_length(*args)
    if kind == "area":
        return grid_area(*args)
    if kind == "aspect_ratio":
        return aspect_ratio(*args)
    raise ContractError(f"unknown measure kind {kind!r}")
