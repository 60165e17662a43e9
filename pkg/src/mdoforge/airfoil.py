"""Sectional airfoil polar: a smooth analytic lift/drag model.

Linear lift about the zero-lift angle blends into a flat-plate post-stall
branch through a C-infinity weight, so the polar is C1 everywhere and odd
about alpha0.  Drag carries a Reynolds power law on the profile term, an
induced-style cl^2 term, and a separated-flow term that activates with the
same stall blend.

Documented domain: |alpha - alpha0| <= 0.35 rad primary (smoothly degrading
beyond), Reynolds in [1e5, 1e7].
"""

from dataclasses import dataclass

import numpy as np

from .backend import jnp


@dataclass(frozen=True)
class PolarModel:
    alpha0: float = -0.071
    lift_slope: float = 0.95 * 2.0 * np.pi
    cl_max: float = 1.6
    cd0: float = 0.008
    re_ref: float = 1.0e6
    re_exponent: float = -0.15
    induced_factor: float = 0.025
    stall_width: float = 0.04
    post_stall_cl: float = 1.1
    separated_cd: float = 2.0

    @property
    def stall_onset(self):
        """Incidence (from zero lift) where the linear branch reaches cl_max."""
        return self.cl_max / self.lift_slope

    def stall_weight(self, delta):
        """Smooth 0 -> 1 switch past stall; even in delta, C-infinity."""
        ds = self.stall_onset
        t = (delta * delta - ds * ds) / (2.0 * ds * self.stall_width)
        return 0.5 * (1.0 + jnp.tanh(t))

    def lift_coefficient(self, alpha):
        delta = jnp.asarray(alpha) - self.alpha0
        w = self.stall_weight(delta)
        cl_lin = self.lift_slope * delta
        cl_sep = self.post_stall_cl * jnp.sin(2.0 * delta)
        return (1.0 - w) * cl_lin + w * cl_sep

    def drag_coefficient(self, alpha, reynolds):
        delta = jnp.asarray(alpha) - self.alpha0
        w = self.stall_weight(delta)
        cl = self.lift_coefficient(alpha)
        profile = self.cd0 * (jnp.asarray(reynolds) / self.re_ref) ** self.re_exponent
        induced = self.induced_factor * cl * cl
        separated = self.separated_cd * jnp.sin(delta) ** 2
        return profile + induced + w * separated

    def coefficients(self, alpha, reynolds):
        """cl and cd together (shared stall weight evaluation)."""
        return self.lift_coefficient(alpha), self.drag_coefficient(alpha, reynolds)

    @classmethod
    def from_config(cls, cfg):
        return cls(**{k: float(v) for k, v in cfg.items()})
