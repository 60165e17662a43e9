"""mdoforge: geometry-centric multidisciplinary design optimization.

Differentiable discipline models (rotor aerodynamics, lifting surfaces,
acoustics, mass, powertrain, mission) assembled into constrained design
studies of a lift-plus-cruise aircraft.
"""

from . import backend  # noqa: F401  (enables float64 before anything else)

__version__ = "0.1.0"
