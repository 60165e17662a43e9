"""Exception taxonomy shared by all disciplines.

The CLI maps these onto process exit codes, so solver code should raise the
most specific type it can rather than a bare ValueError.
"""


class ContractError(ValueError):
    """Inputs violate a documented precondition (shapes, bounds, schema)."""


class ConfigError(ContractError):
    """A configuration file is missing, unreadable, or fails validation."""


class IncompatibilityError(ContractError):
    """Two objects built against different discretizations were combined."""


class DegenerateGeometryError(ContractError):
    """Geometry collapsed below the documented thickness/area floors."""


class SolverError(RuntimeError):
    """An iterative solve failed to reach its stated tolerance."""


class NonPhysicalSectionError(SolverError):
    """No inflow-angle root exists for a blade section, even widened."""


class ModelValidityError(RuntimeError):
    """An empirical model was evaluated outside its validity envelope."""
