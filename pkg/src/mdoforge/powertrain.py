"""Electric powertrain: motor sizing, loss model, battery bookkeeping.

The motor model keys everything to the rotor volume d^2*l: mass and peak
torque scale linearly with it, copper loss falls as its 3/2 power at fixed
torque, and iron plus fixed losses grow with it.  All constants are
synthetic, documented here, and tuned so the efficiency map peaks in the
mid-nineties over the operating envelope.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .backend import jnp
from .exceptions import ConfigError

EFFECTIVE_DENSITY = 3300.0  # kg/m^3 of swept volume
TORQUE_CONSTANT = 1.0e5  # N*m per m^3 of d^2*l
COPPER_LOSS_COEFF = 1.06e-5  # W * (m^3)^1.5 / (N*m)^2
IRON_LOSS_COEFF = 87.0  # W / (m^3 * (rad/s)^1.5)
FIXED_LOSS_COEFF = 3.67e4  # W / m^3
SPECIFIC_ENERGY_DEFAULT = 400.0  # Wh/kg
_WH_TO_J = 3600.0


@dataclass(frozen=True)
class MotorSizing:
    """Motor geometry; mass, torque limit, and losses derive from d^2*l."""

    diameter: float
    length: float

    @property
    def volume(self):
        return self.diameter**2 * self.length

    @property
    def mass(self):
        return EFFECTIVE_DENSITY * (jnp.pi / 4.0) * self.volume

    @property
    def max_torque(self):
        return TORQUE_CONSTANT * self.volume


def motor_mass(sizing):
    return sizing.mass


def motor_losses(sizing, torque, omega):
    """(copper, iron, fixed) loss terms in watts."""
    vol = sizing.volume
    copper = COPPER_LOSS_COEFF * torque**2 / vol**1.5
    iron = IRON_LOSS_COEFF * vol * jnp.abs(omega) ** 1.5
    fixed = FIXED_LOSS_COEFF * vol
    return copper, iron, fixed


def motor_performance(sizing, torque, omega):
    """Electrical power, efficiency, and torque margin at one operating point.

    Efficiency is shaft power over electrical power; it is exactly zero at
    zero torque.  The margin is the plain difference max_torque - torque so
    the optimizer sees an unclipped smooth constraint.
    """
    copper, iron, fixed = motor_losses(sizing, torque, omega)
    p_mech = torque * omega
    p_elec = p_mech + copper + iron + fixed
    efficiency = p_mech / p_elec
    margin = sizing.max_torque - torque
    return p_elec, efficiency, margin


def efficiency_map(sizing, rpm_grid, torque_grid):
    """Efficiency over an (rpm, torque) grid; rows follow rpm_grid."""
    omega = jnp.asarray(rpm_grid) * (2.0 * jnp.pi / 60.0)
    torque = jnp.asarray(torque_grid)
    _, eff, _ = motor_performance(
        sizing, torque[None, :], omega[:, None]
    )
    return eff


def write_efficiency_map(path, sizing, rpm_grid, torque_grid):
    """CSV export (rpm, torque, efficiency), one row per grid point."""
    eff = np.asarray(efficiency_map(sizing, rpm_grid, torque_grid))
    with open(path, "w", newline="") as fh:
        fh.write("# schema_version: 1\n")
        writer = csv.writer(fh)
        writer.writerow(["rpm", "torque_nm", "efficiency"])
        for i, rpm in enumerate(rpm_grid):
            for j, tq in enumerate(torque_grid):
                writer.writerow([f"{rpm:.6g}", f"{tq:.6g}", f"{eff[i, j]:.8f}"])


# ---------------------------------------------------------------------------
# battery

@dataclass(frozen=True)
class BatteryState:
    mass: float
    specific_energy: float = SPECIFIC_ENERGY_DEFAULT

    @property
    def capacity(self):
        """Capacity in joules."""
        return self.mass * self.specific_energy * _WH_TO_J


@dataclass(frozen=True)
class PowerProfile:
    """Per-segment electrical power draw (W) and duration (s)."""

    powers: np.ndarray
    durations: np.ndarray

    def __post_init__(self):
        powers = jnp.atleast_1d(jnp.asarray(self.powers))
        durations = jnp.atleast_1d(jnp.asarray(self.durations))
        if powers.shape != durations.shape:
            raise ConfigError("power and duration lists must have equal length")
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "durations", durations)

    @property
    def energy(self):
        return jnp.dot(self.powers, self.durations)


def battery_soc(battery, profile):
    """Final state of charge: raw value for the optimizer (may go negative)
    and a feasibility flag for reporting."""
    soc = 1.0 - profile.energy / battery.capacity
    return soc, bool(soc >= 0.0)
