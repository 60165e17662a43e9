"""Rotor acoustics: harmonic tonal noise, empirical broadband, A-weighting.

Tonal levels follow the classical frequency-domain propeller result:
loading (thrust and torque) and thickness sources concentrated at an
effective radius, with Bessel-function directivity of order m*B and exact
inverse-distance spreading.  Observer angles are measured from the rotor
plane, so the on-axis direction (90 deg) is a tonal null.

Broadband follows the rotational-noise vortex component: a sixth power of
the 0.7-radius section speed, blade area, and a mean-lift correction,
referenced to 300 ft and spread spherically.  The spectrum is assigned a
single effective band center (default 1 kHz) for A-weighting.  All model
constants live in AcousticConfig.
"""

from dataclasses import dataclass

import numpy as np

from .backend import jax, jnp
from .exceptions import ModelValidityError

_M_TO_FT = 1.0 / 0.3048
_M2_TO_FT2 = _M_TO_FT * _M_TO_FT
_P_REF = 2.0e-5
_LEVEL_FLOOR = 1e-40  # pressure^2 floor keeping levels finite at nulls


@dataclass(frozen=True)
class AcousticConfig:
    harmonics: int = 10
    effective_radius_fraction: float = 0.8
    thickness_ratio: float = 0.12
    section_shape_factor: float = 0.6853
    broadband_constant: float = 6.1e-27  # ft/s and ft^2 units, 300 ft reference
    broadband_offset_db: float = 0.0  # installed-level calibration shift
    broadband_band_center_hz: float = 1000.0
    truncate_below_db: float = 40.0


def a_weight(freq_hz):
    """IEC A-weighting in dB; 0 at 1 kHz to within a hundredth."""
    f2 = jnp.asarray(freq_hz) ** 2
    ra = (12200.0**2 * f2 * f2) / (
        (f2 + 20.6**2)
        * (f2 + 12200.0**2)
        * jnp.sqrt(f2 + 107.7**2)
        * jnp.sqrt(f2 + 737.9**2)
    )
    return 20.0 * jnp.log10(ra) + 2.0


def combine_levels(levels, axis=None):
    """Energetic (incoherent) sum of decibel levels."""
    levels = jnp.asarray(levels)
    return 10.0 * jnp.log10(jnp.sum(10.0 ** (levels / 10.0), axis=axis))


def _bessel_jn_value(order, z):
    """J_order(z) for a small static integer order and traced z >= 0.

    The library's Miller recursion is NaN at z = 0, so a three-term power
    series covers z < 0.1 (relative error below 1e-10 there) and keeps the
    on-axis tonal null differentiable.
    """
    miller = jax.scipy.special.bessel_jn(
        jnp.maximum(z, 0.05), v=order, n_iter=60
    )[order]
    y = 0.25 * z * z
    series = 1.0 - y / (order + 1.0) + 0.5 * y * y / ((order + 1.0) * (order + 2.0))
    for k in range(1, order + 1):
        series = series * (0.5 * z / k)
    return jnp.where(z < 0.1, series, miller)


def tonal_pressures(thrust, torque, omega, blade_count, radius, hub_fraction,
                    chord_e, slant, sin_theta, axial_mach, density,
                    sound_speed, config=AcousticConfig()):
    """Harmonic rms pressures (loading, thickness) at one observer.

    Arrays of shape (harmonics,):  returns (freqs, p_loading, p_thickness).
    Exact 1/distance spreading; angle enters through sin_theta (component
    toward the rotor axis) and the Bessel arguments.
    """
    b_count = blade_count
    r_e = config.effective_radius_fraction * radius
    x = slant * sin_theta
    y2 = slant * slant * (1.0 - sin_theta * sin_theta)
    m2 = 1.0 - axial_mach * axial_mach
    s0 = jnp.sqrt(x * x + m2 * y2)
    y = jnp.sqrt(jnp.maximum(y2, 0.0))

    blade_span = radius * (1.0 - hub_fraction)
    v_section = (config.section_shape_factor * chord_e
                 * (config.thickness_ratio * chord_e) * blade_span)

    p_load = []
    p_thick = []
    freqs = []
    for m in range(1, config.harmonics + 1):
        mb = m * b_count
        arg = mb * omega * r_e * y / (sound_speed * s0)
        j_mb = _bessel_jn_value(mb, arg)
        # thrust and torque contributions summed incoherently: the unsteady
        # blade loads that carry them radiate with different phase, so a
        # coherent difference would let drag cancel thrust noise outright
        bracket = jnp.sqrt(
            ((axial_mach + x / s0) * omega / (sound_speed * m2) * thrust) ** 2
            + (torque / (r_e * r_e)) ** 2
            + 1e-30
        )
        loading = (
            mb / (2.0 * jnp.sqrt(2.0) * jnp.pi * s0)
            * bracket
            * j_mb
        )
        thickness = (
            -density * (mb * omega) ** 2 * b_count
            / (2.0 * jnp.sqrt(2.0) * jnp.pi * m2 * m2)
            * ((s0 + axial_mach * x) ** 2 / s0**3)
            * v_section * j_mb
        )
        p_load.append(loading)
        p_thick.append(thickness)
        freqs.append(mb * omega / (2.0 * jnp.pi))
    return jnp.stack(freqs), jnp.stack(p_load), jnp.stack(p_thick)


def tonal_spl(thrust, torque, omega, blade_count, radius, hub_fraction,
              chord_e, slant, sin_theta, axial_mach, density, sound_speed,
              config=AcousticConfig()):
    """Per-harmonic SPL (dB, unweighted) and line frequencies."""
    freqs, p_l, p_t = tonal_pressures(
        thrust, torque, omega, blade_count, radius, hub_fraction, chord_e,
        slant, sin_theta, axial_mach, density, sound_speed, config,
    )
    p2 = jnp.maximum(p_l * p_l + p_t * p_t, _LEVEL_FLOOR)
    return freqs, 10.0 * jnp.log10(p2 / (_P_REF * _P_REF))


def broadband_spl(thrust, omega, radius, blade_area, slant, density,
                  config=AcousticConfig()):
    """Vortex-component broadband level (dB-A at the effective band center).

    Level law: 10 log10(K * A_blade * V_0.7^6) + 160 + 20 log10(CL_mean/0.4)
    at 300 ft, in ft units, then spherical spreading to the observer and the
    A-weight of the single effective band.
    """
    v07 = 0.7 * omega * radius
    cl_mean = 6.0 * thrust / (density * blade_area * (omega * radius) ** 2)
    # smooth positive floor so lightly loaded rotors stay in-domain
    cl_eff = 0.5 * (cl_mean + jnp.sqrt(cl_mean * cl_mean + 4e-4))
    level_300 = (
        10.0 * jnp.log10(
            config.broadband_constant
            * (blade_area * _M2_TO_FT2)
            * (v07 * _M_TO_FT) ** 6
        )
        + 160.0
        + 20.0 * jnp.log10(cl_eff / 0.4)
        + config.broadband_offset_db
    )
    spread = -20.0 * jnp.log10(slant * _M_TO_FT / 300.0)
    return level_300 + spread + a_weight(config.broadband_band_center_hz)


def rotor_noise_dba(thrust, torque, omega, blade_count, radius, hub_fraction,
                    chord_e, blade_area, slant, sin_theta, axial_mach,
                    density, sound_speed, config=AcousticConfig()):
    """A-weighted tonal and broadband levels for one rotor at one observer."""
    freqs, spl = tonal_spl(
        thrust, torque, omega, blade_count, radius, hub_fraction, chord_e,
        slant, sin_theta, axial_mach, density, sound_speed, config,
    )
    tonal_a = combine_levels(spl + a_weight(freqs))
    broadband_a = broadband_spl(thrust, omega, radius, blade_area, slant,
                                density, config)
    return tonal_a, broadband_a


def check_tip_mach(omega, radius, axial_velocity, sound_speed):
    """Raise when the helical tip Mach number leaves the model envelope."""
    m_tip = np.sqrt((omega * radius) ** 2 + axial_velocity**2) / sound_speed
    if m_tip >= 1.0:
        raise ModelValidityError(
            f"tip Mach {m_tip:.3f} >= 1; harmonic noise model invalid"
        )
    return m_tip


def truncate_spectrum(freqs, spl, config=AcousticConfig()):
    """Drop lines more than the configured drop below the fundamental."""
    freqs = np.asarray(freqs)
    spl = np.asarray(spl)
    keep = spl >= spl[0] - config.truncate_below_db
    return freqs[keep], spl[keep]
