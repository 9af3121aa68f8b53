"""Dynamic back-action: the position-response force kernel and the optical
spring / damping extracted from it.

Three evaluation paths with increasing approximation:

* exact      full matrix path, valid for any parameters;
* narrowband closed form in the effective-cavity rates, valid for a
             balanced beamsplitter near a dark port with a narrow line;
* free mass  zero-frequency limit of the narrowband form with a fully
             reflective membrane (the amplitude-reflectivity-squared
             prefactor is kept so partially transmissive membranes reduce
             correctly at zero membrane detuning).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT

from . import cavity as cav
from .cavity import EffectiveCavity
from .params import InterferometerConfig, MirrorParams


@dataclass(frozen=True)
class BackActionResponse:
    """Kernel samples over a positive frequency grid with K and Gamma split off."""

    omega: np.ndarray
    kernel: np.ndarray
    spring: np.ndarray
    damping: np.ndarray
    method: str


def spring_damping(kernel, omega):
    """Split a kernel sample into spring K = Re and damping = -Im/(2*omega)."""
    k = np.asarray(kernel)
    om = np.asarray(omega, dtype=float)
    return k.real, -k.imag / (2.0 * om)


def _feedback_entries(config: InterferometerConfig, omega):
    """Closed-form entries of the displacement-feedback matrix, vectorized."""
    geom = config.geometry
    rm = config.membrane.reflectivity
    rb, tb = config.bs.reflectivity, config.bs.transmissivity
    r_sr = config.srm.reflectivity

    k_side = np.asarray(omega, dtype=float) / C_LIGHT
    roundtrip = np.exp(
        1j * (cav.roundtrip_phase(config) + 2.0 * k_side * geom.cavity_length)
    )
    imbalance = np.exp(
        1j * (cav.imbalance_phase(config) + k_side * cav.imbalance_length(config))
    )
    dinv = 1.0 / cav.resonance_denominator(config, omega)
    common = dinv * rm * r_sr * roundtrip
    return common * rb**2 / imbalance, -common * rb * tb, common * tb**2 * imbalance


def kernel_exact(config: InterferometerConfig, omega, arm_gauge: float = 0.0):
    """Exact matrix-path kernel (N/m) at sideband frequency omega.

    Vectorized over omega.  Defined at omega = 0 by continuity (the value is
    real there); use :func:`spring_damping` only at nonzero omega.
    """
    om = np.asarray(omega, dtype=float)
    m_inc, m_ref, _ = cav.membrane_field_matrices(config, 0.0, arm_gauge)
    a1, a2 = m_inc[0, 0], m_inc[1, 0]
    b1, b2 = np.conj(m_ref[0, 0]), np.conj(m_ref[1, 0])
    static = b1 * a1 - b2 * a2

    def quadratic_form(omega_signed):
        x11, x12, x22 = _feedback_entries(config, omega_signed)
        return static - 2.0 * (
            b1 * (x11 * a1 + x12 * a2) + b2 * (x12 * a1 + x22 * a2)
        )

    geom = config.geometry
    scale = 2j * geom.wavenumber / C_LIGHT * config.membrane.reflectivity * config.input_power
    return scale * (quadratic_form(om) - np.conj(quadratic_form(-om)))


def kernel_narrowband(
    cavity: EffectiveCavity,
    membrane: MirrorParams,
    input_power: float,
    carrier_omega: float,
    cavity_length: float,
    omega,
    detuning=None,
):
    """Narrow-band closed-form kernel (N/m); broadcasts over omega and detuning.

    ``detuning`` overrides the cavity's own total detuning (the membrane
    contribution stays fixed, the recycling tuning absorbs the rest), which
    makes detuning sweeps cheap.
    """
    om = np.asarray(omega, dtype=float)
    delta = cavity.detuning if detuning is None else np.asarray(detuning, dtype=float)
    gamma = cavity.half_linewidth
    gamma_sr = cavity.srm_half_linewidth
    gamma_m = cavity.membrane_half_linewidth
    delta_m = cavity.membrane_detuning
    delta_sr = delta - delta_m

    lorentz = gamma**2 + delta**2
    prefactor = (
        4.0 * carrier_omega * membrane.reflectivity**2 * input_power
        / (C_LIGHT * cavity_length)
    )
    braces = (
        delta_sr * (lorentz - 4.0 * (gamma * gamma_m + delta * delta_m))
        + 2j * (gamma_sr * delta_m + gamma_m * delta_sr) * om
        + delta_m * om**2
    ) / lorentz
    return prefactor * braces / (delta**2 + (gamma - 1j * om) ** 2)


def kernel_narrowband_config(config: InterferometerConfig, omega, detuning=None):
    """Narrow-band kernel with rates reduced from a full configuration."""
    return kernel_narrowband(
        cav.effective_cavity(config),
        config.membrane,
        config.input_power,
        config.geometry.carrier_omega,
        config.geometry.cavity_length,
        omega,
        detuning,
    )


def spring_damping_dc(
    cavity: EffectiveCavity,
    membrane: MirrorParams,
    input_power: float,
    carrier_omega: float,
    cavity_length: float,
    detuning=None,
):
    """Zero-frequency limit of the narrow-band spring and damping.

    Keeps the membrane-detuning terms, so it is the general quasi-static
    limit; :func:`free_mass_spring_damping` is its zero-membrane-detuning
    special case.
    """
    delta = cavity.detuning if detuning is None else np.asarray(detuning, dtype=float)
    gamma = cavity.half_linewidth
    gamma_sr = cavity.srm_half_linewidth
    gamma_m = cavity.membrane_half_linewidth
    delta_m = cavity.membrane_detuning
    delta_sr = delta - delta_m

    lorentz = gamma**2 + delta**2
    prefactor = (
        4.0 * carrier_omega * membrane.reflectivity**2 * input_power
        / (C_LIGHT * cavity_length)
    )
    reduced = lorentz - 4.0 * (gamma * gamma_m + delta * delta_m)
    spring = prefactor * delta_sr * reduced / lorentz**2
    damping = (
        -prefactor
        * (gamma * delta_sr * reduced / lorentz + gamma_sr * delta_m + gamma_m * delta_sr)
        / lorentz**2
    )
    return spring, damping


def free_mass_spring_damping(
    cavity: EffectiveCavity,
    membrane: MirrorParams,
    input_power: float,
    carrier_omega: float,
    cavity_length: float,
    detuning,
):
    """Quasi-static spring and damping of the fully reflective-membrane limit.

    The brackets carry the whole deviation from the canonical detuned-cavity
    laws: the spring gains two extra zeros at +-sqrt(gamma*(4*gamma_m - gamma))
    once gamma_m > gamma/4, the damping at
    +-gamma*sqrt((3*gamma_m - gamma)/(gamma + gamma_m)) once gamma_m > gamma/3.
    """
    delta = np.asarray(detuning, dtype=float)
    gamma = cavity.half_linewidth
    gamma_m = cavity.membrane_half_linewidth
    lorentz = gamma**2 + delta**2
    prefactor = (
        4.0 * carrier_omega * membrane.reflectivity**2 * input_power
        / (C_LIGHT * cavity_length)
    )
    spring = prefactor * delta / lorentz * (1.0 - 4.0 * gamma * gamma_m / lorentz)
    damping = (
        -prefactor
        * gamma
        * delta
        / lorentz**2
        * (1.0 - (gamma_m / gamma) * (3.0 * gamma**2 - delta**2) / lorentz)
    )
    return spring, damping


def damping_at_dc(kernel_fn, half_linewidth: float) -> float:
    """Zero-frequency damping by one-sided finite difference with one
    Richardson refinement; the direct ratio is singular at zero."""
    step = 1e-6 * half_linewidth

    def damping_at(om):
        return -np.imag(kernel_fn(om)) / (2.0 * om)

    return float((4.0 * damping_at(step / 2.0) - damping_at(step)) / 3.0)


def exact_response(config: InterferometerConfig, omega) -> BackActionResponse:
    """Exact-kernel response over a positive frequency grid."""
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om <= 0.0):
        raise ValueError("response grids must be strictly positive in frequency")
    kernel = kernel_exact(config, om)
    spring, damping = spring_damping(kernel, om)
    return BackActionResponse(om, kernel, spring, damping, "exact")


def narrowband_response(config: InterferometerConfig, omega) -> BackActionResponse:
    """Narrow-band response over a positive frequency grid."""
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    if np.any(om <= 0.0):
        raise ValueError("response grids must be strictly positive in frequency")
    kernel = kernel_narrowband_config(config, om)
    spring, damping = spring_damping(kernel, om)
    return BackActionResponse(om, kernel, spring, damping, "narrowband")


@dataclass(frozen=True)
class CanonicalFeatureReport:
    """Outcome of the canonical-shape checks on a detuning sweep."""

    antisymmetric: bool
    damping_single_zero: bool
    damping_positive_below_resonance: bool
    spring_zero_count: int
    expected_spring_zero_count: int
    spring_zeros: np.ndarray
    damping_zeros: np.ndarray

    @property
    def passed(self) -> bool:
        return (
            self.antisymmetric
            and self.damping_single_zero
            and self.damping_positive_below_resonance
            and self.spring_zero_count == self.expected_spring_zero_count
        )


def canonical_features_check(
    detuning: np.ndarray,
    spring: np.ndarray,
    damping: np.ndarray,
    half_linewidth: float,
    omega: float,
    antisymmetry_tol: float = 1e-10,
) -> CanonicalFeatureReport:
    """Check the canonical on-dark-port shapes of K and Gamma over a detuning
    sweep: antisymmetry, a single damping zero that cools below resonance,
    and one spring zero when the line is broader than the analysis frequency
    versus three when it is narrower.

    The detuning grid must be symmetric about zero.
    """
    from .stability import find_zero_crossings  # local import, avoids a cycle

    delta = np.asarray(detuning, dtype=float)
    if not np.allclose(delta, -delta[::-1], rtol=0.0, atol=1e-9 * max(abs(delta[0]), 1.0)):
        raise ValueError("canonical checks need a detuning grid symmetric about zero")

    def antisym(values):
        scale = np.max(np.abs(values))
        return bool(np.max(np.abs(values + values[::-1])) <= antisymmetry_tol * scale)

    spring_i = _grid_interpolant(delta, spring)
    damping_i = _grid_interpolant(delta, damping)
    span = (float(delta[0]), float(delta[-1]))
    spring_zeros = find_zero_crossings(spring_i, *span, n_scan=delta.size)
    damping_zeros = find_zero_crossings(damping_i, *span, n_scan=delta.size)

    below = delta < -1e-3 * half_linewidth
    return CanonicalFeatureReport(
        antisymmetric=antisym(spring) and antisym(damping),
        damping_single_zero=damping_zeros.size == 1,
        damping_positive_below_resonance=bool(np.all(damping[below] > 0.0)),
        spring_zero_count=int(spring_zeros.size),
        expected_spring_zero_count=1 if half_linewidth >= omega else 3,
        spring_zeros=spring_zeros,
        damping_zeros=damping_zeros,
    )


def _grid_interpolant(x, y):
    def f(value):
        return float(np.interp(value, x, y))

    return f
