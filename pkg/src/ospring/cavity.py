"""Dark-port solver and reduction of the recycled interferometer to an
effective detuned cavity.

The carrier phases of the model are pinned here.  A configuration stores
the dark-port index, the metric offset from that dark port and the carrier
detuning from the dark-port resonance; from those three numbers the carrier
imbalance phase and the carrier round-trip phase are reconstructed exactly,
so results never depend on knowing a macroscopic length to within a
fraction of a wavelength.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C_LIGHT

from . import transfer_optics as to
from .params import BeamsplitterParams, InterferometerConfig, MirrorParams

NARROWBAND_WARN = 0.1


class NoDarkPortError(ValueError):
    """The requested dark-output condition has no solution."""


def dark_port_phase(membrane: MirrorParams, bs: BeamsplitterParams, index: int = 1) -> float:
    """One-way imbalance phase k0*delta_l of the index-th dark output.

    Solves cos(k0*delta_l) = -(t_m/r_m) * asymmetry / sqrt(1 - asymmetry^2)
    on the branch indexed by the odd integer ``index`` (a balanced
    beamsplitter gives index * pi/2).
    """
    if index < 1 or index % 2 == 0:
        raise ValueError("dark port index must be a positive odd integer")
    if membrane.reflectivity <= 0.0:
        raise NoDarkPortError("a fully transmissive membrane has no dark output")
    rhs = (
        -(membrane.transmissivity / membrane.reflectivity)
        * bs.asymmetry
        / math.sqrt(1.0 - bs.asymmetry**2)
    )
    if abs(rhs) > 1.0:
        raise NoDarkPortError(
            f"no dark output: required cosine {rhs:.6g} falls outside [-1, 1]"
        )
    base = math.acos(rhs)
    if index % 4 == 1:
        return (index - 1) * math.pi / 2.0 + base
    return (index + 1) * math.pi / 2.0 - base


def dark_port_offset(
    membrane: MirrorParams, bs: BeamsplitterParams, wavelength: float, index: int = 1
) -> float:
    """Arm imbalance (m) of the index-th dark output; n*wavelength/4 when balanced."""
    return dark_port_phase(membrane, bs, index) * wavelength / (2.0 * math.pi)


def imbalance_length(config: InterferometerConfig) -> float:
    """Metric arm imbalance delta_l = dark-port imbalance + offset."""
    return (
        dark_port_offset(
            config.membrane, config.bs, config.geometry.wavelength, config.dark_port_index
        )
        + config.offset
    )


def imbalance_phase(config: InterferometerConfig) -> float:
    """Exact carrier imbalance phase k0*delta_l of the operating point."""
    return (
        dark_port_phase(config.membrane, config.bs, config.dark_port_index)
        + config.geometry.wavenumber * config.offset
    )


def dark_port_reflection_phase(config: InterferometerConfig) -> float:
    """Carrier arg(rho2) evaluated exactly on the dark port."""
    _, rho2, _ = to.effective_mirror(
        config.membrane,
        config.bs,
        dark_port_phase(config.membrane, config.bs, config.dark_port_index),
    )
    return cmath.phase(complex(rho2))


def roundtrip_phase(config: InterferometerConfig) -> float:
    """Carrier round-trip phase 2*k0*cavity_length pinned by the tuning.

    Chosen so that the recycling denominator becomes
    1 - R_sr*|rho2|*exp(2i*detuning*cavity_length/c) with the total detuning
    equal to srm_detuning on the dark port.
    """
    lc = config.geometry.cavity_length
    return 2.0 * config.srm_detuning * lc / C_LIGHT - dark_port_reflection_phase(config)


def sideband_propagators(config: InterferometerConfig, omega: float, arm_gauge: float = 0.0):
    """Tuned-phase propagators for the sideband at offset frequency omega.

    The fold propagator carries half the exact imbalance phase per path and
    the recycling path half the round-trip phase.  Only the split of the
    round-trip phase between the arm and the recycling path is free:
    ``arm_gauge`` moves carrier phase from the recycling path onto the arm
    (observables must not react, which makes it a useful invariance check).
    """
    geom = config.geometry
    k_side = omega / C_LIGHT
    phi = imbalance_phase(config)
    p_arm = np.diag([np.exp(1j * (k_side * geom.arm_length + arm_gauge))] * 2)
    dl = imbalance_length(config)
    p_fold = np.diag(
        [
            np.exp(1j * (-phi / 2.0 + k_side * (geom.half_arm - dl / 2.0))),
            np.exp(1j * (phi / 2.0 + k_side * (geom.half_arm + dl / 2.0))),
        ]
    )
    p_sr = np.diag(
        [
            1.0,
            np.exp(
                1j
                * (roundtrip_phase(config) / 2.0 - arm_gauge + k_side * geom.sr_distance)
            ),
        ]
    ).astype(complex)
    return p_arm, p_fold, p_sr


def membrane_field_matrices(config: InterferometerConfig, omega: float, arm_gauge: float = 0.0):
    """Tuned input -> membrane-face field maps at sideband frequency omega.

    omega = 0 gives the mean-field maps.  Returns ``(m_inc, m_ref, m_fb)``
    as in :func:`ospring.transfer_optics.field_matrices`.
    """
    p_arm, p_fold, p_sr = sideband_propagators(config, omega, arm_gauge)
    return to.field_matrices(config.membrane, config.bs, config.srm, p_arm, p_fold, p_sr)


def resonance_denominator(config: InterferometerConfig, omega, exact_imbalance_sideband: bool = True):
    """1 - R_sr * rho2(k) * exp(2ik*cavity_length) for sideband frequency omega.

    Vectorized over omega.  The tiny sideband correction to the imbalance
    phase is kept by default; dropping it (fast path) changes results at the
    1e-9 level for desk-scale geometries.
    """
    om = np.asarray(omega, dtype=float)
    k_side = om / C_LIGHT
    psi = imbalance_phase(config)
    if exact_imbalance_sideband:
        psi = psi + k_side * imbalance_length(config)
    _, rho2, _ = to.effective_mirror(config.membrane, config.bs, psi)
    loop_phase = np.exp(
        1j * (roundtrip_phase(config) + 2.0 * k_side * config.geometry.cavity_length)
    )
    denom = 1.0 - config.srm.reflectivity * rho2 * loop_phase
    if np.any(np.abs(denom) < to.DEGENERACY_FLOOR):
        raise to.DegenerateResonanceError("resonance denominator vanishes on the grid")
    return denom


@dataclass(frozen=True)
class EffectiveCavity:
    """Detuning and half-linewidth decomposition of the effective cavity.

    ``half_linewidth`` is the narrow-band sum of the recycling-mirror and
    membrane contributions; ``half_linewidth_exact`` keeps the full
    logarithm-free expression c*(1 - R_sr*|rho2|)/(2*Lc).
    """

    detuning: float
    srm_detuning: float
    membrane_detuning: float
    half_linewidth: float
    half_linewidth_exact: float
    srm_half_linewidth: float
    membrane_half_linewidth: float
    reflection_phase_offset: float

    @classmethod
    def from_rates(
        cls,
        srm_half_linewidth: float,
        membrane_half_linewidth: float,
        detuning: float = 0.0,
        membrane_detuning: float = 0.0,
    ) -> "EffectiveCavity":
        """Synthetic cavity from its rate decomposition (for sweeps and tests)."""
        gamma = srm_half_linewidth + membrane_half_linewidth
        return cls(
            detuning=detuning,
            srm_detuning=detuning - membrane_detuning,
            membrane_detuning=membrane_detuning,
            half_linewidth=gamma,
            half_linewidth_exact=gamma,
            srm_half_linewidth=srm_half_linewidth,
            membrane_half_linewidth=membrane_half_linewidth,
            reflection_phase_offset=0.0,
        )


def effective_cavity(config: InterferometerConfig) -> EffectiveCavity:
    """Reduce the operating point to effective-cavity detunings and linewidths."""
    geom = config.geometry
    lc = geom.cavity_length
    t_sr = config.srm.transmissivity

    psi = imbalance_phase(config)
    _, rho2, tau = to.effective_mirror(config.membrane, config.bs, psi)
    _, rho2_dp, _ = to.effective_mirror(
        config.membrane,
        config.bs,
        dark_port_phase(config.membrane, config.bs, config.dark_port_index),
    )

    tau_sq = abs(complex(tau)) ** 2
    if t_sr**2 > NARROWBAND_WARN or tau_sq > NARROWBAND_WARN:
        warnings.warn(
            "narrow-band decomposition is unreliable: recycling-mirror or "
            "interferometer power transmittance exceeds 0.1",
            stacklevel=2,
        )

    gamma_sr = C_LIGHT * t_sr**2 / (4.0 * lc)
    gamma_m = C_LIGHT * tau_sq / (4.0 * lc)
    gamma_exact = C_LIGHT * (1.0 - config.srm.reflectivity * abs(complex(rho2))) / (2.0 * lc)

    # arg of the ratio keeps the offset continuous through zero offset
    phase_offset = cmath.phase(complex(rho2) * complex(rho2_dp).conjugate())
    membrane_detuning = C_LIGHT * phase_offset / (2.0 * lc)

    return EffectiveCavity(
        detuning=config.srm_detuning + membrane_detuning,
        srm_detuning=config.srm_detuning,
        membrane_detuning=membrane_detuning,
        half_linewidth=gamma_sr + gamma_m,
        half_linewidth_exact=gamma_exact,
        srm_half_linewidth=gamma_sr,
        membrane_half_linewidth=gamma_m,
        reflection_phase_offset=phase_offset,
    )


def with_total_detuning(config: InterferometerConfig, detuning: float) -> InterferometerConfig:
    """Configuration whose total cavity detuning equals ``detuning``.

    The membrane contribution is fixed by the offset, so the recycling
    tuning absorbs the difference in a single pass.
    """
    membrane_detuning = effective_cavity(config).membrane_detuning
    return replace(config, srm_detuning=detuning - membrane_detuning)


def small_offset_expansion(config: InterferometerConfig):
    """Quadratic-in-offset laws for the membrane linewidth and detuning.

    Only valid for a balanced beamsplitter.  Returns
    ``(membrane_half_linewidth, membrane_detuning, sign)`` where the
    detuning sign alternates between consecutive dark ports, positive for
    index 1, 5, 9, ...
    """
    if config.bs.asymmetry != 0.0:
        raise ValueError("quadratic offset laws require a balanced beamsplitter")
    geom = config.geometry
    rm, tm = config.membrane.reflectivity, config.membrane.transmissivity
    phase = geom.wavenumber * config.offset
    sign = 1.0 if config.dark_port_index % 4 == 1 else -1.0
    gamma_m = C_LIGHT * rm**2 * phase**2 / (4.0 * geom.cavity_length)
    delta_m = sign * C_LIGHT * rm * tm * phase**2 / (4.0 * geom.cavity_length)
    return gamma_m, delta_m, sign
