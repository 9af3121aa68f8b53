import warnings
from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import c as C_LIGHT, hbar as HBAR

from ospring import cavity as cav
from ospring.params import (
    BeamsplitterParams,
    Geometry,
    InterferometerConfig,
    MirrorParams,
)

WAVELENGTH = 1064e-9


@pytest.fixture
def geometry():
    return Geometry(arm_length=0.05, half_arm=0.027, sr_distance=0.01, wavelength=WAVELENGTH)


@pytest.fixture
def narrow_config(geometry):
    """Narrow-line membrane interferometer (matches the fig2 presets)."""
    return InterferometerConfig(
        geometry=geometry,
        membrane=MirrorParams.from_power_reflectivity(0.17),
        srm=MirrorParams.from_power_transmissivity(3e-4),
        bs=BeamsplitterParams(0.0),
        input_power=0.2,
        dark_port_index=3,
        offset=0.01 * WAVELENGTH,
        srm_detuning=0.0,
    )


@pytest.fixture
def asym_config(geometry):
    """Asymmetric-beamsplitter configuration (matches the fig4 presets)."""
    return InterferometerConfig(
        geometry=geometry,
        membrane=MirrorParams.from_power_reflectivity(0.3),
        srm=MirrorParams.from_power_transmissivity(0.3),
        bs=BeamsplitterParams(-0.3),
        input_power=0.2,
        dark_port_index=1,
        offset=0.008 * WAVELENGTH,
        srm_detuning=0.0,
    )


def random_lossless(rng):
    """Random lossless mirror / beamsplitter / geometry draw."""
    membrane = MirrorParams.from_power_reflectivity(rng.uniform(0.0, 1.0))
    bs = BeamsplitterParams(rng.uniform(-0.99, 0.99))
    geometry = Geometry(
        arm_length=rng.uniform(0.01, 1.0),
        half_arm=rng.uniform(0.01, 1.0),
        sr_distance=rng.uniform(0.005, 0.5),
        wavelength=WAVELENGTH,
        arm_imbalance=rng.uniform(-1.0, 1.0) * WAVELENGTH,
    )
    return membrane, bs, geometry


def random_config(rng, geometry, max_offset=0.02, max_tsr_sq=0.01):
    """Random near-dark-fringe operating point with a solvable dark port."""
    while True:
        membrane = MirrorParams.from_power_reflectivity(rng.uniform(0.05, 0.95))
        bs = BeamsplitterParams(rng.uniform(-0.5, 0.5))
        try:
            cav.dark_port_phase(membrane, bs, 1)
        except cav.NoDarkPortError:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return InterferometerConfig(
                geometry=geometry,
                membrane=membrane,
                srm=MirrorParams.from_power_transmissivity(rng.uniform(1e-5, max_tsr_sq)),
                bs=bs,
                input_power=rng.uniform(0.01, 1.0),
                dark_port_index=int(rng.choice([1, 3, 5])),
                offset=rng.uniform(-max_offset, max_offset) * WAVELENGTH,
                srm_detuning=0.0,
            )


def matrix_noise_density(config, omega_scalar):
    """Independent matrix-route force-noise density (laser, detector parts).

    Projects the mean incident fields onto the sideband reflected-field map
    and sums the squared couplings of the two vacuum inputs.
    """
    m_inc0, _, _ = cav.membrane_field_matrices(config, 0.0)
    _, m_ref, _ = cav.membrane_field_matrices(config, omega_scalar)
    row = m_inc0[:, 0].conj() @ m_ref
    scale = (
        4.0 * HBAR * config.geometry.wavenumber / C_LIGHT
        * config.membrane.reflectivity**2 * config.input_power
    )
    return scale * abs(row[0]) ** 2, scale * abs(row[1]) ** 2


def static_kernel_oracle(config, step=1e-12):
    """Finite-difference oracle for the zero-frequency kernel.

    Differentiates the mean radiation-force imbalance of the two membrane
    faces with respect to the metric offset; the kernel equals twice that
    gradient times input power over c (membrane position is half the arm
    imbalance).
    """

    def face_difference(cfg):
        m_inc, m_ref, _ = cav.membrane_field_matrices(cfg, 0.0)
        inc, ref = m_inc[:, 0], m_ref[:, 0]
        return (
            abs(inc[0]) ** 2 + abs(ref[0]) ** 2 - abs(inc[1]) ** 2 - abs(ref[1]) ** 2
        )

    upper = face_difference(replace(config, offset=config.offset + step))
    lower = face_difference(replace(config, offset=config.offset - step))
    gradient = (upper - lower) / (2.0 * step)
    return 2.0 * config.input_power / C_LIGHT * gradient
