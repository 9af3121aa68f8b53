"""Frequency-domain optical spring, damping and back-action noise models
for signal-recycled interferometers with a shared semitransparent membrane
or fully reflective end mirrors."""

from .params import (
    BeamsplitterParams,
    Geometry,
    InterferometerConfig,
    MechanicalOscillator,
    MirrorParams,
)
from .transfer_optics import (
    DegenerateResonanceError,
    beamsplitter_matrix,
    effective_mirror,
    field_matrices,
    invert_2x2,
    membrane_matrix,
    msi_matrix,
    propagation_matrices,
    recycling_resolvent,
)
from .cavity import (
    EffectiveCavity,
    NoDarkPortError,
    dark_port_offset,
    dark_port_phase,
    effective_cavity,
    membrane_field_matrices,
    resonance_denominator,
    small_offset_expansion,
    with_total_detuning,
)
from .noise import NoiseSpectrum, back_action_spectrum, spectral_asymmetry
from .backaction import (
    BackActionResponse,
    CanonicalFeatureReport,
    canonical_features_check,
    damping_at_dc,
    exact_response,
    free_mass_spring_damping,
    kernel_exact,
    kernel_narrowband,
    kernel_narrowband_config,
    narrowband_response,
    spring_damping,
    spring_damping_dc,
)
from .stability import (
    DegenerateLeadingCoefficientError,
    RegimeMap,
    StabilityReport,
    characteristic_polynomial,
    classify_regimes,
    find_zero_crossings,
    regime_map,
    roots_stable,
    routh_hurwitz,
    routh_hurwitz_stable,
    stability_report,
)

__version__ = "0.1.0"
