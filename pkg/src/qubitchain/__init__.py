"""Spontaneous decay of a single excitation in a waveguide-coupled qubit chain."""

__version__ = "0.1.0"

from .chain import ChainConfig, EffectiveMatrix, build_effective_matrix, coherent_dissipative_rates
from .dynamics import (
    AmplitudeTrajectory,
    analytic_amplitudes_resonant,
    evolve,
    find_plateaus,
    photon_emission_probability,
)
from .emission import (
    SpectrumResult,
    emission_spectrum,
    lorentzian_reference,
    photon_amplitude_modal,
    photon_amplitude_numeric,
)
from .modes import (
    CollectiveStateSet,
    ModalExpansion,
    ModeSet,
    characteristic_roots,
    collective_state_decomposition,
    dark_state_count,
    modal_expansion,
    reduced_central_cubic_roots,
)

__all__ = [
    "AmplitudeTrajectory",
    "ChainConfig",
    "CollectiveStateSet",
    "EffectiveMatrix",
    "ModalExpansion",
    "ModeSet",
    "SpectrumResult",
    "analytic_amplitudes_resonant",
    "build_effective_matrix",
    "characteristic_roots",
    "coherent_dissipative_rates",
    "collective_state_decomposition",
    "dark_state_count",
    "emission_spectrum",
    "evolve",
    "find_plateaus",
    "lorentzian_reference",
    "modal_expansion",
    "photon_amplitude_modal",
    "photon_amplitude_numeric",
    "photon_emission_probability",
    "reduced_central_cubic_roots",
]
