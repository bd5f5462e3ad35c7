"""Coherent rotational wave packets in overlapping-resonance scattering.

Analytic time power spectrum, derived observables, a phase-diffusion Monte
Carlo generator of synthetic excitation functions, and the transforms that
recover the time power spectrum from cross-section data.
"""

from .ensemble import (
    DirectAmplitudeSpec,
    EnergyGrid,
    EnsembleConfig,
    ExcitationFunction,
    ensemble_power,
    normalized_variance,
    phase_ladder,
    synth_excitation,
    time_amplitude,
)
from .model import DomainError, ModelParams, ValidityWarning, legendre, reference_params, spin_window
from .reconstruct import (
    AliasWarning,
    TimeAmplitude,
    TrendFit,
    detrend,
    reconstruct_from_amplitude,
    reconstruct_from_fluctuation,
    reconstruct_general,
    sigma_fl_average,
)
from .spectrum import (
    CorrelationFunction,
    PowerSpectrum,
    angular_width,
    autocorrelation,
    fringe_contrast,
    mean_cross_section,
    normalization_constant,
    power_spectrum,
    spectrum_grid,
)

__all__ = [name for name in dir() if not name.startswith("_")]
