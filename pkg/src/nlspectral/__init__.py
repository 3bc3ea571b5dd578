"""Spectral analysis for stationary causal nonlinear time series.

Simulators for the nonlinear model families (EXPAR, AR-ARCH, bilinear,
asymmetric power GARCH, signed volatility, random-coefficient AR, plus
linear ARMA), periodogram and lag-window spectral estimation, the
frequency-domain bootstrap, geometric-moment-contraction diagnostics,
and a Monte Carlo harness that verifies the associated limit theory at
desk scale.
"""

from .bootstrap import (
    BootstrapConfig,
    BootstrapDistribution,
    PilotSpectrum,
    ResidualSet,
    bootstrap_distribution,
    default_bandwidths,
    mallows_d2,
    pilot_estimate,
    resample_periodogram,
    rescaled_residuals,
)
from .errors import (
    BandwidthError,
    ConfigError,
    DegeneratePilotError,
    ExplosionError,
    LagRangeError,
    NlspectralError,
    StabilityError,
    UnsupportedFamilyError,
    WindowConditionError,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    OracleSpectrum,
    oracle_spectrum,
    run_experiment,
)
from .gmc import (
    GmcFitReport,
    MomentConditionReport,
    SignedVolConditions,
    ContractionCheck,
    check_contraction,
    estimate_decay,
    garch_companion,
    pair_moment_trace,
    garch_moment_matrix,
    signed_vol_conditions,
)
from .models import (
    AR,
    ARARCH,
    ARMA,
    EXPAR,
    IID,
    RCAR,
    AsymGARCH,
    Bilinear,
    ContractionReport,
    CoupledPair,
    InnovationSpec,
    ModelSpec,
    SignedVol,
    TimeSeries,
    VolFunction,
    ar_spectral_radius,
    arma_filter,
    bilinear_markov,
    contraction_coefficients,
    simulate,
    simulate_coupled,
    simulate_many,
    theoretical_acov,
    theoretical_spectrum,
)
from .rng import child_seed, stream
from .spectral import (
    Periodogram,
    SpectralEstimate,
    Window,
    asymptotic_bias,
    asymptotic_variance,
    default_grid,
    estimate_from_periodogram,
    fourier_transform,
    ks_distance,
    lag_window_estimate,
    normalized_periodogram_ks,
    periodogram,
    sample_acov,
    spectral_second_derivative,
    window_profile,
)

__version__ = "0.1.0"
