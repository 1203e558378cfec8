"""Classical simulator and analysis toolkit for amplitude-amplified search
over disordered Ising spectra."""

from .engine import (
    AmplitudeState,
    IterationTrace,
    apply_diffusion,
    apply_oracle,
    measure,
    probabilities,
    run,
    uniform_state,
    xi_transform,
)
from .experiments import (
    EnsembleResult,
    ExperimentConfig,
    brute_force_extremes,
    derive_seed,
    gap_statistics,
    run_ensemble,
)
from .gmatrix import (
    GMatrix,
    OverlapSequence,
    build_gmatrix,
    empirical_overlaps,
    evolve,
    gap_study,
    gaussian_overlaps,
    success_probability_curve,
)
from .ising import (
    IsingInstance,
    Spectrum,
    complement,
    energy,
    enumerate_spectrum,
    load_instance,
    sample_instance,
    save_instance,
)
from .spectral import (
    GroverSchedule,
    SpectralModel,
    analytic_schedule,
    asymptotic_time,
    critical_gap,
    estimate_sigma,
    extreme_quantile,
    gap_estimate,
    gap_quantile,
    optimal_iterations,
    optimal_time,
    required_samples,
)
from .tuning import TuneReport, feedback_tune, grid_tune, scan_iterations, target_energy_mode

__version__ = "0.1.0"

__all__ = [
    "AmplitudeState",
    "EnsembleResult",
    "ExperimentConfig",
    "GMatrix",
    "GroverSchedule",
    "IsingInstance",
    "IterationTrace",
    "OverlapSequence",
    "SpectralModel",
    "Spectrum",
    "TuneReport",
    "analytic_schedule",
    "apply_diffusion",
    "apply_oracle",
    "asymptotic_time",
    "brute_force_extremes",
    "build_gmatrix",
    "complement",
    "critical_gap",
    "derive_seed",
    "empirical_overlaps",
    "energy",
    "enumerate_spectrum",
    "estimate_sigma",
    "evolve",
    "extreme_quantile",
    "feedback_tune",
    "gap_estimate",
    "gap_quantile",
    "gap_statistics",
    "gap_study",
    "gaussian_overlaps",
    "grid_tune",
    "load_instance",
    "measure",
    "optimal_iterations",
    "optimal_time",
    "probabilities",
    "required_samples",
    "run",
    "run_ensemble",
    "sample_instance",
    "save_instance",
    "scan_iterations",
    "success_probability_curve",
    "target_energy_mode",
    "uniform_state",
    "xi_transform",
]
