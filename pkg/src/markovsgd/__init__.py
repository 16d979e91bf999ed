"""Streaming least-squares estimators on Markovian data.

The package covers the full pipeline: Markov data models (finite chains and
a Gaussian autoregressive stream) with mixing-time machinery, the regression
layer (observation models, excess risk, bias/variance coupling), four SGD
variants (tail-averaged, data-drop, parallel, experience-replay) plus a
lower-bound trace, spectral analysis of replay buffers, and a reproducible
experiment harness with CLI.
"""

from .algorithms import (
    BatchResult,
    DataDropConfig,
    LowerBoundTrace,
    ParallelConfig,
    ReplayConfig,
    RunResult,
    SgdConfig,
    recommended_drop_interval,
    recommended_parallel_instances,
    run_lower_bound_trace,
    run_lower_bound_traces,
    run_many,
    run_parallel_sgd,
    run_sgd,
    run_sgd_dd,
    run_sgd_er,
    sgd_step,
    tail_window,
    theory_drop_prefix,
)
from .chains import (
    ChainSpec,
    FiniteChainSpec,
    GaussianARSpec,
    MixingReport,
    chain_from_json,
    chain_to_json,
    make_agnostic_bias_chain,
    make_iid_chain,
    make_mc0,
    make_mc3,
    make_mci,
    mixing_time,
    run_generators,
    stationary,
    stationary_covariance,
    step,
    total_variation_curve,
    trajectory_kl,
)
from .experiments import (
    ExperimentConfig,
    RunSummary,
    accept,
    config_hash,
    default_checkpoints,
    load_summary_csv,
    run_experiment,
    sweep,
    write_summary_csv,
)
from .regression import (
    AgnosticDeterministic,
    CoupledTrajectory,
    IndependentGaussian,
    Noiseless,
    NoiseCovariance,
    NoiseModel,
    Observation,
    Problem,
    agnostic_optimum,
    excess_risk,
    make_problem,
    noise_covariance,
    observe,
)
from .spectral import (
    CirculantSpec,
    SpectralReport,
    ToeplitzSpec,
    circulant_eigs_closed_form,
    circulant_matrix,
    gram_spectrum,
    perturbation_matrix,
    perturbation_norms,
    sample_buffer,
    spectra_property_checks,
    toeplitz_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AgnosticDeterministic",
    "BatchResult",
    "ChainSpec",
    "CirculantSpec",
    "CoupledTrajectory",
    "DataDropConfig",
    "ExperimentConfig",
    "FiniteChainSpec",
    "GaussianARSpec",
    "IndependentGaussian",
    "LowerBoundTrace",
    "MixingReport",
    "Noiseless",
    "NoiseCovariance",
    "NoiseModel",
    "Observation",
    "ParallelConfig",
    "Problem",
    "ReplayConfig",
    "RunResult",
    "RunSummary",
    "SgdConfig",
    "SpectralReport",
    "ToeplitzSpec",
    "accept",
    "agnostic_optimum",
    "chain_from_json",
    "chain_to_json",
    "circulant_eigs_closed_form",
    "circulant_matrix",
    "config_hash",
    "default_checkpoints",
    "excess_risk",
    "gram_spectrum",
    "load_summary_csv",
    "make_agnostic_bias_chain",
    "make_iid_chain",
    "make_mc0",
    "make_mc3",
    "make_mci",
    "make_problem",
    "mixing_time",
    "noise_covariance",
    "observe",
    "perturbation_matrix",
    "perturbation_norms",
    "recommended_drop_interval",
    "recommended_parallel_instances",
    "run_experiment",
    "run_generators",
    "run_lower_bound_trace",
    "run_lower_bound_traces",
    "run_many",
    "run_parallel_sgd",
    "run_sgd",
    "run_sgd_dd",
    "run_sgd_er",
    "sample_buffer",
    "sgd_step",
    "spectra_property_checks",
    "stationary",
    "stationary_covariance",
    "step",
    "sweep",
    "tail_window",
    "theory_drop_prefix",
    "toeplitz_matrix",
    "total_variation_curve",
    "trajectory_kl",
    "write_summary_csv",
]
