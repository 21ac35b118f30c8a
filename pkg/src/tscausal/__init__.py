"""Causal direction detection for coupled dynamical systems.

Detects which of two observed time series drives the other, assuming both
were generated by coupled differential equations. The package provides:

- delay embeddings with automatic lag / dimension selection,
- tangent-space scoring (local-Jacobian pushforward of vector fields),
- convergent cross mapping, Granger causality, and a k-NN mutual-information
  estimator as baselines,
- a Rossler-Lorenz benchmark generator and an experiment sweep harness,
- a FastAPI service plus a thin CLI client.
"""

__version__ = "0.1.0"

from .timeseries import TimeSeries
from .embedding import (
    Embedding,
    EmbeddingParams,
    delay_embed,
    select_dimension_fnn,
    select_lag,
)
from .derivatives import (
    VectorFieldSamples,
    derivative_series,
    savgol_derivative,
    vector_field_for_embedding,
)
from .crossmap import (
    KernelRidgeCrossMap,
    KnnConfig,
    KnnLocalLinearCrossMap,
    ccm_predict,
    fit_kernel_ridge,
    knn_local_jacobian,
)
from .tsci import (
    PipelineConfig,
    ScoreResult,
    cosine_score,
    prepare_aligned,
    tsci_bidirectional,
    tsci_score_knn,
    tsci_score_model,
)
from .ccm import CcmConfig, ccm_convergence, ccm_skill
from .baselines import GrangerResult, granger_f_test, ksg_mutual_information, mi_pushforward_score
from .systems import (
    SimulationConfig,
    corrupt_additive_noise,
    corrupt_sine,
    rk4_integrate,
    rk4_step,
    rossler_lorenz_rhs,
)
from .harness import ResultRow, SweepSpec, aggregate_trials, read_csv, run_sweep

__all__ = [
    "TimeSeries",
    "Embedding",
    "EmbeddingParams",
    "delay_embed",
    "select_dimension_fnn",
    "select_lag",
    "VectorFieldSamples",
    "derivative_series",
    "savgol_derivative",
    "vector_field_for_embedding",
    "KernelRidgeCrossMap",
    "KnnConfig",
    "KnnLocalLinearCrossMap",
    "ccm_predict",
    "fit_kernel_ridge",
    "knn_local_jacobian",
    "PipelineConfig",
    "ScoreResult",
    "cosine_score",
    "prepare_aligned",
    "tsci_bidirectional",
    "tsci_score_knn",
    "tsci_score_model",
    "CcmConfig",
    "ccm_convergence",
    "ccm_skill",
    "GrangerResult",
    "granger_f_test",
    "ksg_mutual_information",
    "mi_pushforward_score",
    "SimulationConfig",
    "corrupt_additive_noise",
    "corrupt_sine",
    "rk4_integrate",
    "rk4_step",
    "rossler_lorenz_rhs",
    "ResultRow",
    "SweepSpec",
    "aggregate_trials",
    "read_csv",
    "run_sweep",
]
