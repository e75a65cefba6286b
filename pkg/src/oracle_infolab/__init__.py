"""Information-theoretic analysis of single-query quantum algorithms for oracle classification."""

__version__ = "0.1.0"

from .densemat import DimensionCapError, partial_trace, von_neumann_entropy
from .ensembles import ClassEnsemble, StageLabel, from_states, mix
from .infometrics import CrossCheckError, MetricsRow, fano_bounds, metrics, streamed_metrics
from .optimizer import (
    MeasurementBasis,
    OptimalityCertificate,
    certify,
    i_max,
    minimize_discord,
    search_psi1,
    simultaneous_diagonalizer,
)
from .problems import (
    OracleProblem,
    build_bv,
    build_dj,
    build_phase_estimation,
    build_simon,
    build_simon_explicit,
)
from .simulator import AlgorithmSpec, lift_t_queries, run_stages, stage_metrics, standard_algorithm

__all__ = [
    "__version__",
    "AlgorithmSpec",
    "ClassEnsemble",
    "CrossCheckError",
    "DimensionCapError",
    "MeasurementBasis",
    "MetricsRow",
    "OptimalityCertificate",
    "OracleProblem",
    "StageLabel",
    "build_bv",
    "build_dj",
    "build_phase_estimation",
    "build_simon",
    "build_simon_explicit",
    "certify",
    "fano_bounds",
    "from_states",
    "i_max",
    "lift_t_queries",
    "metrics",
    "minimize_discord",
    "mix",
    "partial_trace",
    "run_stages",
    "search_psi1",
    "simultaneous_diagonalizer",
    "stage_metrics",
    "standard_algorithm",
    "streamed_metrics",
    "von_neumann_entropy",
]
