"""Small-world (Watts-Strogatz) graph detection and ring reconstruction."""

from .detection import (
    DetectionOutcome,
    TooLarge,
    calibrate_spectral_threshold,
    kl_bernoulli,
    kl_ws_er,
    kl_ws_er_oracle,
    ml_statistic_exact,
    ml_statistic_heuristic,
    ml_statistic_naive,
    ml_test,
    ml_threshold,
    spectral_statistic,
    spectral_test,
)
from .experiments import CellResult, SweepConfig, cell_parameters, parse_config, region_of, run_sweep
from .generator import SampleSpec, derive_seed, random_permutation, sample_er, sample_ws
from .graph import (
    Graph,
    InvalidParameters,
    Permutation,
    SizeMismatch,
    WsParams,
    matrix_inner,
    permute,
    read_edgelist,
    ring_lattice,
    write_edgelist,
)
from .linalg import (
    ConvergenceError,
    EigenResult,
    SizeTooLarge,
    circulant_eigenvalue,
    circulant_lambda2,
    circulant_spectrum,
    dense_eig_oracle,
    spectral_gap,
    top_eigenpairs,
)
from .reconstruction import (
    GroundTruth,
    NeighborhoodEstimate,
    correlation_threshold,
    neighborhood_error,
    spectral_order,
)

__version__ = "0.1.0"
