"""phaseplace: online placement of i.i.d. points into a fixed array.

Arrivals are written irrevocably, one cell each, to keep the sum of
consecutive-cell distances within an O(log^2 n) factor of the offline
optimum with high probability. The placement runs as a sequence of
balls-into-bins phases over equal-mass keys, falling back to arrival
order when the dimension dwarfs the phase budget.
"""

from .core import (
    AlgorithmConfig,
    DistributionSpec,
    PlacementArray,
    compute_ell,
    opt_sort_cost,
    quantile_boundaries,
    tour_cost,
)
from .engine import (
    Engine,
    EngineResult,
    PhaseRecord,
    RunTrace,
    designated_bucket,
    init_phase1,
    next_phase_layout,
    place,
    region_arrays,
    run,
)
from .errors import (
    ArrayFull,
    BucketFull,
    CellOccupied,
    EmptyInput,
    IncompleteArray,
    InstanceTooSmall,
    NegativeBucketSize,
    NonMonotoneQuantile,
    PhaseplaceError,
    TooLarge,
)
from .geometry import BlockPartition, merged_key
from .harness import (
    BinSimConfig,
    BinState,
    ExperimentConfig,
    TrialResult,
    emit_report,
    load_cdf_file,
    run_experiment,
    run_trial,
    simulate_bins,
    verify_fill_before_overflow,
    verify_lemma1,
)
from .interior import ArrivalOrder, SegmentedBlockSort, SegmentedIntervalSort
from .oracles import (
    OracleEstimate,
    bhh_reference,
    block_tour_cost,
    heuristic_path,
    mu_bounds,
    tsp_path_bruteforce,
    tsp_path_exact,
    tsp_path_heuristic,
)
from .rng import SplitMix64, uniform_block

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AlgorithmConfig",
    "DistributionSpec",
    "PlacementArray",
    "compute_ell",
    "opt_sort_cost",
    "quantile_boundaries",
    "tour_cost",
    "Engine",
    "EngineResult",
    "PhaseRecord",
    "RunTrace",
    "designated_bucket",
    "init_phase1",
    "next_phase_layout",
    "place",
    "region_arrays",
    "run",
    "PhaseplaceError",
    "InstanceTooSmall",
    "EmptyInput",
    "IncompleteArray",
    "CellOccupied",
    "NonMonotoneQuantile",
    "NegativeBucketSize",
    "BucketFull",
    "ArrayFull",
    "TooLarge",
    "BlockPartition",
    "merged_key",
    "BinSimConfig",
    "BinState",
    "ExperimentConfig",
    "TrialResult",
    "emit_report",
    "load_cdf_file",
    "run_experiment",
    "run_trial",
    "simulate_bins",
    "verify_fill_before_overflow",
    "verify_lemma1",
    "ArrivalOrder",
    "SegmentedBlockSort",
    "SegmentedIntervalSort",
    "OracleEstimate",
    "bhh_reference",
    "block_tour_cost",
    "heuristic_path",
    "mu_bounds",
    "tsp_path_bruteforce",
    "tsp_path_exact",
    "tsp_path_heuristic",
    "SplitMix64",
    "uniform_block",
]
