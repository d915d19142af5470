"""Graph-based selective outlier ensembles.

Build a subsampled-LOF ensemble, keep the components that agree with each
other on the top of their rankings, and aggregate the survivors::

    >>> from soul import generate_ensemble, core_select, aggregate
    >>> ens = generate_ensemble(X, m=20, master_seed=0)        # doctest: +SKIP
    >>> chosen = core_select(ens).selected                     # doctest: +SKIP
    >>> scores = aggregate(ens.scores[chosen], "avg")          # doctest: +SKIP
"""

__version__ = "0.1.0"

from .base_detector import (
    ComponentSpec,
    Ensemble,
    LabeledDataset,
    generate_ensemble,
    lof_scores,
)
from .consensus import ConsensusMethod, aggregate
from .datasets import (
    DatasetManifest,
    load_dataset,
    load_ensemble,
    make_planted_dataset,
    make_planted_ensemble,
    save_ensemble,
)
from .evaluation import BenchmarkReport, average_precision, pr_curve, run_benchmark
from .graph_select import (
    RankGraph,
    SelectionResult,
    all_select,
    build_complete_graph,
    core_select,
    coreness,
    cull_select,
    prune_top_m,
    register_selector,
)
from .hierarchy import Mode, PipelineConfig, run_flat, run_hierarchical2, run_pipeline, run_union
from .rank_correlation import rank_positions, weighted_kendall_tau, weighted_kendall_tau_bruteforce

__all__ = [
    "ComponentSpec", "Ensemble", "LabeledDataset", "generate_ensemble", "lof_scores",
    "ConsensusMethod", "aggregate",
    "DatasetManifest", "load_dataset", "load_ensemble", "save_ensemble",
    "make_planted_dataset", "make_planted_ensemble",
    "BenchmarkReport", "average_precision", "pr_curve", "run_benchmark",
    "RankGraph", "SelectionResult", "all_select", "build_complete_graph", "core_select",
    "coreness", "cull_select", "prune_top_m", "register_selector",
    "Mode", "PipelineConfig", "run_flat", "run_hierarchical2", "run_pipeline", "run_union",
    "rank_positions", "weighted_kendall_tau", "weighted_kendall_tau_bruteforce",
]
