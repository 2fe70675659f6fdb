"""Biologically informed, distribution-controlled negative sampling."""

from .bridge import map_to_canonical, nc_negsamp_bridge, write_handoff
from .distributions import (
    JS_FIELDS,
    DistributionSpec,
    JsReport,
    bin_index,
    feature_histogram,
    js_divergence,
    mean_composition,
    shared_range,
    validate_distributions,
)
from .ot import SinkhornResult, sinkhorn, sinkhorn_capacity
from .pool import (
    SamplingPool,
    build_pool,
    expand_pool_external,
    expert_exclusions_for,
    filter_pool,
    length_bin,
    load_expert_groups,
    overlap_ratio,
)
from .ppi import ppi_shuffle_negatives
from .samplers import (
    SAMPLERS,
    NegativeSet,
    kde_log_density,
    median_bandwidth,
    mmd2,
    moment_objective,
    n_requested,
    sample_bin_matched,
    sample_kde_importance,
    sample_mmd_herding,
    sample_moment_matched,
    sample_nearest_neighbor,
    sample_sinkhorn_ot,
    scott_factor,
    transport_cost,
)
from .select import (
    DIVERSITY_WEIGHT,
    Candidate,
    NegSampResult,
    run_bdnegsamp,
    select_best,
    sequence_diversity,
    write_js_report,
    write_negatives,
)

__all__ = [
    "Candidate", "DIVERSITY_WEIGHT", "DistributionSpec", "JS_FIELDS", "JsReport", "NegSampResult",
    "NegativeSet", "SAMPLERS", "SamplingPool", "SinkhornResult", "bin_index", "build_pool",
    "expand_pool_external", "expert_exclusions_for", "feature_histogram", "filter_pool",
    "js_divergence", "kde_log_density", "length_bin", "load_expert_groups", "map_to_canonical",
    "mean_composition", "median_bandwidth", "mmd2", "moment_objective", "n_requested",
    "nc_negsamp_bridge", "overlap_ratio", "ppi_shuffle_negatives", "run_bdnegsamp",
    "sample_bin_matched", "sample_kde_importance", "sample_mmd_herding", "sample_moment_matched",
    "sample_nearest_neighbor", "sample_sinkhorn_ot", "scott_factor", "select_best",
    "sequence_diversity", "shared_range", "sinkhorn", "sinkhorn_capacity", "transport_cost",
    "validate_distributions", "write_handoff", "write_js_report", "write_negatives",
]
