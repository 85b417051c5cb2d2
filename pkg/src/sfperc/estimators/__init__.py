"""Statistics of sampled graphs and point sets."""

from .clustering import (
    CCReport,
    PalmEstimate,
    TruncationParams,
    averaged_cc,
    box_index,
    cc_report,
    in_frame,
    local_cc,
    local_cc_all,
    origin_cc,
    palm_cc_estimate,
    palm_replica,
    triangle_counts,
    truncated_cc,
    truncation_masks,
)
from .components import bfs_distance, component_sizes, connected_components, flood_fill_labels
from .degrees import (
    TailFit,
    adjoined_degree,
    default_k,
    degree_histogram,
    empirical_tail,
    hill_gamma,
    quenched_conditional_degree,
    truncated_degrees,
)
from .oracles import (
    CampbellSample,
    SlivnyakReport,
    campbell_monte_carlo,
    isolated_count,
    sample_step_sums,
    slivnyak_mecke_check,
    void_analytic,
)

__all__ = [
    "CCReport", "CampbellSample", "PalmEstimate", "SlivnyakReport", "TailFit", "TruncationParams",
    "adjoined_degree", "averaged_cc", "bfs_distance", "box_index", "campbell_monte_carlo", "cc_report",
    "component_sizes", "connected_components", "default_k", "degree_histogram", "empirical_tail",
    "flood_fill_labels", "hill_gamma", "in_frame", "isolated_count", "local_cc", "local_cc_all", "origin_cc",
    "palm_cc_estimate", "palm_replica", "quenched_conditional_degree", "sample_step_sums",
    "slivnyak_mecke_check", "triangle_counts", "truncated_cc", "truncated_degrees", "truncation_masks",
    "void_analytic",
]
