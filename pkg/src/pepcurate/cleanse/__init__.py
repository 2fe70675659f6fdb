"""Redundancy removal, similarity filtering and regression label cleaning."""

from .align import AlignmentParams, AlignmentResult, align_pair, cross_group_links, lcs_length, pair_links
from .cluster import (
    ClusterAssignment,
    cluster_report_rows,
    filter_similar_to,
    greedy_cluster,
    isolation_sweep,
    processing_order,
    remove_redundancy,
)
from .outliers import AggregationStats, aggregate_duplicates, iqr_aggregate

__all__ = [
    "AggregationStats", "AlignmentParams", "AlignmentResult", "ClusterAssignment",
    "aggregate_duplicates", "align_pair", "cluster_report_rows", "cross_group_links",
    "filter_similar_to", "greedy_cluster", "iqr_aggregate", "isolation_sweep", "lcs_length",
    "pair_links", "processing_order", "remove_redundancy",
]
