"""Evidential networks: structure, polytree propagation, loop merging,
partition-based coarsening and the unrelatedness shortcuts."""

from .model import EvidentialNetwork, ValidationReport, relevance_table, validate
from .polytree import TreeMessenger, down_message, propagate_polytree, up_message
from .merge import MergedNetwork, MergedRelation, merge_loops, merged_family, propagate_merged
from .partition import GroupPlan, PartitionPlan, partition_optimize
from .shortcuts import figure6_shortcut, lemma9_shortcut, mixture_component, unrelated

__all__ = [
    "EvidentialNetwork", "ValidationReport", "relevance_table", "validate",
    "TreeMessenger", "down_message", "propagate_polytree", "up_message",
    "MergedNetwork", "MergedRelation", "merge_loops", "merged_family", "propagate_merged",
    "GroupPlan", "PartitionPlan", "partition_optimize",
    "figure6_shortcut", "lemma9_shortcut", "mixture_component", "unrelated",
]
