"""Hypergraph analytics for threaded social platforms: archetypes, hyperedge characterisation,
transition null models and line-graph betweenness."""

__version__ = "0.1.0"

from .archetypes import Archetype, ArchetypeCatalog, assign, default_catalog, top_k_typical, typicality
from .hypergraph import Hyperedge, Hypergraph, Interner, SnapshotSeries, jaccard_overlap

__all__ = [
    "Archetype",
    "ArchetypeCatalog",
    "Hyperedge",
    "Hypergraph",
    "Interner",
    "SnapshotSeries",
    "assign",
    "default_catalog",
    "jaccard_overlap",
    "top_k_typical",
    "typicality",
]
