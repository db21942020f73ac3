"""Spectra and isospectrality of Laplacians on metric graphs with delta / delta' couplings."""

from .edge_secular import matching_system, nullspace_dimension, secular_edge
from .fd import fd_spectrum
from .graph import INF, DELTA, DELTA_PRIME, Edge, MarkedGraph, VertexType, build_graph, standard_graph
from .isospectral import (
    decoupled_isospectrality_check,
    lemma51_property,
    necessary_check,
    search_isospectral,
    sigma_multiset,
    trace_sum,
)
from .mfunction import hadamard_ratio, m_matrix, secular_vertex
from .point import SpectralPoint
from .spectrum import ScanConfig, Spectrum, compare_spectra, find_spectrum

__version__ = "0.1.0"

__all__ = [
    "DELTA",
    "DELTA_PRIME",
    "INF",
    "Edge",
    "MarkedGraph",
    "ScanConfig",
    "SpectralPoint",
    "Spectrum",
    "VertexType",
    "build_graph",
    "compare_spectra",
    "decoupled_isospectrality_check",
    "fd_spectrum",
    "find_spectrum",
    "hadamard_ratio",
    "lemma51_property",
    "m_matrix",
    "matching_system",
    "necessary_check",
    "nullspace_dimension",
    "search_isospectral",
    "secular_edge",
    "secular_vertex",
    "sigma_multiset",
    "standard_graph",
    "trace_sum",
]
