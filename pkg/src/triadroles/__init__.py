"""Social role discovery in directed interaction networks via conditional triad censuses."""

__version__ = "0.1.0"

from .census import (CensusMatrix, TriadCensus, TriadCensusTransformer, census_matrix, classify_triad,
                     ego_census)
from .cluster import CentroidKMeans, SilhouetteKMeans, centroid_silhouette, kmeans, sweep_k
from .graph import DirectedGraph, ego_network, load_edge_list, summary_stats
from .pipeline import RoleDiscovery, RunConfig, run_pipeline
from .powerlaw import PowerLawFit, fit_power_law, gof_pvalue
from .reduce import CensusPCA, choose_dimensions, pca_fit, pca_transform
from .roles import RoleProfile, extract_roles, role_report
from .sampling import SampleSpec, evaluate_samplers, ks_distance, sample

__all__ = [
    "CensusMatrix", "CensusPCA", "CentroidKMeans", "DirectedGraph", "PowerLawFit", "RoleDiscovery",
    "RoleProfile", "RunConfig", "SampleSpec", "SilhouetteKMeans", "TriadCensus", "TriadCensusTransformer",
    "census_matrix", "centroid_silhouette", "choose_dimensions", "classify_triad", "ego_census", "ego_network",
    "evaluate_samplers", "extract_roles", "fit_power_law", "gof_pvalue", "kmeans", "ks_distance",
    "load_edge_list", "pca_fit", "pca_transform", "role_report", "run_pipeline", "sample", "summary_stats",
    "sweep_k",
]
