"""Egonet-based detection of an anomalous clique under random graph null models."""
from ._jit import USE_NUMBA, backend, set_threads
from .chi2 import Chi2Report, chi2_critical, chi2_detect
from .detect import DetectionReport, EgonetRecord, detect, egonet_pvalues, recover_clique
from .fit import ClusteringConfig, FitError, FittedModel, fit_model, spectral_cluster
from .graph import Graph
from .harness import SimConfig, SimSummary, aggregate, paper_suite, simulate
from .io import read_edge_list, read_report, write_edge_list, write_report
from .models import CliquePlan, ModelSpec, calibrate_density, embed_clique, generate
from .tails import binom_sf, poisson_sf

__version__ = "0.1.0"

__all__ = [
    "Chi2Report", "CliquePlan", "ClusteringConfig", "DetectionReport", "EgonetRecord",
    "FitError", "FittedModel", "Graph", "ModelSpec", "SimConfig", "SimSummary", "USE_NUMBA",
    "aggregate", "backend", "binom_sf", "calibrate_density", "chi2_critical", "chi2_detect",
    "detect", "egonet_pvalues", "embed_clique", "fit_model", "generate", "paper_suite",
    "poisson_sf", "read_edge_list", "read_report", "recover_clique", "set_threads",
    "simulate", "spectral_cluster", "write_edge_list", "write_report",
]
