"""Sector scanning strategies for mmWave initial access."""

from .analytic import (
    CoverageError,
    DiscoveryPmf,
    deterministic_discovery_pmf,
    deterministic_mean_discovery,
    ea_mean_discovery,
    mlri_discovery_pmf,
    mlri_mean_discovery,
)
from .dist import (
    ArrivalPmf,
    SectorPmf,
    custom_arrival,
    custom_pmf,
    geometric_arrival,
    point_arrival,
    triangular_pmf,
    uniform_pmf,
)
from .sim import DiscoveryHistogram, SimConfig, run_experiment, run_trial, sweep_L, sweep_mu
from .strategies import (
    HorizonExceededError,
    ScanSequence,
    ea_sequence,
    mlri_min_mean_q,
    mlri_optimal_q,
    mlri_sample,
    smbi_posterior,
    smbi_sequence,
)

__version__ = "0.1.0"
