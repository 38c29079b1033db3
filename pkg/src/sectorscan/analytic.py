"""Exact discovery-time evaluation, used as oracles for the simulator.

Discovery time is tau = k - t, where t is the entry slot and k the first
slot >= t that illuminates the user's sector; tau = 0 when the sector is lit
in the entry slot itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dist import ArrivalPmf, SectorPmf
from .strategies import ScanSequence


class CoverageError(ValueError):
    """A support sector is never illuminated after some possible entry slot."""

    def __init__(self, entry_slot: int, sector: int, horizon: int):
        super().__init__(
            f"sector {sector} is not illuminated at or after entry slot "
            f"{entry_slot} within the sequence horizon {horizon}"
        )
        self.entry_slot = entry_slot
        self.sector = sector


@dataclass(frozen=True)
class DiscoveryPmf:
    """P(tau = 0..tau_max) plus the residual mass not accounted for."""

    masses: np.ndarray
    censored_mass: float

    def __post_init__(self):
        masses = np.array(self.masses, dtype=np.float64)
        if np.any(masses < 0):
            raise ValueError("discovery masses must be non-negative")
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def tau_max(self) -> int:
        return self.masses.size - 1

    def mean(self) -> float:
        """Mean over the resolved masses (censored mass contributes nothing)."""
        return float(np.arange(self.masses.size) @ self.masses)

    def second_moment(self) -> float:
        tau = np.arange(self.masses.size, dtype=np.float64)
        return float(tau**2 @ self.masses)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.masses)


def mlri_mean_discovery(entrance: SectorPmf, illumination: Optional[SectorPmf] = None) -> float:
    """Mean MLRI discovery time sum_i p_i (1 - q_i) / q_i over the support of p.

    With the optimal q = p (the default) this is sum_{i in supp p} (1 - p_i).
    Empty sectors contribute nothing.  Returns ``inf`` when q leaves a
    support sector unlit.
    """
    p = entrance.probs
    q = p if illumination is None else illumination.probs
    if q.shape != p.shape:
        raise ValueError("illumination and entrance must cover the same sectors")
    supp = p > 0
    if np.any(q[supp] <= 0):
        return float("inf")
    return float(np.sum(p[supp] * (1.0 - q[supp]) / q[supp]))


def mlri_variance_discovery(entrance: SectorPmf) -> float:
    # tau | sector i ~ Geometric(p_i) on {0, 1, ...}: E[tau^2] = (1-p)(2-p)/p^2
    p = entrance.probs[entrance.probs > 0]
    second = np.sum((1.0 - p) * (2.0 - p) / p)
    mean = np.sum(1.0 - p)
    return float(second - mean**2)


def ea_mean_discovery(n_sectors: int) -> float:
    """(N - 1) / 2: tau is uniform on 0..N-1 under a uniformly random EA phase."""
    if n_sectors < 1:
        raise ValueError("n_sectors must be >= 1")
    return (n_sectors - 1) / 2


def ea_variance_discovery(n_sectors: int) -> float:
    return (n_sectors**2 - 1) / 12


def ea_discovery_pmf(n_sectors: int, tau_max: int) -> DiscoveryPmf:
    if n_sectors < 1 or tau_max < 0:
        raise ValueError("n_sectors must be >= 1 and tau_max >= 0")
    masses = np.zeros(tau_max + 1)
    m = min(n_sectors, tau_max + 1)
    masses[:m] = 1.0 / n_sectors
    return DiscoveryPmf(masses, censored_mass=max(0.0, 1.0 - m / n_sectors))


def mlri_discovery_pmf(entrance: SectorPmf, tau_max: int) -> DiscoveryPmf:
    """Geometric mixture P(tau) = sum_i p_i^2 (1 - p_i)^tau (illumination q = p)."""
    if tau_max < 0:
        raise ValueError("tau_max must be >= 0")
    p = entrance.probs[entrance.probs > 0]
    tau = np.arange(tau_max + 1)
    masses = (p**2)[None, :] * (1.0 - p)[None, :] ** tau[:, None]
    masses = masses.sum(axis=1)
    return DiscoveryPmf(masses, censored_mass=max(0.0, 1.0 - float(masses.sum())))


def _delay_table(sequence: ScanSequence, entrance: SectorPmf, arrival: ArrivalPmf):
    """tau(t, i) for entry slots t = 1..T and all sectors, with coverage check."""
    if sequence.n_sectors != entrance.n_sectors:
        raise ValueError("sequence and entrance disagree on the number of sectors")
    T = arrival.truncation_horizon
    if T > sequence.horizon:
        live = np.flatnonzero(arrival.masses[sequence.horizon:] > 0)
        if live.size:
            t = sequence.horizon + 1 + int(live[0])
            raise CoverageError(t, entrance.support[0], sequence.horizon)
    T = min(T, sequence.horizon)
    nxt = sequence.next_occurrence()[1 : T + 1]
    ts = np.arange(1, T + 1)
    needed = (arrival.masses[:T, None] > 0) & (entrance.probs[None, :] > 0)
    missing = needed & (nxt == 0)
    if missing.any():
        t_idx, i_idx = np.argwhere(missing)[0]
        raise CoverageError(int(t_idx) + 1, int(i_idx) + 1, sequence.horizon)
    tau = np.where(nxt > 0, nxt - ts[:, None], 0)
    weight = arrival.masses[:T, None] * entrance.probs[None, :]
    return tau, weight


def deterministic_mean_discovery(
    sequence: ScanSequence, entrance: SectorPmf, arrival: ArrivalPmf
) -> float:
    """E[tau] = sum_t w_t sum_i p_i tau(t, i) for a fixed scan sequence.

    Entry slots past the arrival's truncation horizon are dropped; the error
    is at most the tail mass times the largest delay.
    """
    tau, weight = _delay_table(sequence, entrance, arrival)
    return float(np.sum(weight * tau))


def deterministic_discovery_pmf(
    sequence: ScanSequence, entrance: SectorPmf, arrival: ArrivalPmf, tau_max: int
) -> DiscoveryPmf:
    """P(tau) = sum_t w_t sum_{i : tau(t,i) = tau} p_i; everything else is censored."""
    if tau_max < 0:
        raise ValueError("tau_max must be >= 0")
    tau, weight = _delay_table(sequence, entrance, arrival)
    keep = (weight > 0) & (tau <= tau_max)
    masses = np.bincount(tau[keep], weights=weight[keep], minlength=tau_max + 1)
    censored = max(0.0, 1.0 - float(masses.sum()))
    return DiscoveryPmf(masses, censored_mass=censored)


def deterministic_variance_discovery(
    sequence: ScanSequence, entrance: SectorPmf, arrival: ArrivalPmf
) -> float:
    tau, weight = _delay_table(sequence, entrance, arrival)
    resolved = weight.sum()
    mean = np.sum(weight * tau) / resolved
    return float(np.sum(weight * (tau - mean) ** 2) / resolved)
