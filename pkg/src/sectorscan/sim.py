"""Seeded Monte-Carlo engine for discovery-time experiments.

Each trial owns a counter-keyed random stream derived from ``(seed, trial)``
(see :mod:`sectorscan.streams`).  The vectorized batch kernel and the
slot-by-slot reference :func:`run_trial` read the same variates, so they
agree trial for trial, and histograms do not depend on chunking or worker
count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from . import dist as distributions
from .dist import ArrivalPmf, SectorPmf
from .strategies import (
    ExhaustiveScan,
    RandomScan,
    ScanSequence,
    SequenceScan,
    mlri_optimal_q,
    random_permutation,
    smbi_sequence,
)
from .streams import LANE_ENTRY, LANE_PERM, LANE_SLOT, MAX_SEED, KeyedStream, keyed_uniform

log = logging.getLogger(__name__)

STRATEGIES = ("ea", "mlri", "smbi")
DISTRIBUTIONS = ("triangular", "uniform", "custom")
CENSORED = -1
CHUNK_SIZE = 1 << 14


@dataclass(frozen=True)
class SimConfig:
    """One Monte-Carlo experiment."""

    n_sectors: int = 17
    dist: str = "triangular"
    L: int = 10
    weights: Optional[tuple[float, ...]] = None
    mu: float = 0.1
    tail_tol: float = distributions.DEFAULT_TAIL_TOL
    strategy: str = "smbi"
    trials: int = 100_000
    seed: int = 42
    horizon: int = 1000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.dist not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.dist!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
            if self.dist == "custom" and len(self.weights) != self.n_sectors:
                raise ValueError(
                    f"{len(self.weights)} weights given for {self.n_sectors} sectors"
                )
        elif self.dist == "custom":
            raise ValueError("custom distribution needs weights")
        # fail fast on invalid sub-specs
        self.entrance()
        self.arrival()

    def entrance(self) -> SectorPmf:
        if self.dist == "triangular":
            return distributions.triangular_pmf(self.n_sectors, self.L)
        if self.dist == "uniform":
            return distributions.uniform_pmf(self.n_sectors)
        return distributions.custom_pmf(self.weights)

    def arrival(self) -> ArrivalPmf:
        return distributions.geometric_arrival(self.mu, self.tail_tol)

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass
class DiscoveryHistogram:
    """Counts of tau = 0..horizon plus trials never discovered within the horizon."""

    counts: np.ndarray
    trials: int
    censored: int = 0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if int(self.counts.sum()) + self.censored != self.trials:
            raise ValueError("counts and censored trials must add up to trials")

    @classmethod
    def from_taus(cls, taus: np.ndarray, horizon: int) -> "DiscoveryHistogram":
        taus = np.asarray(taus)
        found = taus[taus != CENSORED]
        counts = np.bincount(found, minlength=horizon + 1)
        return cls(counts, trials=int(taus.size), censored=int(taus.size - found.size))

    def merge(self, other: "DiscoveryHistogram") -> "DiscoveryHistogram":
        n = max(self.counts.size, other.counts.size)
        counts = np.zeros(n, dtype=np.int64)
        counts[: self.counts.size] += self.counts
        counts[: other.counts.size] += other.counts
        return DiscoveryHistogram(
            counts, self.trials + other.trials, self.censored + other.censored
        )

    __add__ = merge

    @property
    def discovered(self) -> int:
        return self.trials - self.censored

    def _sums(self) -> tuple[int, int, int]:
        # exact integer moments keep the statistics order-independent
        tau = range(self.counts.size)
        c = self.counts.tolist()
        s1 = sum(t * n for t, n in zip(tau, c))
        s2 = sum(t * t * n for t, n in zip(tau, c))
        return self.discovered, s1, s2

    @property
    def mean(self) -> float:
        n, s1, _ = self._sums()
        return s1 / n if n else math.nan

    @property
    def variance(self) -> float:
        """Unbiased sample variance over discovered trials."""
        n, s1, s2 = self._sums()
        if n < 2:
            return 0.0 if n == 1 else math.nan
        return (n * s2 - s1 * s1) / (n * (n - 1))

    @property
    def standard_error(self) -> float:
        n = self.discovered
        return math.sqrt(self.variance / n) if n else math.nan

    def frequencies(self) -> np.ndarray:
        return self.counts / self.trials

    def pmf(self) -> np.ndarray:
        """Empirical P(tau) among discovered trials."""
        return self.counts / self.discovered


class _Context:
    """Per-experiment data shared read-only by all trials."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.entrance = config.entrance()
        self.arrival = config.arrival()
        self.sequence: Optional[ScanSequence] = None
        self.next_occ: Optional[np.ndarray] = None
        self.illumination: Optional[SectorPmf] = None
        if config.strategy == "smbi":
            self.sequence = smbi_sequence(self.entrance, self.arrival, config.horizon)
            self.next_occ = self.sequence.next_occurrence()
            if self.sequence.exhausted:
                log.debug(
                    "SMBI posterior exhausted from slot %d on", self.sequence.exhausted[0]
                )
        elif config.strategy == "mlri":
            self.illumination = mlri_optimal_q(self.entrance)


def prepare(config: SimConfig) -> _Context:
    return _Context(config)


def _entry(ctx: _Context, trials) -> tuple[np.ndarray, np.ndarray]:
    seed = ctx.config.seed
    u_slot = keyed_uniform(seed, trials, LANE_ENTRY, 0)
    u_sector = keyed_uniform(seed, trials, LANE_ENTRY, 1)
    t = ctx.arrival.sample(u_slot)
    i = ctx.entrance.sample(u_sector)
    return np.asarray(t, dtype=np.int64), np.asarray(i, dtype=np.int64)


def _permutation_keys(seed: int, trials, n_sectors: int) -> np.ndarray:
    trials = np.asarray(trials)
    return keyed_uniform(seed, trials[..., None], LANE_PERM, np.arange(n_sectors))


def run_trial(config: SimConfig, rng: KeyedStream, context: Optional[_Context] = None) -> int:
    """Simulate one user slot by slot; return tau or ``CENSORED``.

    The scan runs from slot 1; illuminations before the entry slot find
    nobody.  Detection is perfect once the user's sector is lit.
    """
    ctx = context if context is not None else _Context(config)
    t, i = (int(x[0]) for x in _entry(ctx, np.array([rng.trial])))
    N = config.n_sectors
    if config.strategy == "ea":
        keys = _permutation_keys(config.seed, rng.trial, N)
        scan = ExhaustiveScan(random_permutation(keys))
    elif config.strategy == "mlri":
        scan = RandomScan(ctx.illumination)
    else:
        scan = SequenceScan(ctx.sequence)
    for slot in range(1, config.horizon + 1):
        if scan.next_sector(slot, rng) == i and slot >= t:
            return slot - t
    return CENSORED


def _taus_ea(ctx, trials, t, i):
    N = ctx.config.n_sectors
    perm = random_permutation(_permutation_keys(ctx.config.seed, trials, N))
    pos = np.argmax(perm == i[:, None], axis=1)
    tau = (pos - (t - 1)) % N
    return np.where(t + tau <= ctx.config.horizon, tau, CENSORED)


def _taus_mlri(ctx, trials, t, i):
    cfg = ctx.config
    tau = np.full(t.size, CENSORED, dtype=np.int64)
    active = np.flatnonzero(t <= cfg.horizon)
    offset = 0
    while active.size:
        slots = t[active] + offset
        u = keyed_uniform(cfg.seed, trials[active], LANE_SLOT, slots)
        hit = ctx.illumination.sample(u) == i[active]
        tau[active[hit]] = offset
        active = active[~hit & (slots < cfg.horizon)]
        offset += 1
    return tau


def _taus_smbi(ctx, trials, t, i):
    H = ctx.config.horizon
    tt = np.minimum(t, H + 1)
    k = ctx.next_occ[tt, i - 1]
    return np.where(k > 0, k - t, CENSORED)


_KERNELS = {"ea": _taus_ea, "mlri": _taus_mlri, "smbi": _taus_smbi}


def simulate_taus(ctx: _Context, trials) -> np.ndarray:
    """Vectorized discovery times for the given trial indices."""
    trials = np.asarray(trials, dtype=np.int64)
    t, i = _entry(ctx, trials)
    return _KERNELS[ctx.config.strategy](ctx, trials, t, i)


def run_experiment(
    config: SimConfig, workers: int = 1, chunk_size: int = CHUNK_SIZE
) -> DiscoveryHistogram:
    """Run ``config.trials`` independent trials and aggregate their histogram."""
    ctx = _Context(config)
    starts = range(0, config.trials, chunk_size)

    def chunk(start):
        ids = np.arange(start, min(start + chunk_size, config.trials))
        return DiscoveryHistogram.from_taus(simulate_taus(ctx, ids), config.horizon)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(s) for s in starts]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


@dataclass(frozen=True)
class SweepRow:
    param: float
    strategy: str
    mean: float
    std_error: float
    censored: int
    error: Optional[str] = field(default=None, compare=False)


def _sweep(base: SimConfig, key: str, values: Iterable, strategies, workers) -> list[SweepRow]:
    rows = []
    for value in values:
        for strategy in strategies:
            try:
                hist = run_experiment(
                    base.with_(**{key: value, "strategy": strategy}), workers=workers
                )
            except ValueError as exc:
                log.warning("%s=%s strategy=%s failed: %s", key, value, strategy, exc)
                rows.append(SweepRow(value, strategy, math.nan, math.nan, 0, str(exc)))
                continue
            rows.append(
                SweepRow(value, strategy, hist.mean, hist.standard_error, hist.censored)
            )
    return rows


def sweep_L(
    base_config: SimConfig,
    L_values: Sequence[int],
    strategies: Sequence[str] = STRATEGIES,
    workers: int = 1,
) -> list[SweepRow]:
    """Mean discovery time against the triangle width L, for every strategy."""
    base = base_config.with_(dist="triangular")
    return _sweep(base, "L", L_values, strategies, workers)


def sweep_mu(
    base_config: SimConfig,
    mu_values: Sequence[float],
    strategies: Sequence[str] = STRATEGIES,
    workers: int = 1,
) -> list[SweepRow]:
    """Mean discovery time against the arrival rate mu, for every strategy."""
    return _sweep(base_config, "mu", mu_values, strategies, workers)
