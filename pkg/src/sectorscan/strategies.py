"""Sector scanning policies: exhaustive (EA), memory-less random (MLRI) and
statistic-and-memory-based (SMBI) illumination."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dist import ArrivalPmf, SectorPmf
from .streams import LANE_SLOT, KeyedStream


class HorizonExceededError(IndexError):
    """Slot requested beyond a precomputed sequence."""


@dataclass(frozen=True)
class ScanSequence:
    """Illuminated sectors b_1..b_K (1-based sectors, slot k at ``sectors[k-1]``).

    ``period`` is set for cyclic (EA) sequences.  ``exhausted`` lists SMBI
    slots whose posterior was identically zero and fell back to tie-break
    order.
    """

    sectors: np.ndarray
    n_sectors: int
    period: Optional[int] = None
    exhausted: tuple[int, ...] = ()

    def __post_init__(self):
        sectors = np.array(self.sectors, dtype=np.int64)
        if sectors.ndim != 1:
            raise ValueError("sectors must be 1-D")
        if sectors.size and (sectors.min() < 1 or sectors.max() > self.n_sectors):
            raise ValueError(f"sector indices must lie in 1..{self.n_sectors}")
        sectors.setflags(write=False)
        object.__setattr__(self, "sectors", sectors)

    @property
    def horizon(self) -> int:
        return int(self.sectors.size)

    def __len__(self):
        return self.horizon

    def sector_at(self, slot: int) -> int:
        if slot < 1:
            raise ValueError(f"slots start at 1; got {slot}")
        if slot > self.horizon:
            raise HorizonExceededError(
                f"slot {slot} beyond sequence horizon {self.horizon}"
            )
        return int(self.sectors[slot - 1])

    def next_occurrence(self) -> np.ndarray:
        """Table ``nxt[k, i-1]`` = first slot >= k illuminating sector i, 0 if none.

        Rows run over k = 0..horizon+1 so any entry slot up to horizon+1 can
        index it directly.
        """
        H, N = self.horizon, self.n_sectors
        nxt = np.zeros((H + 2, N), dtype=np.int64)
        for k in range(H, 0, -1):
            nxt[k] = nxt[k + 1]
            nxt[k, self.sectors[k - 1] - 1] = k
        nxt[0] = nxt[1]
        return nxt


def _check_permutation(n_sectors: int, permutation: Sequence[int]) -> np.ndarray:
    perm = np.asarray(permutation, dtype=np.int64)
    if perm.shape != (n_sectors,) or not np.array_equal(
        np.sort(perm), np.arange(1, n_sectors + 1)
    ):
        raise ValueError(f"not a permutation of 1..{n_sectors}: {list(permutation)}")
    return perm


def ea_sequence(n_sectors: int, permutation: Sequence[int], horizon: int) -> ScanSequence:
    """Repeat ``permutation`` cyclically for ``horizon`` slots."""
    perm = _check_permutation(n_sectors, permutation)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return ScanSequence(np.resize(perm, horizon), n_sectors, period=n_sectors)


def random_permutation(keys) -> np.ndarray:
    """Permutation of 1..N obtained by sorting N uniform keys.

    Works row-wise on a 2-D array of keys (one permutation per row).
    """
    return np.argsort(keys, axis=-1, kind="stable") + 1


def mlri_optimal_q(entrance: SectorPmf) -> SectorPmf:
    """Default MLRI illumination PMF: q = p (illuminate as users enter).

    This is the rule the MLRI strategy and its closed-form mean
    sum_{i in supp} (1 - p_i) are built on.  It does not minimize the mean
    discovery time sum_i p_i (1 - q_i) / q_i; see :func:`mlri_min_mean_q`.
    """
    return SectorPmf(entrance.probs.copy())


def mlri_min_mean_q(entrance: SectorPmf) -> SectorPmf:
    """Illumination PMF minimizing sum_i p_i (1 - q_i) / q_i on the simplex.

    The objective is sum_i p_i / q_i - 1; its stationarity condition
    p_i / q_i^2 = lambda gives q_i proportional to sqrt(p_i), with minimum
    (sum_i sqrt(p_i))^2 - 1.
    """
    root = np.sqrt(entrance.probs)
    return SectorPmf(root / root.sum())


def mlri_sample(illumination: SectorPmf, rng, size=None):
    """Draw sector(s) i with probability q_i.

    ``rng`` is anything with a numpy-style ``random(size)`` method
    (:class:`numpy.random.Generator` or :class:`~sectorscan.streams.KeyedStream`).
    """
    return illumination.sample(rng.random(size))


def _posterior_from_last(last: np.ndarray, k: int, p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """v_k given ``last[l]`` = latest slot < k that illuminated sector l+1 (0 if none).

    Sector l is unexplored since entry slot t iff last[l] < t, so the masked
    mass for entry slot t is M_t = sum{p_l : last[l] < t} and

        v_k(l) = p_l * sum_{t = last[l]+1}^{K} w_t / M_t,   K = min(k, len(w)),

    dropping entry slots with M_t = 0.  Sectors with equal ``last`` share
    the same suffix sum, so equal-probability sectors tie exactly.
    """
    K = min(k, w.size)
    ts = np.arange(1, K + 1)
    unexplored = last[:, None] < ts[None, :]
    M = p @ unexplored
    terms = np.zeros(K)
    np.divide(w[:K], M, out=terms, where=M > 0)
    # suffix[a] = sum of terms for t > a, a = 0..K
    suffix = np.zeros(K + 1)
    suffix[:K] = np.cumsum(terms[::-1])[::-1]
    return p * suffix[np.minimum(last, K)]


def _last_illuminated(history: np.ndarray, n_sectors: int) -> np.ndarray:
    last = np.zeros(n_sectors, dtype=np.int64)
    for slot, sector in enumerate(history, start=1):
        last[sector - 1] = slot
    return last


def smbi_posterior(
    current_slot: int,
    history: Sequence[int],
    entrance: SectorPmf,
    arrival: ArrivalPmf,
) -> np.ndarray:
    """Probability v_k(l) of finding the still-undiscovered user in slot k
    when illuminating sector l, for l = 1..N (returned 0-based).

    ``history`` holds b_1..b_{k-1}.  Entry slots beyond the arrival's
    truncation horizon are ignored.
    """
    hist = np.asarray(history, dtype=np.int64).reshape(-1)
    if current_slot < 1 or hist.size != current_slot - 1:
        raise ValueError(
            f"history must hold exactly {current_slot - 1} sectors; got {hist.size}"
        )
    N = entrance.n_sectors
    if hist.size and (hist.min() < 1 or hist.max() > N):
        raise ValueError(f"history sectors must lie in 1..{N}")
    last = _last_illuminated(hist, N)
    return _posterior_from_last(last, current_slot, entrance.probs, arrival.masses)


def smbi_sequence(entrance: SectorPmf, arrival: ArrivalPmf, horizon: int) -> ScanSequence:
    """Greedy MAP scan: b_k = argmax_l v_k(l), lowest sector index on ties."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    N = entrance.n_sectors
    p, w = entrance.probs, arrival.masses
    last = np.zeros(N, dtype=np.int64)
    out = np.empty(horizon, dtype=np.int64)
    exhausted = []
    for k in range(1, horizon + 1):
        v = _posterior_from_last(last, k, p, w)
        best = int(np.argmax(v))
        if v[best] <= 0:
            exhausted.append(k)
        out[k - 1] = best + 1
        last[best] = k
    return ScanSequence(out, N, exhausted=tuple(exhausted))


class ExhaustiveScan:
    """EA: one period is ``permutation``, repeated forever."""

    name = "ea"

    def __init__(self, permutation: Sequence[int]):
        self.permutation = _check_permutation(len(permutation), permutation)
        self.n_sectors = self.permutation.size

    def next_sector(self, slot: int, rng=None) -> int:
        return int(self.permutation[(slot - 1) % self.n_sectors])


class RandomScan:
    """MLRI: every slot illuminates an independent draw from ``illumination``.

    Draws are keyed by slot on a :class:`KeyedStream` so slot k always sees
    the same variate for a given trial.
    """

    name = "mlri"

    def __init__(self, illumination: SectorPmf):
        self.illumination = illumination
        self.n_sectors = illumination.n_sectors

    def next_sector(self, slot: int, rng: KeyedStream) -> int:
        return self.illumination.sample(rng.uniform(LANE_SLOT, slot))


class SequenceScan:
    """SMBI (or any precomputed deterministic sequence)."""

    name = "smbi"

    def __init__(self, sequence: ScanSequence):
        self.sequence = sequence
        self.n_sectors = sequence.n_sectors

    def next_sector(self, slot: int, rng=None) -> int:
        return self.sequence.sector_at(slot)
