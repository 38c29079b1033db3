"""Sector-entrance and entry-slot distributions.

Sectors are numbered 1..N and entry slots 1, 2, ...; arrays are stored
0-based (``probs[i - 1]`` is the mass of sector ``i``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

SUM_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-9


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SectorPmf:
    """Probability mass over sectors 1..N."""

    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("sector PMF must be a non-empty 1-D vector")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValueError(f"sector PMF must be non-negative and finite; got {probs}")
        total = float(probs.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"sector PMF must sum to 1 (got {total!r})")
        object.__setattr__(self, "probs", probs)

    @property
    def n_sectors(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> tuple[int, ...]:
        """1-based indices of the sectors with strictly positive mass."""
        return tuple(int(i) + 1 for i in np.flatnonzero(self.probs > 0))

    def prob(self, sector: int) -> float:
        if not 1 <= sector <= self.n_sectors:
            raise IndexError(f"sector {sector} outside 1..{self.n_sectors}")
        return float(self.probs[sector - 1])

    def argmax(self) -> int:
        """Most likely sector (lowest index on ties)."""
        return int(np.argmax(self.probs)) + 1

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def sample(self, u):
        """Sector(s) for uniform variate(s) ``u`` in [0, 1), by inverse CDF."""
        idx = np.searchsorted(self.cdf(), u, side="right") + 1
        # the cumulative sum may round below 1
        s = np.minimum(idx, self.support[-1])
        return int(s) if np.ndim(s) == 0 else s


def _check_n_sectors(n_sectors) -> int:
    if isinstance(n_sectors, bool) or int(n_sectors) != n_sectors or n_sectors < 1:
        raise ValueError(f"n_sectors must be a positive integer; got {n_sectors!r}")
    return int(n_sectors)


def center_sector(n_sectors: int) -> int:
    """Peak sector of the triangular profile, ceil(N/2)."""
    return (_check_n_sectors(n_sectors) + 1) // 2


def triangular_pmf(n_sectors: int, width_L: int) -> SectorPmf:
    """Symmetric triangle of base ``width_L`` centred on sector ceil(N/2).

    The shape ``max(L/2 - |d|, 0)`` is evaluated on integer offsets ``d``
    from the centre, clipped to 1..N and renormalized.  Before clipping the
    integer profile already sums to (L/2)**2, i.e. it is the continuous
    equilateral triangle of height 2/L sampled on the sector grid.
    ``width_L = 0`` puts unit mass on the centre sector; ``width_L = 2`` does
    the same, since the edge points of the triangle carry no mass.
    """
    n = _check_n_sectors(n_sectors)
    if isinstance(width_L, bool) or int(width_L) != width_L or width_L < 0:
        raise ValueError(f"width_L must be a non-negative integer; got {width_L!r}")
    width_L = int(width_L)
    if width_L % 2:
        raise ValueError(f"width_L must be even; got {width_L}")

    center = center_sector(n)
    offsets = np.abs(np.arange(1, n + 1) - center)
    if width_L == 0:
        shape = (offsets == 0).astype(np.int64)
    else:
        # integer heights keep p[c - d] == p[c + d] bit-for-bit
        shape = np.maximum(width_L // 2 - offsets, 0)
    return SectorPmf(shape / shape.sum())


def uniform_pmf(n_sectors: int) -> SectorPmf:
    n = _check_n_sectors(n_sectors)
    return SectorPmf(np.full(n, 1.0 / n))


def custom_pmf(weights: Sequence[float]) -> SectorPmf:
    """Normalize measured non-negative sector weights into a PMF."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0):
        raise ValueError(f"weights must be non-negative; got {w.tolist()}")
    total = w.sum()
    if total <= 0:
        raise ValueError("at least one weight must be strictly positive")
    return SectorPmf(w / total)


@dataclass(frozen=True)
class ArrivalPmf:
    """Distribution of the user's entry slot t = 1, 2, ....

    ``masses`` holds w_1..w_T for the truncation horizon T; ``tail_mass`` is
    the probability of entering after slot T.  Geometric arrivals carry their
    rate ``mu``; explicit finite arrivals have ``mu=None`` and no tail.
    """

    masses: np.ndarray
    tail_mass: float = 0.0
    mu: Optional[float] = None
    tail_tolerance: float = DEFAULT_TAIL_TOL
    _cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        masses = _frozen(self.masses)
        if masses.ndim != 1 or masses.size == 0:
            raise ValueError("arrival masses must be a non-empty 1-D vector")
        if np.any(masses < 0) or self.tail_mass < 0:
            raise ValueError("arrival masses must be non-negative")
        total = float(masses.sum()) + self.tail_mass
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"arrival masses must sum to 1 (got {total!r})")
        object.__setattr__(self, "masses", masses)
        cdf = np.cumsum(masses)
        cdf.setflags(write=False)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def truncation_horizon(self) -> int:
        return int(self.masses.size)

    def mass(self, t):
        """w_t for scalar or array ``t`` (zero for t < 1)."""
        t = np.asarray(t)
        if self.mu is not None:
            out = -math.expm1(-self.mu) * np.exp(-self.mu * (t - 1.0))
        else:
            idx = np.clip(t - 1, 0, self.truncation_horizon - 1).astype(np.int64)
            out = np.where(t <= self.truncation_horizon, self.masses[idx], 0.0)
        out = np.where(t >= 1, out, 0.0)
        return float(out) if out.ndim == 0 else out

    def sample(self, u):
        """Entry slot for uniform variate(s) ``u`` in [0, 1), by inverse CDF."""
        u = np.asarray(u, dtype=np.float64)
        if self.mu is not None:
            # P(t > k) = exp(-mu k); 1 - u lies in (0, 1]
            t = np.floor(-np.log1p(-u) / self.mu).astype(np.int64) + 1
        else:
            idx = np.searchsorted(self._cdf, u, side="right")
            t = np.minimum(idx, self.truncation_horizon - 1) + 1
        return int(t) if t.ndim == 0 else t

    def mean(self) -> float:
        if self.mu is not None:
            return 1.0 / -math.expm1(-self.mu)
        return float(np.arange(1, self.truncation_horizon + 1) @ self.masses)


def _truncation_horizon(mu: float, tail_tolerance: float) -> int:
    T = max(1, math.floor(-math.log(tail_tolerance) / mu) + 1)
    while math.exp(-mu * T) >= tail_tolerance:
        T += 1
    while T > 1 and math.exp(-mu * (T - 1)) < tail_tolerance:
        T -= 1
    return T


def geometric_arrival(mu: float, tail_tolerance: float = DEFAULT_TAIL_TOL) -> ArrivalPmf:
    """Geometric entry slot with w_t = (1 - e^-mu) e^(-mu (t - 1)).

    The truncation horizon is the smallest T whose tail mass e^(-mu T) is
    below ``tail_tolerance``.
    """
    mu = float(mu)
    if not mu > 0 or not math.isfinite(mu):
        raise ValueError(f"mu must be a positive real; got {mu!r}")
    if not 0 < tail_tolerance < 1:
        raise ValueError(f"tail_tolerance must lie in (0, 1); got {tail_tolerance!r}")
    T = _truncation_horizon(mu, tail_tolerance)
    t = np.arange(1, T + 1)
    masses = -math.expm1(-mu) * np.exp(-mu * (t - 1.0))
    return ArrivalPmf(
        masses, tail_mass=math.exp(-mu * T), mu=mu, tail_tolerance=tail_tolerance
    )


def custom_arrival(weights: Sequence[float]) -> ArrivalPmf:
    """Finite entry-slot distribution over slots 1..len(weights)."""
    w = custom_pmf(weights).probs
    return ArrivalPmf(w, tail_mass=0.0, mu=None, tail_tolerance=0.0)


def point_arrival(slot: int = 1) -> ArrivalPmf:
    """User always enters in ``slot``."""
    if slot < 1:
        raise ValueError("slot must be >= 1")
    w = np.zeros(slot)
    w[-1] = 1.0
    return custom_arrival(w)
