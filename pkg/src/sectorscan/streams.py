"""Counter-keyed uniform variates for reproducible Monte-Carlo trials.

Every variate is a pure function of ``(seed, trial, lane, index)``, so a trial
draws the same numbers whether it runs alone, inside a vectorized batch, or
on another worker.  The mixing function is the splitmix64 finalizer applied
to each key component in turn.
"""

from __future__ import annotations

import numpy as np

# lanes partition each trial's stream by purpose
LANE_ENTRY = 0  # index 0: entry slot, index 1: entry sector
LANE_PERM = 1  # index j: sort key of sector j + 1 in the EA period
LANE_SLOT = 2  # index k: MLRI illumination draw for slot k
LANE_SEQ = 3  # sequential draws through KeyedStream.random

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_SCALE = 2.0**-53
MAX_SEED = 2**64 - 1


def _mix(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> _S30)
    x = x * _M1
    x = x ^ (x >> _S27)
    x = x * _M2
    return x ^ (x >> _S31)


def _as_u64(v) -> np.ndarray:
    return np.asarray(v).astype(np.uint64)


def keyed_uniform(seed: int, trial, lane: int, index) -> np.ndarray:
    """Uniform variates in [0, 1) keyed by ``(seed, trial, lane, index)``.

    ``trial`` and ``index`` broadcast against each other.
    """
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer; got {seed}")
    with np.errstate(over="ignore"):
        h = _mix(_as_u64(seed) + _GAMMA)
        for part in (trial, lane, index):
            h = _mix(h ^ _mix(_as_u64(part) + _GAMMA))
    return (h >> _S11).astype(np.float64) * _SCALE


class KeyedStream:
    """Random stream owned by a single trial.

    Offers ``random(size)`` like :class:`numpy.random.Generator`, drawing
    sequentially from its own lane, plus direct keyed access via
    :meth:`uniform`.
    """

    def __init__(self, seed: int, trial: int = 0):
        self.seed = int(seed)
        self.trial = int(trial)
        self._counter = 0

    def uniform(self, lane: int, index):
        u = keyed_uniform(self.seed, self.trial, lane, index)
        return float(u) if u.ndim == 0 else u

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        idx = np.arange(self._counter, self._counter + n)
        self._counter += n
        u = keyed_uniform(self.seed, self.trial, LANE_SEQ, idx)
        return float(u[0]) if size is None else u.reshape(size)
