import itertools

import numpy as np
import pytest

import oracles
from sectorscan.analytic import (
    CoverageError,
    deterministic_discovery_pmf,
    deterministic_mean_discovery,
    deterministic_variance_discovery,
    ea_discovery_pmf,
    ea_mean_discovery,
    ea_variance_discovery,
    mlri_discovery_pmf,
    mlri_mean_discovery,
    mlri_variance_discovery,
)
from sectorscan.dist import (
    custom_arrival,
    custom_pmf,
    geometric_arrival,
    point_arrival,
    triangular_pmf,
    uniform_pmf,
)
from sectorscan.strategies import ScanSequence, ea_sequence, smbi_sequence


def test_mlri_mean_values():
    assert mlri_mean_discovery(triangular_pmf(17, 2)) == 0.0
    assert mlri_mean_discovery(uniform_pmf(17)) == pytest.approx(16.0, abs=1e-12)
    assert mlri_mean_discovery(custom_pmf([0.5, 0.5])) == 1.0


def test_mlri_mean_ignores_empty_sectors():
    # the literal sum over all sectors would give N - 1 = 3
    assert mlri_mean_discovery(custom_pmf([0, 1, 0, 0])) == 0.0
    assert mlri_mean_discovery(custom_pmf([0, 0.25, 0.75, 0])) == pytest.approx(1.0)


def test_mlri_mean_with_unlit_sector_is_infinite():
    assert mlri_mean_discovery(custom_pmf([0.5, 0.5]), custom_pmf([1, 0])) == float("inf")


def test_mlri_mean_from_geometric_series():
    # sum_i p_i^2 sum_k k (1-p_i)^k, truncated far out
    p = triangular_pmf(17, 12)
    k = np.arange(0, 5000)
    series = sum(pi**2 * np.sum(k * (1 - pi) ** k) for pi in p.probs if pi > 0)
    assert mlri_mean_discovery(p) == pytest.approx(series, rel=1e-10)


def test_mlri_mean_non_decreasing_in_width():
    means = [mlri_mean_discovery(triangular_pmf(17, L)) for L in range(0, 34, 2)]
    # constant N - 1 once the support covers every sector
    assert all(b >= a - 1e-12 for a, b in zip(means, means[1:]))
    assert means[-1] == pytest.approx(16.0)


def test_mlri_pmf_examples():
    assert mlri_discovery_pmf(custom_pmf([0, 1]), 5).masses.tolist() == [1, 0, 0, 0, 0, 0]
    m = mlri_discovery_pmf(custom_pmf([0.5, 0.5]), 10).masses
    np.testing.assert_allclose(m, 0.5 ** (np.arange(11) + 1))


def test_mlri_pmf_mean_uniform():
    pmf = mlri_discovery_pmf(uniform_pmf(17), 200)
    assert pmf.mean() == pytest.approx(16.0, abs=0.2)
    assert pmf.masses.sum() + pmf.censored_mass == pytest.approx(1.0, abs=1e-9)


def test_mlri_pmf_mean_converges_to_closed_form():
    p = triangular_pmf(17, 14)
    pmf = mlri_discovery_pmf(p, 3000)
    assert pmf.censored_mass < 1e-6
    assert pmf.mean() == pytest.approx(mlri_mean_discovery(p), abs=1e-3)
    var = pmf.second_moment() - pmf.mean() ** 2
    assert var == pytest.approx(mlri_variance_discovery(p), rel=1e-6)


def test_ea_mean_values():
    assert ea_mean_discovery(17) == 8.0
    assert ea_mean_discovery(1) == 0.0
    assert ea_mean_discovery(2) == 0.5


@pytest.mark.parametrize("n", [1, 2, 3, 5, 17])
def test_ea_mean_by_phase_enumeration(n):
    # every cyclic phase of the period, every sector, equally likely phase
    taus = []
    for r in range(n):
        seq = list(np.roll(np.arange(1, n + 1), -r)) * 2
        for sector in range(1, n + 1):
            taus.append(oracles.delay(seq, 1, sector))
    assert np.mean(taus) == pytest.approx(ea_mean_discovery(n), abs=1e-12)
    assert np.var(taus) == pytest.approx(ea_variance_discovery(n), abs=1e-12)


@pytest.mark.parametrize("p", [uniform_pmf(17), triangular_pmf(17, 10), custom_pmf(range(17))])
def test_ea_phase_average_of_deterministic_evaluator(p):
    perm = np.random.default_rng(11).permutation(17) + 1
    means, pmfs = [], []
    for r in range(17):
        seq = ea_sequence(17, np.roll(perm, -r), 40)
        means.append(deterministic_mean_discovery(seq, p, point_arrival(1)))
        pmfs.append(deterministic_discovery_pmf(seq, p, point_arrival(1), 20).masses)
    assert np.mean(means) == pytest.approx(ea_mean_discovery(17), abs=1e-12)
    np.testing.assert_allclose(np.mean(pmfs, axis=0), ea_discovery_pmf(17, 20).masses, atol=1e-12)


def test_ea_pmf_uniform():
    pmf = ea_discovery_pmf(17, 170)
    np.testing.assert_allclose(pmf.masses[:17], 1 / 17)
    assert np.all(pmf.masses[17:] == 0) and pmf.censored_mass == 0
    short = ea_discovery_pmf(17, 4)
    assert short.censored_mass == pytest.approx(12 / 17)


def test_deterministic_mean_examples():
    seq = ScanSequence([1, 2, 3], 3)
    assert deterministic_mean_discovery(seq, uniform_pmf(3), point_arrival(1)) == pytest.approx(1.0)
    p = custom_pmf([0.7, 0.2, 0.1])
    assert deterministic_mean_discovery(seq, p, point_arrival(1)) == pytest.approx(0.4)
    pmf = deterministic_discovery_pmf(seq, p, point_arrival(1), 2)
    np.testing.assert_allclose(pmf.masses, [0.7, 0.2, 0.1])
    assert pmf.censored_mass == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_deterministic_mean_matches_scan_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    p = custom_pmf(rng.random(n) * (rng.random(n) < 0.8) + np.eye(n)[0] * 0.01)
    w = rng.random(int(rng.integers(1, 9)))
    a = custom_arrival(w)
    seq = ea_sequence(n, rng.permutation(n) + 1, len(w) + n)
    expected = oracles.sequence_mean(seq.sectors.tolist(), p.probs.tolist(), a.masses.tolist())
    assert deterministic_mean_discovery(seq, p, a) == pytest.approx(expected, rel=1e-12)
    smbi = smbi_sequence(p, a, len(w) + 3 * n)
    expected = oracles.sequence_mean(smbi.sectors.tolist(), p.probs.tolist(), a.masses.tolist())
    assert deterministic_mean_discovery(smbi, p, a) == pytest.approx(expected, rel=1e-12)


def test_mean_equals_pmf_moment_without_censoring():
    p = triangular_pmf(17, 12)
    a = custom_arrival(np.exp(-0.3 * np.arange(25)))
    seq = smbi_sequence(p, a, 200)
    pmf = deterministic_discovery_pmf(seq, p, a, 200)
    assert pmf.censored_mass == pytest.approx(0.0, abs=1e-15)
    assert pmf.mean() == pytest.approx(deterministic_mean_discovery(seq, p, a), abs=1e-9)
    var = pmf.second_moment() - pmf.mean() ** 2
    assert var == pytest.approx(deterministic_variance_discovery(seq, p, a), abs=1e-9)


def test_smbi_pmf_concentrates_within_ten_slots():
    p, a = triangular_pmf(17, 10), geometric_arrival(0.1)
    seq = smbi_sequence(p, a, 1000)
    pmf = deterministic_discovery_pmf(seq, p, a, 170)
    assert pmf.cdf()[10] >= 0.95
    assert pmf.masses.sum() + pmf.censored_mass == pytest.approx(1.0, abs=1e-9)
    assert pmf.censored_mass == pytest.approx(a.tail_mass, rel=1e-6)


def test_smbi_mean_below_other_strategies_and_falls_with_mu():
    for L in (4, 8, 14):
        p = triangular_pmf(17, L)
        means = []
        for mu in (0.05, 0.1, 0.2, 0.5, 1.0):
            a = geometric_arrival(mu)
            means.append(deterministic_mean_discovery(smbi_sequence(p, a, 1000), p, a))
        assert max(means) < min(ea_mean_discovery(17), mlri_mean_discovery(p))
        assert all(b <= a for a, b in zip(means, means[1:]))


def test_coverage_error_names_the_gap():
    seq = ScanSequence([1, 2, 1, 2], 3)
    with pytest.raises(CoverageError) as err:
        deterministic_mean_discovery(seq, uniform_pmf(3), point_arrival(1))
    assert (err.value.entry_slot, err.value.sector) == (1, 3)


def test_coverage_error_when_arrival_outlives_sequence():
    seq = ScanSequence([1, 2], 2)
    with pytest.raises(CoverageError):
        deterministic_mean_discovery(seq, uniform_pmf(2), custom_arrival([1, 1, 1]))


def test_zero_mass_sectors_need_no_coverage():
    seq = ScanSequence([2, 2, 2], 3)
    p = custom_pmf([0, 1, 0])
    assert deterministic_mean_discovery(seq, p, custom_arrival([1, 1, 1])) == 0.0


def test_sector_count_mismatch():
    with pytest.raises(ValueError):
        deterministic_mean_discovery(ScanSequence([1], 1), uniform_pmf(2), point_arrival())


@pytest.mark.parametrize("n", [2, 3, 4])
def test_smbi_beats_every_other_sequence_for_point_arrival(n):
    # with w = delta at t = 1 the greedy MAP rule is optimal: compare against
    # every sequence of length n
    rng = np.random.default_rng(n)
    p = custom_pmf(rng.random(n))
    a = point_arrival(1)
    best = min(
        deterministic_mean_discovery(ScanSequence(s, n), p, a)
        for s in itertools.permutations(range(1, n + 1))
    )
    assert deterministic_mean_discovery(smbi_sequence(p, a, n), p, a) == pytest.approx(best)
