"""Occupation series, conventions, and normalized-ratio statistics."""

import math
import warnings

import numpy as np
import pytest

from ergosum import birkhoff as bk
from ergosum import lattice as lt
from ergosum import rankone as rk
from ergosum import renewal as rn
from ergosum.errors import CoverageError, InvariantViolationError
from ergosum.regvar import ScalingSequence
from ergosum.streams import spawn


@pytest.fixture(scope="module")
def odometer():
    return rk.load_preset("odometer")


@pytest.fixture(scope="module")
def chacon():
    return rk.load_preset("chacon")


# -- series construction -------------------------------------------------------


def test_series_from_name_odometer(odometer):
    series = bk.series_from_name(rk.sample_name(odometer, 0), (1, 2, 4))
    assert series.sigma == (3, 5, 9)
    assert series.s_plus == (2, 3, 5)
    assert series.s_minus == (2, 3, 5)
    assert series.convention == bk.CENTER_CONVENTION


def test_series_checkpoint_zero(chacon):
    series = bk.series_from_name(rk.sample_name(chacon, 5), (0, 3))
    assert series.sigma[0] == 1
    assert series.s_plus[0] == series.s_minus[0] == 1


def test_series_chacon_bracket(chacon):
    for seed in range(5):
        series = bk.series_from_name(rk.sample_name(chacon, seed), (13,))
        assert 9 <= series.sigma[0] <= 27


def test_series_consistency_identity(chacon):
    cps = (1, 2, 4, 8, 16, 64, 256, 1024)
    for seed in range(4):
        series = bk.series_from_name(rk.sample_name(chacon, seed), cps)
        for n, sp, sm, sg in zip(series.checkpoints, series.s_plus,
                                 series.s_minus, series.sigma):
            assert sg == sp + sm - 1
            assert sg <= 2 * n + 1
        assert all(b >= a for a, b in zip(series.sigma, series.sigma[1:]))
        assert all(b >= a for a, b in zip(series.s_plus, series.s_plus[1:]))


def test_series_validation():
    with pytest.raises(ValueError):
        bk.BirkhoffSeries((2, 1), (1, 1), (1, 1), (1, 1), source="x")
    with pytest.raises(InvariantViolationError):
        bk.BirkhoffSeries((1, 2), (2, 2), (2, 2), (4, 3), source="x")
    with pytest.raises(InvariantViolationError):
        bk.BirkhoffSeries((1,), (2, ), (2,), (4,), source="x")  # 4 != 2+2-1
    with pytest.raises(InvariantViolationError):
        bk.BirkhoffSeries((1,), (3,), (2,), (4,), source="x")  # 4 > 2*1+1


def test_series_from_walk_delta(odometer):
    d1 = rn.FiniteSupport.delta(1)
    walk = lt.walk_sample(d1, 0, J=8)
    series = bk.series_from_walk(walk, (5,))
    assert series.sigma == (11,)
    assert series.s_plus == (6,)
    assert series.s_minus == (6,)


def test_series_from_walk_matches_direct_scan():
    g = rn.Geometric(0.5)
    for seed in range(6):
        walk = lt.walk_sample(g, spawn(5, seed), J=500)
        series = bk.series_from_walk(walk, (10, 100, 400))
        s_all = np.array([walk.s(k) for k in range(-500, 501)])
        for n, sg in zip(series.checkpoints, series.sigma):
            assert sg == int(np.count_nonzero(np.abs(s_all) <= n))


def test_series_from_walk_coverage_error():
    d2 = rn.FiniteSupport.delta(2)
    walk = lt.walk_sample(d2, 0, J=4)
    with pytest.raises(CoverageError):
        bk.series_from_walk(walk, (100,))


def test_walk_mean_density_lln():
    # mean sigma/(2N) across seeds near 1/mu for geometric lifetimes
    g = rn.Geometric(0.5)
    n = 10 ** 5
    vals = []
    for seed in range(12):
        walk = lt.walk_sample(g, spawn(21, seed), J=n)
        series = bk.series_from_walk(walk, (n,))
        vals.append(series.sigma[0] / (2 * n))
    assert abs(np.mean(vals) - 0.5) <= 0.025


# -- normalized statistics --------------------------------------------------------


def test_normalized_stats_odometer_band(odometer):
    cps = tuple(2 ** e for e in range(4, 14))
    scaling = rk.rank_one_scaling(odometer)
    ensemble = [bk.series_from_name(rk.sample_name(odometer, s), cps)
                for s in range(3)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        stats = bk.normalized_stats(ensemble, scaling, burn_in=16)
    for s in stats.series:
        assert all(0.5 <= r < 1.1 for r in s.ratio_sym)
    # all-base name at dyadic checkpoints: a(n) = 2n exactly
    assert stats.beta_hat == pytest.approx((2 * 16 + 1) / (4 * 16))


def test_normalized_stats_walk_identity_scaling():
    d1 = rn.FiniteSupport.delta(1)
    cps = tuple(2 ** e for e in range(10, 17))
    walk = lt.walk_sample(d1, 0, J=2 ** 16)
    series = bk.series_from_walk(walk, cps)
    scaling = ScalingSequence(lambda n: n, "identity")
    with warnings.catch_warnings():
        # a(n)=n is half the doubled normalization, so the review flag fires
        warnings.simplefilter("ignore")
        stats = bk.normalized_stats([series], scaling, burn_in=2 ** 10)
    s = stats.series[0]
    # sigma = 2n+1 and a(n) = n: ratio 1 + 1/(2n), oscillation shrinks to ~0
    assert all(abs(r - 1.0) < 5e-4 for r in s.ratio_sym)
    assert s.oscillation < 5e-4


def test_normalized_stats_running_extrema_and_monotonicity(chacon):
    cps = tuple(2 ** e for e in range(4, 15))
    scaling = rk.rank_one_scaling(chacon)
    ens = [bk.series_from_name(rk.sample_name(chacon, spawn(3, i)), cps)
           for i in range(4)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        small = bk.normalized_stats(ens[:2], scaling, burn_in=16)
        full = bk.normalized_stats(ens, scaling, burn_in=16)
    assert full.alpha_hat >= small.alpha_hat
    assert full.beta_hat >= small.beta_hat
    assert full.beta_lower_hat <= small.beta_lower_hat
    for s in full.series:
        assert all(b >= a for a, b in zip(s.running_sup, s.running_sup[1:]))
        assert all(b <= a for a, b in zip(s.running_inf, s.running_inf[1:]))
        assert s.oscillation >= 0


def test_normalized_stats_horizon_monotonicity(chacon):
    cps_short = tuple(2 ** e for e in range(4, 10))
    cps_long = tuple(2 ** e for e in range(4, 14))
    scaling = rk.rank_one_scaling(chacon)
    short = bk.series_from_name(rk.sample_name(chacon, 8), cps_short)
    long = bk.series_from_name(rk.sample_name(chacon, 8), cps_long)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s1 = bk.normalized_stats([short], scaling, burn_in=16)
        s2 = bk.normalized_stats([long], scaling, burn_in=16)
    assert s2.alpha_hat >= s1.alpha_hat
    assert s2.beta_hat >= s1.beta_hat
    assert s2.beta_lower_hat <= s1.beta_lower_hat


def test_sanity_flag_raised_for_synthetic_violation():
    # symmetric ratio pinned high while the one-sided one stays low
    series = bk.BirkhoffSeries((10, 20), (16, 31), (6, 11), (21, 41), source="synthetic")
    scaling = ScalingSequence(lambda n: n, "identity")
    with pytest.warns(UserWarning):
        stats = bk.normalized_stats([series], scaling, burn_in=10)
    assert stats.flags


def test_normalized_stats_validation(chacon):
    scaling = rk.rank_one_scaling(chacon)
    with pytest.raises(ValueError):
        bk.normalized_stats([], scaling, burn_in=16)
    series = bk.series_from_name(rk.sample_name(chacon, 1), (4, 8))
    with pytest.raises(ValueError):
        bk.normalized_stats([series], scaling, burn_in=100)


def test_series_rows_columns(chacon):
    scaling = rk.rank_one_scaling(chacon)
    series = bk.series_from_name(rk.sample_name(chacon, 1), (1, 13))
    rows = bk.series_rows(series, scaling)
    assert len(rows) == 2
    n, sp, sm, sg, a_n, ratio_sym, ratio_plus = rows[1]
    assert (n, a_n) == (13, 27)
    assert ratio_sym == sg / 54
    assert ratio_plus == sp / 27
