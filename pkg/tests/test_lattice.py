"""Translation orbit counting and random-walk skew-product counting."""

import math
import warnings

import numpy as np
import pytest

from ergosum import lattice as lt
from ergosum import renewal as rn
from ergosum.errors import ConfigError, CoverageError, PrecisionWarning
from ergosum.streams import spawn

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def _action(alpha, beta=1.0, x=0.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        return lt.TranslationAction(alpha=alpha, beta=beta, x=x)


# -- translation action ---------------------------------------------------------


def test_action_normalization_and_ratio():
    act = _action(3.0, beta=-2.0, x=0.5)
    assert act.alpha_normalized == 1.5
    assert act.x_normalized == 0.25
    assert act.asymmetry_ratio == pytest.approx(2 / 3)
    assert 0.0 < lt.TranslationAction(PHI).asymmetry_ratio <= 1.0


def test_rational_ratio_detection():
    with pytest.warns(PrecisionWarning):
        lt.TranslationAction(alpha=1.5, beta=1.0)
    with pytest.raises(ConfigError):
        lt.TranslationAction(alpha=1.5, beta=1.0, strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lt.TranslationAction(alpha=PHI)
        lt.TranslationAction(alpha=math.sqrt(2.0), beta=2.0)


def test_translate_examples():
    act = _action(1.5, x=0.0)
    assert lt.translate_counts(act, 1) == (2, 2 / 3)
    assert lt.translate_counts(act, 0).count == 1
    assert lt.translate_counts(_action(PHI, x=0.3), 0).count == 1


def test_translate_brute_force_agreement():
    rng = np.random.default_rng(20)
    for _ in range(20):
        alpha = rng.uniform(-3, 3)
        x = rng.uniform(0, 1)
        n_box = int(rng.integers(1, 201))
        act = _action(alpha, x=x)
        fast = lt.translate_counts(act, n_box).count
        ks = np.arange(-n_box, n_box + 1, dtype=np.float64)
        vals = (x + ks[:, None] * alpha) + ks[None, :] * 1.0
        assert fast == int(np.count_nonzero((vals >= 0.0) & (vals < 1.0)))


def test_translate_per_k_at_most_one():
    # beta = 1, |alpha| > 1: at most one admissible l per k
    for alpha, x in ((PHI, 0.3), (math.sqrt(2), 0.0), (-2.2, 0.7)):
        act = _action(alpha, x=x)
        for n_box in (0, 1, 10, 500):
            assert lt.translate_counts(act, n_box).count <= 2 * n_box + 1


def test_translate_golden_density():
    act = _action(PHI, x=0.3)
    res = lt.translate_counts(act, 10 ** 5)
    assert abs(res.ratio - 1 / PHI) <= 0.01


def test_translate_exact_path_agrees():
    rng = np.random.default_rng(8)
    for _ in range(10):
        act = _action(rng.uniform(-3, 3), beta=float(rng.choice([-1.0, 1.0])),
                      x=rng.uniform(0, 1))
        n_box = int(rng.integers(1, 120))
        fast = lt.translate_counts(act, n_box, method="float").count
        exact = lt.translate_counts(act, n_box, method="exact").count
        assert fast == exact


def test_translate_precision_switch_warns(monkeypatch):
    monkeypatch.setattr(lt, "FLOAT_PRECISION_LIMIT", 10.0)
    act = _action(PHI, x=0.3)
    with pytest.warns(PrecisionWarning):
        res = lt.translate_counts(act, 50)
    assert res.count == lt.translate_counts(act, 50, method="exact").count


def test_translate_validation():
    with pytest.raises(ConfigError):
        lt.TranslationAction(alpha=0.0)
    act = _action(PHI)
    with pytest.raises(ValueError):
        lt.translate_counts(act, -1)
    with pytest.raises(ValueError):
        lt.translate_counts(act, 5, method="mystery")


# -- walk samples -----------------------------------------------------------------


def test_walk_sample_delta_identity():
    d1 = rn.FiniteSupport.delta(1)
    walk = lt.walk_sample(d1, 0, J=5)
    assert [walk.s(k) for k in range(-5, 6)] == list(range(-5, 6))


def test_walk_sample_three_case_definition():
    g = rn.Geometric(0.5)
    walk = lt.walk_sample(g, 4, J=50)
    assert walk.s(0) == 0
    for k in range(1, 51):
        assert walk.s(k) == sum(walk.omega(j) for j in range(k))
    for k in range(1, 51):
        assert walk.s(-k) == -sum(walk.omega(-j) for j in range(1, k + 1))


def test_walk_shift_relation():
    # s_{-k}(omega) = -s_k(shift^{-k} omega), shift moving index j to j - k
    g = rn.Geometric(0.5)
    walk = lt.walk_sample(g, 9, J=40)
    for k in range(1, 41):
        shifted = sum(walk.omega(j - k) for j in range(k))
        assert walk.s(-k) == -shifted


def test_walk_monotone_and_lln():
    g = rn.Geometric(0.5)
    walk = lt.walk_sample(g, 11, J=10 ** 6)
    assert np.all(np.diff(walk.s_forward) >= 1)
    assert np.all(np.diff(walk.s_backward_mag) >= 1)
    assert abs(walk.reach_forward / 10 ** 6 - 2.0) <= 0.1


def test_walk_sample_validation():
    with pytest.raises(ValueError):
        lt.walk_sample(rn.Geometric(0.5), 0, J=0)
    walk = lt.walk_sample(rn.Geometric(0.5), 0, J=10)
    with pytest.raises(IndexError):
        walk.omega(10)
    with pytest.raises(IndexError):
        walk.s(11)


# -- walk counts --------------------------------------------------------------------


def test_walk_counts_delta_exact():
    d1 = rn.FiniteSupport.delta(1)
    walk = lt.walk_sample(d1, 0, J=5)
    res = lt.walk_counts(walk, 5)
    assert res.count == 11
    assert res.a_u_value == 5.0
    assert res.ratio_to_renewal == pytest.approx(2.2)


def test_walk_counts_monotone_in_horizon():
    g = rn.Geometric(0.5)
    walk = lt.walk_sample(g, 2, J=4000)
    seq = rn.renewal_sequence(g, 2000)
    counts = [lt.walk_counts(walk, n, renewal=seq).count
              for n in (10, 50, 100, 500, 2000)]
    assert counts == sorted(counts)


def test_walk_counts_equal_direct_scan():
    # interarrival counting equals the direct box scan, exactly
    g = rn.Geometric(0.5)
    seq = rn.renewal_sequence(g, 300)
    for seed in range(8):
        walk = lt.walk_sample(g, spawn(13, seed), J=300)
        res = lt.walk_counts(walk, 300, renewal=seq)
        s_vals = np.array([walk.s(k) for k in range(-300, 301)])
        assert res.count == int(np.count_nonzero(np.abs(s_vals) <= 300))


def test_walk_counts_coverage_error():
    g = rn.Geometric(0.9)
    walk = lt.walk_sample(g, 0, J=10)
    with pytest.raises(CoverageError) as err:
        lt.walk_counts(walk, 10 ** 4)
    assert "J >= 10000" in str(err.value)


def test_walk_counts_mean_density():
    g = rn.Geometric(0.5)
    n = 10 ** 5
    seq = rn.renewal_sequence(g, n)
    counts, ratios = [], []
    for seed in range(12):
        walk = lt.walk_sample(g, spawn(2, seed), J=n)
        res = lt.walk_counts(walk, n, renewal=seq)
        counts.append(res.count)
        ratios.append(res.ratio_to_renewal)
    assert abs(np.mean(counts) / (2 * n + 1) - 0.5) <= 0.025
    assert 1.8 <= np.mean(ratios) <= 2.2
