import math

import numpy as np
import pytest

from unicover import simulator
from unicover.bounds import GeometricSchedule
from unicover.errors import InsufficientSampleError, UnicoverError
from unicover.radius import Constant, LogOverN, PowerLaw
from unicover.torus import ArcSet
from unicover.simulator import (
    DEFAULT_SEED,
    build_E,
    build_F,
    mu_lm_support,
    sample_path,
    uniform_set_approx,
    uniform_set_reference,
    uniform_set_trajectory,
)


def test_sample_path_prefix_and_determinism():
    a = sample_path(DEFAULT_SEED, 3, 1000)
    b = sample_path(DEFAULT_SEED, 3, 100)
    assert np.array_equal(a.points[:100], b.points)
    assert np.array_equal(a.points, sample_path(DEFAULT_SEED, 3, 1000).points)
    assert not np.array_equal(a.points[:100], sample_path(DEFAULT_SEED, 4, 100).points)
    assert not np.array_equal(a.points[:100], sample_path(DEFAULT_SEED + 1, 3, 100).points)
    assert a.points.min() >= 0.0 and a.points.max() < 1.0
    with pytest.raises(InsufficientSampleError):
        build_E(b, 101, LogOverN(1.0))


def test_run_trials_independent_of_threads():
    fn = lambda t: sample_path(DEFAULT_SEED, t, 50).points.sum()  # noqa: E731
    assert simulator.run_trials(fn, 17, 1) == simulator.run_trials(fn, 17, 4)


@pytest.mark.parametrize(
    "f,p,N",
    [(LogOverN(1.0), 5, 400), (LogOverN(0.5), 10, 300), (PowerLaw(1.0, 3.0), 8, 300), (PowerLaw(0.3, 1.0), 4, 200)],
)
def test_kernel_matches_reference(f, p, N):
    for t in range(5):
        path = sample_path(DEFAULT_SEED, t, N)
        fast = uniform_set_approx(path, p, N, f)
        slow = uniform_set_reference(path, p, N, f)
        assert fast.isclose(slow, tol=1e-12)


def test_trajectory_nested_and_holds_head_points():
    f = PowerLaw(1.0, 3.0)
    path = sample_path(DEFAULT_SEED, 0, 2000)
    cps = [10, 20, 100, 500, 2000]
    sets = uniform_set_trajectory(path, 10, cps, f)
    for a, b in zip(sets, sets[1:]):
        assert b.issubset(a)
        assert b.measure() <= a.measure() + 1e-15
    for u in sets:
        assert np.all(u.contains(path.points[:10]))
    with pytest.raises(UnicoverError):
        uniform_set_trajectory(path, 10, [5], f)


def test_constant_large_radius_always_covers():
    res = simulator.coverage_experiment(Constant(0.6), [1, 5, 20], 30)
    assert all(row[2] == 0 for row in res.rows)
    assert all(row[8] == 0.0 and row[9] == 0.0 for row in res.rows)


def test_F_miss_probability():
    sched, f = GeometricSchedule(2.0), PowerLaw(1.0, 1.0)
    j, x, trials = 3, 0.3141, 5000
    miss = np.array([
        not build_F(sample_path(DEFAULT_SEED, t, sched.n(j)), sched, j, f).contains(x) for t in range(trials)
    ], dtype=float)
    expected = (1 - 2 / sched.n(j + 1)) ** (sched.n(j) - sched.n(j - 1))
    se = math.sqrt(expected * (1 - expected) / trials)
    assert abs(miss.mean() - expected) <= 4 * se


def test_mu_support_nested_in_blocks():
    sched, f = GeometricSchedule(2.0), PowerLaw(1.0, 1.0)
    path = sample_path(DEFAULT_SEED, 1, sched.n(7))
    prev = mu_lm_support(path, sched, 2, 2, f)
    assert prev.isclose(build_F(path, sched, 2, f))
    for m in range(3, 8):
        cur = mu_lm_support(path, sched, 2, m, f)
        assert cur.issubset(prev) and cur.issubset(build_F(path, sched, m, f))
        prev = cur
    with pytest.raises(UnicoverError):
        mu_lm_support(path, sched, 3, 2, f)
    with pytest.raises(InsufficientSampleError):
        mu_lm_support(path, sched, 2, 8, f)


def test_measure_experiment_expectation():
    f = LogOverN(0.5)
    res = simulator.measure_experiment(f, 50, [50, 200], 400)
    path = sample_path(DEFAULT_SEED, 0, 200)
    ms = np.array([build_E(sample_path(DEFAULT_SEED, t, 200), 200, f).measure() for t in range(400)])
    r = 0.5 * math.log(200) / 200
    expected = 1 - (1 - 2 * r) ** 200
    assert abs(ms.mean() - expected) <= 4 * ms.std(ddof=1) / math.sqrt(400)
    assert res.rows[1][5] == pytest.approx(expected, rel=1e-12)
    assert res.rows[1][2] <= res.rows[0][2]
    assert path.N == 200


def test_coverage_rows_and_shepp_arc_bracket():
    f = LogOverN(1.5)
    res = simulator.coverage_experiment(f, [200, 1000], 300, threads=2)
    assert res.header == simulator.COVERAGE_HEADER
    for n, trials, missed, freq, wlo, whi, _, _, alo, ahi in res.rows:
        assert trials == 300 and freq == missed / 300
        assert wlo <= freq <= whi
        # true-arc-length Shepp bounds bracket the frequency up to sampling error
        assert wlo <= ahi and alo <= whi


def test_countability_rows():
    f = PowerLaw(1.0, 3.0)
    res = simulator.countability_experiment(f, 5, [50, 1000], 40)
    assert res.rows[-1][6] == 1.0
    assert all(tr.records[-1].holds_points for tr in res.trials)
    # a later w_k that lands in E_5 & ... & E_{k-1} survives too, so every
    # component holds at least one sample point but there may be more than p
    for t in range(10):
        path = sample_path(DEFAULT_SEED, t, 1000)
        u = uniform_set_approx(path, 5, 1000, f)
        for arc in u.arcs:
            assert np.any(ArcSet.from_arcs([arc]).contains(path.points))


def test_wilson_interval():
    lo, hi = simulator.wilson_interval(0, 200)
    assert lo == 0.0 and 0.0 < hi < 0.03
    lo, hi = simulator.wilson_interval(100, 200)
    assert lo < 0.5 < hi


def test_correlation_check():
    rep = simulator.lemma_correlation_check(0.05, 200_000, 0.1, 0.16)
    assert rep.joint_hit_expected == pytest.approx(0.04)
    assert rep.joint_hit_ok and rep.joint_miss_ok
    far = simulator.lemma_correlation_check(0.05, 200_000, 0.1, 0.6)
    assert far.joint_hit_expected == 0.0 and far.joint_hit_mean == 0.0 and far.joint_miss_ok
    with pytest.raises(UnicoverError):
        simulator.lemma_correlation_check(0.3, 10, 0.1, 0.2)
