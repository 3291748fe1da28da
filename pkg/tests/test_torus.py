import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from unicover.errors import DegenerateMeasureError, InvalidExponentError, InvalidRadiusError
from unicover.torus import Arc, ArcSet, ball, dist, riesz_energy, riesz_potential

GRID = (np.arange(20_000) + 0.5) / 20_000


def grid_mask(intervals):
    """Membership of GRID points in a union of (start, length) arcs, by brute force."""
    out = np.zeros(GRID.size, dtype=bool)
    for a, ln in intervals:
        out |= np.mod(GRID - a, 1.0) <= ln
    return out


arcs_strategy = st.lists(
    st.tuples(st.floats(0.0, 1.0, exclude_max=True), st.floats(1e-3, 0.6)), min_size=0, max_size=6
)


def make(intervals):
    return ArcSet.from_arcs(Arc(a, ln) for a, ln in intervals)


def near_boundary(intervals, tol=1e-9):
    ends = [a for a, _ in intervals] + [(a + ln) % 1.0 for a, ln in intervals]
    if not ends:
        return np.zeros(GRID.size, dtype=bool)
    return np.min(dist(GRID[:, None], np.array(ends)[None, :]), axis=1) < tol


@settings(max_examples=150, deadline=None)
@given(arcs_strategy, arcs_strategy)
def test_set_algebra_matches_grid_oracle(xa, xb):
    a, b = make(xa), make(xb)
    ma, mb = grid_mask(xa), grid_mask(xb)
    skip = near_boundary(xa + xb)
    keep = ~skip
    assert np.array_equal(a.contains(GRID)[keep], ma[keep])
    assert np.array_equal((a | b).contains(GRID)[keep], (ma | mb)[keep])
    assert np.array_equal((a & b).contains(GRID)[keep], (ma & mb)[keep])
    assert np.array_equal((~a).contains(GRID)[keep], (~ma)[keep])
    assert np.array_equal((a - b).contains(GRID)[keep], (ma & ~mb)[keep])


@settings(max_examples=150, deadline=None)
@given(arcs_strategy, arcs_strategy)
def test_measure_identities(xa, xb):
    a, b = make(xa), make(xb)
    assert (a | b).measure() + (a & b).measure() == pytest.approx(a.measure() + b.measure(), abs=1e-12)
    assert (~a).measure() == pytest.approx(1.0 - a.measure(), abs=1e-12)
    assert (a & b).issubset(a) and a.issubset(a | b)
    # grid oracle for the measure itself
    assert a.measure() == pytest.approx(grid_mask(xa).mean(), abs=2 * len(xa) / GRID.size + 1e-12)


@settings(max_examples=100, deadline=None)
@given(arcs_strategy, st.floats(0.0, 0.2))
def test_thicken_matches_distance_oracle(xa, r):
    a = make(xa)
    t = a.thicken(r)
    if a.is_empty:
        assert t.is_empty
        return
    lo, ln = a.pieces
    # distance from each grid point to the closed set a
    inside = a.contains(GRID)
    d_end = np.min(dist(GRID[:, None], np.concatenate([lo, lo + ln])[None, :]), axis=1)
    d = np.where(inside, 0.0, d_end)
    keep = np.abs(d - r) > 1e-9
    assert np.array_equal(t.contains(GRID)[keep], (d <= r)[keep])


def test_ball_wraps_and_has_exact_length():
    b = ball(0.95, 0.1)
    assert b.measure() == pytest.approx(0.2, abs=1e-15)
    assert len(b) == 1 and b.pieces[0].size == 2
    assert b.contains(0.0) and b.contains(0.04) and not b.contains(0.06)
    assert b.arcs[0].start == pytest.approx(0.85)


def test_constructors_and_errors():
    assert ArcSet.full().is_full and ArcSet.full().measure() == 1.0
    assert ArcSet.empty().is_empty and ArcSet.empty().measure() == 0.0
    assert ArcSet.balls([0.3], 0.6).is_full
    with pytest.raises(InvalidRadiusError):
        ArcSet.balls([0.3], 0.0)
    with pytest.raises(ValueError):
        Arc(0.1, -0.2)
    assert ArcSet.from_intervals([(0.9, 1.1)]).isclose(ArcSet.from_intervals([(0.9, 1.0), (0.0, 0.1)]))


def test_thicken_wrap_example():
    a = ArcSet.from_intervals([(0.98, 1.0), (0.0, 0.26)])
    t = a.thicken(0.01)
    assert len(t.arcs) == 1
    assert t.arcs[0].start == pytest.approx(0.97)
    assert t.arcs[0].length == pytest.approx(0.30)


def box_count_oracle(a: ArcSet, k: int) -> int:
    cells = set()
    lo, ln = a.pieces
    for x, l in zip(lo, ln):
        i0 = int(math.floor(x * k))
        i1 = min(int(math.floor((x + l) * k)), k - 1)
        cells.update(range(i0, i1 + 1))
        if x + l >= 1.0:
            cells.add(0)
    return len(cells)


@settings(max_examples=100, deadline=None)
@given(arcs_strategy, st.integers(1, 300))
def test_box_count_matches_oracle(xa, k):
    a = make(xa)
    assert a.box_count(k) == (k if a.is_full else box_count_oracle(a, k))


def test_box_count_examples():
    assert ArcSet.full().box_count(10) == 10
    assert ArcSet.empty().box_count(10) == 0
    assert ball(0.55, 1e-4).box_count(10) == 1


def energy_quadrature(intervals, s):
    """int_{A x A} dist^-s as int t^-s (g(t) + g(-t)) dt over [0, 1/2], g the self-overlap of A."""

    def overlap(t):
        tot = 0.0
        for a1, b1 in intervals:
            for a2, b2 in intervals:
                for shift in (-1.0, 0.0, 1.0):
                    tot += max(0.0, min(b1, b2 + t + shift) - max(a1, a2 + t + shift))
        return tot

    val, _ = integrate.quad(
        lambda t: overlap(t) + overlap(-t), 0.0, 0.5, weight="alg", wvar=(-s, 0.0), epsabs=0.0, epsrel=1e-12,
        limit=500,
    )
    return val


@pytest.mark.parametrize(
    "intervals,s",
    [
        ([(0.1, 0.3)], 0.3),
        ([(0.0, 0.7)], 0.5),
        ([(0.05, 0.2), (0.6, 0.95)], 0.4),
        ([(0.0, 0.1), (0.85, 1.0)], 0.7),
    ],
)
def test_riesz_energy_matches_quadrature(intervals, s):
    a = ArcSet.from_intervals(intervals)
    assert riesz_energy(a, s) == pytest.approx(energy_quadrature(intervals, s), rel=1e-7)


@pytest.mark.parametrize("s", [0.05, 0.2, 0.5, 0.8, 0.95])
def test_riesz_energy_full_circle(s):
    assert abs(riesz_energy(ArcSet.full(), s) - 2.0**s / (1.0 - s)) <= 1e-10


def test_riesz_energy_single_arc_closed_form():
    # int_0^L int_0^L |x - y|^-s for L <= 1/2 equals 2 L^(2-s) / ((1-s)(2-s))
    s, L = 0.3, 0.25
    assert riesz_energy(ArcSet.from_intervals([(0.4, 0.4 + L)]), s) == pytest.approx(
        2 * L ** (2 - s) / ((1 - s) * (2 - s)), rel=1e-12
    )
    assert riesz_energy(ArcSet.empty(), s) == 0.0


def test_riesz_potential_matches_quadrature():
    a = ArcSet.from_intervals([(0.1, 0.3), (0.7, 0.75)])
    s = 0.4
    for x in (0.0, 0.2, 0.5, 0.72, 0.99):
        val = 0.0
        for lo, hi in [(0.1, 0.3), (0.7, 0.75)]:
            pts = [p for p in (x, x + 0.5, x - 0.5) if lo < p < hi]
            v, _ = integrate.quad(lambda y: dist(x, y) ** -s, lo, hi, points=pts or None, limit=200)
            val += v
        assert riesz_potential(a, s, x) == pytest.approx(val / a.measure(), rel=1e-8)


def test_riesz_potential_full_and_symmetry():
    s = 0.5
    assert np.allclose(riesz_potential(ArcSet.full(), s, np.linspace(0, 1, 7)), 2.0**s / (1 - s))
    a = ArcSet.from_intervals([(0.4, 0.6)])
    assert riesz_potential(a, s, 0.45) == pytest.approx(riesz_potential(a, s, 0.55), rel=1e-14)


def test_riesz_errors():
    with pytest.raises(InvalidExponentError):
        riesz_energy(ArcSet.full(), 1.0)
    with pytest.raises(InvalidExponentError):
        riesz_energy(ArcSet.full(), 0.0)
    with pytest.raises(DegenerateMeasureError):
        riesz_potential(ArcSet.empty(), 0.5, 0.1)


def test_riesz_monte_carlo_z_scores_are_standard_normal():
    # importance-sampling oracle: I = m J P(X + D in A); z-scores against the
    # closed form should look like N(0, 1) draws
    rng = np.random.default_rng(11)
    zs = []
    for _ in range(60):
        s = rng.choice([0.2, 0.4, 0.6])
        k = int(rng.integers(1, 6))
        a = ArcSet.from_intervals((x, x + ln) for x, ln in zip(rng.random(k), rng.uniform(0.01, 0.3, k)))
        lo, ln = a.pieces
        m, J, n = ln.sum(), 2.0**s / (1.0 - s), 200_000
        idx = rng.choice(lo.size, size=n, p=ln / m)
        x = lo[idx] + ln[idx] * rng.random(n)
        d = 0.5 * rng.random(n) ** (1.0 / (1.0 - s)) * rng.choice([-1.0, 1.0], size=n)
        p = a.contains(x + d).mean()
        se = m * J * math.sqrt(p * (1 - p) / n)
        zs.append((riesz_energy(a, s) - m * J * p) / se)
    assert stats.kstest(zs, "norm").pvalue > 1e-3
