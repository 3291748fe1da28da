"""Seeded Monte Carlo for the random covering sets.

Randomness is counter based: trial ``t`` of master seed ``s`` draws its
points from numpy's Philox4x64-10 keyed with ``s * 2**64 + t`` (counter 0),
read as doubles via ``Generator.random``.  A path of length N is therefore
a prefix of every longer path with the same key, trials are independent
streams, and results do not depend on how trials are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.stats import binomtest

from . import bounds
from ._sweep import running_intersection
from .bounds import GeometricSchedule
from .errors import InsufficientSampleError, UnicoverError
from .radius import RadiusFamily
from .radius import r as radius_at
from .torus import GAP_TOL, ArcSet, dist

DEFAULT_SEED = 0x5EED_C0DE
MASK64 = (1 << 64) - 1

T = TypeVar("T")


@dataclass(frozen=True)
class SamplePath:
    seed: int
    trial_id: int
    points: np.ndarray

    @property
    def N(self) -> int:
        return self.points.size

    def require(self, n: int) -> None:
        if n > self.N:
            raise InsufficientSampleError(f"need {n} points, path holds {self.N}")


def trial_generator(master_seed: int, trial_id: int) -> np.random.Generator:
    key = ((master_seed & MASK64) << 64) | (trial_id & MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_path(master_seed: int, trial_id: int, N: int) -> SamplePath:
    if N < 1:
        raise UnicoverError(f"N must be >= 1, got {N}")
    pts = trial_generator(master_seed, trial_id).random(N)
    pts.flags.writeable = False
    return SamplePath(master_seed, trial_id, pts)


def run_trials(fn: Callable[[int], T], trials: int, threads: int = 1) -> list[T]:
    """``[fn(0), ..., fn(trials - 1)]``, optionally on a thread pool."""
    if threads <= 1 or trials <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


# -- covering sets -------------------------------------------------------------


def build_E(path: SamplePath, n: int, f: RadiusFamily) -> ArcSet:
    """E_n: union of the first n balls at radius r_n."""
    path.require(n)
    return ArcSet.balls(path.points[:n], radius_at(f, n))


def _sorted_view(path: SamplePath):
    order = np.argsort(path.points, kind="stable")
    return path.points[order], order.astype(np.int64)


def uniform_set_trajectory(path: SamplePath, p: int, checkpoints: Sequence[int], f: RadiusFamily) -> list[ArcSet]:
    """E_p & E_{p+1} & ... & E_N for each N in ``checkpoints``."""
    cps = np.asarray(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    if cps.size == 0:
        return []
    if cps[0] < p:
        raise UnicoverError(f"checkpoints must be >= p = {p}")
    last = int(cps[-1])
    path.require(last)
    start = build_E(path, p, f)
    radii = np.zeros(last + 1)
    radii[p:] = radius_at(f, np.arange(p, last + 1))
    pts, idx = _sorted_view(path)
    lo0, ln0 = start.pieces
    flat_lo, flat_ln, off = running_intersection(
        np.ascontiguousarray(lo0), np.ascontiguousarray(ln0), pts, idx, radii, p, cps, GAP_TOL
    )
    sets = [ArcSet(flat_lo[off[k] : off[k + 1]], flat_ln[off[k] : off[k + 1]]) for k in range(cps.size)]
    by_n = dict(zip(cps.tolist(), sets))
    return [by_n[int(c)] for c in checkpoints]


def uniform_set_approx(path: SamplePath, p: int, N: int, f: RadiusFamily) -> ArcSet:
    """Finite approximation E_p & ... & E_N of the uniform covering set."""
    if N < p:
        raise UnicoverError(f"need p <= N, got p={p}, N={N}")
    return uniform_set_trajectory(path, p, [N], f)[0]


def uniform_set_reference(path: SamplePath, p: int, N: int, f: RadiusFamily) -> ArcSet:
    """Same set as :func:`uniform_set_approx` by direct ArcSet intersections; slow."""
    out = build_E(path, p, f)
    for n in range(p + 1, N + 1):
        if out.is_empty:
            break
        out = out & build_E(path, n, f)
    return out


def build_F(path: SamplePath, sched: GeometricSchedule, j: int, f: RadiusFamily) -> ArcSet:
    """F_j: balls with indices in (n_{j-1}, n_j] at radius r_{n_{j+1}}."""
    if j < 1:
        raise UnicoverError(f"block index must be >= 1, got {j}")
    a, b = sched.n(j - 1), sched.n(j)
    path.require(b)
    return ArcSet.balls(path.points[a:b], radius_at(f, sched.n(j + 1)))


def mu_lm_support(path: SamplePath, sched: GeometricSchedule, l: int, m: int, f: RadiusFamily) -> ArcSet:
    """F_l & ... & F_m, the support of mu_{l,m}."""
    if l > m:
        raise UnicoverError(f"need l <= m, got l={l}, m={m}")
    path.require(sched.n(m))
    out = build_F(path, sched, l, f)
    for j in range(l + 1, m + 1):
        if out.is_empty:
            break
        out = out & build_F(path, sched, j, f)
    return out


# -- experiments ---------------------------------------------------------------


@dataclass
class CheckpointRecord:
    n: int
    covered: bool
    measure: float
    arc_count: int
    holds_points: bool | None = None


@dataclass
class TrialResult:
    trial_id: int
    records: list[CheckpointRecord] = field(default_factory=list)


@dataclass
class ExperimentResult:
    name: str
    header: tuple[str, ...]
    rows: list[tuple]
    trials: list[TrialResult]


def wilson_interval(k: int, n: int) -> tuple[float, float]:
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def _shepp_pair(n: int, ell: float) -> tuple[float, float]:
    """Shepp bounds for n arcs of length ``ell``; nan where they do not apply."""
    if ell >= 1.0:
        return 0.0, 0.0
    if ell >= 0.5:
        return math.nan, math.nan
    return bounds.shepp_lower(n, ell), bounds.shepp_upper(n, ell)


COVERAGE_HEADER = (
    "n",
    "trials",
    "not_covered",
    "empirical_not_covered",
    "wilson_low",
    "wilson_high",
    "shepp_lower",
    "shepp_upper",
    "shepp_lower_arc",
    "shepp_upper_arc",
)


def coverage_experiment(
    f: RadiusFamily,
    n_checkpoints: Sequence[int],
    trials: int,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> ExperimentResult:
    """Frequency of {T not covered by E_n} at each checkpoint n.

    ``shepp_lower``/``shepp_upper`` evaluate the Shepp bounds with r_n in
    the place of the arc length; ``*_arc`` use the true arc length 2 r_n of
    B(w, r_n) and are the ones that bracket the simulated frequency.
    """
    cps = [int(n) for n in n_checkpoints]
    if trials < 1:
        raise UnicoverError("trials must be >= 1")
    for n in cps:
        radius_at(f, n)
    N = max(cps)

    def one(t: int) -> TrialResult:
        path = sample_path(master_seed, t, N)
        res = TrialResult(t)
        for n in cps:
            e = build_E(path, n, f)
            res.records.append(CheckpointRecord(n, e.is_full, e.measure(), len(e)))
        return res

    results = run_trials(one, trials, threads)
    rows = []
    for k, n in enumerate(cps):
        missed = sum(1 for tr in results if not tr.records[k].covered)
        lo, hi = wilson_interval(missed, trials)
        rad = radius_at(f, n)
        s_lo, s_hi = _shepp_pair(n, rad)
        a_lo, a_hi = _shepp_pair(n, 2.0 * rad)
        rows.append((n, trials, missed, missed / trials, lo, hi, s_lo, s_hi, a_lo, a_hi))
    return ExperimentResult("coverage", COVERAGE_HEADER, rows, results)


MEASURE_HEADER = ("N", "trials", "mean_measure", "stderr_measure", "mean_arcs", "mean_measure_E_N")


def measure_experiment(
    f: RadiusFamily,
    p: int,
    N_checkpoints: Sequence[int],
    trials: int,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> ExperimentResult:
    """Trajectory of the Lebesgue measure of E_p & ... & E_N."""
    cps = sorted(int(n) for n in N_checkpoints)
    N = max(cps)

    def one(t: int) -> TrialResult:
        path = sample_path(master_seed, t, N)
        sets = uniform_set_trajectory(path, p, cps, f)
        res = TrialResult(t)
        for n, u in zip(cps, sets):
            res.records.append(CheckpointRecord(n, u.is_full, u.measure(), len(u)))
        return res

    results = run_trials(one, trials, threads)
    rows = []
    for k, n in enumerate(cps):
        ms = np.array([tr.records[k].measure for tr in results])
        arcs = np.array([tr.records[k].arc_count for tr in results])
        se = float(ms.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        rad = radius_at(f, n)
        expected = 1.0 if 2 * rad >= 1 else -math.expm1(n * math.log1p(-2 * rad))
        rows.append((n, trials, float(ms.mean()), se, float(arcs.mean()), expected))
    return ExperimentResult("measure", MEASURE_HEADER, rows, results)


COUNTABLE_HEADER = (
    "N",
    "trials",
    "mean_measure",
    "mean_arcs",
    "frac_stabilized",
    "mean_ratio",
    "frac_holds_points",
)


def countability_experiment(
    f: RadiusFamily,
    p: int,
    N_checkpoints: Sequence[int],
    trials: int,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> ExperimentResult:
    """How E_p & ... & E_N collapses onto the first p sample points.

    ``mean_ratio`` is measure / (2 p r_N); a trial is stabilised when the set
    is exactly p arcs holding omega_1..omega_p.
    """
    cps = sorted(int(n) for n in N_checkpoints)
    N = max(cps)

    def one(t: int) -> TrialResult:
        path = sample_path(master_seed, t, N)
        sets = uniform_set_trajectory(path, p, cps, f)
        head = path.points[:p]
        res = TrialResult(t)
        for n, u in zip(cps, sets):
            holds = bool(np.all(u.contains(head)))
            res.records.append(CheckpointRecord(n, u.is_full, u.measure(), len(u), holds))
        return res

    results = run_trials(one, trials, threads)
    rows = []
    for k, n in enumerate(cps):
        recs = [tr.records[k] for tr in results]
        scale = 2.0 * p * radius_at(f, n)
        stab = sum(1 for r in recs if r.arc_count == p and r.holds_points)
        rows.append(
            (
                n,
                trials,
                float(np.mean([r.measure for r in recs])),
                float(np.mean([r.arc_count for r in recs])),
                stab / trials,
                float(np.mean([r.measure / scale for r in recs])),
                sum(1 for r in recs if r.holds_points) / trials,
            )
        )
    return ExperimentResult("countable", COUNTABLE_HEADER, rows, results)


@dataclass
class CorrelationReport:
    r: float
    x: float
    y: float
    distance: float
    trials: int
    joint_hit_mean: float
    joint_hit_stderr: float
    joint_hit_expected: float
    joint_miss_mean: float
    joint_miss_stderr: float
    joint_miss_bound: float

    @property
    def joint_hit_ok(self) -> bool:
        return abs(self.joint_hit_mean - self.joint_hit_expected) <= 4.0 * self.joint_hit_stderr + 1e-15

    @property
    def joint_miss_ok(self) -> bool:
        return self.joint_miss_mean <= self.joint_miss_bound + 4.0 * self.joint_miss_stderr + 1e-15


def lemma_correlation_check(
    r: float, trials: int, x: float, y: float, master_seed: int = DEFAULT_SEED
) -> CorrelationReport:
    """Joint hit/miss frequencies of two points by one uniformly placed ball."""
    if not 0.0 < r < 0.25:
        raise UnicoverError(f"need 0 < r < 1/4, got {r!r}")
    centers = trial_generator(master_seed, 0).random(trials)
    hx = dist(centers, x) <= r
    hy = dist(centers, y) <= r
    both = (hx & hy).astype(float)
    neither = (~hx & ~hy).astype(float)
    d = dist(x, y)

    def se(v):
        return float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0

    return CorrelationReport(
        r=r,
        x=x,
        y=y,
        distance=d,
        trials=trials,
        joint_hit_mean=float(both.mean()),
        joint_hit_stderr=se(both),
        joint_hit_expected=max(0.0, 2.0 * r - d),
        joint_miss_mean=float(neither.mean()),
        joint_miss_stderr=se(neither),
        joint_miss_bound=1.0 - 4.0 * r + (2.0 * r if d < 2.0 * r else 0.0),
    )
