"""Dimension estimators: greedy cover growth, box counting, Riesz energy, Frostman check.

The two cover constructions follow the level-by-level greedy covers of the
set G_{l,i} = E'_{n_l} & ... & E'_{n_i}, where E'_{n_j} is the union of the
first n_j balls at radius r_{n_j} and r_n = c/n.  Both build exact ArcSets
so that the cover of G_{l,i} can be checked at every level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import bounds
from .bounds import GeometricSchedule
from .errors import DegenerateMeasureError, InvalidConfigurationError, UnicoverError
from .radius import PowerLaw, RadiusFamily
from .radius import r as radius_at
from .simulator import DEFAULT_SEED, mu_lm_support, run_trials, sample_path
from .torus import ArcSet, dist

TRACE_HEADER = ("trial", "level", "i", "n_i", "N_i", "Q_i", "M_i", "covered_ok")


@dataclass
class CoverGrowthTrace:
    """Per-level cover counts of one trial.

    ``N`` kept balls, ``Q`` discardable balls (refined variant only, else 0),
    ``M`` newly admitted indices (0 at the base level), ``covered_ok`` the
    exact check G_{l,i} <= cover at that level.
    """

    variant: str
    l: int
    levels: list[int] = field(default_factory=list)
    n: list[int] = field(default_factory=list)
    N: list[int] = field(default_factory=list)
    Q: list[int] = field(default_factory=list)
    M: list[int] = field(default_factory=list)
    covered_ok: list[bool] = field(default_factory=list)

    def _push(self, i, n_i, N_i, Q_i, M_i, ok):
        self.levels.append(i)
        self.n.append(n_i)
        self.N.append(N_i)
        self.Q.append(Q_i)
        self.M.append(M_i)
        self.covered_ok.append(bool(ok))

    @property
    def cover_size(self) -> np.ndarray:
        return np.asarray(self.N) + np.asarray(self.Q)

    def rows(self, trial: int):
        for k, i in enumerate(self.levels):
            yield (trial, k, i, self.n[k], self.N[k], self.Q[k], self.M[k], int(self.covered_ok[k]))


def _cover_radius(c: float, n: int) -> float:
    return c / n


def _check_growth_params(c: float, l: int, i_max: int) -> None:
    if not c > 0:
        raise InvalidConfigurationError(f"c must be positive, got {c!r}")
    if l < 1 or i_max < l:
        raise InvalidConfigurationError(f"need 1 <= l <= i_max, got l={l}, i_max={i_max}")


def _check_growth_args(path, sched: GeometricSchedule, c: float, l: int, i_max: int) -> None:
    _check_growth_params(c, l, i_max)
    path.require(sched.n(i_max))


def _g_step(G: ArcSet | None, pts: np.ndarray, c: float, n: int) -> ArcSet:
    e = ArcSet.balls(pts[:n], _cover_radius(c, n))
    return e if G is None else G & e


def cover_growth_simple(path, sched: GeometricSchedule, c: float, l: int, i_max: int) -> CoverGrowthTrace:
    """Greedy cover by kept balls B(w_k, r_{n_i}), k in I_i.

    A new index n_i < k <= n_{i+1} is kept iff its ball at radius
    r_{n_{i+1}} meets the current cover, i.e. w_k lies in the
    r_{n_{i+1}}-neighbourhood of the cover.
    """
    _check_growth_args(path, sched, c, l, i_max)
    pts = path.points
    tr = CoverGrowthTrace("simple", l)
    n_i = sched.n(l)
    kept = np.arange(n_i)
    G = _g_step(None, pts, c, n_i)
    cover = ArcSet.balls(pts[kept], _cover_radius(c, n_i))
    tr._push(l, n_i, kept.size, 0, 0, G.issubset(cover))
    for i in range(l, i_max):
        n_next = sched.n(i + 1)
        r_next = _cover_radius(c, n_next)
        new = np.arange(n_i, n_next)
        hit = cover.thicken(r_next).contains(pts[new])
        admitted = new[hit]
        kept = np.concatenate([kept, admitted])
        n_i = n_next
        cover = ArcSet.balls(pts[kept], r_next)
        G = _g_step(G, pts, c, n_i)
        tr._push(i + 1, n_i, kept.size, 0, admitted.size, G.issubset(cover))
    return tr


def _nearest_distance(centers_sorted: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Circle distance from each x to the nearest of the sorted centres."""
    if centers_sorted.size == 0:
        return np.full(x.shape, np.inf)
    k = np.searchsorted(centers_sorted, x)
    left = centers_sorted[(k - 1) % centers_sorted.size]
    right = centers_sorted[k % centers_sorted.size]
    return np.minimum(dist(x, left), dist(x, right))


def cover_growth_refined(path, sched: GeometricSchedule, c: float, l: int, i_max: int) -> CoverGrowthTrace:
    """Cover by N_i kept (I_i) plus Q_i discardable (J_i) balls at radius r_{n_i}.

    A new index whose ball at r_{n_{i+1}} meets H_i joins I_{i+1} when it is
    within r_{n_i} + r_{n_{i+2}} of some centre of I_i u J_i, and J_{i+1}
    otherwise (its ball at r_{n_{i+2}} then misses H_i).  Old I_i carries
    over; J_i is dropped.
    """
    _check_growth_args(path, sched, c, l, i_max)
    pts = path.points
    tr = CoverGrowthTrace("refined", l)
    n_i = sched.n(l)
    I = np.arange(n_i)
    J = np.empty(0, dtype=np.int64)
    G = _g_step(None, pts, c, n_i)
    H = ArcSet.balls(pts[I], _cover_radius(c, n_i))
    tr._push(l, n_i, I.size, 0, 0, G.issubset(H))
    for i in range(l, i_max):
        n_next = sched.n(i + 1)
        r_i = _cover_radius(c, n_i)
        r_next = _cover_radius(c, n_next)
        r_after = _cover_radius(c, sched.n(i + 2))
        new = np.arange(n_i, n_next)
        meets = new[H.thicken(r_next).contains(pts[new])]
        centers = np.sort(pts[np.concatenate([I, J])])
        near = _nearest_distance(centers, pts[meets]) <= r_i + r_after
        I = np.concatenate([I, meets[near]])
        J = meets[~near]
        n_i = n_next
        H = ArcSet.balls(pts[np.concatenate([I, J])], r_next)
        G = _g_step(G, pts, c, n_i)
        tr._push(i + 1, n_i, I.size, J.size, meets.size, G.issubset(H))
    return tr


@dataclass
class GrowthSummary:
    variant: str
    c: float
    theta: float
    l: int
    trials: int
    levels: list[int]
    mean_N: np.ndarray
    mean_Q: np.ndarray
    exponent: float
    exponent_bound: float
    ratio_mean: np.ndarray
    ratio_stderr: np.ndarray
    ratio_bound: float
    dominance_excess: np.ndarray
    all_covered: bool

    @property
    def exponent_ok(self) -> bool:
        return self.exponent <= self.exponent_bound + 0.05

    @property
    def ratio_ok(self) -> bool:
        return bool(np.all(self.ratio_mean <= self.ratio_bound + 4.0 * self.ratio_stderr))

    @property
    def dominance_ok(self) -> bool:
        return bool(np.all(self.dominance_excess <= 0.0))

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "c": self.c,
            "theta": self.theta,
            "l": self.l,
            "trials": self.trials,
            "exponent": self.exponent,
            "exponent_bound": self.exponent_bound,
            "exponent_ok": self.exponent_ok,
            "ratio_bound": self.ratio_bound,
            "ratio_ok": self.ratio_ok,
            "dominance_ok": self.dominance_ok,
            "all_covered": self.all_covered,
        }


def growth_exponent(levels, mean_sizes, theta: float) -> float:
    """Least-squares slope of log(mean cover size) against i log(theta)."""
    x = np.asarray(levels, dtype=float) * math.log(theta)
    y = np.log(np.asarray(mean_sizes, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _stderr(v: np.ndarray, axis=0) -> np.ndarray:
    n = v.shape[axis]
    if n < 2:
        return np.zeros(np.delete(v.shape, axis))
    return v.std(axis=axis, ddof=1) / math.sqrt(n)


def summarize_growth(traces: list[CoverGrowthTrace], c: float, theta: float) -> GrowthSummary:
    """Level-wise means, fitted exponent and the expectation inequalities.

    Simple variant: mean of M_{i+1}/N_i against 2c(theta^2 - 1)/theta and the
    exponent of mean N_i against upper_bound_weak.  Refined variant: the
    per-trial excess N_{i+1} - (1+Theta)N_i - Theta Q_i (and the Q analogue)
    must have mean <= 4 stderr, and the exponent of mean(N_i + Q_i) is
    compared with log(Lambda)/log(theta).
    """
    if not traces:
        raise UnicoverError("no traces to summarise")
    variant = traces[0].variant
    levels = traces[0].levels
    N = np.array([t.N for t in traces], dtype=float)
    Q = np.array([t.Q for t in traces], dtype=float)
    M = np.array([t.M for t in traces], dtype=float)
    ratios = M[:, 1:] / N[:, :-1]
    Theta, Delta = bounds.theta_delta(c, theta)
    if variant == "simple":
        sizes = N.mean(axis=0)
        bound = math.log1p(2.0 * c * (theta**2 - 1.0) / theta) / math.log(theta)
        excess = np.zeros(0)
    else:
        sizes = (N + Q).mean(axis=0)
        bound = math.log(bounds.cover_eigenvalue(c, theta)) / math.log(theta)
        dn = N[:, 1:] - (1.0 + Theta) * N[:, :-1] - Theta * Q[:, :-1]
        dq = Q[:, 1:] - Delta * (N[:, :-1] + Q[:, :-1])
        excess = np.concatenate(
            [dn.mean(axis=0) - 4.0 * _stderr(dn), dq.mean(axis=0) - 4.0 * _stderr(dq)]
        )
    return GrowthSummary(
        variant=variant,
        c=c,
        theta=theta,
        l=traces[0].l,
        trials=len(traces),
        levels=list(levels),
        mean_N=N.mean(axis=0),
        mean_Q=Q.mean(axis=0),
        exponent=growth_exponent(levels, sizes, theta),
        exponent_bound=bound,
        ratio_mean=ratios.mean(axis=0),
        ratio_stderr=_stderr(ratios),
        ratio_bound=2.0 * c * (theta**2 - 1.0) / theta,
        dominance_excess=excess,
        all_covered=all(all(t.covered_ok) for t in traces),
    )


def cover_growth_experiment(
    variant: str,
    c: float,
    theta: float,
    l: int,
    levels: int,
    trials: int,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> tuple[list[CoverGrowthTrace], GrowthSummary]:
    """Run one construction over ``trials`` paths for levels l..l+levels."""
    builders = {"simple": cover_growth_simple, "refined": cover_growth_refined}
    if variant not in builders:
        raise InvalidConfigurationError(f"variant must be one of {sorted(builders)}, got {variant!r}")
    if levels < 1 or trials < 1:
        raise InvalidConfigurationError("levels and trials must be >= 1")
    sched = GeometricSchedule(theta)
    i_max = l + levels
    build = builders[variant]
    _check_growth_params(c, l, i_max)

    def one(t: int) -> CoverGrowthTrace:
        return build(sample_path(master_seed, t, sched.n(i_max)), sched, c, l, i_max)

    traces = run_trials(one, trials, threads)
    return traces, summarize_growth(traces, c, theta)


# -- box counting --------------------------------------------------------------


@dataclass
class BoxFit:
    slope: float
    r2: float
    defined: bool
    scales: list[int]
    counts: list[int]
    label: str = "diagnostic"

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "r2": self.r2,
            "defined": self.defined,
            "scales": list(self.scales),
            "counts": list(self.counts),
            "label": self.label,
        }


def box_dimension_fit(sets, scales) -> BoxFit:
    """Slope of log box_count(k) against log k, clamped to [0, 1].

    ``sets`` is one ArcSet used at every scale, or one ArcSet per scale.
    The result is a finite-size diagnostic, not a dimension estimate with
    guarantees.
    """
    ks = [int(k) for k in scales]
    if len(ks) < 4:
        raise UnicoverError(f"need at least 4 scales, got {len(ks)}")
    if any(k < 1 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise UnicoverError("scales must be positive and strictly increasing")
    per_scale = [sets] * len(ks) if isinstance(sets, ArcSet) else list(sets)
    if len(per_scale) != len(ks):
        raise UnicoverError("need one set per scale")
    counts = [a.box_count(k) for a, k in zip(per_scale, ks)]
    if all(n == 0 for n in counts):
        return BoxFit(float("nan"), float("nan"), False, ks, counts)
    x = np.log(ks)
    y = np.log(np.maximum(counts, 1))
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return BoxFit(float(min(max(slope, 0.0), 1.0)), r2, True, ks, counts)


# -- Riesz energy of mu_{l,m} --------------------------------------------------


def _pair_probability(sched: GeometricSchedule, f: RadiusFamily, l: int, m: int, d):
    """P(x and y both in F_l & ... & F_m) for dist(x, y) = d."""
    d = np.asarray(d, dtype=float)
    out = np.ones(d.shape)
    for j in range(l, m + 1):
        rad = radius_at(f, sched.n(j + 1))
        size = sched.n(j) - sched.n(j - 1)
        miss_one = (1.0 - 2.0 * rad) ** size
        union = np.minimum(4.0 * rad - np.maximum(2.0 * rad - d, 0.0), 1.0)
        miss_both = (1.0 - union) ** size
        out *= 1.0 - 2.0 * miss_one + miss_both
    return out


def expected_energy(sched: GeometricSchedule, f: RadiusFamily, l: int, m: int, s: float) -> float:
    """Exact E I_s(mu_{l,m}) = 2 int_0^{1/2} t^-s P(both in support | dist t) dt."""
    breaks = sorted({min(2.0 * radius_at(f, sched.n(j + 1)), 0.5) for j in range(l, m + 1)} | {0.0, 0.5})
    total = 0.0
    for a, b in zip(breaks, breaks[1:]):
        if b <= a:
            continue
        val, _ = integrate.quad(
            lambda t: float(_pair_probability(sched, f, l, m, t)), a, b, weight="alg", wvar=(-s, 0.0), epsabs=0.0,
            epsrel=1e-11, limit=200,
        ) if a == 0.0 else integrate.quad(
            lambda t: t**-s * float(_pair_probability(sched, f, l, m, t)), a, b, epsabs=0.0, epsrel=1e-11, limit=200
        )
        total += val
    return 2.0 * total


def psi_energy_bound(sched: GeometricSchedule, f: RadiusFamily, l: int, m: int, s: float, kappa: int = 2) -> float:
    """K_{l,m}^2 * int_T |t|^-s Psi_{l,m}(|t|) dt, Psi being piecewise constant."""
    K = bounds.k_lm(sched, f, l, m)
    edges = sorted({min(kappa * radius_at(f, sched.n(j + 1)), 0.5) for j in range(l, m + 1)} | {0.0, 0.5})
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        if b <= a:
            continue
        psi = bounds.psi_exact(sched, f, l, m, 0.5 * (a + b), kappa=kappa)
        total += psi * (b ** (1.0 - s) - a ** (1.0 - s)) / (1.0 - s)
    return K * K * 2.0 * total


@dataclass
class RieszReport:
    c: float
    theta: float
    l: int
    m: int
    s: float
    trials: int
    mean_energy: float
    stderr_energy: float
    mean_measure_sq: float
    K: float
    expected: float
    bound_psi: float
    bound_paper: float

    @property
    def ratio_to_paper_bound(self) -> float:
        return self.mean_energy / self.bound_paper

    @property
    def exact_ok(self) -> bool:
        return abs(self.mean_energy - self.expected) <= 4.0 * self.stderr_energy + 1e-12

    @property
    def bound_violated(self) -> bool:
        """Mean energy above the rigorous Psi bound by more than 4 stderr."""
        return self.mean_energy > self.bound_psi + 4.0 * self.stderr_energy

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(
            ratio_to_paper_bound=self.ratio_to_paper_bound,
            exact_ok=self.exact_ok,
            bound_violated=self.bound_violated,
        )
        return d


def riesz_experiment(
    sched: GeometricSchedule,
    f: RadiusFamily,
    l: int,
    m: int,
    s: float,
    trials: int,
    master_seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> RieszReport:
    """Mean Riesz energy of Lebesgue measure restricted to F_l & ... & F_m.

    Compared with three references: the exact expectation (pair-probability
    integral), the bound K^2 int |t|^-s Psi(t) dt, and the closed form
    K^2 C_l J_{s+s(c,theta)} with J_u = 2^u/(1-u).
    """
    if not isinstance(f, PowerLaw) or f.alpha != 1.0:
        raise InvalidConfigurationError("riesz experiment needs r_n = c/n (pow:c=...,alpha=1)")
    c, theta = f.c, sched.theta
    if not c > bounds.c_star(theta):
        raise InvalidConfigurationError(f"need c > c_star(theta) = {bounds.c_star(theta)!r}, got c={c!r}")
    if not 0.0 < s < 1.0:
        raise InvalidConfigurationError(f"need 0 < s < 1, got {s!r}")
    s_ct = bounds.s_exponent(c, theta)
    if not s + s_ct < 1.0:
        raise InvalidConfigurationError(f"need s + s(c, theta) < 1, got {s + s_ct!r}")
    if l < 1 or m < l or trials < 1:
        raise InvalidConfigurationError("need 1 <= l <= m and trials >= 1")
    K = bounds.k_lm(sched, f, l, m)
    n_top = sched.n(m)

    def one(t: int) -> tuple[float, float]:
        support = mu_lm_support(sample_path(master_seed, t, n_top), sched, l, m, f)
        return support.riesz_energy(s), support.measure()

    res = np.array(run_trials(one, trials, threads))
    energies, measures = res[:, 0], res[:, 1]
    return RieszReport(
        c=c,
        theta=theta,
        l=l,
        m=m,
        s=s,
        trials=trials,
        mean_energy=float(energies.mean()),
        stderr_energy=float(_stderr(energies)),
        mean_measure_sq=float(np.mean(measures**2)),
        K=K,
        expected=expected_energy(sched, f, l, m, s),
        bound_psi=psi_energy_bound(sched, f, l, m, s),
        bound_paper=K * K * bounds.c_l_constant(c, theta, l, s_ct) * bounds.riesz_full_energy(s + s_ct),
    )


# -- Frostman transform --------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _gauss(f, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    return half * (f(x.ravel()).reshape(x.shape) @ _GL_WEIGHTS)


def adaptive_integrate(f, a, b, rtol: float = 1e-6, atol: float = 1e-15, max_depth: int = 40) -> np.ndarray:
    """Integrals of a vectorised ``f`` over each [a_k, b_k].

    Composite 10-point Gauss-Legendre with bisection: an interval is
    accepted when its value agrees with the sum over its halves.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(a.shape)
    owner = np.arange(a.size)
    lo, hi = a.ravel().copy(), b.ravel().copy()
    whole = _gauss(f, lo, hi)
    flat = out.ravel()
    for _ in range(max_depth):
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        left = _gauss(f, lo, mid)
        right = _gauss(f, mid, hi)
        fine = left + right
        done = np.abs(fine - whole) <= np.maximum(rtol * np.abs(fine), atol)
        np.add.at(flat, owner[done], fine[done])
        keep = ~done
        owner = np.concatenate([owner[keep], owner[keep]])
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    if lo.size:
        np.add.at(flat, owner, whole)
    return flat.reshape(a.shape)


@dataclass
class FrostmanReport:
    s: float
    probes: int
    support_measure: float
    max_excess: float
    violations: int
    total_mass: float
    jensen_lower: float
    tol: float

    @property
    def jensen_ok(self) -> bool:
        return self.total_mass >= self.jensen_lower * (1.0 - self.tol) - self.tol

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.jensen_ok

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update(jensen_ok=self.jensen_ok, ok=self.ok)
        return d


def random_probe_arcs(rng: np.random.Generator, count: int) -> list[tuple[float, float]]:
    """Probe arcs (start, length) with log-uniform lengths in [1e-6, 1]."""
    starts = rng.random(count)
    lengths = 10.0 ** rng.uniform(-6.0, 0.0, count)
    return list(zip(starts.tolist(), lengths.tolist()))


def frostman_mass(support: ArcSet, s: float, arcs, rtol: float = 1e-6) -> np.ndarray:
    """theta(A) = int_{A & S} (R_s nu)^-1 d nu for each arc A, nu normalised on S."""
    m = support.measure()
    if m <= 0.0:
        raise DegenerateMeasureError("Frostman transform of a set with zero measure")
    lo_all, hi_all, owner = [], [], []
    for k, (start, length) in enumerate(arcs):
        a = support if length >= 1.0 else support & ArcSet.balls([start + 0.5 * length], 0.5 * length)
        lo, ln = a.pieces
        lo_all.append(lo)
        hi_all.append(lo + ln)
        owner.append(np.full(lo.size, k))
    lo = np.concatenate(lo_all) if lo_all else np.empty(0)
    hi = np.concatenate(hi_all) if hi_all else np.empty(0)
    own = np.concatenate(owner) if owner else np.empty(0, dtype=int)
    vals = adaptive_integrate(lambda x: 1.0 / support.riesz_potential(s, x), lo, hi, rtol=rtol)
    out = np.zeros(len(arcs))
    np.add.at(out, own, vals)
    return out / m


def frostman_check(
    support: ArcSet, s: float, probe_arcs: int, rng: np.random.Generator, tol: float = 1e-6
) -> FrostmanReport:
    """Check theta(A) <= diam(A)^s on random probes, and theta(T) >= 1/I_s(nu)."""
    if not 0.0 < s < 1.0:
        raise InvalidConfigurationError(f"need 0 < s < 1, got {s!r}")
    m = support.measure()
    if m <= 0.0:
        raise DegenerateMeasureError("Frostman transform of a set with zero measure")
    arcs = random_probe_arcs(rng, probe_arcs)
    mass = frostman_mass(support, s, arcs + [(0.0, 1.0)], rtol=tol)
    probe_mass, total = mass[:-1], float(mass[-1])
    diam = np.minimum([ln for _, ln in arcs], 0.5)
    excess = probe_mass - diam**s
    energy = support.riesz_energy(s) / (m * m)
    return FrostmanReport(
        s=s,
        probes=probe_arcs,
        support_measure=m,
        max_excess=float(excess.max()) if excess.size else -math.inf,
        violations=int(np.sum(excess > tol)),
        total_mass=total,
        jensen_lower=1.0 / energy,
        tol=tol,
    )


def random_support(rng: np.random.Generator, arcs: int = 20) -> ArcSet:
    """Union of ``arcs`` random arcs with log-uniform lengths in [1e-4, 1e-1]."""
    centers = rng.random(arcs)
    halves = 0.5 * 10.0 ** rng.uniform(-4.0, -1.0, arcs)
    out = ArcSet.empty()
    for x, h in zip(centers, halves):
        out = out | ArcSet.balls([x], h)
    return out
