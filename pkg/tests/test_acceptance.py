"""The ten acceptance criteria, each at its stated tolerance and time budget.

Each test prints (and records for the terminal summary) one line:
``criterion k: PASS|FAIL  detail``.
"""

import math
import subprocess
import sys
import time

import numpy as np

from unicover import bounds, estimators, simulator
from unicover.bounds import GeometricSchedule
from unicover.radius import LogOverN, PowerLaw
from unicover.torus import ArcSet, riesz_energy

PAPER_LOWER_AT_8_6 = 0.2177444298485995


def test_criterion_01_paper_constant(record):
    t0 = time.perf_counter()
    at = bounds.lower_bound(1.0, 8.6).value
    best = bounds.optimize_lower(1.0).value
    dt = time.perf_counter() - t0
    ok = abs(at - PAPER_LOWER_AT_8_6) <= 1e-12 and best >= PAPER_LOWER_AT_8_6 - 1e-9 and dt < 1.0
    record(1, ok, f"lower(1, 8.6)={at!r}, optimized={best!r}, {dt:.2f}s")
    assert ok


def _power_iteration(Theta, Delta, iters=200):
    v = np.ones((Theta.size, 2))
    lam = np.zeros(Theta.size)
    for _ in range(iters):
        w0 = (1.0 + Theta) * v[:, 0] + Theta * v[:, 1]
        w1 = Delta * v[:, 0] + Delta * v[:, 1]
        norm = np.hypot(w0, w1)
        lam = norm / np.hypot(v[:, 0], v[:, 1])
        v = np.stack([w0 / norm, w1 / norm], axis=1)
    return lam


def test_criterion_02_eigenvalue_identity(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240602)
    cs = rng.uniform(1e-3, 1.0, 10_000)
    thetas = 1.0 + 10.0 ** rng.uniform(-3.0, 1.5, 10_000)
    lam = np.array([bounds.cover_eigenvalue(c, t) for c, t in zip(cs, thetas)])
    # coefficients recomputed here, independently of the library
    Theta = 2 * cs * (thetas - 1) * (1 + thetas**-2)
    Delta = 2 * cs * (thetas - 1) * (1 / thetas - thetas**-2)
    resid = np.abs(lam**2 - (1 + Theta + Delta) * lam + Delta) / np.maximum(1.0, lam**2)
    oracle = _power_iteration(Theta, Delta)
    gap = np.abs(lam - oracle) / np.maximum(1.0, lam)
    dt = time.perf_counter() - t0
    ok = resid.max() <= 1e-9 and gap.max() <= 1e-9 and dt < 5.0
    record(2, ok, f"max quadratic residual={resid.max():.2e}, max power-iteration gap={gap.max():.2e}, {dt:.2f}s")
    assert ok


def test_criterion_03_boundary_identity(record):
    t0 = time.perf_counter()
    errs = [abs(bounds.s_exponent(bounds.c_star(t), t) - 1.0) for t in (1.5, 2.0, 5.0, 8.6, 50.0)]
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-10 and dt < 1.0
    record(3, ok, f"max |s(c*, theta) - 1|={max(errs):.2e}, {dt:.3f}s")
    assert ok


def test_criterion_04_expectation_identity(record):
    t0 = time.perf_counter()
    sched = GeometricSchedule(2.0)
    f = PowerLaw(1.0, 1.0)
    hand = abs(bounds.k_lm(sched, f, 2, 3) - 0.18104553) <= 1e-8
    K = bounds.k_lm(sched, f, 2, 4)
    trials = 2000
    ms = np.array(
        [simulator.mu_lm_support(simulator.sample_path(simulator.DEFAULT_SEED, t, 32), sched, 2, 4, f).measure()
         for t in range(trials)]
    )
    se = ms.std(ddof=1) / math.sqrt(trials)
    z = abs(ms.mean() - K) / se
    dt = time.perf_counter() - t0
    ok = hand and z <= 4.0 and dt < 30.0
    record(4, ok, f"K_2,4={K:.8f}, mean={ms.mean():.8f}, |z|={z:.2f}, K_2,3 check={hand}, {dt:.1f}s")
    assert ok


def test_criterion_05_shepp_sandwich(record):
    t0 = time.perf_counter()
    hi = simulator.coverage_experiment(LogOverN(3.0), [1000], 200).rows[0]
    lo = simulator.coverage_experiment(LogOverN(0.5), [10_000], 200).rows[0]
    dt = time.perf_counter() - t0
    ok = hi[2] == 0 and lo[3] >= 0.9 and dt < 120.0
    record(5, ok, f"c=3: {hi[2]} uncovered of 200 (shepp_upper={hi[7]:.2e}); "
                  f"c=0.5: uncovered freq {lo[3]:.3f} (shepp_lower={lo[6]:.4f}), {dt:.1f}s")
    assert ok


def test_criterion_06_cover_growth(record):
    t0 = time.perf_counter()
    _, simple = estimators.cover_growth_experiment("simple", 0.2, 2.0, 3, 10, 500)
    _, refined = estimators.cover_growth_experiment("refined", 0.2, 2.0, 3, 10, 500)
    dt = time.perf_counter() - t0
    ok = (
        simple.ratio_ok
        and refined.exponent_ok
        and simple.all_covered
        and refined.all_covered
        and dt < 300.0
    )
    record(
        6,
        ok,
        f"simple max M/N={simple.ratio_mean.max():.3f} (bound {simple.ratio_bound:.3f}); "
        f"refined exponent={refined.exponent:.3f} (bound {refined.exponent_bound:.3f}+0.05); "
        f"covers valid={simple.all_covered and refined.all_covered}, {dt:.1f}s",
    )
    assert ok


def _riesz_mc(a: ArcSet, s: float, n: int, rng) -> tuple[float, float]:
    """m J P(X + D in A), X uniform on A, D with density |d|^-s / J on [-1/2, 1/2]."""
    lo, ln = a.pieces
    m = math.fsum(ln)
    J = 2.0**s / (1.0 - s)
    k = rng.choice(lo.size, size=n, p=ln / ln.sum())
    x = lo[k] + ln[k] * rng.random(n)
    d = 0.5 * rng.random(n) ** (1.0 / (1.0 - s)) * rng.choice([-1.0, 1.0], size=n)
    hit = a.contains(x + d)
    p = hit.mean()
    return m * J * p, m * J * math.sqrt(p * (1 - p) / n)


def test_criterion_07_riesz_exactness(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst, fails = 0.0, 0
    for s in (0.2, 0.4, 0.6):
        for _ in range(100):
            k = int(rng.integers(1, 8))
            a = ArcSet.from_intervals(
                (x, x + ln) for x, ln in zip(rng.random(k), rng.uniform(0.01, 0.4, k))
            )
            exact = riesz_energy(a, s)
            est, se = _riesz_mc(a, s, 1_000_000, rng)
            z = abs(exact - est) / se if se > 0 else (0.0 if abs(exact - est) <= 1e-10 else math.inf)
            worst = max(worst, z)
            fails += z > 3.0
    full = max(abs(riesz_energy(ArcSet.full(), s) - 2.0**s / (1.0 - s)) for s in (0.1, 0.2, 0.4, 0.5, 0.6, 0.9))
    dt = time.perf_counter() - t0
    ok = fails == 0 and full <= 1e-10 and dt < 120.0
    record(7, ok, f"{fails}/300 outside 3 sigma (max |z|={worst:.2f}); full-circle error={full:.1e}, {dt:.1f}s")
    assert ok


def test_criterion_08_frostman(record):
    t0 = time.perf_counter()
    violations, worst, jensen = 0, -math.inf, True
    for k in range(100):
        rng = simulator.trial_generator(simulator.DEFAULT_SEED, k)
        rep = estimators.frostman_check(estimators.random_support(rng, 20), 0.4, 100, rng)
        violations += rep.violations
        worst = max(worst, rep.max_excess)
        jensen &= rep.jensen_ok
    dt = time.perf_counter() - t0
    ok = violations == 0 and jensen and dt < 120.0
    record(8, ok, f"{violations} violations in 100x100 probes (max excess {worst:.2e}); Jensen ok={jensen}, {dt:.1f}s")
    assert ok


def test_criterion_09_countability(record):
    t0 = time.perf_counter()
    p, N = 20, 10_000
    res = simulator.countability_experiment(PowerLaw(1.0, 3.0), p, [N], 200)
    scale = 2.0 * p * (1.0 / N**3)
    good = sum(
        1
        for tr in res.trials
        for rec in tr.records
        if rec.arc_count <= p and rec.holds_points and 0.4 <= rec.measure / scale <= 1.0
    )
    dt = time.perf_counter() - t0
    ok = good >= 0.95 * 200 and dt < 60.0
    record(9, ok, f"{good}/200 trials with <= p arcs, all of w_1..w_p, ratio in [0.4, 1]; {dt:.1f}s")
    assert ok


def _cli(tmp, *args):
    subprocess.run([sys.executable, "-m", "unicover", *args, "--outdir", str(tmp)], check=True, capture_output=True)


def test_criterion_10_determinism(record, tmp_path):
    t0 = time.perf_counter()
    runs = [
        ("simulate", "coverage", "--family", "logn:c=1.5", "--n", "100,400", "--trials", "40"),
        ("simulate", "countable", "--family", "pow:c=1,alpha=3", "--p", "5", "--N", "400", "--trials", "20"),
        ("cover-growth", "--variant", "refined", "--levels", "5", "--trials", "30"),
        ("bounds", "--c-grid", "0.1:1.0:0.3"),
    ]
    same = True
    for r, args in enumerate(runs):
        outs = []
        for k, threads in enumerate((1, 1, 3)):
            d = tmp_path / f"run{r}_{k}"
            _cli(d, *args, "--threads", str(threads))
            outs.append({p.name: p.read_bytes() for p in sorted(d.glob("*.csv"))})
        same &= bool(outs[0]) and outs[0] == outs[1] == outs[2]
    dt = time.perf_counter() - t0
    ok = same and dt < 60.0
    record(10, ok, f"CSV artifacts byte-identical across repeats and --threads 1/3: {same}, {dt:.1f}s")
    assert ok


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
