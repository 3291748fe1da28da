#!/usr/bin/env python3
"""Shrinking of E_p & ... & E_N for three radius families.

Slow radii (log n / n) keep a set of positive measure; fast radii (n^-3)
collapse onto sample points: w_1..w_p plus any later w_k that landed in
E_p & ... & E_{k-1}.
"""

from unicover import simulator
from unicover.radius import LogLogHalf, LogOverN, PowerLaw


def main(trials=50):
    p, cps = 20, [20, 80, 320, 1280, 5120]
    for f in (LogOverN(3.0), LogLogHalf(2.0), PowerLaw(1.0, 3.0)):
        res = simulator.measure_experiment(f, p, cps, trials)
        print(f.spec())
        for N, _, m, se, arcs, mE in res.rows:
            print(f"  N={N:5d}  measure {m:.3e} +- {se:.1e}  arcs {arcs:7.1f}  |E_N| {mE:.3f}")
    res = simulator.countability_experiment(PowerLaw(1.0, 3.0), p, cps, trials)
    N, _, _, arcs, stab, ratio, holds = res.rows[-1]
    print(f"\npow alpha=3 at N={N}: {stab:.0%} stabilised on p arcs, measure/(2 p r_N) = {ratio:.3f}, "
          f"holds w_1..w_p in {holds:.0%} of trials")


if __name__ == "__main__":
    main()
