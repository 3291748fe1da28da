#!/usr/bin/env python3
"""Monte Carlo coverage of T by balls B(w_k, c log n / n).

The shepp_* columns plug r_n into the Shepp formulas as printed; the
shepp_*_arc columns use the true arc length 2 r_n and bracket the
simulated frequency.
"""

from unicover import simulator
from unicover.radius import LogOverN


def main(trials=200):
    for c in (0.4, 0.5, 1.0, 1.5, 3.0):
        res = simulator.coverage_experiment(LogOverN(c), [100, 1000, 10_000], trials)
        print(f"c = {c}")
        for n, _, missed, freq, wlo, whi, slo, shi, alo, ahi in res.rows:
            print(f"  n={n:6d}  not covered {freq:.3f} [{wlo:.3f}, {whi:.3f}]  "
                  f"shepp(r_n) [{slo:.3f}, {shi:.3g}]  shepp(2 r_n) [{alo:.3f}, {ahi:.3g}]")


if __name__ == "__main__":
    main()
