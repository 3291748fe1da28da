#!/usr/bin/env python3
"""Riesz energy of the block-intersection measure and a Frostman check."""

from unicover import estimators, simulator
from unicover.bounds import GeometricSchedule
from unicover.radius import PowerLaw


def main():
    rep = estimators.riesz_experiment(GeometricSchedule(2.0), PowerLaw(2.0, 1.0), 3, 9, 0.2, 200)
    print(f"mean I_s = {rep.mean_energy:.6f} +- {rep.stderr_energy:.1e}")
    print(f"exact expectation {rep.expected:.6f}, Psi bound {rep.bound_psi:.6f}, closed form {rep.bound_paper:.6f}")
    rng = simulator.trial_generator(simulator.DEFAULT_SEED, 0)
    fr = estimators.frostman_check(estimators.random_support(rng, 20), 0.4, 200, rng)
    print(f"Frostman: {fr.violations} violations in {fr.probes} probes, max excess {fr.max_excess:.2e}, "
          f"theta(T) {fr.total_mass:.4f} >= {fr.jensen_lower:.4f}")


if __name__ == "__main__":
    main()
