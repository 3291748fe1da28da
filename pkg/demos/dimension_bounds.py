#!/usr/bin/env python3
"""Dimension bounds for r_n = c/n across a grid of c.

Prints the optimised upper bounds (weak and matrix) and the lower bound,
then the single point c = 1, theta = 8.6.
"""

from unicover import bounds


def main():
    print(f"{'c':>6} {'weak':>10} {'matrix':>10} {'lower':>10}  flags")
    for row in bounds.bound_curve([0.05, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0, 4.0]):
        print(f"{row.c:6.2f} {row.upper_weak.value:10.6f} {row.upper_matrix.value:10.6f} "
              f"{row.lower.value:10.6f}  {row.valid_flags}")
    p = bounds.lower_bound(1.0, 8.6)
    print(f"\nlower bound at c=1, theta=8.6: {p.value:.12f} (valid={p.valid})")
    print(f"c_star(8.6) = {bounds.c_star(8.6):.6f}, s(1, 8.6) = {bounds.s_exponent(1.0, 8.6):.6f}")


if __name__ == "__main__":
    main()
