"""Hausdorff-dimension bounds for r_n = c/n and the constants behind them.

Upper bounds come from greedy covers whose expected sizes grow
geometrically along the schedule n_j = theta^j: the simple cover grows by
``1 + 2c(theta^2 - 1)/theta`` per level, the refined one by the dominant
eigenvalue of ``[[1 + Theta, Theta], [Delta, Delta]]``.  The lower bound is
``1 - s(c, theta)`` whenever ``c`` exceeds the threshold ``c_star(theta)``.
Every bound is optimised over theta with a log-grid scan followed by
golden-section refinement.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Literal, TextIO

import numpy as np
from scipy.special import expit

from .errors import DegenerateRadiusError, DomainError
from .radius import RadiusFamily
from .radius import r as radius_at

BoundKind = Literal["upper_weak", "upper_matrix", "lower"]

THETA_MIN = 1.0 + 1e-6
THETA_MAX = 1e4
GRID_POINTS = 512
THETA_RTOL = 1e-8

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _check(c: float, theta: float) -> None:
    if not theta > 1.0:
        raise DomainError(f"theta must exceed 1, got {theta!r}")
    if not c >= 0.0:
        raise DomainError(f"c must be non-negative, got {c!r}")


@dataclass(frozen=True)
class GeometricSchedule:
    """Integer schedule n_j = max(floor(theta^j), n_{j-1} + 1), n_0 = 1."""

    theta: float

    def __post_init__(self):
        if not self.theta > 1.0:
            raise DomainError(f"theta must exceed 1, got {self.theta!r}")

    @cached_property
    def _cache(self) -> list[int]:
        return [1]

    def n(self, j: int) -> int:
        if j < 0:
            raise DomainError(f"schedule index must be >= 0, got {j}")
        seq = self._cache
        while len(seq) <= j:
            k = len(seq)
            # nudge so exact integer powers are not floored one too low
            v = math.floor(self.theta**k * (1.0 + 1e-12))
            seq.append(max(v, seq[-1] + 1))
        return seq[j]

    def ns(self, j0: int, j1: int) -> list[int]:
        return [self.n(j) for j in range(j0, j1 + 1)]


@dataclass(frozen=True)
class BoundPoint:
    c: float
    theta: float
    value: float
    valid: bool
    kind: BoundKind
    clamped: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "c": self.c,
            "theta": self.theta,
            "value": self.value,
            "valid": self.valid,
            "clamped": self.clamped,
        }


def _point(c, theta, raw, valid, kind) -> BoundPoint:
    value = min(max(raw, 0.0), 1.0)
    return BoundPoint(c, theta, value, valid, kind, clamped=value != raw)


# -- coefficients ------------------------------------------------------------


def theta_delta(c: float, theta: float) -> tuple[float, float]:
    _check(c, theta)
    Theta = 2.0 * c * (theta - 1.0) * (1.0 + theta**-2)
    Delta = 2.0 * c * (theta - 1.0) * (1.0 / theta - theta**-2)
    return Theta, Delta


def cover_eigenvalue(c: float, theta: float) -> float:
    """Dominant eigenvalue of [[1 + Theta, Theta], [Delta, Delta]]."""
    Theta, Delta = theta_delta(c, theta)
    half = 0.5 * (1.0 + Theta + Delta)
    # same as half**2 - Delta, written without cancellation
    disc = (0.5 * (1.0 + Theta - Delta)) ** 2 + Theta * Delta
    assert disc >= 0.0
    return half + math.sqrt(disc)


def s_exponent(c: float, theta: float) -> float:
    _check(c, theta)
    if c == 0.0:
        raise DomainError("s(c, theta) is infinite at c = 0")
    x = 2.0 * c * (theta - 1.0) / theta**2
    return -math.log(-math.expm1(-x)) / math.log(theta)


def c_star(theta: float) -> float:
    """Smallest c for which s(c, theta) < 1."""
    _check(0.0, theta)
    return -0.5 * theta**2 / (theta - 1.0) * math.log1p(-1.0 / theta)


def riesz_full_energy(s: float) -> float:
    """Energy of Lebesgue measure on T for the kernel dist^-s: 2^s / (1 - s)."""
    if not 0.0 <= s < 1.0:
        raise DomainError(f"energy of Lebesgue measure is finite only for s < 1, got {s!r}")
    return 2.0**s / (1.0 - s)


# -- pointwise bounds ----------------------------------------------------------


def _upper_valid(c: float) -> bool:
    return 0.0 < c < 0.5


def upper_bound_matrix(c: float, theta: float) -> BoundPoint:
    raw = math.log(cover_eigenvalue(c, theta)) / math.log(theta)
    return _point(c, theta, raw, _upper_valid(c), "upper_matrix")


def upper_bound_weak(c: float, theta: float) -> BoundPoint:
    _check(c, theta)
    raw = math.log1p(2.0 * c * (theta * theta - 1.0) / theta) / math.log(theta)
    return _point(c, theta, raw, _upper_valid(c), "upper_weak")


def lower_bound(c: float, theta: float) -> BoundPoint:
    raw = 1.0 - s_exponent(c, theta)
    return _point(c, theta, raw, c > c_star(theta), "lower")


# -- optimisation over theta -------------------------------------------------


def golden_section_min(f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int = 500):
    """Minimise a unimodal ``f`` on [a, b]; returns (argmin, min)."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def theta_grid(n: int = GRID_POINTS) -> np.ndarray:
    """Grid uniform in log(theta - 1) over [THETA_MIN, THETA_MAX]."""
    return 1.0 + np.exp(np.linspace(math.log(THETA_MIN - 1.0), math.log(THETA_MAX - 1.0), n))


def _check_positive(c: float) -> None:
    if not c > 0.0:
        raise DomainError(f"c must be positive, got {c!r}")


def minimize_over_theta(f: Callable[[float], float]) -> tuple[float, float]:
    """Global scan then golden refinement in u = log(theta - 1)."""
    grid = theta_grid()
    vals = np.array([f(t) for t in grid])
    k = int(np.nanargmin(vals))
    u = np.log(grid - 1.0)
    lo, hi = u[max(k - 1, 0)], u[min(k + 1, grid.size - 1)]
    # |d theta| / theta < THETA_RTOL is implied by |du| < THETA_RTOL since theta - 1 < theta
    u_best, v_best = golden_section_min(lambda uu: f(1.0 + math.exp(uu)), lo, hi, THETA_RTOL)
    if v_best <= vals[k]:
        return 1.0 + math.exp(u_best), v_best
    return float(grid[k]), float(vals[k])


def optimize_upper_matrix(c: float) -> BoundPoint:
    _check_positive(c)
    theta, _ = minimize_over_theta(lambda t: math.log(cover_eigenvalue(c, t)) / math.log(t))
    return upper_bound_matrix(c, theta)


def optimize_upper_weak(c: float) -> BoundPoint:
    _check_positive(c)
    theta, _ = minimize_over_theta(lambda t: math.log1p(2.0 * c * (t * t - 1.0) / t) / math.log(t))
    return upper_bound_weak(c, theta)


def optimize_lower(c: float) -> BoundPoint:
    _check_positive(c)
    theta, _ = minimize_over_theta(lambda t: s_exponent(c, t))
    pt = lower_bound(c, theta)
    if not pt.valid:
        return BoundPoint(c, theta, 0.0, False, "lower", clamped=pt.clamped)
    return pt


# -- covering probabilities --------------------------------------------------


def _log_mass(n: int, r: float) -> float:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0.0 < r < 0.5:
        raise DomainError(f"radius must lie in (0, 1/2), got {r!r}")
    return math.log(n + 1.0) + (n - 1.0) * math.log1p(-r)


def shepp_upper(n: int, r: float) -> float:
    """min(1, 2 (n+1) (1-r)^(n-1)) bound on P(n arcs of radius r miss a point)."""
    return min(1.0, 2.0 * math.exp(_log_mass(n, r)))


def shepp_lower(n: int, r: float) -> float:
    """1 / (2 / ((n+1)(1-r)^(n-1)) + 1)."""
    return float(expit(_log_mass(n, r) - math.log(2.0)))


# -- block constants along a schedule ---------------------------------------


def _block_miss(sched: GeometricSchedule, f: RadiusFamily, j: int) -> float:
    """(1 - 2 r_{n_{j+1}})^{n_j - n_{j-1}}: chance a point misses F_j."""
    if j < 1:
        raise DomainError(f"block index must be >= 1, got {j}")
    rad = radius_at(f, sched.n(j + 1))
    if 2.0 * rad >= 1.0:
        raise DegenerateRadiusError(f"2 r_(n_{j + 1}) = {2 * rad!r} >= 1")
    return math.exp((sched.n(j) - sched.n(j - 1)) * math.log1p(-2.0 * rad))


def k_lm(sched: GeometricSchedule, f: RadiusFamily, l: int, m: int) -> float:
    """prod_{j=l}^{m} (1 - (1 - 2 r_{n_{j+1}})^{n_j - n_{j-1}})."""
    if l > m:
        raise DomainError(f"need l <= m, got l={l}, m={m}")
    return math.prod(1.0 - _block_miss(sched, f, j) for j in range(l, m + 1))


def c_l_constant(c: float, theta: float, l: int, s: float) -> float:
    _check(c, theta)
    base = -math.expm1(-2.0 * c * (theta - 1.0) / theta**2)
    return c**s * base**l


def psi_exact(sched: GeometricSchedule, f: RadiusFamily, l: int, m: int, t, kappa: int = 2):
    """prod_j (1 + q_j / (1 - q_j) * 1[|t| <= kappa r_{n_{j+1}}]), q_j the block miss chance.

    ``kappa = 1`` is the indicator radius of the envelope lemma, ``kappa = 2``
    the one produced by the second-moment computation.
    """
    if kappa not in (1, 2):
        raise DomainError(f"kappa must be 1 or 2, got {kappa!r}")
    ts = np.abs(np.asarray(t, dtype=float))
    out = np.ones(ts.shape)
    for j in range(l, m + 1):
        q = _block_miss(sched, f, j)
        active = ts <= kappa * radius_at(f, sched.n(j + 1))
        out = np.where(active, out * (1.0 + q / (1.0 - q)), out)
    return float(out) if out.ndim == 0 else out


# -- figure data -------------------------------------------------------------


@dataclass(frozen=True)
class BoundCurveRow:
    c: float
    upper_weak: BoundPoint
    upper_matrix: BoundPoint
    lower: BoundPoint

    @property
    def valid_flags(self) -> str:
        """Validity of (weak, matrix, lower) as a three-character 0/1 string."""
        return "".join("1" if p.valid else "0" for p in (self.upper_weak, self.upper_matrix, self.lower))


BOUND_CURVE_HEADER = (
    "c",
    "upper_weak",
    "theta_weak",
    "upper_matrix",
    "theta_matrix",
    "lower",
    "theta_lower",
    "valid_flags",
)


def bound_curve(c_grid: Iterable[float]) -> list[BoundCurveRow]:
    cs = [float(c) for c in c_grid]
    if any(b <= a for a, b in zip(cs, cs[1:])):
        raise DomainError("c grid must be strictly increasing")
    if any(c <= 0 for c in cs):
        raise DomainError("c grid must be positive")
    return [BoundCurveRow(c, optimize_upper_weak(c), optimize_upper_matrix(c), optimize_lower(c)) for c in cs]


def fmt(x: float) -> str:
    """Shortest round-trip decimal (at most 17 significant digits)."""
    return repr(float(x))


def write_bound_curve_csv(rows: Iterable[BoundCurveRow], stream: TextIO | None = None) -> str:
    buf = stream if stream is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUND_CURVE_HEADER)
    for row in rows:
        w.writerow(
            [
                fmt(row.c),
                fmt(row.upper_weak.value),
                fmt(row.upper_weak.theta),
                fmt(row.upper_matrix.value),
                fmt(row.upper_matrix.theta),
                fmt(row.lower.value),
                fmt(row.lower.theta),
                row.valid_flags,
            ]
        )
    return buf.getvalue() if stream is None else ""
