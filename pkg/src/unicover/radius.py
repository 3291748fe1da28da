"""Radius sequences r_n and the series tests that classify them.

Five closed-form families are supported, plus a constant radius used only
to drive simulations::

    pow:c=1,alpha=2.5        r_n = c / n**alpha
    logn:c=3                 r_n = c log n / n
    logn-loglog:gamma=1.5    r_n = (2 log n + gamma log log n) / n
    loglog:c=2               r_n = c log log n / (2 n)
    loglog-logloglog:gamma=2 r_n = (log log n + gamma log log log n) / (2 n)
    const:r=0.6              r_n = r

Partial sums start at each family's first admissible index ``n_min`` (where
every iterated logarithm is positive); the omitted head is reported as
``n_min`` in the diagnostics.  Numeric sums are evidence only: the verdict
fields of :func:`classify` come from the analytic parameter rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, UnsupportedFamilyError

Verdict = Literal["yes", "no", "unknown"]

DIAGNOSTIC_GRID = (10**3, 10**4, 10**5, 10**6)


@dataclass(frozen=True)
class RadiusFamily:
    """Base class; subclasses define ``values`` on an array of indices."""

    n_min = 1
    prefix = ""

    def values(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def spec(self) -> str:
        params = ",".join(f"{k}={v!r}" for k, v in self.__dict__.items())
        return f"{self.prefix}:{params}"


@dataclass(frozen=True)
class PowerLaw(RadiusFamily):
    c: float
    alpha: float
    prefix = "pow"

    def values(self, n):
        return self.c / n**self.alpha


@dataclass(frozen=True)
class LogOverN(RadiusFamily):
    c: float
    n_min = 2
    prefix = "logn"

    def values(self, n):
        return self.c * np.log(n) / n


@dataclass(frozen=True)
class LogPlusLogLog(RadiusFamily):
    gamma: float
    n_min = 3
    prefix = "logn-loglog"

    def values(self, n):
        return (2.0 * np.log(n) + self.gamma * np.log(np.log(n))) / n


@dataclass(frozen=True)
class LogLogHalf(RadiusFamily):
    c: float
    n_min = 3
    prefix = "loglog"

    def values(self, n):
        return self.c * np.log(np.log(n)) / (2.0 * n)


@dataclass(frozen=True)
class LogLogPlus(RadiusFamily):
    gamma: float
    n_min = 16
    prefix = "loglog-logloglog"

    def values(self, n):
        ll = np.log(np.log(n))
        return (ll + self.gamma * np.log(ll)) / (2.0 * n)


@dataclass(frozen=True)
class Constant(RadiusFamily):
    r: float
    prefix = "const"

    def values(self, n):
        return np.full(np.shape(n), float(self.r))


_FAMILIES = {cls.prefix: cls for cls in (PowerLaw, LogOverN, LogPlusLogLog, LogLogHalf, LogLogPlus, Constant)}


def parse_family(text: str) -> RadiusFamily:
    """Parse the compact ``kind:key=value,...`` syntax."""
    kind, _, body = text.strip().partition(":")
    cls = _FAMILIES.get(kind)
    if cls is None:
        raise UnsupportedFamilyError(f"unknown radius family {kind!r}; expected one of {sorted(_FAMILIES)}")
    params = {}
    for item in filter(None, (p.strip() for p in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise UnsupportedFamilyError(f"malformed parameter {item!r} in {text!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise UnsupportedFamilyError(f"parameter {key!r} is not a number in {text!r}") from None
    try:
        fam = cls(**params)
    except TypeError as exc:
        raise UnsupportedFamilyError(f"bad parameters for {kind!r}: {exc}") from None
    for key, val in params.items():
        if not val > 0:
            raise UnsupportedFamilyError(f"parameter {key!r} must be positive in {text!r}")
    return fam


def r(f: RadiusFamily, n):
    """r_n for a scalar or array of indices."""
    arr = np.asarray(n)
    if np.any(arr < f.n_min):
        raise DomainError(f"{f.spec()} is defined for n >= {f.n_min}, got {n!r}")
    out = f.values(arr.astype(float))
    return float(out) if out.ndim == 0 else out


def _indices(f: RadiusFamily, N: int) -> np.ndarray:
    if N < f.n_min:
        raise DomainError(f"partial sums of {f.spec()} need N >= {f.n_min}, got {N}")
    return np.arange(f.n_min, N + 1, dtype=float)


def _log_miss(n: np.ndarray, rn: np.ndarray) -> np.ndarray:
    """log((1 - r_n)^n); -inf once r_n >= 1 (a single ball already covers)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = n * np.log1p(-np.minimum(rn, 1.0))
    return np.where(rn >= 1.0, -np.inf, out)


def thm1_terms(f: RadiusFamily, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices and terms n (1 - r_n)^n."""
    n = _indices(f, N)
    return n, n * np.exp(_log_miss(n, f.values(n)))


def thm1_sum_partial(f: RadiusFamily, N: int) -> float:
    return math.fsum(thm1_terms(f, N)[1])


def liminf_indicator(f: RadiusFamily, N: int) -> float:
    """min of n (1 - r_n)^n over the window [N/2, N]."""
    n, terms = thm1_terms(f, N)
    window = n >= N // 2
    return float(terms[window].min())


def shepp_log_terms(f: RadiusFamily, N: int) -> np.ndarray:
    """log of n^-2 exp(r_{n_min} + ... + r_n)."""
    n = _indices(f, N)
    prefix = np.cumsum(f.values(n))
    return prefix - 2.0 * np.log(n)


def shepp_series_partial(f: RadiusFamily, N: int) -> float:
    """Partial sum of Shepp's series; ``inf`` if it overflows a double."""
    with np.errstate(over="ignore"):
        return float(np.exp(logsumexp(shepp_log_terms(f, N))))


def galambos_partial(f: RadiusFamily, N: int) -> tuple[float, float]:
    """(sum r_n, sum r_n exp(-2 n r_n)) up to N."""
    n = _indices(f, N)
    rn = f.values(n)
    return math.fsum(rn), math.fsum(rn * np.exp(-2.0 * n * rn))


def thm3_sum_partial(f: RadiusFamily, N: int) -> float:
    n = _indices(f, N)
    return math.fsum(n * f.values(n))


def monotonicity(f: RadiusFamily, N: int = 10**6, start: int = 16) -> dict[str, bool]:
    """Monotonicity of r_n and n r_n on [max(start, n_min), N]."""
    n = np.arange(max(start, f.n_min), N + 1, dtype=float)
    rn = f.values(n)
    nr = n * rn
    return {
        "r_decreasing": bool(np.all(np.diff(rn) <= 0)),
        "nr_decreasing": bool(np.all(np.diff(nr) <= 0)),
        "nr_increasing": bool(np.all(np.diff(nr) >= 0)),
    }


@dataclass
class RegimeVerdict:
    family: str
    covers_T: Verdict
    full_measure: Verdict
    countable: Literal["yes", "unknown"]
    monotonicity_ok: dict[str, bool]
    notes: list[str] = field(default_factory=list)
    diagnostics: dict[str, dict[str, float]] = field(default_factory=dict)
    n_min: int = 1

    def consistent(self) -> bool:
        if self.covers_T == "yes" and self.full_measure != "yes":
            return False
        if self.full_measure == "yes" and self.countable == "yes":
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "covers_T": self.covers_T,
            "full_measure": self.full_measure,
            "countable": self.countable,
            "monotonicity_ok": dict(self.monotonicity_ok),
            "notes": list(self.notes),
            "n_min": self.n_min,
            "diagnostics": {k: dict(v) for k, v in self.diagnostics.items()},
        }


def diagnostics(f: RadiusFamily, grid=DIAGNOSTIC_GRID) -> dict[str, dict[str, float]]:
    out = {}
    for N in grid:
        g1, g2 = galambos_partial(f, N)
        out[str(N)] = {
            "thm1_sum": thm1_sum_partial(f, N),
            "liminf_indicator": liminf_indicator(f, N),
            "shepp_series": shepp_series_partial(f, N),
            "galambos_sum_r": g1,
            "galambos_sum_weighted": g2,
            "thm3_sum": thm3_sum_partial(f, N),
        }
    return out


def _rules(f: RadiusFamily) -> tuple[Verdict, Verdict, str, list[str]]:
    notes: list[str] = []
    galambos_note = (
        "full-measure verdict uses the Galambos criterion, whose monotonicity "
        "hypothesis is r_n decreasing and n r_n increasing"
    )
    if isinstance(f, PowerLaw):
        if f.alpha < 1:
            notes.append("n (1 - r_n)^n decays faster than any power: covering series converges")
            return "yes", "yes", "unknown", notes
        countable = "yes" if f.alpha > 2 else "unknown"
        if f.alpha == 1:
            notes.append("sum r_n exp(-2 n r_n) = c exp(-2c) sum 1/n diverges")
        else:
            notes.append("sum r_n converges, so the full-measure condition fails")
        if countable == "yes":
            notes.append("sum n r_n converges: the uniform set is the sample itself")
        else:
            notes.append("sum n r_n diverges: countability test does not apply")
        return "no", "no", countable, notes
    if isinstance(f, LogOverN):
        notes.append(galambos_note)
        if f.c > 2:
            return "yes", "yes", "unknown", notes
        if f.c < 1:
            notes.append("liminf n (1 - r_n)^n is infinite: the circle is almost surely not covered")
            if f.c >= 0.5:
                notes.append(
                    "balls B(w, r_n) have length 2 r_n and n (1 - 2 r_n)^n -> 0 here; "
                    "the Shepp lower-bound argument only applies for c < 1/2"
                )
            return "no", "yes", "unknown", notes
        notes.append("1 <= c <= 2 is an open band for full covering")
        if f.c == 1:
            notes.append("at c = 1, liminf n (1 - r_n)^n = 1, so P(T not in U) >= 1/3")
        return "unknown", "yes", "unknown", notes
    if isinstance(f, LogPlusLogLog):
        notes.append(galambos_note)
        if f.gamma > 1:
            return "yes", "yes", "unknown", notes
        notes.append("gamma <= 1: covering series diverges and liminf n (1 - r_n)^n = 0")
        return "unknown", "yes", "unknown", notes
    if isinstance(f, (LogLogHalf, LogLogPlus)):
        notes.append(galambos_note)
        notes.append("liminf n (1 - r_n)^n is infinite: the circle is almost surely not covered")
        param = f.c if isinstance(f, LogLogHalf) else f.gamma
        return "no", ("yes" if param > 1 else "no"), "unknown", notes
    raise UnsupportedFamilyError(f"no classification rules for {f!r}")


def classify(f: RadiusFamily, grid=DIAGNOSTIC_GRID) -> RegimeVerdict:
    covers, full, countable, notes = _rules(f)
    verdict = RegimeVerdict(
        family=f.spec(),
        covers_T=covers,
        full_measure=full,
        countable=countable,
        monotonicity_ok=monotonicity(f, N=max(grid)),
        notes=notes,
        diagnostics=diagnostics(f, grid),
        n_min=f.n_min,
    )
    return verdict
