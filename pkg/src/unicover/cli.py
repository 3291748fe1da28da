"""Command line entry point.

Subcommands and the files they write into ``--outdir``::

    bounds           bound_curve.csv (with --c-grid) or bounds.json
    conditions       conditions.json
    simulate KIND    KIND.csv, KIND_trials.csv      (KIND: coverage, measure, countable)
    cover-growth     cover_growth.csv, summary.json
    riesz            riesz_trials.csv, summary.json
    frostman         frostman.csv, summary.json

Every run with ``--outdir`` also writes ``meta.json`` (resolved config,
seed, library version).  Without ``--outdir`` the main artifact goes to
standard output.  Settings resolve as flags > ``--config`` JSON > defaults.
Errors are one JSON object on standard error with exit status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, bounds, estimators, simulator
from .bounds import GeometricSchedule, fmt
from .errors import InvalidConfigurationError, UnicoverError
from .radius import PowerLaw, classify, parse_family
from .radius import r as radius_at

DEFAULTS = {
    "bounds": {"c": None, "theta": None, "kind": "all", "c_grid": None},
    "conditions": {"family": None},
    "coverage": {"family": None, "n": "1000", "trials": 200},
    "measure": {"family": None, "p": 10, "N": 10000, "checkpoints": None, "trials": 100},
    "countable": {"family": None, "p": 20, "N": 10000, "checkpoints": None, "trials": 200},
    "cover-growth": {"variant": "refined", "c": 0.2, "theta": 2.0, "l": 3, "levels": 10, "trials": 500},
    "riesz": {"c": 2.0, "theta": 2.0, "l": 3, "m": 9, "s": 0.2, "trials": 200},
    "frostman": {"s": 0.4, "supports": 100, "probes": 100, "arcs": 20},
}
COMMON = {"seed": simulator.DEFAULT_SEED, "threads": 1, "outdir": None, "timestamp": False}

KIND_NAMES = {"lower": "lower", "upper-weak": "upper_weak", "upper-matrix": "upper_matrix"}


# -- formatting ------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _plain(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def json_text(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=False) + "\n"


# -- config ----------------------------------------------------------------------


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    if isinstance(text, (int, float)):
        return [int(text)]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidConfigurationError(f"expected comma separated integers, got {text!r}") from None


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` inclusive of b (up to rounding), values rounded to 12 decimals."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise InvalidConfigurationError(f"grid must look like a:b:step, got {text!r}") from None
    if not step > 0 or b < a:
        raise InvalidConfigurationError(f"bad grid {text!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 12) for k in range(count)]


def geometric_checkpoints(p: int, N: int) -> list[int]:
    out, n = [], p
    while n < N:
        out.append(n)
        n *= 2
    out.append(N)
    return out


def resolve(key: str, args: argparse.Namespace) -> dict:
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[key])
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfigurationError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise InvalidConfigurationError("config file must hold a flat JSON object")
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise InvalidConfigurationError(f"unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    for k in cfg:
        if hasattr(args, k):
            cfg[k] = getattr(args, k)
    return cfg


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise InvalidConfigurationError(f"missing required setting(s): {', '.join(missing)}")


def _positive_int(cfg: dict, key: str, minimum: int = 1) -> int:
    v = cfg[key]
    if isinstance(v, bool) or int(v) != v or v < minimum:
        raise InvalidConfigurationError(f"{key} must be an integer >= {minimum}, got {v!r}")
    return int(v)


# -- commands ---------------------------------------------------------------------
# Each returns {file name: text}; the first entry is the main artifact.


def cmd_bounds(cfg: dict) -> dict[str, str]:
    if cfg["c_grid"] is not None:
        rows = bounds.bound_curve(parse_grid(cfg["c_grid"]))
        return {"bound_curve.csv": bounds.write_bound_curve_csv(rows)}
    _need(cfg, "c")
    c = float(cfg["c"])
    kind = cfg["kind"]
    if kind != "all" and kind not in KIND_NAMES:
        raise InvalidConfigurationError(f"kind must be one of {['all', *KIND_NAMES]}, got {kind!r}")
    theta = cfg["theta"]
    if theta is None:
        points = {
            "upper_weak": bounds.optimize_upper_weak(c),
            "upper_matrix": bounds.optimize_upper_matrix(c),
            "lower": bounds.optimize_lower(c),
        }
    else:
        t = float(theta)
        points = {
            "upper_weak": bounds.upper_bound_weak(c, t),
            "upper_matrix": bounds.upper_bound_matrix(c, t),
            "lower": bounds.lower_bound(c, t),
        }
    if kind == "all":
        record = {"c": c, "theta": theta, **{k: p.to_dict() for k, p in points.items()}}
    else:
        record = points[KIND_NAMES[kind]].to_dict()
    return {"bounds.json": json_text(record)}


def cmd_conditions(cfg: dict) -> dict[str, str]:
    _need(cfg, "family")
    return {"conditions.json": json_text(classify(parse_family(cfg["family"])).to_dict())}


TRIAL_HEADER = ("trial", "n", "covered", "measure", "arc_count", "holds_points")


def _trial_rows(result):
    for tr in result.trials:
        for rec in tr.records:
            holds = "" if rec.holds_points is None else int(rec.holds_points)
            yield (tr.trial_id, rec.n, rec.covered, rec.measure, rec.arc_count, holds)


def cmd_simulate(kind: str, cfg: dict) -> dict[str, str]:
    _need(cfg, "family")
    f = parse_family(cfg["family"])
    trials = _positive_int(cfg, "trials")
    seed, threads = int(cfg["seed"]), _positive_int(cfg, "threads")
    if kind == "coverage":
        ns = _int_list(cfg["n"])
        if not ns:
            raise InvalidConfigurationError("need at least one checkpoint n")
        for n in ns:
            radius_at(f, n)
        res = simulator.coverage_experiment(f, ns, trials, seed, threads)
    else:
        p, N = _positive_int(cfg, "p"), _positive_int(cfg, "N")
        if N < p:
            raise InvalidConfigurationError(f"need p <= N, got p={p}, N={N}")
        cps = _int_list(cfg["checkpoints"]) if cfg["checkpoints"] is not None else geometric_checkpoints(p, N)
        if not cps or min(cps) < p or max(cps) > N:
            raise InvalidConfigurationError(f"checkpoints must lie in [p, N] = [{p}, {N}]")
        radius_at(f, p)
        run = simulator.measure_experiment if kind == "measure" else simulator.countability_experiment
        res = run(f, p, cps, trials, seed, threads)
    return {
        f"{kind}.csv": csv_text(res.header, res.rows),
        f"{kind}_trials.csv": csv_text(TRIAL_HEADER, _trial_rows(res)),
    }


def cmd_cover_growth(cfg: dict) -> dict[str, str]:
    c, theta = float(cfg["c"]), float(cfg["theta"])
    if not theta > 1:
        raise InvalidConfigurationError(f"theta must exceed 1, got {theta!r}")
    traces, summary = estimators.cover_growth_experiment(
        cfg["variant"],
        c,
        theta,
        _positive_int(cfg, "l"),
        _positive_int(cfg, "levels"),
        _positive_int(cfg, "trials"),
        int(cfg["seed"]),
        _positive_int(cfg, "threads"),
    )
    rows = [row for t, tr in enumerate(traces) for row in tr.rows(t)]
    return {
        "cover_growth.csv": csv_text(estimators.TRACE_HEADER, rows),
        "summary.json": json_text(summary.to_dict()),
    }


def cmd_riesz(cfg: dict) -> dict[str, str]:
    c, theta = float(cfg["c"]), float(cfg["theta"])
    if not theta > 1:
        raise InvalidConfigurationError(f"theta must exceed 1, got {theta!r}")
    sched = GeometricSchedule(theta)
    f = PowerLaw(c, 1.0)
    l, m, trials = _positive_int(cfg, "l"), _positive_int(cfg, "m"), _positive_int(cfg, "trials")
    seed, s = int(cfg["seed"]), float(cfg["s"])
    report = estimators.riesz_experiment(sched, f, l, m, s, trials, seed, _positive_int(cfg, "threads"))

    def row(t):
        support = simulator.mu_lm_support(simulator.sample_path(seed, t, sched.n(m)), sched, l, m, f)
        return (t, support.measure(), len(support), support.riesz_energy(s))

    rows = [row(t) for t in range(trials)]
    return {
        "riesz_trials.csv": csv_text(("trial", "measure", "arc_count", "energy"), rows),
        "summary.json": json_text(report.to_dict()),
    }


FROSTMAN_HEADER = ("support", "probe", "start", "length", "diameter", "mass", "bound", "excess")


def cmd_frostman(cfg: dict) -> dict[str, str]:
    s = float(cfg["s"])
    if not 0 < s < 1:
        raise InvalidConfigurationError(f"need 0 < s < 1, got {s!r}")
    supports, probes = _positive_int(cfg, "supports"), _positive_int(cfg, "probes")
    arcs = _positive_int(cfg, "arcs")
    seed = int(cfg["seed"])
    rows, violations, jensen_fail, worst = [], 0, 0, -math.inf
    for k in range(supports):
        rng = simulator.trial_generator(seed, k)
        support = estimators.random_support(rng, arcs)
        probe = estimators.random_probe_arcs(rng, probes)
        mass = estimators.frostman_mass(support, s, probe + [(0.0, 1.0)])
        energy = support.riesz_energy(s) / support.measure() ** 2
        if mass[-1] < (1.0 / energy) * (1 - 1e-6) - 1e-6:
            jensen_fail += 1
        for j, ((a, ln), w) in enumerate(zip(probe, mass[:-1])):
            d = min(ln, 0.5)
            excess = w - d**s
            worst = max(worst, excess)
            violations += excess > 1e-6
            rows.append((k, j, a, ln, d, float(w), d**s, excess))
    summary = {
        "s": s,
        "supports": supports,
        "probes": probes,
        "violations": int(violations),
        "max_excess": worst,
        "jensen_failures": jensen_fail,
    }
    return {"frostman.csv": csv_text(FROSTMAN_HEADER, rows), "summary.json": json_text(summary)}


# -- parser -------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="flat JSON file with settings (flags win)")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    p.add_argument("--outdir", default=S, help="directory for CSV/JSON artifacts and meta.json")
    p.add_argument("--seed", type=lambda v: int(v, 0), default=S, help="master seed (default 0x5EEDC0DE)")
    p.add_argument("--threads", type=int, default=S, help="worker threads for trials")
    p.add_argument("--timestamp", action="store_true", default=S, help="record the run time in meta.json")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    ap = argparse.ArgumentParser(prog="unicover", description="Uniform random covering of the circle.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="dimension bounds for r_n = c/n")
    p.add_argument("--c", type=float, default=S)
    p.add_argument("--theta", type=float, default=S, help="fixed theta; optimised when omitted")
    p.add_argument("--kind", choices=["all", *KIND_NAMES], default=S)
    p.add_argument("--c-grid", dest="c_grid", default=S, help="a:b:step, writes the bound curve CSV")
    _common(p)

    p = sub.add_parser("conditions", help="classify a radius family")
    p.add_argument("--family", default=S, help='e.g. "logn:c=3"')
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo experiments")
    kinds = p.add_subparsers(dest="kind", required=True)
    for kind in ("coverage", "measure", "countable"):
        q = kinds.add_parser(kind)
        q.add_argument("--family", default=S)
        q.add_argument("--trials", type=int, default=S)
        if kind == "coverage":
            q.add_argument("--n", default=S, help="comma separated checkpoints")
        else:
            q.add_argument("--p", type=int, default=S)
            q.add_argument("--N", type=int, default=S)
            q.add_argument("--checkpoints", default=S, help="comma separated; default doubles from p")
        _common(q)

    p = sub.add_parser("cover-growth", help="greedy cover growth traces")
    p.add_argument("--variant", choices=["simple", "refined"], default=S)
    p.add_argument("--c", type=float, default=S)
    p.add_argument("--theta", type=float, default=S)
    p.add_argument("--l", type=int, default=S)
    p.add_argument("--levels", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    _common(p)

    p = sub.add_parser("riesz", help="Riesz energy of the block-intersection measure")
    for name, typ in (("c", float), ("theta", float), ("l", int), ("m", int), ("s", float), ("trials", int)):
        p.add_argument(f"--{name}", type=typ, default=S)
    _common(p)

    p = sub.add_parser("frostman", help="Frostman-transform inequality on random supports")
    for name, typ in (("s", float), ("supports", int), ("probes", int), ("arcs", int)):
        p.add_argument(f"--{name}", type=typ, default=S)
    _common(p)
    return ap


def _dispatch(key: str, cfg: dict) -> dict[str, str]:
    if key == "bounds":
        return cmd_bounds(cfg)
    if key == "conditions":
        return cmd_conditions(cfg)
    if key in ("coverage", "measure", "countable"):
        return cmd_simulate(key, cfg)
    if key == "cover-growth":
        return cmd_cover_growth(cfg)
    if key == "riesz":
        return cmd_riesz(cfg)
    return cmd_frostman(cfg)


def _error(exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    key = args.kind if args.command == "simulate" else args.command
    try:
        cfg = resolve(key, args)
        if args.dump_config:
            sys.stdout.write(json_text(cfg))
            return 0
        artifacts = _dispatch(key, cfg)
    except UnicoverError as exc:
        return _error(exc)
    if cfg["outdir"] is None:
        sys.stdout.write(next(iter(artifacts.values())))
        return 0
    out = Path(cfg["outdir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "command": args.command if key == args.command else f"simulate {key}",
            "library": "unicover",
            "version": __version__,
            "seed": cfg["seed"],
            "config": cfg,
            "outputs": list(artifacts),
        }
        if cfg["timestamp"]:
            meta["timestamp"] = datetime.now(timezone.utc).isoformat()
        for name, text in artifacts.items():
            (out / name).write_text(text, encoding="utf-8", newline="\n")
        (out / "meta.json").write_text(json_text(meta), encoding="utf-8", newline="\n")
    except OSError as exc:
        return _error(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
