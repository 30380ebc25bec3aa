"""Command-line front end: ``sphere-ie verify``.

Surface grammar (one ``--surface`` per surface)::

    equator:n=<int>
    clifford:k=<int>,n=<int>,r=<minimal|einstein|float>
    cartan
    profile:g=<int>,m=<int>,<int>

Exit codes: 0 when every verdict is pass, expected-fail or n/a; 1 when any
verdict is fail or inconclusive, or the report cannot be written; 2 on
configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .catalog import IsoparametricProfile, parse_surface
from .checks import CHECKS, DEFAULT_TOLERANCES, INCONCLUSIVE, OK_VERDICTS, CheckResult, VerifyContext, run_check
from .integrators import profile_h, profile_l2

SCHEMA_VERSION = "1.0"
SEED_ENV = "SPHERE_IE_SEED"
MIN_SAMPLES = 10_000
SUITES = tuple(CHECKS)
EXIT_OK, EXIT_UNEXPECTED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    suite: list[str]
    surfaces: list[str]
    seed: int
    samples: int = 1_000_000
    quad_degree: int = 24
    n_random: int = 20
    fd_points: int = 100
    force_mc: bool = False
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    format: str = "json"
    plot_dir: str | None = None
    workers: int = 1

    def context(self) -> VerifyContext:
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        return VerifyContext(seed=self.seed, samples=self.samples, degree=self.quad_degree,
                             n_random=self.n_random, fd_points=self.fd_points, force_mc=self.force_mc,
                             tolerances=tol)

    def public(self) -> dict:
        """Fields that determine the report contents (output location excluded)."""
        d = asdict(self)
        for k in ("out", "plot_dir", "workers"):
            d.pop(k)
        return d


# --------------------------------------------------------------------------
# configuration


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphere-ie", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run theorem checks and write a report",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog=__doc__.split("\n\n", 1)[1])
    v.add_argument("--suite", action="append", choices=SUITES + ("all",),
                   help="check to run (repeatable; default all)")
    v.add_argument("--surface", action="append", help="surface description (repeatable)")
    v.add_argument("--seed", type=int, help=f"run seed (default: ${SEED_ENV})")
    v.add_argument("--samples", type=int, help="Monte Carlo sample count (>= 10000)")
    v.add_argument("--quad-degree", type=int, help="quadrature nodes per angle")
    v.add_argument("--random-directions", type=int, dest="n_random", help="seeded random directions per surface")
    v.add_argument("--fd-points", type=int, help="points for the finite-difference Laplacian check")
    v.add_argument("--mc", action="store_true", default=None, dest="force_mc",
                   help="use Monte Carlo on tori and equators too")
    v.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                   help=f"tolerance override; keys: {', '.join(DEFAULT_TOLERANCES)}")
    v.add_argument("--out", help="report path (default: stdout)")
    v.add_argument("--format", choices=("json", "csv"), help="report format (default from --out suffix, else json)")
    v.add_argument("--plot-dir", help="directory for plot-ready CSV files")
    v.add_argument("--workers", type=int, help="parallel worker processes (results do not depend on it)")
    v.add_argument("--config", help="JSON or YAML file with the same keys; flags take precedence")
    return p


def _parse_tol(items) -> dict:
    out = {}
    for item in items:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"tolerance override {item!r} is not KEY=VALUE")
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance {key!r}; choose from {', '.join(DEFAULT_TOLERANCES)}")
        try:
            out[key] = float(val)
        except ValueError:
            raise ConfigError(f"tolerance {key} needs a number, got {val!r}") from None
        if not out[key] > 0:
            raise ConfigError(f"tolerance {key} must be positive")
    return out


def _load_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    for alias, key in (("surface", "surfaces"), ("quadrature_degree", "quad_degree")):
        if alias in data:
            data[key] = data.pop(alias)
    known = {f for f in RunConfig.__dataclass_fields__} | {"tol"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def parse_config(argv, env=None) -> RunConfig:
    """Merge flags over an optional config file; raises ConfigError on bad input."""
    env = os.environ if env is None else env
    args = build_parser().parse_args(argv)
    data = _load_file(args.config) if args.config else {}

    def pick(name, default=None):
        val = getattr(args, name, None)
        return val if val is not None else data.get(name, default)

    suite = args.suite or data.get("suite") or ["all"]
    if isinstance(suite, str):
        suite = [suite]
    if "all" in suite:
        suite = list(SUITES)
    bad = [s for s in suite if s not in SUITES]
    if bad:
        raise ConfigError(f"unknown suite {bad[0]!r}; choose from {', '.join(SUITES)}, all")
    suite = [s for s in SUITES if s in suite]

    surfaces = args.surface or data.get("surfaces") or []
    if isinstance(surfaces, str):
        surfaces = [surfaces]
    if not surfaces:
        raise ConfigError("at least one --surface is required")
    for text in surfaces:
        parse_surface(text)  # SurfaceSpecError carries the position marker

    seed = pick("seed")
    if seed is None and env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"${SEED_ENV} must be an integer") from None
    if seed is None:
        raise ConfigError(f"a seed is required: pass --seed or set ${SEED_ENV}")

    samples = int(pick("samples", 1_000_000))
    if samples < MIN_SAMPLES:
        raise ConfigError(f"--samples must be at least {MIN_SAMPLES}")
    degree = int(pick("quad_degree", 24))
    if not 2 <= degree <= 256:
        raise ConfigError("--quad-degree must lie in [2, 256]")
    n_random = int(pick("n_random", 20))
    fd_points = int(pick("fd_points", 100))
    workers = int(pick("workers", 1))
    if n_random < 0 or fd_points < 1 or workers < 1:
        raise ConfigError("--random-directions must be >= 0, --fd-points and --workers >= 1")

    tolerances = {}
    file_tol = data.get("tolerances") or {}
    if not isinstance(file_tol, dict):
        raise ConfigError("config 'tolerances' must be a mapping")
    tolerances.update(_parse_tol(f"{k}={v}" for k, v in file_tol.items()))
    tolerances.update(_parse_tol(data.get("tol") or []))
    tolerances.update(_parse_tol(args.tol))

    out = pick("out")
    fmt = pick("format")
    if fmt is None:
        fmt = "csv" if out and out.lower().endswith(".csv") else "json"
    if fmt not in ("json", "csv"):
        raise ConfigError("--format must be json or csv")

    return RunConfig(suite=suite, surfaces=list(surfaces), seed=int(seed), samples=samples, quad_degree=degree,
                     n_random=n_random, fd_points=fd_points, force_mc=bool(pick("force_mc", False)),
                     tolerances=tolerances, out=out, format=fmt, plot_dir=pick("plot_dir"), workers=workers)


# --------------------------------------------------------------------------
# execution


def _run_surface(job) -> list[dict]:
    """All requested checks on one surface; shares integrations through one context."""
    config, text = job
    ctx = config.context()
    try:
        surface = parse_surface(text)
    except Exception as exc:  # noqa: BLE001
        return [CheckResult(cid, text, [], [], "not evaluated", INCONCLUSIVE, notes=[f"{type(exc).__name__}: {exc}"])
                .to_dict() for cid in config.suite]
    return [run_check(cid, surface, ctx).to_dict() for cid in config.suite]


def run_checks(config: RunConfig) -> list[dict]:
    jobs = [(config, text) for text in config.surfaces]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run_surface, jobs))
    else:
        chunks = [_run_surface(j) for j in jobs]
    return [r for chunk in chunks for r in chunk]


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def exit_code(results: list[dict]) -> int:
    return EXIT_OK if all(r["verdict"] in OK_VERDICTS for r in results) else EXIT_UNEXPECTED


def build_report(config: RunConfig, results: list[dict]) -> dict:
    counts: dict[str, int] = {}
    for r in results:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "config": config.public(),
        "results": results,
        "summary": {"checks": len(results), "verdicts": counts, "exit_code": exit_code(results)},
    })


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))  # shortest round-trip decimal


CSV_COLUMNS = ("check_id", "surface", "quantity", "direction", "measured", "stderr", "target", "provenance",
               "holds", "verdict")


def render_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report["results"]:
        if not r["quantities"]:
            w.writerow([r["check_id"], r["surface"], "", "", "", "", "", "", "", r["verdict"]])
        for q in r["quantities"]:
            w.writerow([r["check_id"], r["surface"], q["name"], "" if q["direction"] is None else q["direction"],
                        _num(q["value"]), _num(q["stderr"]), _num(q["target"]), q["provenance"],
                        _num(q["holds"]), r["verdict"]])
    return buf.getvalue()


def write_plot_data(config: RunConfig, results: list[dict], directory: str) -> list[Path]:
    """phi^2 ratio by direction per surface, and h(theta) / alpha sweeps per profile."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    rows = []
    for r in results:
        if r["check_id"] != "inequality":
            continue
        for q in r["quantities"]:
            if q["name"] == "phi2_ratio":
                rows.append((r["surface"], q["direction"], _num(q["value"]), _num(q["stderr"]),
                             " ".join(_num(c) for c in r["directions"][q["direction"]])))
    if rows:
        path = out / "phi2_by_direction.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("surface", "direction", "phi2_over_volume", "stderr", "a"))
            w.writerows(rows)
        written.append(path)
    profiles = [p for p in map(parse_surface, config.surfaces) if isinstance(p, IsoparametricProfile)]
    if profiles:
        path = out / "profile_sweep.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("profile", "theta", "h", "sin2_abs_h", "abs_h_integral", "alpha"))
            for prof in profiles:
                l2 = profile_l2(prof, allow_degenerate=True)
                theta = np.linspace(0.0, math.pi / prof.g, 201)
                h = np.asarray(profile_h(prof, theta))
                dens = np.sin(prof.theta0 - theta) ** 2 * np.abs(h)
                for t, hv, dv in zip(theta, h, dens):
                    w.writerow((prof.text, _num(t), _num(hv), _num(dv), _num(l2.abs_h), _num(l2.alpha)))
        written.append(path)
    return written


def run_and_emit(config: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    results = run_checks(config)
    report = build_report(config, results)
    text = render_json(report) if config.format == "json" else render_csv(report)
    code = exit_code(results)
    try:
        if config.out:
            Path(config.out).write_text(text, encoding="utf-8")
        else:
            stdout.write(text)
        if config.plot_dir:
            write_plot_data(config, report["results"], config.plot_dir)
    except OSError as exc:
        # fall back to stdout so the computed results are not lost
        print(f"sphere-ie: cannot write report: {exc}; writing it to stdout", file=sys.stderr)
        stdout.write(text)
        return EXIT_UNEXPECTED
    for r in results:
        if r["verdict"] not in OK_VERDICTS:
            print(f"sphere-ie: {r['check_id']} on {r['surface']}: {r['verdict']}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse: --help exits 0, usage errors 2
        return int(exc.code or 0)
    except ValueError as exc:  # ConfigError, SurfaceSpecError, invalid profiles
        print(f"sphere-ie: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_and_emit(config)


if __name__ == "__main__":
    sys.exit(main())
