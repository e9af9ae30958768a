"""``holo`` command-line experiment runner.

Tolerance precedence: built-in default < ``HOLO_TOL`` < config file < ``--tol``.
The config file holds ``key=value`` lines (``#`` comments allowed); keys are
the long option names with dashes or underscores.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import experiments as ex
from .discrete import ChannelSequence
from .errors import HolonomyError
from .kraus import sequence_from_json
from .smooth import sampled_path

DEFAULT_TOL = 1e-8

# numeric option types by key; anything else in the config is rejected
CONFIG_KEYS = {
    "tol": float,
    "steps": int,
    "seed": int,
    "n": int,
    "d": int,
    "k": int,
    "points": int,
    "chi_points": int,
    "check_n": int,
    "repeats": int,
    "jobs": int,
}


def read_config(path: str | None) -> dict:
    if not path:
        return {}
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise SystemExit(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = CONFIG_KEYS[key](val)
    return out


def default_tol() -> float:
    env = os.environ.get("HOLO_TOL")
    return float(env) if env else DEFAULT_TOL


def _resolve(args: argparse.Namespace, cfg: dict, key: str, default):
    v = getattr(args, key, None)
    if v is not None:
        return v
    return cfg.get(key, default)


def _floats(text: str | None) -> list[float]:
    if not text:
        return []
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _crosscheck_one(kw: dict) -> ex.ExperimentReport:
    return ex.run_crosscheck(**kw)


def _combine(name: str, reports: list[ex.ExperimentReport]) -> ex.ExperimentReport:
    out = ex.ExperimentReport(name, params={"repeats": len(reports)}, seed=reports[0].seed)
    for r in reports:
        for key, v in r.residuals.items():
            full = f"{key}.seed{r.seed}"
            out.check(full, v, r.thresholds[key])
    out.scalars["seeds"] = [r.seed for r in reports]
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holo", description="Channel holonomy experiments.")
    p.add_argument("--config", help="key=value defaults file")
    p.add_argument("--tol", type=float, help="tolerance (overrides config and HOLO_TOL)")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="write the report series as CSV here")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("seq", help="holonomy of a channel sequence")
    s.add_argument("channels", help='JSON file: list of {"dim", "kraus"} or {"channels": [...]}')

    s = sub.add_parser("smooth", help="holonomy of a smooth path")
    s.add_argument("path", help="registered path name or JSON file with dense samples")
    s.add_argument("--params", help="comma-separated path parameters")
    s.add_argument("--steps", type=int)
    s.add_argument("--check-n", dest="check_n", type=int, help="also compare with an N-point discretisation")
    s.add_argument("--grid-sizes", dest="grid_sizes", help="run a convergence sweep over these N")

    s = sub.add_parser("crosscheck", help="direct vs Uhlmann vs gluing holonomy")
    s.add_argument("--seed", type=int)
    s.add_argument("-n", dest="n", type=int)
    s.add_argument("-d", dest="d", type=int)
    s.add_argument("-k", dest="k", type=int)
    s.add_argument("--constant", action="store_true")
    s.add_argument("--gauge-seed", dest="gauge_seed", type=int)
    s.add_argument("--repeats", type=int, help="run seeds seed..seed+repeats-1")
    s.add_argument("--jobs", type=int, help="worker processes for --repeats")

    s = sub.add_parser("4pi", help="4 pi periodicity of the interferometer")
    s.add_argument("--points", type=int)
    s.add_argument("--chi-points", dest="chi_points", type=int)
    s.add_argument("--no-phase-shift", dest="phase_shift", action="store_false")

    s = sub.add_parser("fixtures", help="overlap matrices of the three qubit channels")
    s.add_argument("--p-values", dest="p_values", help="comma-separated probabilities")

    s = sub.add_parser("holonomic", help="holonomic channel and measurement approximation")
    s.add_argument("family", nargs="?", default="rotating_plane")
    s.add_argument("--params", help="comma-separated family parameters")
    s.add_argument("--ns", default="16,64,256")
    s.add_argument("--steps", type=int)
    s.add_argument("--seed", type=int)
    return p


def _load_path(arg: str, params: list[float]):
    if arg.endswith(".json") or os.path.isfile(arg):
        obj = json.loads(Path(arg).read_text(encoding="utf-8"))
        # {"samples": [kraus_0, kraus_1, ...], "grid": [...]} with each kraus_j shaped (K, D, D, 2)
        samples = np.array(
            [[[[complex(z[0], z[1]) for z in row] for row in op] for op in sample] for sample in obj["samples"]]
        )
        return sampled_path(samples, obj.get("grid")), "sampled:" + arg
    return ex.make_path(arg, params), arg


def run(args: argparse.Namespace) -> ex.ExperimentReport:
    cfg = read_config(args.config)
    tol = args.tol if args.tol is not None else cfg.get("tol", default_tol())
    if args.verb == "seq":
        obj = json.loads(Path(args.channels).read_text(encoding="utf-8"))
        return ex.run_sequence(ChannelSequence(sequence_from_json(obj)), tol=tol)
    if args.verb == "smooth":
        params = _floats(args.params)
        steps = _resolve(args, cfg, "steps", 1024)
        if args.grid_sizes:
            if not (args.path.endswith(".json") or os.path.isfile(args.path)):
                return ex.run_convergence(args.path, params, _ints(args.grid_sizes), steps)
        path, label = _load_path(args.path, params)
        return ex.run_smooth(path, steps, _resolve(args, cfg, "check_n", 0), tol=max(tol, 1e-3), label=label)
    if args.verb == "crosscheck":
        kw = dict(
            seed=_resolve(args, cfg, "seed", 42),
            n=_resolve(args, cfg, "n", 4),
            d=_resolve(args, cfg, "d", 2),
            k=_resolve(args, cfg, "k", 4),
            constant=args.constant,
            gauge_seed=args.gauge_seed,
            tol=tol,
        )
        repeats = _resolve(args, cfg, "repeats", 1)
        if repeats <= 1:
            return ex.run_crosscheck(**kw)
        jobs = _resolve(args, cfg, "jobs", 1)
        kws = [dict(kw, seed=kw["seed"] + i) for i in range(repeats)]
        if jobs > 1:
            with ProcessPoolExecutor(jobs) as pool:
                reports = list(pool.map(_crosscheck_one, kws))
        else:
            reports = [_crosscheck_one(k) for k in kws]
        return _combine("crosscheck", reports)
    if args.verb == "4pi":
        points = _resolve(args, cfg, "points", 512)
        return ex.run_4pi(
            np.linspace(0, 8 * np.pi, points),
            with_phase_shift=args.phase_shift,
            chi_points=_resolve(args, cfg, "chi_points", 720),
            tol=min(tol, 1e-9),
        )
    if args.verb == "fixtures":
        pv = _floats(args.p_values) or list(np.linspace(0, 1, 5))
        return ex.run_overlap_fixtures(pv)
    if args.verb == "holonomic":
        return ex.run_holonomic(
            args.family,
            _floats(args.params),
            _ints(args.ns),
            steps=_resolve(args, cfg, "steps", 2048),
            seed=_resolve(args, cfg, "seed", 0),
        )
    raise AssertionError(args.verb)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run(args)
    except (HolonomyError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"holo: error: {exc}", file=sys.stderr)
        return 1
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if args.csv:
        Path(args.csv).write_text(report.series_csv(), encoding="utf-8")
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())
