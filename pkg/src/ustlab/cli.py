"""Command line entry point: ``ustlab <experiment> [options]``.

Every run writes ``<experiment>.json`` (and, where there is tabular data,
``<experiment>.csv``) to ``--out``.  Exit status is 0 on success, 2 for usage
or input errors, 3 when window truncation dominates a statistic and 4 when an
internal invariant is violated.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import experiments as ex
from .spatial import load_mst
from .tree import IntegrityError, SnapshotParseError, TruncationError, load_snapshot, save_snapshot
from .lattice import RandomSource
from .wilson import sample_ust

EXPERIMENTS = ("gen", "lerw-exponent", "volume", "walk-dw", "heat-ds", "metric-compare",
               "gh-distance", "count-st", "range")

DEFAULTS = {
    "side": None, "rmax": None, "steps": None, "samples": None, "margin": None,
    "laziness": 0.5, "seed": None, "threads": 1, "out": ".", "rows": 3, "cols": 3,
    "points": 8, "pairs": 200, "tree": None, "trees": None,
}

PER_EXPERIMENT = {
    "gen": {"side": 64, "margin": 2.0},
    "lerw-exponent": {"rmax": 256, "samples": 2000, "margin": 4.0},
    "volume": {"side": 512, "rmax": 512, "samples": 200, "margin": 2.0},
    "walk-dw": {"side": 128, "rmax": 128, "samples": 500, "margin": 2.0, "steps": 2 ** 16},
    "heat-ds": {"side": 256, "steps": 2 ** 14, "samples": 50, "margin": 2.0},
    "metric-compare": {"side": 128, "samples": 50, "margin": 2.0},
    "gh-distance": {"side": 32, "samples": 10, "margin": 2.0},
    "count-st": {},
    "range": {"side": 64, "steps": "5000,50000", "margin": 2.0},
}

INT_KEYS = {"side", "rmax", "samples", "seed", "threads", "rows", "cols", "points", "pairs"}
FLOAT_KEYS = {"margin", "laziness"}


class UsageError(ValueError):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="ustlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="file of key=value lines; flags override it")
        s.add_argument("--side", type=int)
        s.add_argument("--rmax", type=int)
        s.add_argument("--steps", help="integer, or comma list for range")
        s.add_argument("--samples", type=int)
        s.add_argument("--margin", type=float)
        s.add_argument("--laziness", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--threads", type=int)
        s.add_argument("--out")
        if name == "count-st":
            s.add_argument("--rows", type=int)
            s.add_argument("--cols", type=int)
        if name == "gh-distance":
            s.add_argument("--points", type=int)
            s.add_argument("--trees", nargs=2, metavar="MST", help="compare two mst-v1 files")
        if name == "metric-compare":
            s.add_argument("--pairs", type=int)
        if name == "range":
            s.add_argument("--tree", help="ust-v1 snapshot to use instead of sampling")
    return p


def read_config(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {value!r}") from None
    return value


def resolve(args) -> dict:
    """Built-in defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(PER_EXPERIMENT[args.experiment])
    if args.config:
        for k, v in read_config(args.config).items():
            if k not in cfg:
                raise UsageError(f"unknown config key {k!r}")
            cfg[k] = v
    for k, v in vars(args).items():
        if k in cfg and v is not None:
            cfg[k] = v
    cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    cfg["experiment"] = args.experiment
    _validate(cfg)
    return cfg


def _validate(cfg):
    exp = cfg["experiment"]
    for k in ("side", "rmax", "samples", "threads", "rows", "cols", "points", "pairs"):
        if cfg.get(k) is not None and cfg[k] <= 0:
            raise UsageError(f"--{k} must be positive")
    if not 0 <= cfg["laziness"] < 1:
        raise UsageError("--laziness must be in [0, 1)")
    if cfg.get("margin") is not None and cfg["margin"] < 1:
        raise UsageError("--margin must be >= 1")
    randomized = exp not in ("count-st",) and not (exp == "gh-distance" and cfg.get("trees"))
    if randomized and cfg["seed"] is None:
        raise UsageError(f"{exp} is randomized and needs an explicit --seed")
    if cfg["seed"] is not None and not 0 <= cfg["seed"] < 2 ** 64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    if exp != "range" and cfg.get("steps") is not None:
        cfg["steps"] = _coerce("side", cfg["steps"])
        if cfg["steps"] <= 0:
            raise UsageError("--steps must be positive")


def _steps_list(value):
    try:
        steps = [int(s) for s in str(value).split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--steps: cannot parse {value!r}") from None
    if not steps or min(steps) <= 0:
        raise UsageError("--steps must be positive")
    return steps


def run(cfg) -> tuple:
    """Dispatch one experiment; returns ``(Outcome, extra files written)``."""
    exp = cfg["experiment"]
    out = Path(cfg["out"])
    seed, threads = cfg["seed"], cfg["threads"]
    files = []
    if exp == "gen":
        t = sample_ust(cfg["side"], cfg["margin"], RandomSource(seed, 0).generator, seed=seed)
        path = out / "tree.ust"
        save_snapshot(t, path)
        files.append(str(path))
        return ex.Outcome(None, None, None, 1, extra={"vertices": t.n, "snapshot": str(path)}), files
    if exp == "lerw-exponent":
        return ex.run_lerw_exponent(cfg["rmax"], cfg["samples"], cfg["margin"], seed, threads), files
    if exp == "volume":
        return ex.run_volume(cfg["side"], cfg["rmax"], cfg["samples"], cfg["margin"], seed,
                             threads), files
    if exp == "walk-dw":
        return ex.run_walk_dw(cfg["side"], cfg["rmax"], cfg["samples"], cfg["margin"], seed,
                              threads, tmax=cfg["steps"]), files
    if exp == "heat-ds":
        return ex.run_heat_ds(cfg["side"], cfg["steps"], cfg["samples"], cfg["laziness"],
                              cfg["margin"], seed, threads), files
    if exp == "metric-compare":
        return ex.run_metric_compare(cfg["side"], cfg["samples"], cfg["pairs"], cfg["margin"],
                                     seed, threads), files
    if exp == "gh-distance":
        trees = None
        if cfg.get("trees"):
            trees = tuple(load_mst(p) for p in cfg["trees"])
        return ex.run_gh_distance(cfg["side"], cfg["samples"], cfg["points"], cfg["margin"],
                                  seed or 0, threads, trees=trees), files
    if exp == "count-st":
        return ex.run_count_st(cfg["rows"], cfg["cols"]), files
    if exp == "range":
        tree = load_snapshot(cfg["tree"]) if cfg.get("tree") else None
        return ex.run_range(cfg["side"], _steps_list(cfg["steps"]), cfg["margin"], seed,
                            tree=tree), files
    raise UsageError(f"unknown experiment {exp}")


def _jsonable(v):
    if hasattr(v, "item"):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def write_outputs(cfg, outcome, runtime, build):
    out = Path(cfg["out"])
    params = {k: v for k, v in cfg.items() if k not in ("experiment",)}
    summary = {
        "experiment": cfg["experiment"],
        "params": params,
        "estimate": outcome.estimate,
        "stderr": outcome.stderr,
        "ci95": outcome.ci95,
        "n_samples": outcome.n_samples,
        "seed": cfg["seed"],
        "runtime_s": round(runtime, 3),
        "build": build,
        "details": outcome.extra,
    }
    paths = []
    if outcome.header:
        path = out / f"{cfg['experiment']}.csv"
        with open(path, "w", newline="") as fh:
            fh.write(f"# config: {json.dumps(_jsonable(params), sort_keys=True)}\n")
            fh.write(f"# build: {build}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(outcome.header)
            w.writerows(outcome.rows)
        paths.append(str(path))
    path = out / f"{cfg['experiment']}.json"
    summary["files"] = paths
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return summary


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        Path(cfg["out"]).mkdir(parents=True, exist_ok=True)
        t0 = time.perf_counter()
        outcome, _ = run(cfg)
        summary = write_outputs(cfg, outcome, time.perf_counter() - t0, ex.build_id())
    except (UsageError, SnapshotParseError, FileNotFoundError, ValueError) as e:
        if isinstance(e, IntegrityError):
            print(f"ustlab: integrity error: {e}", file=sys.stderr)
            return 4
        print(f"ustlab: {e}", file=sys.stderr)
        return 2
    except (ex.TruncationDominated, TruncationError) as e:
        print(f"ustlab: truncation-dominated statistic {e.statistic}: {e}", file=sys.stderr)
        return 3
    except (IntegrityError, AssertionError) as e:
        print(f"ustlab: internal invariant breach: {e}", file=sys.stderr)
        return 4
    print(json.dumps({k: _jsonable(summary[k]) for k in ("experiment", "estimate", "stderr",
                                                          "ci95", "n_samples")}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
