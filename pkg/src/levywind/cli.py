"""Command-line runner: ``levywind <experiment> --config cfg.json [--seed N] [--threads K] [--out DIR]``.

Exit codes: 0 success, 2 invalid configuration (error JSON on stderr),
3 numerical failure (non-convergent continued fraction, divergent moment).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .experiments import EXPERIMENTS, ConfigError, run
from .moments import DivergentMoment, NonConvergence


def version_string():
    """``<version>+g<commit>[.dirty]`` when run from a git checkout, else ``<version>``."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty=.dirty", "--abbrev=12"],
            cwd=here, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return v


def write_csv(path, table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="levywind", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=False, help="JSON config file (defaults used when omitted)")
    ap.add_argument("--seed", type=int, default=None, help="override base_seed")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=".", help="output directory")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = {}
        if args.config:
            try:
                raw = json.loads(Path(args.config).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from None
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        t0 = time.perf_counter()
        report, tables = run(args.experiment, raw, threads=args.threads, seed=args.seed)
        wall = time.perf_counter() - t0
    except ConfigError as exc:
        return _error("config", str(exc), 2)
    except (NonConvergence, DivergentMoment) as exc:
        return _error("numeric", f"{type(exc).__name__}: {exc}", 3)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, table in tables.items():
        write_csv(out / name, table)
    doc = {
        "experiment": args.experiment,
        "version": version_string(),
        "backend": kernels.BACKEND,
        "seeds": report.seeds,
        "wall_clock_s": wall,
        "outputs": sorted(tables),
        **report.to_dict(),
    }
    (out / "report.json").write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
