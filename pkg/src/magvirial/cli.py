"""Command-line surface: run, hypotheses, verify, scan.

Exit codes: 0 for completed runs and detected blow-up (the expected outcome
of the blow-up scenarios), 1 for failed verification checks, 2 for config
errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, build_sim_config, config_hash, load_config_file, set_by_path
from .diagnostics import levine_diagnostics, quadratic_bound_check
from .dynamics import run
from .grid import make_grid
from .operators import sample_hamiltonian
from .potentials import hypothesis_report
from .verify import run_suite, tol_scale


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _summarize(cfg: dict, series, report) -> dict:
    r0 = series.records[0]
    last = series.records[-1]
    summary = {
        "version": __version__,
        "config_hash": config_hash(cfg),
        "config": cfg,
        "grid": {
            "dim": series.metadata["dim"],
            "extent": series.metadata["extent"],
            "points": series.metadata["points"],
            "spacing": 2.0 * series.metadata["extent"] / series.metadata["points"],
        },
        "potential": {
            "epsilon": series.metadata["epsilon"],
            "taper_radii": series.metadata["taper_radii"],
            "gauge_residual": series.metadata["gauge_residual"],
            "trap_free": series.metadata["trap_free"],
        },
        "termination": {
            "status": report.status,
            "t": report.t,
            "trigger": report.trigger,
            "steps": report.steps,
        },
        "initial": {
            "mass": r0.mass,
            "energy": r0.energy,
            "variance": r0.variance,
            "variance_rate": r0.variance_rate,
            "sup_norm": r0.sup_norm,
            "h1A": r0.h1a,
        },
        "drift": {
            "mass_rel": abs(last.mass - r0.mass) / max(r0.mass, 1e-300),
            "energy_rel": abs(last.energy - r0.energy) / max(abs(r0.energy), 1e-300),
        },
        "boundary": {
            "max_fraction": float(max(r.boundary_mass_frac for r in series.records)),
            "warned": any(r.boundary_flag for r in series.records),
        },
        "notes": report.notes,
        "warnings": report.warnings,
    }
    bound = quadratic_bound_check(series)
    summary["bounds"] = {
        "detection_root": bound.detection_root,
        "bound_root": bound.bound_root,
        "quadratic_bound_applicable": bound.applicable,
        "quadratic_bound_ok": bound.ok,
        "quadratic_bound_first_violation_t": bound.first_violation_t,
        "fitted_coefficient": bound.fitted_coefficient,
    }
    if series.equation == "wave":
        lev = levine_diagnostics(series, float(cfg["p"]), sup_gate=10.0)
        summary["bounds"]["levine_alpha"] = lev.alpha
        summary["bounds"]["levine_time_bound"] = lev.time_bound
        summary["bounds"]["levine_concavity_ok"] = lev.concavity_ok
        summary["bounds"]["levine_hfun_ok"] = lev.hfun_ok
    return summary


def run_config_to_dir(cfg: dict, out_dir) -> dict:
    """Execute one validated config tree; write series.csv and summary.json."""
    sim = build_sim_config(cfg)
    series, report = run(sim)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    series.write_csv(out_dir / "series.csv")
    summary = _summarize(cfg, series, report)
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return summary


def cmd_run(args) -> int:
    cfg = load_config_file(args.config)
    if "scan" in cfg:
        raise ConfigError("config contains a 'scan' block; use the scan command")
    if args.seed is not None:
        cfg["seed"] = args.seed
    out_dir = Path(args.out) if args.out else Path(args.config).with_suffix("") .parent / (Path(args.config).stem + "_out")
    summary = run_config_to_dir(cfg, out_dir)
    status = summary["termination"]["status"]
    print(f"{status} at t={summary['termination']['t']:.6g} -> {out_dir}")
    return 0 if status in ("completed", "blowup_detected") else 1


def cmd_hypotheses(args) -> int:
    cfg = load_config_file(args.config)
    sim = build_sim_config(cfg)
    grid = make_grid(sim.dim, sim.extent, sim.points)
    spec = sim.potential.with_grid_defaults(grid)
    report = hypothesis_report(spec, grid)
    payload = report.as_dict()
    payload["config_hash"] = config_hash(cfg)
    print(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))
    return 0


def cmd_verify(args) -> int:
    results = run_suite(args.suite, seed=args.seed or 0, verbose=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed (tolerance scale {tol_scale():g})")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / f"verify_{args.suite}.json", "w") as fh:
            json.dump([asdict(r) for r in results], fh, indent=2, default=_json_default)
            fh.write("\n")
    return 0 if passed == len(results) else 1


def cmd_scan(args) -> int:
    cfg = load_config_file(args.config)
    scan = cfg.pop("scan", None)
    if not scan or not isinstance(scan, dict) or not all(scan.values()):
        raise ConfigError("scan command requires a non-empty 'scan' block")
    if args.seed is not None:
        cfg["seed"] = args.seed
    keys = list(scan)
    grid_points = list(itertools.product(*(scan[k] for k in keys)))

    def one(point):
        local = json.loads(json.dumps(cfg))
        for key, value in zip(keys, point):
            set_by_path(local, key, value)
        sim = build_sim_config(local)
        series, report = run(sim)
        r0 = series.records[0]
        return {
            "params": dict(zip(keys, point)),
            "status": report.status,
            "trigger": report.trigger,
            "t": report.t,
            "initial_energy": r0.energy,
            "initial_mass": r0.mass,
        }

    rows = []
    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(one, grid_points))
    else:
        rows = [one(pt) for pt in grid_points]

    out_dir = Path(args.out) if args.out else Path(args.config).parent / (Path(args.config).stem + "_scan")
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"config_hash": config_hash({**cfg, "scan": scan}), "rows": rows}
    with open(out_dir / "scan_summary.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    for row in rows:
        print(json.dumps(row, sort_keys=True, default=_json_default))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magvirial",
        description="Pseudospectral magnetic NLS/wave runs with virial and blow-up diagnostics",
    )
    parser.add_argument("--version", action="version", version=f"magvirial {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configured scenario")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_hyp = sub.add_parser("hypotheses", help="evaluate the potential hypothesis report")
    p_hyp.add_argument("--config", required=True)
    p_hyp.set_defaults(func=cmd_hypotheses)

    p_ver = sub.add_parser("verify", help="run a named verification suite")
    p_ver.add_argument("suite")
    p_ver.add_argument("--out", default=None)
    p_ver.add_argument("--seed", type=int, default=None)
    p_ver.set_defaults(func=cmd_verify)

    p_scan = sub.add_parser("scan", help="run a parameter grid")
    p_scan.add_argument("--config", required=True)
    p_scan.add_argument("--out", default=None)
    p_scan.add_argument("--threads", type=int, default=1)
    p_scan.add_argument("--seed", type=int, default=None)
    p_scan.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
