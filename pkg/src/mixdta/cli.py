"""Command-line interface: run / sweep / validate."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import config as cfgmod
from . import report
from .dta import run_assignment, write_iteration_reports
from .errors import ConfigError, MixDtaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mixdta",
        description="Multiclass simulation-based dynamic traffic assignment "
        "for mixed CAV/HDV traffic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    p_run.add_argument("config")
    _common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a CAV penetration-rate sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument(
        "--pr", default="0,20,40,60,80,100",
        help="comma-separated penetration rates (default: 0,20,40,60,80,100)",
    )
    _common(p_sweep)

    p_val = sub.add_parser("validate", help="validate a config and echo the effective form")
    p_val.add_argument("config")

    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return _validate(args)
        if args.command == "run":
            return _run(args)
        return _sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MixDtaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _common(p):
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", default=None, help="override output directory")


def _load(args):
    cfg = cfgmod.load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
        cfg = cfgmod.resolve_config(cfg)
    if getattr(args, "out", None) is not None:
        cfg["output_dir"] = os.path.abspath(args.out)
    return cfg


def _validate(args) -> int:
    cfg = cfgmod.load_config(args.config)
    print(json.dumps(cfg, indent=2))
    return 0


def run_scenario(cfg: dict, out_dir: str | None = None) -> dict:
    """Run one scenario and write reports + figures; returns summary fields."""
    out = out_dir or cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    network = cfgmod.build_network(cfg)
    demand = cfgmod.build_demand(cfg, network)
    class_configs = cfgmod.build_class_configs(cfg)
    dta_config = cfgmod.build_dta_config(cfg)

    result = run_assignment(network, demand, class_configs, dta_config)

    with open(os.path.join(out, "effective_config.json"), "w") as fh:
        json.dump(cfg, fh, indent=2)
    write_iteration_reports(result.reports, os.path.join(out, "iteration_reports.csv"))
    report.write_trip_records(result.records, os.path.join(out, "trip_records.csv"))
    report.write_link_volumes(result.records, os.path.join(out, "link_volumes.csv"))
    final = result.reports[-1]
    report.write_summary(final, result.stop_reason, os.path.join(out, "summary.csv"))
    report.plot_convergence(result.reports, os.path.join(out, "convergence.png"))
    report.plot_link_volumes(network, result.records, os.path.join(out, "volumes.png"))
    print(
        f"converged={result.stop_reason} iterations={final.iteration + 1} "
        f"ttt_h={final.total_travel_time_h:.2f} gap_s={final.hybrid_gap_s:.3f}"
    )
    return {
        "pr": cfg["pr_cav"],
        "ttt_h": final.total_travel_time_h,
        "avg_speed_kmh": final.avg_speed_kmh,
        "avg_distance_km": final.avg_distance_km,
        "final_gap_s": final.hybrid_gap_s,
        "stop_reason": result.stop_reason,
    }


def _run(args) -> int:
    run_scenario(_load(args))
    return 0


def _sweep(args) -> int:
    cfg = _load(args)
    try:
        prs = [float(p) for p in args.pr.split(",") if p.strip() != ""]
    except ValueError:
        raise ConfigError(f"--pr: cannot parse {args.pr!r}") from None
    base_out = cfg["output_dir"]
    rows = []
    for pr in prs:
        sub_cfg = json.loads(json.dumps(cfg))
        sub_cfg["pr_cav"] = pr
        sub_out = os.path.join(base_out, f"pr_{int(pr):03d}")
        sub_cfg["output_dir"] = sub_out
        rows.append(run_scenario(sub_cfg))
    os.makedirs(base_out, exist_ok=True)
    report.write_sweep_summary(rows, os.path.join(base_out, "sweep_summary.csv"))
    report.plot_sweep(rows, os.path.join(base_out, "sweep_ttt.png"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
