"""Command-line interface.

Subcommands:
    analytic    evaluate the closed-form outage values at one point
    montecarlo  estimate the outage at one point by simulation
    sweep       run a config-driven sweep, writing CSV and a figure
    verify      cross-check quadrature against simulation, exit 1 on fail

All subcommands read the same config format (see sweep.parse_config);
without --config the built-in defaults are used.  The worker count comes
from the EHRELAY_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .analytic import (
    FormulaRangeError,
    outage_direct_only,
    outage_high_snr,
    outage_quadrature,
)
from .channel import CombiningScheme
from .montecarlo import SimulationPlan, estimate_outage
from .params import DEFAULT_PARAMS, ParameterError
from .sweep import ConfigError, SweepSpec, compare_report, emit_csv, parse_config, run_sweep


def _load_config(path):
    if path is None:
        return DEFAULT_PARAMS, SweepSpec()
    return parse_config(path)


def _apply_overrides(spec: SweepSpec, args) -> SweepSpec:
    updates = {}
    if getattr(args, "trials", None) is not None:
        updates["mc_trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        updates["base_seed"] = args.seed
    if getattr(args, "m", None) is not None:
        updates["node_count"] = args.m
    return replace(spec, **updates) if updates else spec


def _cmd_analytic(args) -> int:
    params, spec = _load_config(args.config)
    spec = _apply_overrides(spec, args)
    print(f"outage quadrature (m={spec.node_count}): "
          f"{outage_quadrature(params, spec.node_count):.12g}")
    print(f"outage high_snr: {outage_high_snr(params):.12g}")
    print(f"outage direct_only: {outage_direct_only(params):.12g}")
    return 0


def _cmd_montecarlo(args) -> int:
    params, spec = _load_config(args.config)
    spec = _apply_overrides(spec, args)
    scheme = CombiningScheme.parse(args.scheme)
    plan = SimulationPlan(
        params=params, scheme=scheme, n_trials=spec.mc_trials, base_seed=spec.base_seed,
    )
    est = estimate_outage(plan)
    print(f"scheme={est.scheme_label} trials={est.n_trials} seed={est.base_seed}")
    print(f"p_out={est.p_hat:.12g} ci95=[{est.ci_low:.12g}, {est.ci_high:.12g}]")
    return 0


def _cmd_sweep(args) -> int:
    params, spec = _load_config(args.config)
    spec = _apply_overrides(spec, args)
    rows = run_sweep(params, spec)
    emit_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    if not args.no_figure:
        figure_path = args.figure or str(Path(args.out).with_suffix(".png"))
        from .figures import render_sweep_figure

        render_sweep_figure(rows, figure_path)
        print(f"wrote figure to {figure_path}")
    return 0


def _cmd_verify(args) -> int:
    params, spec = _load_config(args.config)
    spec = _apply_overrides(spec, args)
    # verification always needs both engines, whatever the config says
    spec = replace(spec, engines=("quadrature", "montecarlo"))
    rows = run_sweep(params, spec)
    report = compare_report(rows)
    print(report)
    return 0 if report.rstrip().endswith("OVERALL PASS") else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ehrelay",
        description="Outage analysis for an energy-harvesting two-way relay network",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(cmd):
        cmd.add_argument("--config", help="path to a key = value config file")
        cmd.add_argument("--seed", type=int, help="override the Monte Carlo base seed")
        cmd.add_argument("--trials", type=int, help="override the Monte Carlo trial count")
        cmd.add_argument("--m", type=int, help="override the quadrature node count")

    cmd = sub.add_parser("analytic", help="closed-form outage values at one point")
    add_common(cmd)
    cmd.set_defaults(handler=_cmd_analytic)

    cmd = sub.add_parser("montecarlo", help="simulated outage estimate at one point")
    add_common(cmd)
    cmd.add_argument(
        "--scheme", default="optimal",
        help="combining scheme: optimal, fixed:<split>, relay_only, direct_only",
    )
    cmd.set_defaults(handler=_cmd_montecarlo)

    cmd = sub.add_parser("sweep", help="run a sweep and write CSV plus a figure")
    add_common(cmd)
    cmd.add_argument("--out", default="sweep.csv", help="output CSV path")
    cmd.add_argument("--figure", help="output figure path (default: CSV path with .png)")
    cmd.add_argument("--no-figure", action="store_true", help="skip the figure")
    cmd.set_defaults(handler=_cmd_sweep)

    cmd = sub.add_parser("verify", help="compare quadrature against simulation")
    add_common(cmd)
    cmd.set_defaults(handler=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ParameterError, FormulaRangeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
