"""Batch command-line front-end.

Three subcommands:

  lcodr run   deterministic evaluation of every scheme x application pairing
  lcodr vf    value factors from price and availability-profile files
  lcodr mc    Monte-Carlo uncertainty propagation and cheapest-technology
              probabilities against the storage-cost reference table

All outputs are CSV files plus a manifest.json in the output directory.
Output is byte-deterministic: fixed row order (scheme, then application,
then sample), shortest-roundtrip float rendering, and a run id derived from
the effective configuration rather than from wall-clock time.

Exit codes: 0 success, 1 usage, 2 configuration error, 3 data error,
4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

from . import __version__
from .costing import evaluate_pairing
from .data import (
    DataError,
    default_bundle,
    load_boundary_csv,
    load_lcos_reference,
    load_profile_pool_csv,
    load_timeseries_csv,
)
from .model import (
    Assumptions,
    LcodrError,
    ParseError,
    SchemaVersionError,
    SchemeKind,
    ValidationError,
    load_config,
    parameter_set_to_dict,
)
from .uncertainty import (
    COST_COMPONENTS,
    LcosSampling,
    McConfig,
    cheapest_probability,
    run_monte_carlo,
)
from .valuefactor import ValueFactorError, v2g_value_factors, value_factor, align
from .data import _pool_total

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(value) -> str:
    """Shortest-roundtrip cell rendering; None and NaN become empty."""
    if value is None:
        return ""
    if isinstance(value, float):
        if value != value:   # NaN
            return ""
        return repr(float(value))   # float() drops numpy scalar wrappers
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _write_csv(path: Path, header: List[str], rows, run_id: str) -> None:
    lines = [f"# run_id={run_id}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _hash_dict(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _hash_file(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _write_manifest(out: Path, run_id: str, args, params, data_hashes: dict,
                    extra: Optional[dict] = None) -> None:
    assumptions = params.assumptions
    manifest = {
        "tool_version": __version__,
        "run_id": run_id,
        "seed": getattr(args, "seed", None),
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "data_files": data_hashes,
        "assumption_flags": {
            "rpt_floor_at_base": assumptions.rpt_floor_at_base,
            "v2g_rebound_roundtrip": assumptions.v2g_rebound_roundtrip,
            "cycle_constraint_direction": assumptions.cycle_constraint_direction,
            "reward_base_hours": assumptions.reward_base_hours,
            "reward_base_hours_differs_from_base_plugin_time": (
                assumptions.reward_base_hours is not None
                and assumptions.reward_base_hours != params.ev.base_plugin_time),
            "discount_rate": params.econ.discount_rate,
        },
    }
    if extra:
        manifest.update(extra)
    out.joinpath("manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Shared loading
# ---------------------------------------------------------------------------

def _apply_assumption_flags(params, args):
    """Rebuild the parameter set with assumption overrides from flags."""
    a = params.assumptions
    changed = Assumptions(
        rpt_floor_at_base=not args.no_rpt_floor if args.no_rpt_floor else a.rpt_floor_at_base,
        v2g_rebound_roundtrip=(not args.simple_rebound) if args.simple_rebound
        else a.v2g_rebound_roundtrip,
        cycle_constraint_direction=args.cycle_direction or a.cycle_constraint_direction,
        reward_base_hours=args.reward_base_hours if args.reward_base_hours is not None
        else a.reward_base_hours,
    )
    from dataclasses import replace
    return replace(params, assumptions=changed)


def _load(args):
    params, apps = load_config(args.config)
    params = _apply_assumption_flags(params, args)
    if getattr(args, "applications", None):
        wanted = [name.strip() for name in args.applications.split(";")]
        known = {app.name for app in apps}
        for name in wanted:
            if name not in known:
                raise ValidationError(f"unknown application {name!r}", "applications")
        apps = [app for app in apps if app.name in wanted]
    schemes = list(SchemeKind)
    if getattr(args, "schemes", None):
        schemes = [SchemeKind.from_name(s.strip()) for s in args.schemes.split(",")]
    return params, apps, schemes


def _load_profile_data(args):
    """Price and availability profiles, from files when given, otherwise the
    bundled synthetic dataset. Returns (price, ev_pool, hp_pool, v2g_power,
    v2g_energy, data_hashes)."""
    hashes = {}
    bundle = None

    def bundled():
        nonlocal bundle
        if bundle is None:
            bundle = default_bundle()
        return bundle

    if args.price:
        price = load_timeseries_csv(args.price, unit="$/MWh")
        hashes["price"] = _hash_file(args.price)
    else:
        price = bundled().price
        hashes["price"] = "synthetic"
    if args.ev_pool:
        ev_pool = load_profile_pool_csv(args.ev_pool)
        hashes["ev_pool"] = _hash_file(args.ev_pool)
    else:
        ev_pool = bundled().ev_charging_pool
        hashes["ev_pool"] = "synthetic"
    if args.hp_pool:
        hp_pool = load_profile_pool_csv(args.hp_pool)
        hashes["hp_pool"] = _hash_file(args.hp_pool)
    else:
        hp_pool = bundled().heating_pool
        hashes["hp_pool"] = "synthetic"
    if args.v2g_power:
        from .valuefactor import AvailabilityProfile, ProfileKind
        series = load_timeseries_csv(args.v2g_power, unit="kW")
        v2g_power = AvailabilityProfile(ProfileKind.V2G_POWER_BOUNDARY, series)
        hashes["v2g_power"] = _hash_file(args.v2g_power)
    else:
        v2g_power = bundled().v2g_power
        hashes["v2g_power"] = "synthetic"
    if args.v2g_boundaries:
        v2g_energy = load_boundary_csv(args.v2g_boundaries)
        hashes["v2g_boundaries"] = _hash_file(args.v2g_boundaries)
    else:
        v2g_energy = bundled().v2g_energy
        hashes["v2g_boundaries"] = "synthetic"
    return price, ev_pool, hp_pool, v2g_power, v2g_energy, hashes


def _computed_value_factors(args):
    from .model import ValueFactorTable
    price, ev_pool, hp_pool, v2g_power, v2g_energy, hashes = _load_profile_data(args)
    vf_power, vf_energy = v2g_value_factors(price, v2g_power, v2g_energy)
    price_sc, sc_total, _ = align(price, _pool_total(ev_pool))
    vf_sc = value_factor(price_sc, sc_total.series)
    price_hp, hp_total, _ = align(price, _pool_total(hp_pool))
    vf_hp = value_factor(price_hp, hp_total.series)
    table = ValueFactorTable(v2g_power=vf_power, v2g_energy=vf_energy,
                             smart_charging=vf_sc, heat_pump=vf_hp)
    return table, hashes


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

_RUN_HEADER = [
    "scheme", "application", "status", "reason", "binding_constraint",
    "contracted_assets", "contracted_assets_ceiled", "available_assets",
    "required_plugin_time_h", "power_reduction_kw", "tank_area_m2",
    "tank_volume_m3", "investment_usd", "om_pv_usd", "rewards_pv_usd",
    "rebound_pv_usd", "eol_pv_usd", "energy_pv_mwh",
    "lcodr_energy_usd_per_mwh", "lcodr_power_usd_per_kw_year",
    "value_factor", "lcodr_vf_usd_per_mwh",
]


def _run_row(ev) -> list:
    s, b = ev.sizing, ev.breakdown
    return [
        ev.scheme.value, ev.application.name, ev.status, ev.reason,
        s.binding_constraint.value if s else "",
        s.contracted_assets if s else None,
        s.contracted_assets_ceiled if s else None,
        s.available_assets if s else None,
        s.required_plugin_time if s else None,
        s.power_reduction if s else None,
        s.tank_area if s else None,
        s.tank_volume if s else None,
        b.investment if b else None, b.om_pv if b else None,
        b.rewards_pv if b else None, b.rebound_pv if b else None,
        b.eol_pv if b else None, b.energy_pv if b else None,
        b.lcodr_energy if b else None, b.lcodr_power if b else None,
        b.value_factor if b else None, b.lcodr_vf if b else None,
    ]


def cmd_run(args) -> int:
    params, apps, schemes = _load(args)
    data_hashes = {}
    if args.compute_vf:
        from dataclasses import replace
        table, data_hashes = _computed_value_factors(args)
        params = replace(params, value_factors=table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_id = _hash_dict({"command": "run",
                         "config": parameter_set_to_dict(params),
                         "apps": [app.name for app in apps],
                         "schemes": [s.value for s in schemes]})
    rows = []
    for scheme in schemes:
        for app in apps:
            rows.append(_run_row(evaluate_pairing(scheme, app, params)))
    _write_csv(out / "lcodr_deterministic.csv", _RUN_HEADER, rows, run_id)
    _write_manifest(out, run_id, args, params, data_hashes)
    print(f"wrote {out / 'lcodr_deterministic.csv'} ({len(rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# vf
# ---------------------------------------------------------------------------

def cmd_vf(args) -> int:
    params, _, _ = _load(args)
    price, ev_pool, hp_pool, v2g_power, v2g_energy, hashes = _load_profile_data(args)
    vf_power, vf_energy = v2g_value_factors(price, v2g_power, v2g_energy)
    price_sc, sc_total, _ = align(price, _pool_total(ev_pool))
    vf_sc = value_factor(price_sc, sc_total.series)
    price_hp, hp_total, _ = align(price, _pool_total(hp_pool))
    vf_hp = value_factor(price_hp, hp_total.series)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_id = _hash_dict({"command": "vf", "data": hashes, "seed": args.seed,
                         "subsample": args.subsample, "iterations": args.iterations})
    rows = [
        ["v2g_power", vf_power],
        ["v2g_energy", vf_energy],
        ["smart_charging", vf_sc],
        ["heat_pump", vf_hp],
    ]
    _write_csv(out / "value_factors.csv", ["scheme", "value_factor"], rows, run_id)
    written = [out / "value_factors.csv"]

    if args.subsample:
        from .valuefactor import vf_subsample_mc
        dist = vf_subsample_mc(ev_pool, price, subset_size=args.subsample,
                               iterations=args.iterations, seed=args.seed)
        sample_rows = [[i, float(v)] for i, v in enumerate(dist.samples)]
        _write_csv(out / "vf_distribution.csv",
                   ["iteration", "value_factor"], sample_rows, run_id)
        summary = [["mean", dist.mean], ["median", dist.median],
                   ["p5", dist.p5], ["p95", dist.p95]]
        _write_csv(out / "vf_distribution_summary.csv",
                   ["statistic", "value_factor"], summary, run_id)
        written += [out / "vf_distribution.csv", out / "vf_distribution_summary.csv"]

    _write_manifest(out, run_id, args, params, hashes)
    print(f"wrote {', '.join(str(p) for p in written)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# mc
# ---------------------------------------------------------------------------

def cmd_mc(args) -> int:
    params, apps, schemes = _load(args)
    data_hashes = {}
    if args.compute_vf:
        from dataclasses import replace
        table, data_hashes = _computed_value_factors(args)
        params = replace(params, value_factors=table)
    lcos = load_lcos_reference(args.lcos)
    data_hashes["lcos"] = _hash_file(args.lcos) if args.lcos else "bundled"
    cfg = McConfig(samples=args.samples, sigma_inputs=args.sigma,
                   sigma_vf=args.sigma_vf, seed=args.seed,
                   lcos_sampling=LcosSampling(args.lcos_sampling))
    dists = run_monte_carlo(schemes, apps, params, cfg, workers=args.workers)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_id = _hash_dict({"command": "mc",
                         "config": parameter_set_to_dict(params),
                         "apps": [app.name for app in apps],
                         "schemes": [s.value for s in schemes],
                         "mc": [cfg.samples, cfg.sigma_inputs, cfg.sigma_vf,
                                cfg.truncation_z, cfg.seed, cfg.lcos_sampling.value],
                         "data": data_hashes})

    summary_rows = [[d.technology, d.application, d.feasible_fraction,
                     d.mean, d.median, d.p5, d.p95] for d in dists]
    _write_csv(out / "lcodr_mc.csv",
               ["technology", "application", "feasible_fraction", "mean",
                "median", "p5", "p95"], summary_rows, run_id)

    prob_rows = []
    by_app = {}
    for d in dists:
        by_app.setdefault(d.application, []).append(d)
    for app in apps:
        ds = by_app[app.name]
        entries = [(e.technology, e.lcos_usd_per_mwh)
                   for e in lcos if e.application == app.name]
        try:
            probs = cheapest_probability(ds, cfg, entries)
        except LcodrError:
            continue   # no feasible technology for this application
        for order, (tech, prob) in enumerate(probs.items()):
            prob_rows.append([app.name, tech, order, prob])
    _write_csv(out / "cheapest_probability.csv",
               ["application", "technology", "tie_break_order", "probability"],
               prob_rows, run_id)

    comp_rows = []
    for scheme in schemes:
        per_app = []
        for d in dists:
            if d.technology != scheme.value or d.feasible_fraction == 0:
                continue
            f = d.feasible
            total = sum(d.components[c][f] for c in COST_COMPONENTS)
            per_app.append([float((d.components[c][f] / total).mean())
                            for c in COST_COMPONENTS])
        if not per_app:
            continue
        n = len(per_app)
        shares = [sum(v[c] for v in per_app) / n for c in range(len(COST_COMPONENTS))]
        for c, name in enumerate(COST_COMPONENTS):
            comp_rows.append([scheme.value, name, shares[c]])
    _write_csv(out / "cost_composition.csv",
               ["technology", "component", "share"], comp_rows, run_id)

    written = [out / "lcodr_mc.csv", out / "cheapest_probability.csv",
               out / "cost_composition.csv"]
    if args.emit_samples:
        sample_rows = []
        for d in dists:
            for i in range(cfg.samples):
                sample_rows.append([d.technology, d.application, i,
                                    bool(d.feasible[i]), float(d.samples[i])])
        _write_csv(out / "lcodr_samples.csv",
                   ["technology", "application", "sample_index", "feasible",
                    "lcodr_vf_usd_per_mwh"], sample_rows, run_id)
        written.append(out / "lcodr_samples.csv")

    _write_manifest(out, run_id, args, params, data_hashes,
                    extra={"mc": {"samples": cfg.samples,
                                  "sigma_inputs": cfg.sigma_inputs,
                                  "sigma_vf": cfg.sigma_vf,
                                  "truncation_z": cfg.truncation_z,
                                  "lcos_sampling": cfg.lcos_sampling.value}})
    print(f"wrote {', '.join(str(p) for p in written)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="YAML config merged over defaults")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--applications", default=None,
                   help="semicolon-separated application names to keep")
    p.add_argument("--schemes", default=None,
                   help="comma-separated scheme names to keep")
    p.add_argument("--no-rpt-floor", action="store_true",
                   help="do not floor the contracted plug-in time at the "
                        "observed base plug-in time")
    p.add_argument("--simple-rebound", action="store_true",
                   help="price V2G rebound at factor 1 instead of 1/eta^2")
    p.add_argument("--cycle-direction", choices=["scale_up", "as_printed"],
                   default=None, help="heat-pump cycle-constraint direction")
    p.add_argument("--reward-base-hours", type=float, default=None,
                   help="plug-in hours at which the base reward applies "
                        "(default: the base plug-in time)")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--price", default=None, help="price CSV (timestamp,value)")
    p.add_argument("--ev-pool", default=None,
                   help="EV charging pool CSV (asset_id,timestamp,value)")
    p.add_argument("--hp-pool", default=None,
                   help="heat-pump pool CSV (asset_id,timestamp,value)")
    p.add_argument("--v2g-power", default=None,
                   help="V2G dischargeable-power CSV (timestamp,value)")
    p.add_argument("--v2g-boundaries", default=None,
                   help="V2G energy-boundary CSV (timestamp,lower,upper)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lcodr",
                     description="Levelised cost of demand response toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="deterministic evaluation")
    _add_common(p_run)
    _add_data_flags(p_run)
    p_run.add_argument("--compute-vf", action="store_true",
                       help="compute value factors from profile data instead "
                            "of using the configured table")
    p_run.set_defaults(func=cmd_run)

    p_vf = sub.add_parser("vf", help="value factors from time series")
    _add_common(p_vf)
    _add_data_flags(p_vf)
    p_vf.add_argument("--subsample", type=int, default=None,
                      help="asset subset size for the sensitivity distribution")
    p_vf.add_argument("--iterations", type=int, default=1000)
    p_vf.set_defaults(func=cmd_vf)

    p_mc = sub.add_parser("mc", help="Monte-Carlo uncertainty propagation")
    _add_common(p_mc)
    _add_data_flags(p_mc)
    p_mc.add_argument("--compute-vf", action="store_true")
    p_mc.add_argument("--samples", type=int, default=1000)
    p_mc.add_argument("--sigma", type=float, default=0.33)
    p_mc.add_argument("--sigma-vf", type=float, default=0.10)
    p_mc.add_argument("--lcos", default=None, help="storage-cost reference CSV")
    p_mc.add_argument("--lcos-sampling", choices=["point", "same_scheme"],
                      default="point")
    p_mc.add_argument("--emit-samples", action="store_true")
    p_mc.add_argument("--workers", type=int, default=None)
    p_mc.set_defaults(func=cmd_mc)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ParseError, ValidationError, SchemaVersionError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueFactorError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except LcodrError as exc:
        print(f"error: internal: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
