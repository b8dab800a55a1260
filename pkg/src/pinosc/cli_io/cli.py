"""Command-line entry point: ``pinosc <subcommand> [--config F] [--seed N] [--workers N] [--out D]``.

Exit codes: 0 ok, 2 configuration or input error, 3 solver failure,
4 sweep with fewer than 90 % of cells completed.
"""
from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from ..analysis.oscillation import analyze_trace
from ..carrier_statistics import (ConfigError, drift_current_density, field_from_bias,
                                  ionized_donor_fraction, mobility)
from ..gr_dynamics.simulate import StiffnessError
from ..gr_dynamics.stability import NoEquilibriumError, hopf_boundary
from ..protocols.iv import iv_sweep
from .config import RunConfig, default_config_text, load_config
from .files import (CSVFormatError, format_traces_csv, read_traces_csv, write_json,
                    write_phase_map, write_traces_csv)
from .pipeline import simulate_point, sweep

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_PARTIAL = 0, 2, 3, 4
SWEEP_SUCCESS_FRACTION = 0.9


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML run configuration (default: paper-like)")
    p.add_argument("--seed", type=int, help="master seed (overrides master_seed)")
    p.add_argument("--workers", type=int, help="worker processes (overrides worker_count)")
    p.add_argument("--out", help="output directory (overrides output_directory)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pinosc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="print the base-temperature carrier estimate chain")
    _common(p)
    p.add_argument("--temperatures", type=float, nargs="+", default=[10.0, 77.0, 300.0])
    p.add_argument("--bias", type=float, default=7.0, help="V across the I-region")
    p.add_argument("--density", type=float, default=1e-3, help="free electron density, cm^-3")
    p.add_argument("--field", type=float, default=1.2e2,
                   help="field used for the flux row, V/cm")

    p = sub.add_parser("simulate", help="integrate one (V, T) point and analyze it")
    _common(p)
    p.add_argument("--bias", type=float, help="V (default: protocol.bias)")
    p.add_argument("--temperature", type=float, help="K (default: protocol.temperature)")

    p = sub.add_parser("sweep", help="(V, T) phase map")
    _common(p)

    p = sub.add_parser("analyze", help="analyze measured or exported trace CSVs")
    _common(p)
    p.add_argument("traces", nargs="+", help="CSV files following the trace contract")
    p.add_argument("--column", help="column name stem to analyze (default: first data column)")

    p = sub.add_parser("hopf", help="Hopf boundary of the tracked equilibrium over the sweep ranges")
    _common(p)
    p.add_argument("--grid", type=int, nargs=2, default=[40, 12], metavar=("NV", "NT"))

    p = sub.add_parser("iv", help="quasi-static IV sweep")
    _common(p)
    p.add_argument("--temperature", type=float, help="K (default: protocol.temperature)")

    p = sub.add_parser("gen-config", help="write the fully expanded paper-like configuration")
    _common(p)
    return ap


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        if not (0 <= args.seed < 2 ** 64):
            raise ConfigError([("--seed", "must lie in [0, 2^64)")])
        changes["master_seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError([("--workers", "must be >= 1")])
        changes["worker_count"] = args.workers
    if args.out is not None:
        changes["output_directory"] = args.out
    return cfg.with_overrides(**changes) if changes else cfg


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.output_directory, exist_ok=True)
    return cfg.output_directory


# ----------------------------------------------------------------------------

def cmd_estimate(args, cfg: RunConfig) -> int:
    m, d = cfg.material, cfg.device
    rows = []
    for T in args.temperatures:
        frac = ionized_donor_fraction(m.donor_energy, T)
        rows.append((f"ionized donor fraction, E_d={m.donor_energy * 1e3:.0f} meV, T={T:g} K",
                     frac, "1"))
        rows.append((f"  ionized donor density N_d+ (N_d={m.donor_density:.3g})",
                     frac * m.donor_density, "cm^-3"))
    E = field_from_bias(args.bias, d.i_region_width)
    rows.append((f"field E = V/W, V={args.bias:g} V, W={d.i_region_width * 1e4:g} um", E, "V/cm"))
    mu = mobility(10.0, args.field, m)
    for label, field in (("computed", E), ("quoted", args.field)):
        charge, flux = drift_current_density(args.density, 0.0, mu, 0.0, field)
        rows.append((f"electron flux mu n E, n={args.density:g}, mu={mu:g}, E {label}={field:.4g}",
                     flux, "cm^-2 s^-1"))
        rows.append(("  charge current density", charge, "A/cm^2"))
    width = max(len(r[0]) for r in rows)
    for label, value, unit in rows:
        print(f"{label:<{width}}  {value:12.4e}  {unit}")
    if args.out:
        write_json(os.path.join(_outdir(cfg), "estimate.json"),
                   {"kind": "estimate",
                    "rows": [{"quantity": l.strip(), "value": v, "unit": u} for l, v, u in rows]})
    return EXIT_OK


def _write_point(out: str, res, partial: bool = False):
    meta = {"bias_V": repr(res.V), "temperature_K": repr(res.T)}
    if partial:
        meta["partial"] = "true"
    tr = res.trajectory
    write_traces_csv(os.path.join(out, "state.csv"), [tr.n, tr.f, tr.E], meta)
    write_traces_csv(os.path.join(out, "current.csv"), [tr.current, tr.j], meta)
    if res.photon_rate is not None:
        write_traces_csv(os.path.join(out, "photon_rate.csv"), [res.photon_rate], meta)
    if res.counts is not None:
        write_traces_csv(os.path.join(out, "counts.csv"), [res.counts.as_trace()],
                         {**meta, "rng_seed": str(res.counts.rng_seed)})
    if res.signal is not None:
        write_traces_csv(os.path.join(out, "signal.csv"), [res.signal], meta)


def cmd_simulate(args, cfg: RunConfig) -> int:
    out = _outdir(cfg)
    try:
        res = simulate_point(cfg, args.bias, args.temperature)
    except StiffnessError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.partial is not None:
            from .pipeline import PointResult
            V = cfg.protocol.bias if args.bias is None else args.bias
            T = cfg.protocol.temperature if args.temperature is None else args.temperature
            _write_point(out, PointResult(V, T, exc.partial, None, None, None, (0, 0)), True)
        write_json(os.path.join(out, "metrics.json"),
                   {"kind": "oscillation_metrics", "partial": True, "error": str(exc),
                    "failed_at_s": exc.t})
        return EXIT_SOLVER
    _write_point(out, res)
    write_json(os.path.join(out, "metrics.json"),
               {"kind": "oscillation_metrics", "partial": False, "bias_V": res.V,
                "temperature_K": res.T, "signal": cfg.protocol.signal,
                "analysis_window_s": list(res.window), "metrics": res.metrics.to_dict()})
    m = res.metrics
    print(f"V={res.V:g} V  T={res.T:g} K  class={m.phase_class}  f0={m.peak_frequency:.6g} Hz  "
          f"A/gamma={m.strength:.4g}")
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    out = _outdir(cfg)
    res = sweep(cfg)
    frac = res.success_fraction
    write_phase_map(out, res.phase_map, {
        "master_seed": cfg.master_seed,
        "success_fraction": frac,
        "failures": [{"index": i, "V": V, "T": T, "error": e} for i, V, T, e in res.failures],
    })
    summ = res.phase_map.summary()
    print(f"cells: {summ['class_counts']}  stable island: {summ['stable_island']}")
    if frac < SWEEP_SUCCESS_FRACTION:
        print(f"only {frac:.1%} of cells completed", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_analyze(args, cfg: RunConfig) -> int:
    out = _outdir(cfg)
    for path in args.traces:
        traces, meta = read_traces_csv(path)
        if args.column:
            chosen = [t for t in traces if t.name == args.column]
            if not chosen:
                raise CSVFormatError(f"no column named {args.column!r}", None, path)
            tr = chosen[0]
        else:
            tr = traces[0]
        if tr.unit == "counts":
            tr = tr.scaled(1.0 / tr.dt, "ph/s", "count_rate")
        if meta.get("partial") == "true":
            print(f"{path}: warning: partial trace from a failed run", file=sys.stderr)
        m = analyze_trace(tr, cfg.analysis)
        stem = os.path.splitext(os.path.basename(path))[0]
        write_json(os.path.join(out, f"{stem}_metrics.json"),
                   {"kind": "oscillation_metrics", "source": os.path.basename(path),
                    "column": tr.name, "metrics": m.to_dict()})
        print(f"{path}: class={m.phase_class}  f0={m.peak_frequency:.6g} Hz  "
              f"A/gamma={m.strength:.4g}")
    return EXIT_OK


def cmd_hopf(args, cfg: RunConfig) -> int:
    out = _outdir(cfg)
    s = cfg.sweep
    pts = hopf_boundary((s.voltage_start, s.voltage_stop), (s.temperature_start,
                                                            s.temperature_stop),
                        cfg.gr_params(), tuple(args.grid))
    lines = ["# columns: voltage_V,temperature_K,hopf,frequency_Hz,direction"]
    for h in pts:
        lines.append(f"{h.V:.16e},{h.T:.16e},{int(h.hopf)},{h.frequency:.16e},{h.direction}")
    with open(os.path.join(out, "hopf_boundary.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    write_json(os.path.join(out, "hopf_boundary.json"),
               {"kind": "hopf_boundary", "grid": list(args.grid),
                "points": [h.__dict__ for h in pts]})
    print(f"{len(pts)} boundary points, {sum(h.hopf for h in pts)} tagged Hopf")
    return EXIT_OK


def cmd_iv(args, cfg: RunConfig) -> int:
    out = _outdir(cfg)
    T = cfg.protocol.temperature if args.temperature is None else args.temperature
    iv = iv_sweep(cfg.iv.voltages, T, cfg.gr_params(), cfg.iv.settle_time, cfg.iv.burst(),
                  cfg.master_seed)
    lines = ["# columns: voltage_V,current_A", f"# temperature_K: {T!r}"]
    lines += [f"{v:.16e},{i:.16e}" for v, i in zip(iv.voltage, iv.current)]
    with open(os.path.join(out, "iv.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for k, tr in iv.traces.items():
        write_traces_csv(os.path.join(out, f"burst_{k:03d}.csv"), [tr],
                         {"bias_V": repr(float(iv.voltage[k]))})
    for v, i in zip(iv.voltage, iv.current):
        print(f"{v:8.3f} V  {i: .4e} A")
    return EXIT_OK


def cmd_gen_config(args, cfg: RunConfig) -> int:
    text = default_config_text()
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "paper_like.toml")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(path)
    else:
        sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
    "hopf": cmd_hopf,
    "iv": cmd_iv,
    "gen-config": cmd_gen_config,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-config":
            return cmd_gen_config(args, RunConfig())
        cfg = _load(args)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        for line in str(exc).split("; "):
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_INPUT
    except (CSVFormatError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StiffnessError, NoEquilibriumError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
