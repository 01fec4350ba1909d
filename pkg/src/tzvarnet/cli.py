"""Command-line pipeline: estimate, rolling, compare, simulate, stability, metrics.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 estimation
failure. All randomness flows from the configured seed, so re-running a
subcommand with the same config and seed reproduces every artifact byte for
byte, whatever --threads says.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import os
import sys
from pathlib import Path

from . import reports, synth
from .config import RunConfig, load_config
from .errors import ConfigError, DataError, EstimationError
from .markets import (
    AlignmentPolicy,
    ReturnsPanel,
    align_panel,
    load_market_metadata,
    load_returns_csv,
    slice_period,
    write_markets_csv,
    write_returns_csv,
)
from .rolling import rolling_flows
from .selection import CVVariant, build_network, stability_diagnostics
from .evalcmp import compare_structures
from .tzvar import ar_diagonal, structure_from_name


def _parse_date(text: str, flag: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise ConfigError(f"{flag} must be an ISO date, got {text!r}") from None


def _resolve_threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return args.threads
    env = os.environ.get("TZVAR_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"TZVAR_THREADS must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError("TZVAR_THREADS must be >= 1")
        return value
    return 1


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    data = cfg.data
    if getattr(args, "start", None):
        data = dataclasses.replace(data, start=args.start)
    if getattr(args, "end", None):
        data = dataclasses.replace(data, end=args.end)
    cfg = dataclasses.replace(cfg, data=data)
    if getattr(args, "structure", None):
        cfg = dataclasses.replace(cfg, structure=args.structure)
    if getattr(args, "seed", None) is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if getattr(args, "out", None):
        cfg = dataclasses.replace(
            cfg, output=dataclasses.replace(cfg.output, directory=args.out)
        )
    return cfg


def _load_panel(cfg: RunConfig) -> ReturnsPanel:
    if not cfg.data.markets or not cfg.data.returns:
        raise ConfigError("config needs data.markets and data.returns paths")
    try:
        ms = load_market_metadata(cfg.data.markets)
        raw = load_returns_csv(cfg.data.returns, ms)
    except FileNotFoundError as exc:
        raise DataError(f"data file not found: {exc.filename}") from None
    panel = align_panel(raw, AlignmentPolicy(cfg.data.alignment))
    if cfg.data.start or cfg.data.end:
        start = _parse_date(cfg.data.start, "data.start") if cfg.data.start else panel.dates[0]
        end = _parse_date(cfg.data.end, "data.end") if cfg.data.end else panel.dates[-1]
        if start > end:
            raise ConfigError(f"data.start {start} is after data.end {end}")
        panel = slice_period(panel, start, end)
    return panel


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _period_label(panel: ReturnsPanel) -> str:
    return f"{panel.dates[0].isoformat()}:{panel.dates[-1].isoformat()}"


def _cmd_estimate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    threads = _resolve_threads(args)
    panel = _load_panel(cfg)
    est = build_network(
        panel,
        structure_from_name(cfg.structure),
        cfg.selection,
        cfg.lasso,
        seed=cfg.seed,
        threads=threads,
    )
    out = _out_dir(cfg)
    ids = panel.markets.ids
    reports.write_matrix_csv(out / "A.csv", est.network.A, ids)
    reports.write_matrix_csv(out / "W.csv", est.network.W, ids)
    reports.write_matrix_csv(out / "coefficients.csv", est.coefficients.B, ids)
    reports.write_json(
        reports.coefficients_to_dict(est.coefficients), out / "coefficients.json"
    )
    reports.write_ar_diagonal_csv(ar_diagonal(est.coefficients), out / "ar_diagonal.csv")
    reports.write_json(reports.selections_to_dict(est.selections), out / "selections.json")
    artifacts = [
        "A.csv", "W.csv", "coefficients.csv", "coefficients.json",
        "ar_diagonal.csv", "selections.json",
    ]
    if panel.gap_mask is not None:
        reports.write_gap_report(panel, out / "gaps.csv")
        artifacts.append("gaps.csv")
    artifacts += reports.write_network_metrics(est.network, _period_label(panel), out)
    reports.write_manifest(out, "estimate", cfg, artifacts, {"period": _period_label(panel)})
    print(f"estimate: wrote {len(artifacts) + 1} artifacts to {out}")
    return 0


def _cmd_rolling(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    threads = _resolve_threads(args)
    panel = _load_panel(cfg)
    results = rolling_flows(
        panel,
        structure_from_name(cfg.structure),
        cfg.selection,
        cfg.lasso,
        length=cfg.rolling.window,
        step=cfg.rolling.step,
        seed=cfg.seed,
        threads=threads,
    )
    out = _out_dir(cfg)
    reports.write_flows_csv(results, out / "flows.csv")
    reports.write_manifest(out, "rolling", cfg, ["flows.csv"])
    failed = sum(1 for r in results if r.error is not None)
    print(f"rolling: {len(results)} windows ({failed} failed) -> {out / 'flows.csv'}")
    return 0


def _cmd_compare(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if args.out_of_sample:
        cfg = dataclasses.replace(
            cfg, compare=dataclasses.replace(cfg.compare, out_of_sample=True)
        )
    threads = _resolve_threads(args)
    panel = _load_panel(cfg)
    rows = compare_structures(
        panel, cfg.selection, cfg.lasso, cfg.compare, seed=cfg.seed, threads=threads
    )
    out = _out_dir(cfg)
    reports.write_comparison_csv(rows, out / "comparison.csv")
    reports.write_manifest(out, "compare", cfg, ["comparison.csv"])
    print(f"compare: wrote {out / 'comparison.csv'}")
    return 0


def _cmd_simulate(args) -> int:
    try:
        scenario = synth.load_scenario(args.scenario)
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {args.scenario}") from None
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        scenario["seed"] = args.seed
    truth, panel = synth.run_scenario(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_markets_csv(panel.markets, out / "markets.csv")
    write_returns_csv(panel, out / "returns.csv")
    reports.write_json(synth.truth_to_dict(truth), out / "truth.json")
    reports.write_manifest(
        out,
        "simulate",
        None,
        ["markets.csv", "returns.csv", "truth.json"],
        {"scenario": scenario, "scenario_sha256": reports.scenario_hash(scenario)},
    )
    print(f"simulate: wrote returns.csv ({panel.n_dates} rows) to {out}")
    return 0


def _cmd_stability(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    cfg = _apply_overrides(load_config(args.config), args)
    threads = _resolve_threads(args)
    panel = _load_panel(cfg)
    rows = stability_diagnostics(
        panel,
        structure_from_name(cfg.structure),
        None,
        args.reps,
        CVVariant(args.variant),
        cfg.seed,
        cfg.selection,
        cfg.lasso,
        threads=threads,
    )
    out = _out_dir(cfg)
    reports.write_stability_csv(rows, out / "stability.csv")
    reports.write_manifest(
        out, "stability", cfg, ["stability.csv"],
        {"variant": args.variant, "reps": args.reps},
    )
    print(f"stability: wrote {len(rows)} replications -> {out / 'stability.csv'}")
    return 0


def _cmd_metrics(args) -> int:
    try:
        ms = load_market_metadata(args.markets)
    except FileNotFoundError as exc:
        raise DataError(f"data file not found: {exc.filename}") from None
    try:
        net = reports.network_from_files(args.adjacency, args.weights, ms)
    except FileNotFoundError as exc:
        raise DataError(f"data file not found: {exc.filename}") from None
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    artifacts = reports.write_network_metrics(net, args.period, out)
    reports.write_manifest(out, "metrics", None, artifacts, {"period": args.period})
    print(f"metrics: wrote {out / 'metrics.json'}")
    return 0


def _add_common(p: argparse.ArgumentParser, with_period: bool = True) -> None:
    p.add_argument("--config", required=True, help="run configuration JSON")
    if with_period:
        p.add_argument("--start", help="first date of the sample slice (ISO)")
        p.add_argument("--end", help="last date of the sample slice (ISO)")
    p.add_argument("--structure", choices=["timezone", "classic"])
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker threads (default TZVAR_THREADS or 1)")
    p.add_argument("--out", help="output directory (overrides config)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tzvarnet",
        description="Signed directed comovement networks from a time-zone-aware lasso VAR",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="static network and metrics for one period")
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("rolling", help="continent flow series over rolling windows")
    _add_common(p)
    p.set_defaults(func=_cmd_rolling)

    p = sub.add_parser("compare", help="time-zone vs classic in-sample ratio report")
    _add_common(p)
    p.add_argument("--out-of-sample", action="store_true",
                   help="also report the held-out variant")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("simulate", help="generate a synthetic panel from a scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("stability", help="repeated network-generation diagnostic")
    _add_common(p)
    p.add_argument("--variant", choices=["classic", "improved"], default="improved")
    p.add_argument("--reps", type=int, default=300)
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("metrics", help="recompute metrics from saved A/W matrices")
    p.add_argument("--adjacency", required=True, help="A.csv path")
    p.add_argument("--weights", required=True, help="W.csv path")
    p.add_argument("--markets", required=True, help="markets.csv path")
    p.add_argument("--period", default="saved", help="period label for metrics.csv")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=_cmd_metrics)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
