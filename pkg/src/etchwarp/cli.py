"""Command-line front door: generate, stats, evaluate, explain.

Every run is fully specified by flags plus an optional flat JSON config
file (keys mirror the long flag names with underscores); precedence is
flags > config file > built-in defaults. All randomness flows from the
single ``--seed`` flag, which defaults to a fixed constant, so repeated
runs are byte-identical.

Exit codes: 0 success, 1 runtime/I-O error, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .bench import (
    run_comparison,
    sweep_parameter,
    write_report_fold_csv,
    write_report_json,
    write_report_summary_csv,
)
from .core import DataError, load_dataset, save_dataset
from .dtw import DtwParams
from .explain import (
    export_alignment,
    neighbor_report,
    region_contributions,
    write_neighbor_report,
)
from .features import feature_names, featurize_wafer
from .models import MODEL_NAMES, ModelConfig
from .synth import GENERATOR_VERSION, SynthConfig, generate, write_meta

DEFAULT_SEED = 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        opts = _merge_config(args)
        return args.handler(opts)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etchwarp",
        description="DTW k-NN etch-rate regression benchmark and explanation tool.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"etchwarp {__version__} (generator {GENERATOR_VERSION})",
    )
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("generate", help="generate a synthetic dataset")
    g.add_argument("-o", "--output", required=True, help="dataset path (.csv or .json)")
    g.add_argument("--format", choices=["long-csv", "json"])
    g.add_argument("--wafers", type=int)
    g.add_argument("--channels", type=int)
    g.add_argument("--ticks", type=int)
    g.add_argument("--split-tick", type=int)
    g.add_argument("--jitter-max", type=int)
    g.add_argument("--noise-std", type=float)
    g.add_argument("--tail-effect", type=float)
    g.add_argument("--signal-channels", help="comma-separated channel indices")
    g.add_argument("--seed", type=int)
    g.add_argument("--config", help="flat JSON config file")
    g.set_defaults(handler=cmd_generate, defaults=_GENERATE_DEFAULTS)

    s = sub.add_parser("stats", help="featurize a dataset to four-metric CSV")
    s.add_argument("-i", "--input", required=True)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--format", choices=["long-csv", "json"], help="input format override")
    s.add_argument("--channels", help="comma-separated wavelengths (default: all)")
    s.add_argument("--split", help="'auto' or a fixed split tick")
    s.add_argument("--config", help="flat JSON config file")
    s.set_defaults(handler=cmd_stats, defaults=_STATS_DEFAULTS)

    e = sub.add_parser("evaluate", help="run the cross-validated benchmark")
    e.add_argument("-i", "--input", required=True)
    e.add_argument("-o", "--out-prefix", required=True, help="output path prefix")
    e.add_argument("--format", choices=["long-csv", "json"], help="input format override")
    e.add_argument("--sweep", choices=["k", "window"], help="sweep a parameter instead of comparing models")
    e.add_argument("--values", help="comma-separated sweep values")
    e.add_argument("--channels-max", type=int, help="evaluate channel counts 1..N")
    e.add_argument("--channels", help="comma-separated wavelengths (default: ranked)")
    e.add_argument("--models", help=f"comma-separated subset of {','.join(MODEL_NAMES)}")
    e.add_argument("--k", type=int)
    e.add_argument("--window", type=int)
    e.add_argument("--weighting", choices=["uniform", "inverse-distance"])
    e.add_argument("--split", help="'auto' or a fixed split tick")
    e.add_argument("--folds", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--jobs", type=int)
    e.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   help="render figures next to the reports (default on)")
    e.add_argument("--config", help="flat JSON config file")
    e.set_defaults(handler=cmd_evaluate, defaults=_EVALUATE_DEFAULTS)

    x = sub.add_parser("explain", help="neighbor ranking and alignment export")
    x.add_argument("-i", "--input", required=True)
    x.add_argument("-o", "--out-prefix", required=True, help="output path prefix")
    x.add_argument("--format", choices=["long-csv", "json"], help="input format override")
    x.add_argument("--query", required=True, help="wafer id to explain")
    x.add_argument("--channel", type=float, help="wavelength (default: first in channel order)")
    x.add_argument("--against", help="'nearest', 'furthest', or a wafer id")
    x.add_argument("--window", type=int)
    x.add_argument("--regions", type=int)
    x.add_argument("--figures", action=argparse.BooleanOptionalAction)
    x.add_argument("--config", help="flat JSON config file")
    x.set_defaults(handler=cmd_explain, defaults=_EXPLAIN_DEFAULTS)

    return parser


_GENERATE_DEFAULTS = {
    "format": None,
    "wafers": SynthConfig.n_wafers,
    "channels": SynthConfig.n_channels,
    "ticks": SynthConfig.ticks,
    "split_tick": SynthConfig.stage_split_tick,
    "jitter_max": SynthConfig.jitter_max,
    "noise_std": SynthConfig.noise_std,
    "tail_effect": SynthConfig.tail_effect,
    "signal_channels": "0",
    "seed": SynthConfig.seed,
}

_STATS_DEFAULTS = {
    "format": None,
    "channels": None,
    "split": "auto",
}

_EVALUATE_DEFAULTS = {
    "format": None,
    "sweep": None,
    "values": None,
    "channels_max": None,
    "channels": None,
    "models": None,
    "k": 5,
    "window": 1,
    "weighting": "uniform",
    "split": "auto",
    "folds": 10,
    "seed": DEFAULT_SEED,
    "jobs": 1,
    "figures": True,
}

_EXPLAIN_DEFAULTS = {
    "format": None,
    "channel": None,
    "against": "nearest",
    "window": 1,
    "regions": 5,
    "figures": True,
}


def _merge_config(args: argparse.Namespace) -> dict:
    """flags > config-file values > defaults, keyed by flag dest names."""
    merged = dict(args.defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            try:
                file_vals = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{config_path}: invalid JSON config: {exc.msg}")
        unknown = set(file_vals) - set(merged)
        if unknown:
            raise ValueError(
                f"{config_path}: unknown config keys {sorted(unknown)}"
            )
        merged.update(file_vals)
    for key in merged:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    for key in ("input", "output", "out_prefix", "query"):
        if hasattr(args, key):
            merged[key] = getattr(args, key)
    return merged


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"invalid {what} list {text!r}") from None


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"invalid {what} list {text!r}") from None


def _parse_split(value) -> str | int:
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValueError(f"--split must be 'auto' or an integer, got {value!r}") from None


def cmd_generate(opts: dict) -> int:
    cfg = SynthConfig(
        n_wafers=opts["wafers"],
        n_channels=opts["channels"],
        ticks=opts["ticks"],
        stage_split_tick=opts["split_tick"],
        jitter_max=opts["jitter_max"],
        noise_std=opts["noise_std"],
        tail_effect=opts["tail_effect"],
        seed=opts["seed"],
        signal_channels=tuple(_parse_int_list(opts["signal_channels"], "signal-channels")),
    )
    ds = generate(cfg)
    out = Path(opts["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(ds, out, opts["format"])
    write_meta(cfg, out)
    print(f"wrote {out} ({len(ds)} wafers, {len(ds.channel_order)} channels)")
    return 0


def cmd_stats(opts: dict) -> int:
    ds = load_dataset(opts["input"], opts["format"])
    channels = (
        tuple(_parse_float_list(opts["channels"], "channels"))
        if opts["channels"]
        else ds.channel_order
    )
    split = _parse_split(opts["split"])
    names = feature_names(channels)
    out = Path(opts["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("wafer_id,etch_rate," + ",".join(names) + "\n")
        for w in ds.wafers:
            feats = featurize_wafer(w, channels, split)
            fh.write(f"{w.wafer_id},{w.etch_rate!r},")
            fh.write(",".join(repr(v) for v in feats) + "\n")
    print(f"wrote {out} ({len(ds)} rows, {len(names)} feature columns)")
    return 0


def cmd_evaluate(opts: dict) -> int:
    ds = load_dataset(opts["input"], opts["format"])
    channels = (
        tuple(_parse_float_list(opts["channels"], "channels"))
        if opts["channels"]
        else None
    )
    cfg = ModelConfig(
        k=opts["k"],
        window=opts["window"],
        channels=channels,
        split_policy=_parse_split(opts["split"]),
        weighting=opts["weighting"],
    )
    if opts["models"] is not None:
        models = tuple(tok.strip() for tok in str(opts["models"]).split(",") if tok.strip())
        for m in models:
            if m not in MODEL_NAMES:
                raise ValueError(f"unknown model {m!r}; expected one of {MODEL_NAMES}")
    else:
        models = MODEL_NAMES

    if opts["sweep"]:
        values = opts["values"]
        if values is None:
            raise ValueError("--sweep requires --values")
        report = sweep_parameter(
            ds,
            cfg,
            parameter=opts["sweep"],
            values=_parse_int_list(values, "values"),
            fold_count=opts["folds"],
            seed=opts["seed"],
            jobs=opts["jobs"],
        )
    else:
        report = run_comparison(
            ds,
            cfg,
            max_channels=opts["channels_max"],
            fold_count=opts["folds"],
            seed=opts["seed"],
            models=models,
            jobs=opts["jobs"],
        )

    prefix = Path(opts["out_prefix"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    json_path = prefix.with_name(prefix.name + ".json")
    folds_path = prefix.with_name(prefix.name + "_folds.csv")
    summary_path = prefix.with_name(prefix.name + "_summary.csv")
    write_report_json(report, json_path)
    write_report_fold_csv(report, folds_path)
    write_report_summary_csv(report, summary_path)
    written = [json_path, folds_path, summary_path]
    if opts["figures"]:
        from .plots import plot_report, save_figure

        fig_path = prefix.with_name(prefix.name + ".png")
        save_figure(plot_report(report), fig_path)
        written.append(fig_path)
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_explain(opts: dict) -> int:
    ds = load_dataset(opts["input"], opts["format"])
    channel = opts["channel"] if opts["channel"] is not None else ds.channel_order[0]
    channel = float(channel)
    params = DtwParams(opts["window"])
    report = neighbor_report(ds, opts["query"], channel, params)

    against = opts["against"]
    if against == "nearest":
        other_id = report.nearest.wafer_id
    elif against == "furthest":
        other_id = report.furthest.wafer_id
    else:
        other_id = ds.wafer(str(against)).wafer_id
        if other_id == opts["query"]:
            raise ValueError("--against must name a wafer other than the query")

    prefix = Path(opts["out_prefix"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    neighbors_path = prefix.with_name(prefix.name + "_neighbors.json")
    alignment_path = prefix.with_name(prefix.name + "_alignment.csv")
    regions_path = prefix.with_name(prefix.name + "_regions.csv")

    write_neighbor_report(report, neighbors_path)
    outcome = export_alignment(ds, opts["query"], other_id, channel, params, alignment_path)
    regions = region_contributions(ds, opts["query"], other_id, channel, params, opts["regions"])
    with open(regions_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("region,start_tick,end_tick,cost\n")
        for r, ((lo, hi), cost) in enumerate(regions):
            fh.write(f"{r},{lo},{hi},{cost!r}\n")

    written = [neighbors_path, alignment_path, regions_path]
    if opts["figures"]:
        from .plots import plot_alignment, save_figure

        fig_path = prefix.with_name(prefix.name + "_alignment.png")
        query_vals = ds.wafer(opts["query"]).series(channel).samples
        other_vals = ds.wafer(other_id).series(channel).samples
        save_figure(
            plot_alignment(query_vals, other_vals, outcome, opts["query"], other_id),
            fig_path,
        )
        written.append(fig_path)
    for p in written:
        print(f"wrote {p}")
    print(
        f"query={opts['query']} against={other_id} channel={channel} "
        f"distance={outcome.distance!r}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
