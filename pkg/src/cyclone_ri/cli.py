"""Command-line front end.

    cyclone-ri ingest    --basin SP --data-dir DIR --out-dir OUT
    cyclone-ri stats     ...
    cyclone-ri sweep     --n 5,6,7,8 --seeds 0-29
    cyclone-ri benchmark --strategies U,M,E,HE
    cyclone-ri augment   --multiplier 1
    cyclone-ri plot

Exit codes: 0 ok, 1 usage error, 2 data error, 3 training divergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import climatology as clim
from .augmentation import synthetics_to_csv
from .besttrack import BasinDataset, load_basin, split_by_period, write_cyclones_csv
from .config import ExperimentConfig, load_config
from .errors import BenchmarkError, ConfigError, DataError, TrainingDivergedError
from .fixtures import fixture_dir
from .plotting import TrackSeries, bar_chart, histogram, track_map
from .strategies import (
    BenchmarkResult, StrategyKind, benchmark_csv, run_benchmark, runs_csv,
    training_windows,
)
from .windowing import WIND, Label, build_all_windows, class_stats

log = logging.getLogger("cyclone_ri")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3

# Table 2 reference: train-split minority percentage per basin
REFERENCE_TRAIN_MINORITY = {"SP": 5.16, "SI": 3.86}
DIAGNOSTIC_TOLERANCE_PP = 1.5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--basin", help="SP or SI")
    common.add_argument("--data-dir", help="directory of b-deck files (default: bundled fixture corpus)")
    common.add_argument("--out-dir", help="output directory")
    common.add_argument("--n", help="window length; a comma list for sweep")
    common.add_argument("--seeds", help="seed list, range (0-29) or count")
    common.add_argument("--multiplier", help="synthetic sequences per real RI window")
    common.add_argument("--label-rule", help="any_span or last_anchored")
    common.add_argument("--strategies", help="comma list of U,M,E,HE,DA_M")
    common.add_argument("--epochs", help="classifier training epochs")
    common.add_argument("--generator-epochs", help="generator training epochs")
    common.add_argument("--workers", help="parallel seed runs")
    svg = common.add_mutually_exclusive_group()
    svg.add_argument("--deterministic-svg", dest="deterministic_svg", action="store_const", const="true",
                     help="omit the generation timestamp from SVG output (default)")
    svg.add_argument("--timestamp-svg", dest="deterministic_svg", action="store_const", const="false",
                     help="add a generation timestamp comment to SVG output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="cyclone-ri", description="Rapid-intensification detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("ingest", "parse b-deck files into the canonical track CSV"),
        ("stats", "yearly frequencies, RI by category and split summary"),
        ("sweep", "U-LSTM and M-LSTM over several window lengths"),
        ("benchmark", "repeated-runs benchmark of classifier strategies"),
        ("augment", "M-LSTM vs DA-M-LSTM with generated RI sequences"),
        ("plot", "SVG figures from the dataset and earlier outputs"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def config_from_args(args) -> ExperimentConfig:
    overrides = {
        "basin": args.basin, "data_dir": args.data_dir, "out_dir": args.out_dir,
        "seeds": args.seeds, "multiplier": args.multiplier, "label_rule": args.label_rule,
        "strategies": args.strategies, "epochs": args.epochs, "generator_epochs": args.generator_epochs,
        "workers": args.workers, "deterministic_svg": args.deterministic_svg,
    }
    if args.n is not None:
        if args.command == "sweep" or "," in args.n:
            overrides["n_values"] = args.n
            if "," not in args.n:
                overrides["n"] = args.n
        else:
            overrides["n"] = args.n
            overrides["n_values"] = args.n
    return load_config(args.config, **overrides)


def _data_dir(cfg: ExperimentConfig) -> Path:
    d = cfg.data_dir if cfg.data_dir is not None else fixture_dir()
    if not Path(d).is_dir():
        raise DataError(f"data directory {d} does not exist")
    return Path(d)


def _load(cfg: ExperimentConfig, sweep: bool = False):
    dataset, report = load_basin(_data_dir(cfg), cfg.basin, cfg.cleaning(sweep))
    return dataset, report


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    p.write_text(text)
    return p


def _prefix(cfg: ExperimentConfig) -> str:
    return cfg.basin.value.lower()


def cmd_ingest(cfg: ExperimentConfig) -> int:
    dataset, report = _load(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cyclones_csv(out / f"{_prefix(cfg)}_tracks.csv", dataset.cyclones)
    _write(out, f"{_prefix(cfg)}_ingest_report.json", report.to_json())
    print(f"{cfg.basin.label}: {report.accepted} cyclones accepted, "
          f"{sum(report.rejected.values())} rejected, {report.truncated} truncated")
    return EXIT_OK


def stats_tables(cfg: ExperimentConfig, dataset: BasinDataset) -> dict[str, str]:
    w = cfg.windowing()
    split = split_by_period(dataset, cfg.train_fraction)
    years = clim.yearly_cyclone_counts(dataset.cyclones)
    ri_years = clim.yearly_ri_counts(dataset.cyclones, w)
    cats = clim.ri_by_category(dataset.cyclones, cfg.category_scale(), w)
    summary = clim.split_summary(split, w)
    p = _prefix(cfg)
    return {
        f"{p}_yearly_cyclones.csv": clim.table_csv(["year", "cyclones"], list(years.items())),
        f"{p}_yearly_ri_events.csv": clim.table_csv(["year", "ri_events"], list(ri_years.items())),
        f"{p}_ri_by_category.csv": clim.table_csv(["category", "ri_events"], list(cats.items())),
        f"{p}_split_summary.csv": clim.table_csv(
            ["basin", "description", "cyclones", "first_year", "last_year", "instances", "ri_instances", "minority_pct"],
            [[cfg.basin.label] + list(r.values()) for r in summary]),
    }


def cmd_stats(cfg: ExperimentConfig) -> int:
    dataset, _ = _load(cfg)
    tables = stats_tables(cfg, dataset)
    for name, text in tables.items():
        _write(Path(cfg.out_dir), name, text)
    split = split_by_period(dataset, cfg.train_fraction)
    train_stats = class_stats(build_all_windows(split.train, cfg.windowing()))
    ref = REFERENCE_TRAIN_MINORITY[cfg.basin.value]
    delta = train_stats.minority_pct - ref
    status = "within" if abs(delta) <= DIAGNOSTIC_TOLERANCE_PP else "outside"
    print(f"{cfg.basin.label} train: {train_stats.total} instances, {train_stats.minority_pct:.2f}% RI "
          f"(reference {ref:.2f}%, {delta:+.2f} pp, {status} ±{DIAGNOSTIC_TOLERANCE_PP} pp)")
    return EXIT_OK


def _predictions_csv(result: BenchmarkResult, test_windows) -> str:
    run = result.runs[0]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "seed", "cyclone_id", "start_index", "label", "predicted"])
    for win, pred in zip(test_windows, run.predictions):
        w.writerow([result.kind.display, run.seed, win.cyclone_id, win.start_index, int(win.label), int(pred)])
    return buf.getvalue()


def _benchmark(cfg: ExperimentConfig, kinds, n: int, split, prepared=None) -> list[BenchmarkResult]:
    results = []
    for kind in kinds:
        spec = cfg.strategy(kind, n)
        log.info("benchmark %s n=%d over %d seeds", kind.display, n, len(cfg.seeds))
        results.append(run_benchmark(spec, split, cfg.seeds, workers=cfg.workers,
                                     prepared=(prepared or {}).get(kind)))
    return results


def _print_summary(results, rows=("RI", "macro")) -> None:
    for r in results:
        parts = [f"{row} F1 {r.summary[row]['f1']}" for row in rows]
        note = f" ({len(r.diverged)} diverged)" if r.diverged else ""
        print(f"  {r.kind.display:10s} n={r.n}  " + "  ".join(parts) + note)


def cmd_benchmark(cfg: ExperimentConfig) -> int:
    dataset, _ = _load(cfg)
    split = split_by_period(dataset, cfg.train_fraction)
    results = _benchmark(cfg, cfg.strategies, cfg.n, split)
    out, p = Path(cfg.out_dir), _prefix(cfg)
    _write(out, f"{p}_benchmark.csv", benchmark_csv(results))
    _write(out, f"{p}_benchmark_runs.csv", runs_csv(results))
    test_windows = build_all_windows(split.test, cfg.windowing())
    for r in results:
        _write(out, f"{p}_predictions_{r.kind.value}.csv", _predictions_csv(r, test_windows))
    print(f"{cfg.basin.label} benchmark ({len(cfg.seeds)} seeds):")
    _print_summary(results)
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig) -> int:
    dataset, _ = _load(cfg, sweep=True)
    split = split_by_period(dataset, cfg.train_fraction)
    results = []
    for n in cfg.n_values:
        results.extend(_benchmark(cfg, (StrategyKind.U, StrategyKind.M), n, split))
    out, p = Path(cfg.out_dir), _prefix(cfg)
    _write(out, f"{p}_sweep.csv", benchmark_csv(results, rows=("NonRI", "RI")))
    _write(out, f"{p}_sweep_runs.csv", runs_csv(results))
    print(f"{cfg.basin.label} window-length sweep ({len(cfg.seeds)} seeds):")
    _print_summary(results, rows=("RI",))
    for kind in (StrategyKind.U, StrategyKind.M):
        best = max((r for r in results if r.kind is kind), key=lambda r: r.ri_f1.mean)
        print(f"best n for {kind.display} by RI F1: {best.n} ({best.ri_f1})")
    best = max(results, key=lambda r: r.ri_f1.mean)
    print(f"selected n = {best.n}")
    return EXIT_OK


def cmd_augment(cfg: ExperimentConfig) -> int:
    dataset, _ = _load(cfg)
    split = split_by_period(dataset, cfg.train_fraction)
    da_spec = cfg.strategy(StrategyKind.DA_M)
    da_windows, outcome = training_windows(da_spec, split)
    results = _benchmark(cfg, (StrategyKind.M, StrategyKind.DA_M), cfg.n, split,
                         prepared={StrategyKind.DA_M: (da_windows, outcome)})
    out, p = Path(cfg.out_dir), _prefix(cfg)
    _write(out, f"{p}_augment.csv", benchmark_csv(results, rows=("RI", "macro", "weighted"), basin=cfg.basin.label))
    _write(out, f"{p}_augment_runs.csv", runs_csv(results))
    report = outcome.report()
    report["basin"] = cfg.basin.label
    report["multiplier"] = cfg.multiplier
    report["relabel"] = cfg.relabel.value
    report["synthesis_source_cyclones"] = sorted({s.source_cyclone_id for s in outcome.synthesis.sequences})
    _write(out, f"{p}_augment_report.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write(out, f"{p}_synthetic_tracks.csv", synthetics_to_csv(outcome.synthesis.sequences))
    test_windows = build_all_windows(split.test, cfg.windowing())
    for r in results:
        _write(out, f"{p}_predictions_{r.kind.value}.csv", _predictions_csv(r, test_windows))
    a = outcome.assimilation
    print(f"{cfg.basin.label}: generator holdout MSE {outcome.generator_report.holdout_mse:.5f}; "
          f"{len(outcome.synthesis.sequences)}/{outcome.synthesis.attempted} synthetic sequences kept; "
          f"minority {a.before.minority_pct:.2f}% -> {a.after.minority_pct:.2f}%")
    _print_summary(results, rows=("RI", "macro", "weighted"))
    return EXIT_OK


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_plot(cfg: ExperimentConfig) -> int:
    dataset, _ = _load(cfg)
    if not dataset.cyclones:
        raise DataError("no cyclones selected")
    out, p = Path(cfg.out_dir), _prefix(cfg)
    det = cfg.deterministic_svg
    figures = {}
    w = cfg.windowing()
    figures["yearly_cyclones"] = bar_chart(clim.yearly_cyclone_counts(dataset.cyclones),
                                           f"{cfg.basin.label}: cyclones per year", "year", "cyclones", det)
    ri_years = clim.yearly_ri_counts(dataset.cyclones, w)
    if ri_years:
        figures["yearly_ri_events"] = bar_chart(ri_years, f"{cfg.basin.label}: RI events per year",
                                                "year", "ri_events", det)
    figures["ri_by_category"] = bar_chart(clim.ri_by_category(dataset.cyclones, cfg.category_scale(), w),
                                          f"{cfg.basin.label}: RI events by category", "category", "ri_events", det)

    by_id = {c.id: c for c in dataset.cyclones}
    synth_path = out / f"{p}_synthetic_tracks.csv"
    if synth_path.exists():
        rows = _read_csv(synth_path)
        seqs: dict[str, list[dict]] = {}
        for r in rows:
            seqs.setdefault(r["cyclone_id"], []).append(r)
        tracks = [TrackSeries(sid, [float(r["lat_deg"]) for r in rs], [float(r["lon_deg_east"]) for r in rs],
                              dashed=True) for sid, rs in list(seqs.items())[:8]]
        if tracks:
            figures["synthetic_tracks"] = track_map(tracks, f"{cfg.basin.label}: synthetic RI tracks", det)
        split = split_by_period(dataset, cfg.train_fraction)
        real = [float(np.mean(win.features[:, WIND])) for win in build_all_windows(split.train, w)
                if win.label == Label.RI]
        synth = [float(np.mean([float(r["wind_kt"]) for r in rs])) for rs in seqs.values()]
        if real and synth:
            figures["avg_wind_histogram"] = histogram({"original": real, "augmented": synth}, 20,
                                                      f"{cfg.basin.label}: average wind of RI instances",
                                                      "average wind (kt)", det)

    for kind in (StrategyKind.DA_M, StrategyKind.M, StrategyKind.HE, StrategyKind.E, StrategyKind.U):
        pred_path = out / f"{p}_predictions_{kind.value}.csv"
        if not pred_path.exists():
            continue
        marks: dict[str, dict[int, bool]] = {}
        for r in _read_csv(pred_path):
            if int(r["label"]) == Label.RI:
                end = int(r["start_index"]) + w.n - 1
                marks.setdefault(r["cyclone_id"], {})[end] = int(r["predicted"]) == Label.RI
        tracks = []
        for cid, m in sorted(marks.items()):
            c = by_id.get(cid)
            if c is not None:
                tracks.append(TrackSeries(cid, [pt.latitude for pt in c.points],
                                          [pt.longitude for pt in c.points], m))
        if tracks:
            figures[f"ri_detection_{kind.value}"] = track_map(
                tracks, f"{cfg.basin.label}: RI points detected (green) and missed (red), {kind.display}", det)
        break

    for name, (svg, table) in figures.items():
        _write(out, f"{p}_{name}.svg", svg)
        _write(out, f"{p}_{name}.csv", table)
    print(f"wrote {len(figures)} figures to {out}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "sweep": cmd_sweep,
    "benchmark": cmd_benchmark,
    "augment": cmd_augment,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingDivergedError, BenchmarkError) as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
