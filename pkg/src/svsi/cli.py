"""
Command-line entry point.

    svsi analyze trace.csv --t-flt 0.1 --t-clear 0.2 --t-end 10.2
    svsi batch manifest.csv --jobs 4 > table.csv
    svsi rank-var study.json --out-dir results/
    svsi synth spec.json -o trace.csv

Exit codes: 2 parse/grid/manifest errors, 3 timeline/horizon errors,
4 any other analysis failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .batch import read_manifest, run_batch
from .config import AnalysisConfig, load_config
from .errors import (
    GridError,
    InsufficientHorizonError,
    ManifestError,
    ParseError,
    StudyError,
    SvsiError,
    TimelineError,
)
from .indices import analyze
from .placement import AGGREGATES, PlacementStudy, evaluate_study
from .report import (
    BATCH_COLUMNS,
    CELL_COLUMNS,
    dumps,
    render_csv,
    result_row,
    result_to_dict,
    rnd,
    write_trace_csv,
)
from .synth import WaveformSpec, generate, oracle_indices
from .trace import EventTimeline, ingest_csv

EXIT_PARSE = 2
EXIT_TIMELINE = 3
EXIT_ANALYSIS = 4


class UsageError(Exception):
    pass


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ParseError, GridError, ManifestError, UsageError, OSError)):
        return EXIT_PARSE
    if isinstance(exc, StudyError) and exc.cell is None:
        return EXIT_PARSE
    if isinstance(exc, (TimelineError, InsufficientHorizonError)):
        return EXIT_TIMELINE
    return EXIT_ANALYSIS


def _weights(text):
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be w_r,w_o,w_s") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("weights must be w_r,w_o,w_s")
    return parts


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file (default: $SVSI_CONFIG)")
    p.add_argument("--threshold", type=float, help="recovery threshold in pu (0.8)")
    p.add_argument("--v-wth", dest="v_wth", type=float, help="settling band in pu (0.01)")
    p.add_argument("--cutoff", type=float, help="midline cutoff in Hz (0.1)")
    p.add_argument("--weights", type=_weights, help="composite weights w_r,w_o,w_s (1,1,1)")


def _config(args) -> AnalysisConfig:
    try:
        cfg = load_config(args.config)
        return cfg.updated(threshold=args.threshold, v_wth=args.v_wth, cutoff=args.cutoff, weights=args.weights)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad configuration: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svsi", description="Short-term voltage stability index toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="index one trace, JSON report on stdout")
    p.add_argument("file")
    p.add_argument("--t-flt", dest="t_flt", type=float, required=True)
    p.add_argument("--t-clear", dest="t_clear", type=float, required=True)
    p.add_argument("--t-end", dest="t_end", type=float, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_config_flags(p)

    p = sub.add_parser("batch", help="index every trace listed in a manifest")
    p.add_argument("manifest")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", help="write the table here instead of stdout")
    _add_config_flags(p)

    p = sub.add_parser("rank-var", help="rank dynamic-var locations from a study manifest")
    p.add_argument("study")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--aggregate", choices=AGGREGATES, default="worst")
    p.add_argument("--out-dir", help="write ranking.json and cells.csv here")
    p.add_argument("--cells", help="also write the per-cell CSV to this path")
    p.add_argument("--format", choices=("json",), default="json")
    _add_config_flags(p)

    p = sub.add_parser("synth", help="generate a synthetic trace and its ground-truth sidecar")
    p.add_argument("spec", help="waveform spec JSON")
    p.add_argument("-o", "--out", required=True, help="trace CSV path")
    p.add_argument("--sidecar", help="ground-truth JSON path (default: <out>.truth.json)")
    _add_config_flags(p)
    return parser


def _emit(text, path=None):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    cfg = _config(args)
    timeline = EventTimeline(args.t_flt, args.t_clear, args.t_end)
    result = analyze(ingest_csv(args.file, timeline), cfg)
    if args.format == "csv":
        row = {"id": Path(args.file).stem, **result_row(result)}
        _emit(render_csv([row], BATCH_COLUMNS))
    else:
        _emit(dumps(result_to_dict(result, timeline, cfg)))
    return 0


def cmd_batch(args) -> int:
    cfg = _config(args)
    entries = read_manifest(args.manifest)
    outcomes = run_batch(entries, cfg, max(1, args.jobs))
    rows = [{"id": e.id, **result_row(r, err)} for e, r, err in outcomes]
    failed = sum(1 for _, r, _ in outcomes if r is None)
    if args.format == "json":
        _emit(dumps(rows), args.output)
    else:
        _emit(render_csv(rows, BATCH_COLUMNS), args.output)
    if failed:
        print(f"svsi batch: warning: {failed} of {len(rows)} traces failed", file=sys.stderr)
    return 0


def ranking_report(study, ranking) -> dict:
    return {
        "aggregate": ranking.aggregate,
        "weights": list(ranking.weights),
        "ranked": list(ranking.ranked),
        "scores": {loc: rnd(ranking.per_location_score[loc]) for loc in study.locations},
        "dominance": [
            {"location": a, "versus": b, "contingency": c, "relation": rel}
            for (a, b, c), rel in ranking.dominance.items()
        ],
    }


def cell_rows(study, ranking):
    return [
        {"contingency": c, "location": l, "bus": b, **result_row(ranking.per_cell[(c, l, b)])}
        for (c, l, b) in study.cells()
    ]


def cmd_rank_var(args) -> int:
    cfg = _config(args)
    study = PlacementStudy.from_manifest(args.study)
    if args.weights is not None:
        study.weights = None
    ranking = evaluate_study(study, cfg, jobs=max(1, args.jobs), aggregate=args.aggregate)
    report = dumps(ranking_report(study, ranking))
    cells = render_csv(cell_rows(study, ranking), CELL_COLUMNS)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ranking.json").write_text(report, encoding="utf-8")
        (out / "cells.csv").write_text(cells, encoding="utf-8")
    if args.cells:
        Path(args.cells).write_text(cells, encoding="utf-8")
    if not args.out_dir:
        _emit(report)
    return 0


def _finite_or_none(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    return obj


def cmd_synth(args) -> int:
    cfg = _config(args)
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = WaveformSpec.from_dict(json.load(fh))
    except ValueError as exc:
        raise UsageError(f"bad spec file: {exc}") from None
    trace, truth = generate(spec, cfg.v_wth, cfg.threshold, cfg.window_offsets)
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        write_trace_csv(fh, trace.times, trace.values)
    sidecar = {"spec": spec.to_dict(), "ground_truth": _finite_or_none(truth.to_dict())}
    try:
        r, o, s = oracle_indices(spec, cfg.v_wth, cfg.threshold, cfg.window_offsets, cfg.cutoff)
        sidecar["oracle"] = {"svsi_r": r, "svsi_o": o, "svsi_s": s}
    except SvsiError as exc:
        sidecar["oracle"] = None
        sidecar["oracle_unsupported"] = str(exc)
    side = Path(args.sidecar) if args.sidecar else out.with_suffix(".truth.json")
    side.write_text(dumps(sidecar), encoding="utf-8")
    return 0


COMMANDS = {"analyze": cmd_analyze, "batch": cmd_batch, "rank-var": cmd_rank_var, "synth": cmd_synth}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SvsiError, UsageError, OSError, ValueError) as exc:
        print(f"svsi {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
