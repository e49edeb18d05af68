"""Stable JSON / CSV rendering of results (9 significant digits)."""
from __future__ import annotations

import csv
import io
import json

from .indices import SvsiResult

BATCH_COLUMNS = ("id", "scenario", "svsi_r", "svsi_o", "svsi_s", "composite", "v_s", "t_svsir", "t_stable", "error")
CELL_COLUMNS = ("contingency", "location", "bus") + BATCH_COLUMNS[1:-1]


def fmt(x) -> str:
    return format(float(x), ".9g")


def rnd(x) -> float:
    """Round to 9 significant digits so JSON output is reproducible."""
    return float(fmt(x))


def result_to_dict(result: SvsiResult, timeline=None, config=None) -> dict:
    est = result.estimate
    sc = result.scenario
    d = {
        "scenario": sc.verdict.value,
        "svsi_r": rnd(result.svsi_r),
        "svsi_o": rnd(result.svsi_o),
        "svsi_s": rnd(result.svsi_s),
        "composite": rnd(result.composite),
        "weights": [rnd(w) for w in result.weights],
        "v_s": rnd(est.v_s),
        "method": est.method.value,
        "t_svsir": rnd(result.t_svsir),
        "t_svsir_kind": result.t_svsir_kind.value,
        "t_stable": rnd(est.t_stable),
        "t_stable_kind": est.t_stable_kind.value,
        "window_mean": rnd(sc.window_mean),
        "window": [rnd(x) for x in sc.window],
    }
    if timeline is not None:
        d["timeline"] = {"t_flt": rnd(timeline.t_flt), "t_clear": rnd(timeline.t_clear), "t_end": rnd(timeline.t_end)}
    if config is not None:
        d["config"] = _round_tree(config.to_dict())
    return d


def _round_tree(obj):
    if isinstance(obj, float):
        return rnd(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_round_tree(obj), indent=2, allow_nan=False) + "\n"


def result_row(result: SvsiResult | None, error: str | None = None) -> dict:
    if result is None:
        return {"scenario": "", "svsi_r": "", "svsi_o": "", "svsi_s": "", "composite": "",
                "v_s": "", "t_svsir": "", "t_stable": "", "error": error or ""}
    return {
        "scenario": result.scenario.verdict.value,
        "svsi_r": fmt(result.svsi_r),
        "svsi_o": fmt(result.svsi_o),
        "svsi_s": fmt(result.svsi_s),
        "composite": fmt(result.composite),
        "v_s": fmt(result.estimate.v_s),
        "t_svsir": fmt(result.t_svsir),
        "t_stable": fmt(result.estimate.t_stable),
        "error": "",
    }


def render_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_trace_csv(fh, times, values):
    """Two-column trace file in the ingestion format."""
    fh.write("time,v\n")
    fh.write("".join(f"{t:.9g},{v:.9g}\n" for t, v in zip(times.tolist(), values.tolist())))
