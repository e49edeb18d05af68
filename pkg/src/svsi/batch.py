"""Manifest-driven batch analysis with optional process parallelism."""
from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import AnalysisConfig
from .errors import ManifestError, SvsiError
from .indices import SvsiResult, analyze
from .trace import EventTimeline, ingest_csv


@dataclass(frozen=True)
class BatchEntry:
    id: str
    file: str
    t_flt: float
    t_clear: float
    t_end: float


def read_manifest(path) -> list[BatchEntry]:
    """Batch manifest as JSON (``{"traces": [...]}`` or a bare list) or CSV.

    Every entry carries ``id, file, t_flt, t_clear, t_end``; relative file
    paths resolve against the manifest's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            doc = json.loads(text)
            items = doc["traces"] if isinstance(doc, dict) else doc
        else:
            items = list(csv.DictReader(text.splitlines()))
        entries = []
        for n, item in enumerate(items):
            entries.append(BatchEntry(
                id=str(item.get("id") or n),
                file=os.path.join(str(path.parent), item["file"]),
                t_flt=float(item["t_flt"]),
                t_clear=float(item["t_clear"]),
                t_end=float(item["t_end"]),
            ))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ManifestError(f"malformed manifest {path}: {exc!r}") from None
    return entries


def analyze_entry(entry: BatchEntry, config: AnalysisConfig) -> tuple[SvsiResult | None, str | None]:
    try:
        timeline = EventTimeline(entry.t_flt, entry.t_clear, entry.t_end)
        return analyze(ingest_csv(entry.file, timeline), config), None
    except OSError as exc:
        return None, f"unreadable trace: {exc.strerror or exc}"
    except SvsiError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _entry_job(job):
    return analyze_entry(*job)


def parallel_map(fn, items, jobs=1):
    """Ordered map, fanned out over ``jobs`` worker processes when > 1."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def run_batch(entries, config: AnalysisConfig | None = None, jobs: int = 1):
    """(entry, result, error) triples in manifest order."""
    cfg = config or AnalysisConfig()
    outcomes = parallel_map(_entry_job, [(e, cfg) for e in entries], jobs)
    return [(e, r, err) for e, (r, err) in zip(entries, outcomes)]
