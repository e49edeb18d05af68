"""
Dynamic-var location ranking from a contingency x location x bus trace matrix.

Each cell is analyzed independently; a location's score aggregates its
composite SVSI over buses and contingencies (worst bus per contingency,
summed, by default).  Lower is better.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

from .config import AnalysisConfig
from .errors import StudyError, SvsiError
from .indices import SvsiResult, analyze
from .trace import EventTimeline, ingest_csv

AGGREGATES = ("worst", "mean", "sum")

DOMINATES = "dominates"
PARTIAL = "partial"
DOMINATED = "dominated"

Cell = tuple  # (contingency, location, bus)


@dataclass(frozen=True)
class TraceRef:
    file: str
    timeline: EventTimeline


@dataclass
class PlacementStudy:
    contingencies: list[str]
    locations: list[str]
    buses: list[str]
    traces: dict[Cell, TraceRef]
    weights: tuple[float, float, float] | None = None

    def __post_init__(self):
        for name in ("contingencies", "locations", "buses"):
            labels = getattr(self, name)
            if not labels:
                raise StudyError(f"study lists no {name}")
            if len(set(labels)) != len(labels):
                raise StudyError(f"duplicate labels in {name}")
        known = set(self.cells())
        for cell in self.traces:
            if cell not in known:
                raise StudyError("trace references an unknown label", cell)
        for cell in self.cells():
            if cell not in self.traces:
                raise StudyError("trace matrix is incomplete", cell)

    def cells(self):
        return [(c, l, b) for c in self.contingencies for l in self.locations for b in self.buses]

    @classmethod
    def from_manifest(cls, path) -> "PlacementStudy":
        """Load the JSON study manifest; trace paths resolve relative to it."""
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise StudyError(f"cannot read study manifest {path}: {exc}") from None
        return cls.from_dict(doc, base_dir=path.parent)

    @classmethod
    def from_dict(cls, doc: Mapping, base_dir=".") -> "PlacementStudy":
        try:
            traces = {}
            for item in doc["traces"]:
                cell = (str(item["contingency"]), str(item["location"]), str(item["bus"]))
                if cell in traces:
                    raise StudyError("duplicate trace entry", cell)
                try:
                    tl = EventTimeline(float(item["t_flt"]), float(item["t_clear"]), float(item["t_end"]))
                except SvsiError as exc:
                    raise StudyError(str(exc), cell) from None
                traces[cell] = TraceRef(os.path.join(str(base_dir), item["file"]), tl)
            weights = doc.get("weights")
            return cls(
                contingencies=[str(x) for x in doc["contingencies"]],
                locations=[str(x) for x in doc["locations"]],
                buses=[str(x) for x in doc["buses"]],
                traces=traces,
                weights=None if weights is None else tuple(float(w) for w in weights),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise StudyError(f"malformed study manifest: {exc!r}") from None


@dataclass
class PlacementRanking:
    per_cell: dict[Cell, SvsiResult]
    per_location_score: dict[str, float]
    dominance: dict[tuple[str, str, str], str]
    ranked: list[str]
    aggregate: str = "worst"
    weights: tuple[float, float, float] = field(default=(1.0, 1.0, 1.0))


def dominance_table(contingencies, locations, buses, composite: Mapping[Cell, float]):
    """Pairwise comparison per contingency: is ``a`` lower than ``b`` at every bus?

    Keys are ``(a, b, contingency)`` for every ordered pair of distinct
    locations.
    """
    table = {}
    for a in locations:
        for b in locations:
            if a == b:
                continue
            for c in contingencies:
                lower = sum(composite[(c, a, k)] < composite[(c, b, k)] for k in buses)
                table[(a, b, c)] = DOMINATES if lower == len(buses) else PARTIAL if lower else DOMINATED
    return table


def location_scores(contingencies, locations, buses, composite, aggregate="worst"):
    if aggregate not in AGGREGATES:
        raise ValueError(f"aggregate must be one of {AGGREGATES}")
    scores = {}
    for loc in locations:
        per_c = []
        for c in contingencies:
            vals = [composite[(c, loc, b)] for b in buses]
            if aggregate == "worst":
                per_c.append(max(vals))
            elif aggregate == "mean":
                per_c.append(sum(vals) / len(vals))
            else:
                per_c.append(sum(vals))
        scores[loc] = float(sum(per_c) / len(per_c) if aggregate == "mean" else sum(per_c))
    return scores


def rank_locations(contingencies, locations, buses, composite: Mapping[Cell, float], aggregate="worst"):
    """Scores, dominance table and ascending ranking for precomputed composites.

    Ties on the score go to the location with more ``dominates`` entries,
    then to the lexicographically smaller label.
    """
    scores = location_scores(contingencies, locations, buses, composite, aggregate)
    table = dominance_table(contingencies, locations, buses, composite)
    wins = {loc: sum(1 for (a, _, _), v in table.items() if a == loc and v == DOMINATES) for loc in locations}
    ranked = sorted(locations, key=lambda loc: (scores[loc], -wins[loc], loc))
    return scores, table, ranked


def _analyze_cell(job):
    cell, ref, config = job
    try:
        trace = ingest_csv(ref.file, ref.timeline)
        return cell, analyze(trace, config), None
    except OSError as exc:
        return cell, None, f"unreadable trace {ref.file}: {exc.strerror or exc}"
    except SvsiError as exc:
        return cell, None, f"{type(exc).__name__}: {exc}"


def evaluate_study(study: PlacementStudy, config: AnalysisConfig | None = None, jobs: int = 1,
                   aggregate: str = "worst", mapper: Callable | None = None) -> PlacementRanking:
    """Analyze every cell of the study and rank the candidate locations."""
    cfg = config or AnalysisConfig()
    if study.weights is not None:
        cfg = cfg.updated(weights=study.weights)
    cells = study.cells()
    work = [(cell, study.traces[cell], cfg) for cell in cells]
    if mapper is None:
        from .batch import parallel_map

        results = parallel_map(_analyze_cell, work, jobs)
    else:
        results = list(mapper(_analyze_cell, work))
    per_cell = {}
    for cell, result, err in results:
        if err is not None:
            raise StudyError(err, cell)
        per_cell[cell] = result
    composite = {cell: r.composite for cell, r in per_cell.items()}
    scores, table, ranked = rank_locations(
        study.contingencies, study.locations, study.buses, composite, aggregate
    )
    return PlacementRanking(per_cell, scores, table, ranked, aggregate, cfg.weights)
