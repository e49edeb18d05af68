"""
The three short-term voltage stability components and the composite score.

analyze() runs the full chain on a raw trace: normalize, classify, extract
the oscillation midline, estimate V_S, locate T_SVSIr and T_Stable, then
integrate the restoration (svsi_r), oscillation (svsi_o) and settling
(svsi_s) components.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .classify import ScenarioClass, Verdict, classify_scenario
from .config import AnalysisConfig
from .errors import WindowError
from .steady import (
    SteadyStateEstimate,
    estimate_vs_recovered,
    estimate_vs_unrecovered,
    find_t_stable,
    post_clear_extrema,
)
from .trace import VoltageTrace, integrate_abs_dev, normalize

# Values this close below V_S count as having reached it.
REACH_EPS = 1e-12


class TSvsirKind(str, enum.Enum):
    CROSSING = "crossing"
    ABOVE_FROM_CLEAR = "above_from_clear"
    POST_CLEAR_MAX = "post_clear_max"
    HORIZON_END = "horizon_end"


@dataclass(frozen=True)
class SvsiResult:
    svsi_r: float
    svsi_o: float
    svsi_s: float
    composite: float
    scenario: ScenarioClass
    estimate: SteadyStateEstimate
    t_svsir: float
    t_svsir_kind: TSvsirKind
    weights: tuple[float, float, float]

    @property
    def components(self) -> tuple[float, float, float]:
        return self.svsi_r, self.svsi_o, self.svsi_s


def composite_score(components, weights) -> float:
    return float(sum(w * c for w, c in zip(weights, components)))


def find_t_svsir(trace: VoltageTrace, v_s: float, scenario: ScenarioClass) -> tuple[float, TSvsirKind]:
    """Instant the recovering voltage first reaches V_S while rising.

    Unrecovered traces return the horizon.  A trace that never drops below
    V_S after clearing returns t_clear.  Otherwise the first sample pair
    ``v[i-1] < V_S <= v[i]`` after clearing is refined by linear
    interpolation; without any such pair the time of the post-clearing
    maximum is used.
    """
    tl = trace.timeline
    if not scenario.recovered:
        return tl.t_end, TSvsirKind.HORIZON_END
    lo, hi = trace.window_indices(tl.t_clear, tl.t_end)
    first = lo + 1 if trace.times[lo] <= tl.t_clear + 1e-6 * trace.dt else lo
    post = trace.values[first : hi + 1]
    if post.size == 0:
        raise WindowError("no samples after clearing")
    target = v_s - REACH_EPS
    if np.all(post >= target):
        return tl.t_clear, TSvsirKind.ABOVE_FROM_CLEAR
    start = max(first - 1, 0)
    v = trace.values[start : hi + 1]
    hits = np.flatnonzero((v[:-1] < target) & (v[1:] >= target))
    if hits.size:
        i = start + int(hits[0])
        v0, v1 = trace.values[i], trace.values[i + 1]
        frac = min(max((v_s - v0) / (v1 - v0), 0.0), 1.0)
        return float(trace.times[i] + frac * trace.dt), TSvsirKind.CROSSING
    k = first + int(np.argmax(post))
    return float(trace.times[k]), TSvsirKind.POST_CLEAR_MAX


def svsi_r(trace: VoltageTrace, v_s: float, t_svsir: float, scenario: ScenarioClass) -> float:
    """Restoration component: area between v and V_S from fault inception to T_SVSIr.

    Unrecovered traces measure against the pre-fault level (1.0) up to the
    horizon instead.
    """
    tl = trace.timeline
    if scenario.recovered:
        return integrate_abs_dev(trace, v_s, (tl.t_flt, t_svsir))
    return integrate_abs_dev(trace, trace.values[trace.reference_index], (tl.t_flt, tl.t_end))


def _running_means(x, m):
    """Causal then anti-causal box means of length ``m``, truncated at the edges."""
    n = x.size
    c = np.concatenate(([0.0], np.cumsum(x)))
    i = np.arange(n)
    lo = np.maximum(i - m + 1, 0)
    fwd = (c[i + 1] - c[lo]) / (i + 1 - lo)
    c = np.concatenate(([0.0], np.cumsum(fwd)))
    hi = np.minimum(i + m, n)
    return (c[hi] - c[i]) / (hi - i)


def extract_midline(trace: VoltageTrace, cutoff: float = 0.1) -> VoltageTrace:
    """Zero-phase low-pass trend of v(t) on [t_clear, t_end].

    A forward moving average followed by a backward one, each ``L`` seconds
    long with ``L = min(1/cutoff, (t_end - t_clear)/2)``; near the window
    edges each pass averages over the samples available.  Samples outside the
    window are copied from the trace so the result shares its grid.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    tl = trace.timeline
    lo, hi = trace.window_indices(tl.t_clear, tl.t_end)
    n = hi - lo + 1
    if n < 3:
        raise WindowError(f"midline window [{tl.t_clear}, {tl.t_end}] holds {max(n, 0)} samples")
    length = min(1.0 / cutoff, (tl.t_end - tl.t_clear) / 2.0)
    m = max(1, int(round(length / trace.dt)) + 1)
    seg = trace.values[lo : hi + 1]
    base = seg[0]
    mid = np.array(trace.values, copy=True)
    mid[lo : hi + 1] = base + _running_means(seg - base, m)
    return trace.with_values(mid)


def svsi_o(trace: VoltageTrace, midline: VoltageTrace) -> float:
    """Oscillation component: area between v and its midline after clearing."""
    tl = trace.timeline
    return integrate_abs_dev(trace, midline, (tl.t_clear, tl.t_end))


def svsi_s(trace: VoltageTrace, estimate: SteadyStateEstimate) -> float:
    """Settling component (v(0) - V_S) * (T_Stable - t_clear), floored at zero."""
    v0 = trace.values[trace.reference_index]
    return float(max(0.0, v0 - estimate.v_s) * (estimate.t_stable - trace.timeline.t_clear))


def analyze(trace: VoltageTrace, config: AnalysisConfig | None = None) -> SvsiResult:
    """Full index computation for one raw trace.

    Samples after ``t_end`` are ignored.
    """
    cfg = config or AnalysisConfig()
    tl = trace.timeline
    v = normalize(trace.crop(tl.t_end))
    scenario = classify_scenario(v, cfg.threshold, cfg.window_offsets)
    midline = extract_midline(v, cfg.cutoff)
    extrema = None
    if scenario.verdict is Verdict.RECOVERED:
        extrema = post_clear_extrema(v, cfg.prominence)
        v_s, method = estimate_vs_recovered(v, cfg.prominence, cfg.gentle_slope, cfg.tail_window, extrema)
    else:
        v_s, method = estimate_vs_unrecovered(midline)
    t_svsir, t_kind = find_t_svsir(v, v_s, scenario)
    t_stable, s_kind = find_t_stable(v, v_s, cfg.v_wth, scenario, cfg.prominence, extrema)
    estimate = SteadyStateEstimate(float(v_s), method, float(t_stable), s_kind)
    comps = (svsi_r(v, v_s, t_svsir, scenario), svsi_o(v, midline), svsi_s(v, estimate))
    return SvsiResult(
        *comps,
        composite=composite_score(comps, cfg.weights),
        scenario=scenario,
        estimate=estimate,
        t_svsir=float(t_svsir),
        t_svsir_kind=t_kind,
        weights=cfg.weights,
    )
