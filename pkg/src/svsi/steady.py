"""
Post-contingency steady-state voltage and settling time.

Recovered traces estimate the steady-state voltage from the last
peak/valley pair; when no oscillation is recognisable the tail of the signal
decides between the end value (gentle tail) and the mid-range of the tail
segment (steep tail).  Unrecovered traces take the midline at the horizon.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .classify import ScenarioClass
from .trace import Extremum, VoltageTrace, find_extrema, tail_slope

DEFAULT_V_WTH = 0.01
DEFAULT_PROMINENCE = 0.005
DEFAULT_GENTLE_SLOPE = 0.01
DEFAULT_TAIL_WINDOW = 1.0


class VsMethod(str, enum.Enum):
    LAST_PEAK_VALLEY_MEAN = "last_peak_valley_mean"
    END_VALUE = "end_value"
    MIDLINE_END = "midline_end"


class StableKind(str, enum.Enum):
    CONVERGED = "converged"
    FORCED_END = "forced_end"
    IMMEDIATE_CLEAR = "immediate_clear"


@dataclass(frozen=True)
class SteadyStateEstimate:
    v_s: float
    method: VsMethod
    t_stable: float
    t_stable_kind: StableKind


def post_clear_extrema(trace: VoltageTrace, prominence: float = DEFAULT_PROMINENCE) -> list[Extremum]:
    tl = trace.timeline
    ext = find_extrema(trace, (tl.t_clear, tl.t_end), prominence)
    return [e for e in ext if e.time > tl.t_clear]


def estimate_vs_recovered(
    trace: VoltageTrace,
    prominence: float = DEFAULT_PROMINENCE,
    gentle_slope: float = DEFAULT_GENTLE_SLOPE,
    tail_window: float = DEFAULT_TAIL_WINDOW,
    extrema: list[Extremum] | None = None,
) -> tuple[float, VsMethod]:
    """Steady-state voltage of a recovered trace.

    With both a peak and a valley after clearing, the result is the mean of
    the last peak and the last valley.  Otherwise the tail segment runs from
    the last extremum (or clearing) to the horizon, clipped to its final
    ``tail_window`` seconds.  A tail whose least-squares slope is at most
    ``gentle_slope`` gives the end value; a steeper tail gives the mean of the
    segment's highest and lowest samples.
    """
    tl = trace.timeline
    ext = post_clear_extrema(trace, prominence) if extrema is None else extrema
    peaks = [e for e in ext if e.kind == "peak"]
    valleys = [e for e in ext if e.kind == "valley"]
    if peaks and valleys:
        return 0.5 * (peaks[-1].value + valleys[-1].value), VsMethod.LAST_PEAK_VALLEY_MEAN

    start = ext[-1].time if ext else tl.t_clear
    start = max(start, tl.t_end - tail_window)
    lo, hi = trace.window_indices(start, tl.t_end)
    if hi - lo + 1 < 2:
        lo = max(0, hi - 1)
        start = trace.times[lo]
    slope = tail_slope(trace, start)
    if abs(slope) <= gentle_slope:
        return trace.value_at(tl.t_end), VsMethod.END_VALUE
    seg = trace.values[lo : hi + 1]
    return 0.5 * (float(seg.max()) + float(seg.min())), VsMethod.LAST_PEAK_VALLEY_MEAN


def estimate_vs_unrecovered(midline: VoltageTrace) -> tuple[float, VsMethod]:
    return midline.value_at(midline.timeline.t_end), VsMethod.MIDLINE_END


def _growing(extrema, v_s):
    # three successive same-kind extrema drifting further from v_s
    for kind in ("peak", "valley"):
        devs = [abs(e.value - v_s) for e in extrema if e.kind == kind][-3:]
        if len(devs) == 3 and devs[0] < devs[1] < devs[2]:
            return True
    return False


def find_t_stable(
    trace: VoltageTrace,
    v_s: float,
    v_wth: float = DEFAULT_V_WTH,
    scenario: ScenarioClass | None = None,
    prominence: float = DEFAULT_PROMINENCE,
    extrema: list[Extremum] | None = None,
) -> tuple[float, StableKind]:
    """First instant after which |v_s - v| stays below ``v_wth`` up to the horizon.

    Unrecovered scenarios, growing oscillations and tails that never settle
    all return the horizon.  The reported time is the first sample of the
    settled tail.
    """
    if not v_wth > 0:
        raise ValueError("v_wth must be positive")
    tl = trace.timeline
    if scenario is not None and not scenario.recovered:
        return tl.t_end, StableKind.FORCED_END
    if extrema is None:
        extrema = post_clear_extrema(trace, prominence)
    if _growing(extrema, v_s):
        return tl.t_end, StableKind.FORCED_END
    lo, hi = trace.window_indices(tl.t_clear, tl.t_end)
    outside = np.abs(v_s - trace.values[lo : hi + 1]) >= v_wth
    if not outside.any():
        return tl.t_clear, StableKind.IMMEDIATE_CLEAR
    last = lo + int(np.flatnonzero(outside)[-1])
    if last >= hi:
        return tl.t_end, StableKind.FORCED_END
    return float(trace.times[last + 1]), StableKind.CONVERGED
