"""
Voltage trace data model and the low-level signal primitives.

Every analysis routine in the package works on a :class:`VoltageTrace`: a
uniformly sampled per-unit voltage series together with the event timeline
(fault inception, fault clearing, analysis horizon).  The primitives here are
deliberately small:

normalize():          divide by the pre-fault reference sample.
find_extrema():       hysteresis peak/valley detection with plateau midpoints.
tail_slope():         least-squares slope from a given instant to the horizon.
integrate_abs_dev():  exact integral of |v - ref| for piecewise-linear data.
window_mean():        trapezoidal mean over a window.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import DegenerateBaseError, GridError, ParseError, TimelineError, WindowError

GRID_RTOL = 1e-9
# Time comparisons snap to the grid within this fraction of one step.
_SNAP = 1e-6


@dataclass(frozen=True)
class EventTimeline:
    t_flt: float
    t_clear: float
    t_end: float

    def __post_init__(self):
        for name in ("t_flt", "t_clear", "t_end"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise TimelineError(f"{name} must be finite, got {value!r}")
        if not self.t_flt < self.t_clear < self.t_end:
            raise TimelineError(
                f"need t_flt < t_clear < t_end, got {self.t_flt}, {self.t_clear}, {self.t_end}"
            )


@dataclass(frozen=True, eq=False)
class VoltageTrace:
    """Uniformly sampled voltage series plus its event timeline.

    ``values`` are raw units until :func:`normalize` divides them by the
    pre-fault reference sample, after which ``normalized`` is True.
    """

    times: np.ndarray
    values: np.ndarray
    timeline: EventTimeline
    normalized: bool = False
    dt: float = field(init=False)

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        if times.ndim != 1 or values.shape != times.shape:
            raise GridError("times and values must be 1-D arrays of equal length")
        if times.size < 2:
            raise GridError("a trace needs at least 2 samples")
        if not np.all(np.isfinite(times)):
            raise GridError("non-finite sample time")
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise GridError("sample times must be strictly increasing")
        dt = (times[-1] - times[0]) / (times.size - 1)
        # floor for the representation error of large time stamps
        tol = max(GRID_RTOL * dt, 8 * np.finfo(float).eps * np.max(np.abs(times)))
        if np.max(np.abs(steps - dt)) > tol:
            raise GridError("sample times are not uniformly spaced")
        if not np.all(np.isfinite(values)):
            raise GridError("non-finite voltage sample")
        if np.any(values < 0):
            raise GridError("voltage samples must be non-negative")
        tol = _SNAP * dt
        tl = self.timeline
        if tl.t_flt < times[0] - tol or tl.t_end > times[-1] + tol:
            raise TimelineError(
                f"timeline [{tl.t_flt}, {tl.t_end}] outside sampled span [{times[0]}, {times[-1]}]"
            )
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(dt))
        if self.normalized and self.values[self.reference_index] != 1.0:
            raise DegenerateBaseError("normalized trace must equal 1.0 at its reference sample")

    def __len__(self):
        return self.times.size

    @property
    def reference_index(self) -> int:
        """Index of the last sample at or before fault inception."""
        return self.index_at_or_before(self.timeline.t_flt)

    def index_at_or_before(self, t: float) -> int:
        return int(np.searchsorted(self.times, t + _SNAP * self.dt, side="right")) - 1

    def index_at_or_after(self, t: float) -> int:
        return int(np.searchsorted(self.times, t - _SNAP * self.dt, side="left"))

    def window_indices(self, t_a: float, t_b: float) -> tuple[int, int]:
        """Inclusive index range of samples inside [t_a, t_b]; empty if lo > hi."""
        return self.index_at_or_after(t_a), self.index_at_or_before(t_b)

    def value_at(self, t: float) -> float:
        """Linear interpolation, clamped to the sampled span."""
        return float(np.interp(t, self.times, self.values))

    def with_values(self, values, normalized=None) -> "VoltageTrace":
        return VoltageTrace(
            self.times, values, self.timeline,
            self.normalized if normalized is None else normalized,
        )

    def crop(self, t_last: float) -> "VoltageTrace":
        """Drop samples after ``t_last``, keeping one sample at or beyond it."""
        hi = min(self.index_at_or_after(t_last), len(self) - 1)
        if hi == len(self) - 1:
            return self
        return VoltageTrace(self.times[: hi + 1], self.values[: hi + 1], self.timeline, self.normalized)


@dataclass(frozen=True)
class Extremum:
    index: int
    time: float
    value: float
    kind: Literal["peak", "valley"]


# ---------------------------------------------------------------------------
# ingestion

def ingest_csv(source, timeline: EventTimeline) -> VoltageTrace:
    """Read a two-column ``time,voltage`` CSV with one header row.

    ``source`` may be a path, a binary stream or a text stream.  The header
    text is not checked beyond having two columns.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            raw = fh.read()
    else:
        raw = source.read()
    text = raw.decode("utf-8-sig") if isinstance(raw, bytes) else raw
    text = text.replace("\r\n", "\n")
    header, _, body = text.partition("\n")
    if len(header.rstrip("\r").split(",")) != 2:
        raise ParseError(1, "header must have exactly two columns")
    try:
        data = np.loadtxt(io.StringIO(body), delimiter=",", dtype=float, ndmin=2)
    except ValueError:
        data = None
    if data is None or data.shape[1] != 2 or not np.all(np.isfinite(data)):
        _raise_first_bad_row(body)
    if data.shape[0] < 2:
        raise GridError("a trace needs at least 2 samples")
    return VoltageTrace(data[:, 0], data[:, 1], timeline)


def _raise_first_bad_row(body: str):
    for offset, line in enumerate(body.splitlines(), start=2):
        cells = line.strip().split(",")
        if cells == [""]:
            continue
        if len(cells) != 2:
            raise ParseError(offset, f"expected 2 columns, got {len(cells)}")
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise ParseError(offset, f"not a number: {line.strip()!r}") from None
        if not all(math.isfinite(x) for x in values):
            raise ParseError(offset, f"non-finite value: {line.strip()!r}")
    raise ParseError(2, "no numeric rows")


# ---------------------------------------------------------------------------
# normalization

def normalize(trace: VoltageTrace) -> VoltageTrace:
    """Divide every sample by the last sample at or before fault inception."""
    base = trace.values[trace.reference_index]
    if not base > 0:
        raise DegenerateBaseError(f"pre-fault reference voltage is {base!r}")
    values = trace.values / base
    return trace.with_values(values, normalized=True)


# ---------------------------------------------------------------------------
# extrema

def find_extrema(trace: VoltageTrace, window: Sequence[float], prominence: float = 0.005) -> list[Extremum]:
    """Peaks and valleys located in ``window`` with hysteresis ``prominence``.

    Detection runs over the whole trace so that extrema near the window edges
    see their true neighbours; only extrema whose sample lies inside the
    window are returned.  A turning point is confirmed once the signal has
    moved away from it by at least ``prominence`` (and strictly), so every
    reported extremum differs from the preceding opposite-kind one by at least
    that much.  The first and last samples of the trace are never extrema.
    Flat tops and bottoms report the middle sample of the plateau.
    """
    t_a, t_b = window
    if prominence < 0:
        raise ValueError("prominence must be non-negative")
    lo, hi = trace.window_indices(t_a, t_b)
    if not t_a < t_b or lo > hi:
        raise WindowError(f"window [{t_a}, {t_b}] holds no samples")

    v = trace.values
    # collapse runs of equal values so plateaus become single points
    change = np.flatnonzero(np.diff(v) != 0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [v.size - 1]))
    runs = v[starts]
    if runs.size < 3:
        return []
    centre = (starts + ends) // 2
    d = np.sign(np.diff(runs))
    turning = np.flatnonzero(d[:-1] != d[1:]) + 1
    # points fed to the hysteresis: trace start, turning runs, trace end
    pos = np.concatenate(([0], turning, [runs.size - 1]))
    pts = runs[pos]
    idx = centre[pos]
    idx[0], idx[-1] = 0, v.size - 1

    found = []
    direction = 0
    seq = pts.tolist()
    hi_v = lo_v = seq[0]
    hi_i = lo_i = 0
    for j in range(1, len(seq)):
        x = seq[j]
        if direction > 0:
            if x > hi_v:
                hi_v, hi_i = x, j
            elif hi_v - x >= prominence and x < hi_v:
                found.append((hi_i, "peak"))
                direction, lo_v, lo_i = -1, x, j
        elif direction < 0:
            if x < lo_v:
                lo_v, lo_i = x, j
            elif x - lo_v >= prominence and x > lo_v:
                found.append((lo_i, "valley"))
                direction, hi_v, hi_i = 1, x, j
        else:
            if x - lo_v >= prominence and x > lo_v:
                direction, hi_v, hi_i = 1, x, j
            elif hi_v - x >= prominence and x < hi_v:
                direction, lo_v, lo_i = -1, x, j
            else:
                if x > hi_v:
                    hi_v, hi_i = x, j
                if x < lo_v:
                    lo_v, lo_i = x, j

    out = []
    last = pts.size - 1
    for j, kind in found:
        if j == 0 or j == last:
            continue
        i = int(idx[j])
        if lo <= i <= hi:
            out.append(Extremum(i, float(trace.times[i]), float(v[i]), kind))
    return out


# ---------------------------------------------------------------------------
# slopes and integrals

def tail_slope(trace: VoltageTrace, start: float) -> float:
    """Least-squares slope of v(t) on [start, t_end] in per-unit per second."""
    lo, hi = trace.window_indices(start, trace.timeline.t_end)
    if hi - lo + 1 < 2:
        raise WindowError(f"fewer than 2 samples in [{start}, {trace.timeline.t_end}]")
    t = trace.times[lo : hi + 1]
    v = trace.values[lo : hi + 1]
    tc = t - t.mean()
    # centring on v[0] keeps constant segments exactly flat
    return float(np.dot(tc, v - v[0]) / np.dot(tc, tc))


def _snapped_value(times, values, t, tol):
    # an endpoint sitting on a sample takes that sample, not a blend with its neighbour
    k = int(np.searchsorted(times, t))
    for j in (k - 1, k):
        if 0 <= j < times.size and abs(times[j] - t) <= tol:
            return values[j]
    return np.interp(t, times, values)


def _window_samples(times, values, t_a, t_b, dt):
    """Samples inside (t_a, t_b) with interpolated endpoints prepended/appended."""
    tol = _SNAP * dt
    lo = int(np.searchsorted(times, t_a + tol, side="right"))
    hi = int(np.searchsorted(times, t_b - tol, side="left"))
    va = _snapped_value(times, values, t_a, tol)
    vb = _snapped_value(times, values, t_b, tol)
    t = np.concatenate(([t_a], times[lo:hi], [t_b]))
    v = np.concatenate(([va], values[lo:hi], [vb]))
    return t, v


def _abs_trapezoid(t, d):
    """Exact integral of |d| where d is linear between the given points."""
    h = np.diff(t)
    d0, d1 = d[:-1], d[1:]
    a0, a1 = np.abs(d0), np.abs(d1)
    same = d0 * d1 >= 0
    denom = np.where(same, 1.0, a0 + a1)
    area = np.where(same, 0.5 * (a0 + a1), 0.5 * (d0 * d0 + d1 * d1) / denom)
    return float(np.dot(h, area))


def integrate_abs_dev(trace: VoltageTrace, reference, window: Sequence[float]) -> float:
    """Integral of |v(t) - reference(t)| over ``window``.

    ``reference`` is a constant in per-unit or a companion trace sampled on
    the identical grid.  The integrand is treated as piecewise linear between
    samples (trapezoidal rule), split exactly where it changes sign, and the
    window ends are linearly interpolated.
    """
    t_a, t_b = window
    span_tol = _SNAP * trace.dt
    if t_b < t_a or t_a < trace.times[0] - span_tol or t_b > trace.times[-1] + span_tol:
        raise WindowError(f"window [{t_a}, {t_b}] not inside the sampled span")
    if t_b == t_a:
        return 0.0
    if isinstance(reference, VoltageTrace):
        if reference.times.shape != trace.times.shape or np.max(
            np.abs(reference.times - trace.times)
        ) > _SNAP * trace.dt:
            raise GridError("companion trace is not on the same sample grid")
        dev = trace.values - reference.values
    else:
        dev = trace.values - float(reference)
    t, d = _window_samples(trace.times, dev, t_a, t_b, trace.dt)
    return _abs_trapezoid(t, d)


def window_mean(trace: VoltageTrace, window: Sequence[float]) -> float:
    """Trapezoidal mean of v(t) over ``window``; exact for constant signals."""
    t_a, t_b = window
    if not t_b > t_a:
        raise WindowError(f"empty window [{t_a}, {t_b}]")
    t, v = _window_samples(trace.times, trace.values, t_a, t_b, trace.dt)
    base = v[0]
    dev = v - base
    area = float(np.dot(np.diff(t), 0.5 * (dev[:-1] + dev[1:])))
    return float(base + area / (t[-1] - t[0]))
