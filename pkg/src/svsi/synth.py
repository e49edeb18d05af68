"""
Parametric post-contingency voltage waveforms with analytic landmarks.

Waveform algebra (per-unit, pre-fault level 1.0)::

    t <= t_flt            1
    t_flt < t < t_clear   v_fault
    t >= t_clear          v_s - (v_s - v_fault) * exp(-x / tau) + A * exp(-sigma * x) * cos(2 pi f x)

with ``x = t - t_clear``.  ``tau = 0`` means the voltage steps straight to
``v_s``.  Sag traces carry no oscillation, ring-downs decay, collapses settle
on a plateau below the recovery threshold (from below or from above).

oracle_indices() evaluates the three components by brute force on a grid ten
times finer than the trace, using the true V_S and landmark times instead of
any estimation logic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, optimize

from .classify import Verdict
from .errors import SpecError, UnsupportedSpecError
from .trace import EventTimeline, VoltageTrace

ORACLE_REFINE = 10
# Recovery residual at the horizon below which V_S is observable.
SETTLED_RESIDUAL = 1e-4


class Family(str, enum.Enum):
    SAG = "sag"
    RING_DOWN = "ringdown"
    COLLAPSE = "collapse"
    COMPOSITE = "composite"


@dataclass(frozen=True)
class WaveformSpec:
    family: Family
    v_fault: float = 0.2
    v_s_true: float = 1.0
    tau_recovery: float = 0.0
    osc_amp: float = 0.0
    osc_damping: float = 0.0
    osc_freq: float = 1.0
    timeline: EventTimeline = field(default_factory=lambda: EventTimeline(0.1, 0.2, 10.2))
    dt: float = 1e-3
    noise_amp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError:
            raise SpecError(f"unknown family {self.family!r}") from None
        if isinstance(self.timeline, dict):
            object.__setattr__(self, "timeline", EventTimeline(**self.timeline))
        self.validate()

    def validate(self):
        fam = self.family
        if not self.dt > 0:
            raise SpecError("dt must be positive")
        if self.v_fault < 0 or not self.v_s_true > 0:
            raise SpecError("voltages must be non-negative and v_s_true positive")
        if self.tau_recovery < 0 or self.noise_amp < 0 or self.osc_amp < 0:
            raise SpecError("tau_recovery, noise_amp and osc_amp must be non-negative")
        if 0 < self.tau_recovery < 1e-6:
            raise SpecError("tau_recovery must be 0 (step) or at least 1e-6 s")
        if self.osc_amp > 0 and not self.osc_freq > 0:
            raise SpecError("osc_freq must be positive")
        if self.timeline.t_flt < 0:
            raise SpecError("t_flt must be >= 0 so the trace has a pre-fault sample")
        for name in ("t_flt", "t_clear", "t_end"):
            steps = getattr(self.timeline, name) / self.dt
            if abs(steps - round(steps)) > 1e-6:
                raise SpecError(f"{name} must fall on the sample grid")
        if fam is Family.SAG:
            if not self.v_fault < self.v_s_true:
                raise SpecError("sag needs v_fault < v_s_true")
            if self.osc_amp != 0:
                raise SpecError("sag carries no oscillation; use the composite family")
        elif fam is Family.RING_DOWN:
            if not (self.osc_amp > 0 and self.osc_damping > 0):
                raise SpecError("ring-down needs osc_amp > 0 and osc_damping > 0")
        elif fam is Family.COLLAPSE:
            if not self.v_s_true < 0.8:
                raise SpecError("collapse plateau must lie below 0.8 pu")
        if self.osc_damping < 0 and fam not in (Family.COLLAPSE, Family.COMPOSITE):
            raise SpecError("negative damping only for collapse or composite (growing) cases")
        if self.v_s_true + self.osc_amp > 2.0 or self.v_s_true - self.osc_amp * math.exp(
            max(0.0, -self.osc_damping) * (self.timeline.t_end - self.timeline.t_clear)
        ) - self.noise_amp < 0:
            raise SpecError("waveform would go negative or implausibly high")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "WaveformSpec":
        data = dict(data)
        if "timeline" in data and isinstance(data["timeline"], dict):
            data["timeline"] = EventTimeline(**data["timeline"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise SpecError(str(exc)) from None


@dataclass(frozen=True)
class GroundTruth:
    v_s_true: float
    scenario: Verdict
    window_mean: float
    t_svsir: float | None
    t_stable: float
    t_stable_envelope: float | None
    settle_margin: float
    closed_form: dict | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scenario"] = self.scenario.value
        return d


# ---------------------------------------------------------------------------
# analytic waveform

def _post(spec, x):
    """Post-clearing voltage as a function of time since clearing."""
    x = np.asarray(x, dtype=float)
    h = spec.v_s_true - spec.v_fault
    if spec.tau_recovery > 0:
        v = spec.v_s_true - h * np.exp(-x / spec.tau_recovery)
    else:
        v = np.full_like(x, spec.v_s_true)
    if spec.osc_amp > 0:
        v = v + spec.osc_amp * np.exp(-spec.osc_damping * x) * np.cos(2 * np.pi * spec.osc_freq * x)
    return v


def _post_antiderivative(spec, x):
    """F(x) = integral of _post from 0 to x, in closed form."""
    x = np.asarray(x, dtype=float)
    h = spec.v_s_true - spec.v_fault
    F = spec.v_s_true * x
    tau = spec.tau_recovery
    if tau > 0:
        F = F - h * tau * (1.0 - np.exp(-x / tau))
    if spec.osc_amp > 0:
        s, w = spec.osc_damping, 2 * np.pi * spec.osc_freq
        e = np.exp(-s * x)
        F = F + spec.osc_amp * (e * (w * np.sin(w * x) - s * np.cos(w * x)) + s) / (s * s + w * w)
    return F


def waveform(spec: WaveformSpec, t) -> np.ndarray:
    """Noise-free voltage at arbitrary times."""
    t = np.asarray(t, dtype=float)
    tl = spec.timeline
    tol = 1e-6 * spec.dt
    v = np.where(t <= tl.t_flt + tol, 1.0, spec.v_fault)
    post = t >= tl.t_clear - tol
    return np.where(post, _post(spec, np.maximum(t - tl.t_clear, 0.0)), v)


def generate(spec: WaveformSpec, v_wth: float = 0.01, threshold: float = 0.8,
             window_offsets=(9.0, 10.0)) -> tuple[VoltageTrace, GroundTruth]:
    """Sample the waveform on ``[0, t_end]`` and describe its analytic landmarks."""
    tl = spec.timeline
    n = int(round(tl.t_end / spec.dt)) + 1
    i = np.arange(n)
    times = i * spec.dt
    i_flt = int(round(tl.t_flt / spec.dt))
    i_clear = int(round(tl.t_clear / spec.dt))
    values = np.where(i <= i_flt, 1.0, spec.v_fault)
    values = np.where(i >= i_clear, _post(spec, (i - i_clear) * spec.dt), values)
    if spec.noise_amp > 0:
        rng = np.random.default_rng(spec.seed)
        values = values + rng.uniform(-spec.noise_amp, spec.noise_amp, n)
    values = np.maximum(values, 0.0)
    trace = VoltageTrace(times, values, tl)
    return trace, ground_truth(spec, v_wth, threshold, window_offsets)


# ---------------------------------------------------------------------------
# ground truth

def _fine_grid(spec, x_end):
    step = spec.dt / ORACLE_REFINE
    n = int(round(x_end / step)) + 1
    return np.linspace(0.0, x_end, n)


def _window_mean(spec, window_offsets):
    a, b = window_offsets
    F = _post_antiderivative(spec, np.array([a, b]))
    return float((F[1] - F[0]) / (b - a))


def _first_upward_crossing(spec, x, level):
    """First x where the analytic post-clear voltage rises through ``level``."""
    d = _post(spec, x) - level
    if np.all(d[1:] >= 0):
        return 0.0
    hit = np.flatnonzero((d[:-1] < 0) & (d[1:] >= 0))
    if hit.size == 0:
        return None
    j = int(hit[0])
    if d[j + 1] == 0:
        return float(x[j + 1])
    return float(optimize.brentq(lambda s: float(_post(spec, s)) - level, x[j], x[j + 1], xtol=1e-14))


def _settle(spec, x, v_s, v_wth):
    """Time since clearing after which |v - v_s| < v_wth for good."""
    dev = np.abs(_post(spec, x) - v_s)
    outside = dev >= v_wth
    if spec.osc_amp > 0 and spec.osc_damping < 0:
        return float(x[-1])
    if not outside.any():
        return 0.0
    j = int(np.flatnonzero(outside)[-1])
    if j == x.size - 1:
        return float(x[-1])
    g = lambda s: abs(float(_post(spec, s)) - v_s) - v_wth
    return float(optimize.brentq(g, x[j], x[j + 1], xtol=1e-14))


def _settle_margin(spec, x, v_s, v_wth):
    """Smallest distance between |v - v_s| at a local extremum and v_wth.

    Small margins flag waveforms whose settling time jumps by half a period
    under tiny perturbations of V_S.
    """
    dev = np.abs(_post(spec, x) - v_s)
    inner = np.flatnonzero((dev[1:-1] >= dev[:-2]) & (dev[1:-1] > dev[2:])) + 1
    if inner.size == 0:
        return math.inf
    return float(np.min(np.abs(dev[inner] - v_wth)))


def ground_truth(spec: WaveformSpec, v_wth=0.01, threshold=0.8, window_offsets=(9.0, 10.0)) -> GroundTruth:
    tl = spec.timeline
    horizon = tl.t_end - tl.t_clear
    x = _fine_grid(spec, horizon)
    mean = _window_mean(spec, window_offsets) if horizon >= window_offsets[1] else math.nan
    verdict = Verdict.RECOVERED if mean > threshold else Verdict.UNRECOVERED
    cross = _first_upward_crossing(spec, x, spec.v_s_true)
    t_stable = tl.t_clear + _settle(spec, x, spec.v_s_true, v_wth)
    envelope = None
    if spec.osc_amp > 0 and spec.osc_damping > 0 and spec.tau_recovery == 0:
        envelope = tl.t_clear + max(0.0, math.log(spec.osc_amp / v_wth)) / spec.osc_damping
    closed = None
    if spec.family is Family.SAG and spec.tau_recovery == 0:
        closed = {
            "svsi_r": (spec.v_s_true - spec.v_fault) * (tl.t_clear - tl.t_flt),
            "svsi_o": 0.0,
            "svsi_s": 0.0,
        }
    return GroundTruth(
        v_s_true=spec.v_s_true,
        scenario=verdict,
        window_mean=mean,
        t_svsir=None if cross is None else tl.t_clear + cross,
        t_stable=t_stable,
        t_stable_envelope=envelope,
        settle_margin=_settle_margin(spec, x, spec.v_s_true, v_wth),
        closed_form=closed,
    )


# ---------------------------------------------------------------------------
# brute-force oracle

def oracle_midline(spec: WaveformSpec, x: np.ndarray, cutoff=0.1) -> np.ndarray:
    """Continuous-time forward/backward running mean of the post-clear waveform.

    The forward mean uses the closed-form antiderivative; the backward mean
    integrates that result with the cumulative trapezoidal rule.
    """
    horizon = x[-1]
    length = min(1.0 / cutoff, horizon / 2.0)
    F = _post_antiderivative(spec, x)
    back = np.maximum(x - length, 0.0)
    fwd = np.empty_like(x)
    fwd[0] = _post(spec, 0.0)
    fwd[1:] = (F[1:] - _post_antiderivative(spec, back[1:])) / (x[1:] - back[1:])
    G = integrate.cumulative_trapezoid(fwd, x, initial=0.0)
    ahead = np.minimum(x + length, horizon)
    G_ahead = np.interp(ahead, x, G)
    span = ahead - x
    mid = np.empty_like(x)
    mid[:-1] = (G_ahead[:-1] - G[:-1]) / span[:-1]
    mid[-1] = fwd[-1]
    return mid


def oracle_indices(spec: WaveformSpec, v_wth=0.01, threshold=0.8, window_offsets=(9.0, 10.0),
                   cutoff=0.1) -> tuple[float, float, float]:
    """Reference (svsi_r, svsi_o, svsi_s) from the analytic waveform.

    Raises UnsupportedSpecError for noisy specs and for recovered waveforms
    whose steady state is not reached within the horizon.
    """
    if spec.noise_amp > 0:
        raise UnsupportedSpecError("noisy waveforms have no analytic landmarks")
    tl = spec.timeline
    horizon = tl.t_end - tl.t_clear
    if horizon < window_offsets[1]:
        raise UnsupportedSpecError("horizon shorter than the recovery window")
    x = _fine_grid(spec, horizon)
    v = _post(spec, x)
    mid = oracle_midline(spec, x, cutoff)
    svsi_o = float(np.trapezoid(np.abs(v - mid), x))
    fault = tl.t_clear - tl.t_flt
    recovered = _window_mean(spec, window_offsets) > threshold

    if not recovered:
        v_s = float(mid[-1])
        svsi_r = abs(spec.v_fault - 1.0) * fault + float(np.trapezoid(np.abs(v - 1.0), x))
        svsi_s = max(0.0, 1.0 - v_s) * horizon
        return svsi_r, svsi_o, svsi_s

    residual = abs(spec.v_s_true - spec.v_fault) * (
        math.exp(-horizon / spec.tau_recovery) if spec.tau_recovery > 0 else 0.0
    )
    if residual > SETTLED_RESIDUAL:
        raise UnsupportedSpecError("recovery has not settled within the horizon")
    v_s = spec.v_s_true
    cross = _first_upward_crossing(spec, x, v_s)
    if cross is None:
        cross = float(x[int(np.argmax(v))])
    k = int(np.searchsorted(x, cross))
    xs = np.concatenate((x[:k], [cross]))
    vs = np.concatenate((v[:k], _post(spec, [cross])))
    svsi_r = abs(spec.v_fault - v_s) * fault + (float(np.trapezoid(np.abs(vs - v_s), xs)) if k else 0.0)
    settle = _settle(spec, x, v_s, v_wth)
    svsi_s = max(0.0, 1.0 - v_s) * settle
    return svsi_r, svsi_o, svsi_s
