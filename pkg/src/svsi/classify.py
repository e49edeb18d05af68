"""Recovered / unrecovered verdict from the post-clearing diagnostic window."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InsufficientHorizonError
from .trace import _SNAP, VoltageTrace, window_mean

DEFAULT_THRESHOLD = 0.8
DEFAULT_WINDOW_OFFSETS = (9.0, 10.0)


class Verdict(str, enum.Enum):
    RECOVERED = "recovered"
    UNRECOVERED = "unrecovered"


@dataclass(frozen=True)
class ScenarioClass:
    verdict: Verdict
    window_mean: float
    window: tuple[float, float]

    @property
    def recovered(self) -> bool:
        return self.verdict is Verdict.RECOVERED


def classify_scenario(
    trace: VoltageTrace,
    threshold: float = DEFAULT_THRESHOLD,
    window_offsets: tuple[float, float] = DEFAULT_WINDOW_OFFSETS,
) -> ScenarioClass:
    """Recovered iff the mean of v over [t_clear + 9, t_clear + 10] exceeds ``threshold``.

    The comparison is strict, so a mean of exactly 0.8 pu is unrecovered.
    """
    if not trace.normalized:
        raise ValueError("classify_scenario expects a normalized trace")
    tl = trace.timeline
    window = (tl.t_clear + window_offsets[0], tl.t_clear + window_offsets[1])
    if tl.t_end < window[1] - _SNAP * trace.dt:
        raise InsufficientHorizonError(
            f"InsufficientHorizon: t_end={tl.t_end} s is before t_clear + {window_offsets[1]} = {window[1]} s"
        )
    mean = window_mean(trace, window)
    verdict = Verdict.RECOVERED if mean > threshold else Verdict.UNRECOVERED
    return ScenarioClass(verdict, mean, window)
