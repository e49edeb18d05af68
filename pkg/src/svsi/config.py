"""Analysis settings and their JSON / environment loading."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

CONFIG_ENV = "SVSI_CONFIG"


@dataclass(frozen=True)
class AnalysisConfig:
    threshold: float = 0.8
    window_offsets: tuple[float, float] = (9.0, 10.0)
    v_wth: float = 0.01
    cutoff: float = 0.1
    prominence: float = 0.005
    gentle_slope: float = 0.01
    tail_window: float = 1.0
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "window_offsets", tuple(float(x) for x in self.window_offsets))
        object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
        if len(self.window_offsets) != 2 or len(self.weights) != 3:
            raise ValueError("window_offsets needs 2 values and weights needs 3")
        for f in fields(self):
            value = getattr(self, f.name)
            for x in value if isinstance(value, tuple) else (value,):
                if not x > 0:
                    raise ValueError(f"config field {f.name} must be strictly positive, got {value!r}")
        if not self.window_offsets[0] < self.window_offsets[1]:
            raise ValueError("window_offsets must be increasing")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window_offsets"] = list(self.window_offsets)
        d["weights"] = list(self.weights)
        return d

    def updated(self, **changes) -> "AnalysisConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict, base: "AnalysisConfig | None" = None) -> "AnalysisConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return (base or cls()).updated(**data)


def load_config(path=None, env=None) -> AnalysisConfig:
    """Defaults overridden by the JSON file at ``path`` or ``$SVSI_CONFIG``."""
    if path is None:
        path = (os.environ if env is None else env).get(CONFIG_ENV)
    if not path:
        return AnalysisConfig()
    with open(path, encoding="utf-8") as fh:
        return AnalysisConfig.from_dict(json.load(fh))
