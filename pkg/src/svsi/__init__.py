"""Short-term voltage stability indices for post-fault voltage traces."""
from .classify import ScenarioClass, Verdict, classify_scenario
from .config import AnalysisConfig, load_config
from .errors import SvsiError
from .indices import SvsiResult, analyze, extract_midline
from .steady import SteadyStateEstimate
from .trace import EventTimeline, VoltageTrace, ingest_csv, normalize

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "EventTimeline",
    "ScenarioClass",
    "SteadyStateEstimate",
    "SvsiError",
    "SvsiResult",
    "Verdict",
    "VoltageTrace",
    "analyze",
    "classify_scenario",
    "extract_midline",
    "ingest_csv",
    "load_config",
    "normalize",
]
