import numpy as np
import pytest

from svsi.trace import EventTimeline, VoltageTrace

STANDARD = EventTimeline(0.1, 0.2, 10.2)

# acceptance lines collected by test_acceptance.record()
ACCEPTANCE_LINES = []


def grid(t_end=10.2, dt=1e-3, t0=0.0):
    n = int(round((t_end - t0) / dt)) + 1
    return t0 + np.arange(n) * dt


def piecewise(t, timeline, fault, post, pre=1.0):
    """Pre-fault ``pre``; ``fault`` on (t_flt, t_clear); ``post(t)`` from t_clear."""
    v = np.full(t.shape, float(pre))
    on = (t > timeline.t_flt) & (t < timeline.t_clear)
    v[on] = fault
    after = t >= timeline.t_clear - 1e-12
    v[after] = post(t[after]) if callable(post) else post
    return v


def make_trace(values, timeline=STANDARD, dt=1e-3, normalized=False, t0=0.0):
    values = np.asarray(values, dtype=float)
    t = t0 + np.arange(values.size) * dt
    return VoltageTrace(t, values, timeline, normalized=normalized)


@pytest.fixture
def std_times():
    return grid()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_synth(path, spec):
    """Generate ``spec`` and write it as a two-column trace file."""
    from svsi.report import write_trace_csv
    from svsi.synth import generate

    trace, _ = generate(spec)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_trace_csv(fh, trace.times, trace.values)
    return path


def write_study(directory, specs, weights=None):
    """Study manifest over ``specs``: {(contingency, location, bus): WaveformSpec}."""
    import json

    cons, locs, buses = [], [], []
    traces = []
    for n, ((c, l, b), spec) in enumerate(specs.items()):
        for seq, label in ((cons, c), (locs, l), (buses, b)):
            if label not in seq:
                seq.append(label)
        name = f"cell{n:03d}.csv"
        write_synth(directory / name, spec)
        tl = spec.timeline
        traces.append({"contingency": c, "location": l, "bus": b, "file": name,
                       "t_flt": tl.t_flt, "t_clear": tl.t_clear, "t_end": tl.t_end})
    doc = {"contingencies": cons, "locations": locs, "buses": buses, "traces": traces}
    if weights is not None:
        doc["weights"] = list(weights)
    path = directory / "study.json"
    path.write_text(json.dumps(doc, indent=2), encoding="utf-8")
    return path


def sag(tau, v_fault=0.5):
    from svsi.synth import Family, WaveformSpec

    return WaveformSpec(Family.SAG, v_fault=v_fault, v_s_true=1.0, tau_recovery=tau)


def mixed_study_specs():
    """Two contingencies x two locations x two buses; A wins everywhere under c1, at one bus under c2."""
    taus = {
        ("c1", "A"): (0.2, 0.3), ("c1", "B"): (1.0, 1.5),
        ("c2", "A"): (0.2, 1.0), ("c2", "B"): (1.5, 0.5),
    }
    return {(c, l, b): sag(t) for (c, l), pair in taus.items() for b, t in zip(("bus1", "bus2"), pair)}
