import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from svsi.classify import Verdict, classify_scenario
from svsi.errors import SpecError, UnsupportedSpecError
from svsi.indices import analyze
from svsi.synth import Family, WaveformSpec, generate, ground_truth, oracle_indices, waveform
from svsi.trace import EventTimeline, normalize


def test_spec_validation():
    with pytest.raises(SpecError):
        WaveformSpec(Family.SAG, v_fault=0.95, v_s_true=0.9)
    with pytest.raises(SpecError):
        WaveformSpec(Family.RING_DOWN, osc_amp=0.05, osc_damping=-0.1)
    with pytest.raises(SpecError):
        WaveformSpec(Family.COLLAPSE, v_s_true=0.9)
    with pytest.raises(SpecError):
        WaveformSpec(Family.SAG, dt=0.0)
    with pytest.raises(SpecError):
        WaveformSpec(Family.SAG, timeline=EventTimeline(0.1005, 0.2, 10.2), dt=1e-3)
    with pytest.raises(SpecError):
        WaveformSpec("nonsense")
    # growing swings are allowed where the family says so
    WaveformSpec(Family.COLLAPSE, v_s_true=0.6, osc_amp=0.05, osc_damping=-0.1)
    WaveformSpec(Family.COMPOSITE, v_s_true=0.9, osc_amp=0.02, osc_damping=-0.05)


def test_spec_round_trip():
    spec = WaveformSpec(Family.RING_DOWN, v_fault=0.3, v_s_true=0.95, tau_recovery=0.4,
                        osc_amp=0.05, osc_damping=0.5, osc_freq=2.0, noise_amp=0.001, seed=3)
    assert WaveformSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(SpecError):
        WaveformSpec.from_dict({"family": "sag", "bogus": 1})


def test_generated_grid_and_segments():
    spec = WaveformSpec(Family.SAG, v_fault=0.2, v_s_true=1.0, tau_recovery=0.5)
    tr, truth = generate(spec)
    assert len(tr) == 10201 and tr.dt == pytest.approx(1e-3)
    assert tr.values[tr.reference_index] == 1.0
    fault = (tr.times > 0.1 + 1e-9) & (tr.times < 0.2 - 1e-9)
    assert np.all(tr.values[fault] == 0.2)
    np.testing.assert_allclose(tr.values, waveform(spec, tr.times), atol=0)
    assert truth.v_s_true == 1.0 and truth.scenario is Verdict.RECOVERED


@given(st.integers(0, 2**31), st.floats(0.0, 0.02))
@settings(max_examples=20, deadline=None)
def test_generate_is_deterministic(seed, noise):
    spec = WaveformSpec(Family.COMPOSITE, v_fault=0.25, v_s_true=0.9, tau_recovery=0.5,
                        osc_amp=0.04, osc_damping=0.3, osc_freq=1.5, noise_amp=noise, seed=seed)
    a, ta = generate(spec)
    b, tb = generate(spec)
    assert a.values.tobytes() == b.values.tobytes()
    assert ta == tb


def test_noise_is_bounded_and_seeded():
    base = WaveformSpec(Family.SAG, v_fault=0.3, v_s_true=0.95, tau_recovery=0.3)
    noisy = WaveformSpec(Family.SAG, v_fault=0.3, v_s_true=0.95, tau_recovery=0.3, noise_amp=0.01, seed=1)
    other = WaveformSpec(Family.SAG, v_fault=0.3, v_s_true=0.95, tau_recovery=0.3, noise_amp=0.01, seed=2)
    clean = generate(base)[0].values
    a, b = generate(noisy)[0].values, generate(other)[0].values
    assert np.max(np.abs(a - clean)) <= 0.01
    assert not np.array_equal(a, b)


def test_step_sag_matches_fault_area():
    spec = WaveformSpec(Family.SAG, v_fault=0.2, v_s_true=1.0)
    r = analyze(generate(spec)[0])
    truth = ground_truth(spec)
    assert truth.closed_form["svsi_r"] == pytest.approx(0.08)
    assert r.svsi_r == pytest.approx(0.08, abs=1e-3)
    assert oracle_indices(spec)[0] == pytest.approx(0.08, rel=1e-12)


def test_ringdown_svsi_o_against_quadrature():
    spec = WaveformSpec(Family.RING_DOWN, v_fault=0.95, v_s_true=0.95, osc_amp=0.05,
                        osc_damping=0.5, osc_freq=2.0)
    r = analyze(generate(spec)[0])
    ref, _ = integrate.quad(lambda x: abs(0.05 * math.exp(-0.5 * x) * math.cos(4 * math.pi * x)),
                            0.0, 10.0, limit=400)
    assert r.svsi_o == pytest.approx(ref, rel=0.02)


def test_collapse_plateau_is_unrecovered():
    spec = WaveformSpec(Family.COLLAPSE, v_fault=0.2, v_s_true=0.6, tau_recovery=0.5)
    tr, truth = generate(spec)
    assert classify_scenario(normalize(tr)).verdict is Verdict.UNRECOVERED
    assert truth.scenario is Verdict.UNRECOVERED


def test_oracle_flat_spec():
    spec = WaveformSpec(Family.SAG, v_fault=0.0, v_s_true=1.0)
    flat = WaveformSpec(Family.COMPOSITE, v_fault=1.0, v_s_true=1.0)
    assert oracle_indices(flat) == (0.0, 0.0, 0.0)
    assert oracle_indices(spec)[1:] == (0.0, 0.0)


def test_oracle_step_sag_closed_form():
    for vf, vs in ((0.2, 1.0), (0.4, 0.95), (0.1, 0.9)):
        spec = WaveformSpec(Family.SAG, v_fault=vf, v_s_true=vs)
        r, o, s = oracle_indices(spec)
        assert r == pytest.approx((vs - vf) * 0.1, rel=1e-12)
        # a flat post-clear level has no swing and settles at once
        assert o == pytest.approx(0.0, abs=1e-9)
        assert s == 0.0


def test_oracle_ringdown_envelope():
    # settling happens at the last swing outside the band, within half a period of the envelope time
    for amp, sigma, freq, vs in ((0.05, 0.5, 2.0, 0.95), (0.08, 0.3, 1.0, 0.92)):
        spec = WaveformSpec(Family.RING_DOWN, v_fault=vs, v_s_true=vs, osc_amp=amp,
                            osc_damping=sigma, osc_freq=freq)
        t_star = math.log(amp / 0.01) / sigma
        s = oracle_indices(spec)[2]
        truth = ground_truth(spec)
        assert truth.t_stable_envelope == pytest.approx(0.2 + t_star)
        assert (1 - vs) * (t_star - 0.5 / freq) <= s <= (1 - vs) * t_star + 1e-12


def test_oracle_rejects_noise_and_unsettled():
    with pytest.raises(UnsupportedSpecError):
        oracle_indices(WaveformSpec(Family.SAG, v_fault=0.2, noise_amp=0.01))
    with pytest.raises(UnsupportedSpecError):
        oracle_indices(WaveformSpec(Family.SAG, v_fault=0.2, tau_recovery=3.0))


def test_ground_truth_crossing_and_settling():
    spec = WaveformSpec(Family.SAG, v_fault=0.2, v_s_true=1.0, tau_recovery=0.5)
    truth = ground_truth(spec)
    # 1 - 0.8 e^{-x/0.5} stays below 1 for all x: no finite crossing
    assert truth.t_svsir is None
    assert truth.t_stable == pytest.approx(0.2 + 0.5 * math.log(0.8 / 0.01), abs=1e-3)
    assert math.isinf(truth.settle_margin)
