"""Sweep drivers and run configurations; includes pinned regression values."""
import numpy as np
import pytest

from kpoqcr import (ConfigError, DEFAULT_TRANSITIONS, HusimiConfig, Schedule,
                    bitflip_sweep, dynamics_run, husimi_run, pq_run,
                    rates_sweep, steady_sweep)
from kpoqcr.workflows import parse_transition_label, transition_label

# Pinned outputs of the default-parameter pipeline.  These are regression
# anchors for this exact configuration, not externally derived numbers.
RATES_39GHZ = (94584.088971985839, 111805.53227243433, 348.11509517001872,
               412.8745551112641, 527193.80946466385, 526491.69764646725)
STEADY_P01 = {45e9: 0.91671400051455787, 47e9: 0.92870274966344302}
BITFLIP_ALPHA2 = (0.29403841495513916, 1305760.2915405035,
                  2.2518560019024621e-07)


def test_transition_labels_round_trip():
    key = (0, 1, 2, 3)
    assert parse_transition_label(transition_label(key)) == key
    with pytest.raises(ConfigError, match="bad transition label"):
        parse_transition_label("g1_0_1_2")
    with pytest.raises(ConfigError, match="bad transition label"):
        parse_transition_label("gamma_0_1_2_3")


def test_default_transitions_cover_qubit_channels():
    assert (1, 1, 2, 2) in DEFAULT_TRANSITIONS   # one-photon cooling
    assert (2, 2, 1, 1) in DEFAULT_TRANSITIONS   # one-photon heating
    assert (0, 0, 1, 1) in DEFAULT_TRANSITIONS   # intra-qubit flip


def test_rates_sweep_pinned_row(params):
    res = rates_sweep(params, "voltage", np.array([39e9]))
    assert res.axis == "voltage"
    assert res.columns == [transition_label(k) for k in DEFAULT_TRANSITIONS]
    assert res.data.shape == (1, 6)
    for got, want in zip(res.data[0], RATES_39GHZ):
        assert got == pytest.approx(want, rel=1e-6)


def test_rates_sweep_threads_agree(params):
    values = np.linspace(40e9, 44e9, 3)
    serial = rates_sweep(params, "voltage", values, threads=1)
    parallel = rates_sweep(params, "voltage", values, threads=3)
    assert np.array_equal(serial.data, parallel.data)


def test_rates_sweep_alpha_axis(params):
    res = rates_sweep(params, "alpha", np.array([1.5]),
                      transitions=((1, 1, 2, 2), (2, 2, 1, 1)))
    assert res.data.shape == (1, 2)
    assert res.data[0, 0] > res.data[0, 1] > 0.0


def test_rates_sweep_validates_inputs(params):
    with pytest.raises(ConfigError, match="axis"):
        rates_sweep(params, "temperature", np.array([1.0]))
    with pytest.raises(ConfigError, match="outside the retained space"):
        rates_sweep(params, "voltage", np.array([39e9]),
                    transitions=((0, 0, 99, 99),))


def test_steady_sweep_pinned_points(params):
    voltages = np.array(sorted(STEADY_P01))
    res = steady_sweep(params, voltages)
    assert res.columns == ["pop_phi0", "pop_phi1", "pop_qubit", "residual"]
    for row, v in zip(res.data, voltages):
        p0, p1, p01, residual = row
        assert p01 == pytest.approx(STEADY_P01[float(v)], rel=1e-6)
        assert p0 + p1 == pytest.approx(p01, rel=1e-12)
        assert residual < 1e-4
    # Branch symmetry of the stationary state.
    assert res.data[0, 0] == pytest.approx(res.data[0, 1], rel=1e-2)


def test_bitflip_sweep_pinned_alpha2(params):
    res = bitflip_sweep(params, np.array([2.0]))
    assert res.columns == ["rate_interference", "rate_no_interference", "ratio"]
    on, off, ratio = res.data[0]
    assert on == pytest.approx(BITFLIP_ALPHA2[0], rel=1e-6)
    assert off == pytest.approx(BITFLIP_ALPHA2[1], rel=1e-6)
    assert ratio == pytest.approx(BITFLIP_ALPHA2[2], rel=1e-6)
    assert ratio == pytest.approx(on / off, rel=1e-12)


def test_dynamics_run_converges_to_steady(params):
    schedule = Schedule(initial="phi3", t_end=1e-4, points=11, t_qcr_on=5e-5)
    res = dynamics_run(params, schedule)
    assert res.times.shape == (11,)
    assert res.populations.shape == (11, params.n_keep)
    assert res.qcr_active[0] == 0.0 and res.qcr_active[-1] == 1.0
    # Starts in phi3, ends at the tunneling-refrigerated stationary state.
    assert res.populations[0, 3] == 1.0
    assert res.qubit[-1] == pytest.approx(STEADY_P01[45e9], abs=1e-6)
    assert res.trace_drift < 1e-9
    assert res.min_eigenvalue > -1e-10
    rows = list(res.rows())
    assert len(rows) == 11 and len(rows[0]) == 1 + params.n_keep + 3


def test_schedule_from_dict_validation():
    sched = Schedule.from_dict({"initial": "phi1", "t_end": 2e-4,
                                "points": 5, "t_qcr_on": 1e-4})
    assert sched.initial == "phi1" and sched.points == 5
    with pytest.raises(ConfigError, match="t_end"):
        Schedule.from_dict({"t_end": 0.0})
    with pytest.raises(ConfigError, match="points"):
        Schedule.from_dict({"points": 1})
    with pytest.raises(ConfigError):
        Schedule.from_dict({"unknown_knob": 1})


def test_husimi_config_validation():
    cfg = HusimiConfig.from_dict({"source": "evolve", "time": 1e-5,
                                  "initial": "phi_alpha", "qcr": "off"})
    assert cfg.source == "evolve" and cfg.qcr == "off"
    with pytest.raises(ConfigError, match="source"):
        HusimiConfig.from_dict({"source": "guess"})
    with pytest.raises(ConfigError, match="positive extent"):
        HusimiConfig.from_dict({"re_min": 1.0, "re_max": -1.0})
    with pytest.raises(ConfigError, match="time"):
        HusimiConfig.from_dict({"source": "evolve", "time": -1.0})


def test_husimi_run_steady_two_lobes(params):
    cfg = HusimiConfig(points=41)
    res = husimi_run(params, cfg)
    assert res.q.shape == (41, 41)
    assert res.norm == pytest.approx(1.0, abs=5e-3)
    assert res.meta["source"] == "steady" and "residual" in res.meta
    # Stationary cat: peaks near +/- alpha on the real axis.
    mid = 20  # im = 0 row
    line = res.q[mid]
    ix = int(np.argmax(line))
    assert abs(abs(res.re_axis[ix]) - params.alpha) < 0.25
    flipped = line[::-1]
    assert np.max(np.abs(line - flipped)) < 5e-3  # symmetric lobes


def test_husimi_run_evolve_initial_state(params):
    cfg = HusimiConfig(source="evolve", time=0.0, initial="phi_minus_alpha",
                       qcr="off", points=33)
    res = husimi_run(params, cfg)
    iy, ix = np.unravel_index(int(np.argmax(res.q)), res.q.shape)
    assert res.re_axis[ix] == pytest.approx(-params.alpha, abs=0.3)
    assert res.meta["qcr"] == "off" and res.meta["initial"] == "phi_minus_alpha"


def test_pq_run_equilibrium_and_pumped(params):
    eq = pq_run(params)
    assert eq.meta == {"pumped": "no"}
    assert eq.axis == "q" and eq.columns == ["p"]
    probs = eq.data[:, 0]
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(eq.values, np.arange(-7, 8))
    assert np.array_equal(probs, probs[::-1])
    pumped = pq_run(params, pumped=True)
    assert pumped.meta == {"pumped": "yes"}
    # At 100 mK and 45 GHz the at-bias evaluation is sharper, not broader.
    assert pumped.data[7, 0] > probs[7]


def test_sweep_result_rows(params):
    res = pq_run(params)
    rows = list(res.rows())
    assert len(rows) == 15
    assert rows[7][0] == 0.0 and rows[7][1] == max(r[1] for r in rows)
