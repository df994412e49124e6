import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fr3sim import powermodel as pm
from fr3sim.hardware import AnalogHardwareConstants, DigitalHardwareConstants, PaConstants
from fr3sim.scenario import DL, UL, ScenarioConfig

REL = 1e-12


def close(a, b, rel=REL):
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0)


# subcomponent values --------------------------------------------------------

def test_converters_and_rf_parts():
    assert close(pm.p_dac(), oracles.dac())
    assert close(pm.p_dac(), 0.06384)
    assert close(pm.p_adc(), 0.0896)
    assert close(pm.p_mixer(10e9), 0.0025)
    assert close(pm.p_ps(400e6), 0.014)
    assert close(pm.p_lna(400e6), 0.0108)


def test_coder_static_floor_and_rate_terms():
    assert pm.p_coder(DL, 0.0, 360e6) == 0.1
    assert pm.p_coder(UL, 0.0, 360e6) == 0.1
    assert pm.p_coder(DL, 13.44e9 / 360e6, 360e6) == pytest.approx(0.10392, abs=5e-6)
    assert pm.p_coder(UL, 2.35e9 / 360e6, 360e6) == pytest.approx(0.13427, abs=5e-6)
    with pytest.raises(ValueError):
        pm.p_coder(DL, -1.0, 360e6)
    with pytest.raises(ValueError):
        pm.p_coder("XL", 1.0, 360e6)


def test_precoder_and_combiner():
    assert close(pm.p_precoder_combiner("combiner", 16, 8, 360e6), 1.4608)
    # the matrix-update term vanishes for an infinite coherence block
    assert close(pm.p_precoder_combiner("precoder", 16, 8, 360e6), 1.4608)
    assert close(pm.p_precoder_combiner("precoder", 16, 8, 360e6, 46200.0),
                 oracles.precoder(16, ups=46200.0))
    zero_dyn = DigitalHardwareConstants(eta_precoder=math.inf)
    assert pm.p_precoder_combiner("precoder", 33, 8, 360e6, consts=zero_dyn) == 2.0
    with pytest.raises(ValueError):
        pm.p_precoder_combiner("equalizer", 16, 8, 360e6)


def test_fft_dpd_filter():
    assert pm.fft_ops(4096) == 18
    assert close(pm.p_fft(16, 4096, 491.52e6), 0.1 + 491.52e6 * 16 * 18 / 2e12)
    assert pm.p_fft(16, 4096, 491.52e6) == pytest.approx(0.17077, abs=1e-5)
    assert pm.p_dpd(16, 491.52e6) == pytest.approx(0.29661, abs=5e-6)
    assert pm.p_dpd(1024, 491.52e6) == pytest.approx(12.683, abs=5e-4)
    assert pm.p_dpd(1024, 0.0) == 0.1
    assert close(pm.p_bb_filter(16, 491.52e6), oracles.bb_filter(16))
    assert pm.p_bb_filter(16, 491.52e6) == pytest.approx(4.1457, abs=5e-5)
    assert pm.p_bb_filter(32, 491.52e6) == pytest.approx(7.2915, abs=5e-5)
    assert pm.p_bb_filter(32, 491.52e6, DigitalHardwareConstants(n_taps_bb=0)) == 1.0
    with pytest.raises(ValueError):
        pm.p_fft(16, 3000, 491.52e6)


def test_digital_active_sums():
    c = ScenarioConfig(M_rf=16)
    rates = (13.44e9, 2.35e9)
    dl = pm.p_digital_active(DL, c, rates)
    assert close(dl, oracles.encoder(13.44e9 / 360e6) + oracles.precoder(16, ups=c.upsilon_coh)
                 + oracles.fft(16) + oracles.dpd(16) + oracles.bb_filter(16))
    assert dl == pytest.approx(6.2, abs=0.05)
    full = ScenarioConfig()
    assert pm.p_digital_active(UL, full, (1e9, 1e9)) < pm.p_digital_active(DL, full, (1e9, 1e9))


def test_analog_chain():
    c = ScenarioConfig(M_rf=16)
    assert close(pm.p_analog_active(DL, c), oracles.analog_dl(16, 64))
    assert pm.p_analog_active(DL, c) == pytest.approx(16.66, abs=5e-3)
    assert close(pm.p_analog_active(UL, c), oracles.analog_ul(16, 64))
    fd = ScenarioConfig()
    assert "ps" in pm.analog_chain_parts(DL, fd) and pm.analog_chain_parts(DL, fd)["ps"] == 0
    # fully digital: 1024 chains without phase shifters cost more than 16 with
    assert pm.p_analog_active(DL, fd) > pm.p_analog_active(DL, c)
    assert pm.p_analog_active(UL, fd) > pm.p_analog_active(UL, c)


def test_pa_model():
    assert close(pm.p_pa_instantaneous(0.0), oracles.pa(0.0))
    assert close(pm.p_pa_instantaneous(0.1), oracles.pa(0.1))
    # full drive: xi * P^a / eta + (1 - xi) * P / eta
    assert close(pm.p_pa_instantaneous(0.1), (0.1 * 0.1 ** 0.75 + 0.9 * 0.1) / 0.15)
    linear = PaConstants(alpha=1.0)
    assert close(pm.p_pa_instantaneous(0.1, linear), 0.1 / 0.15)
    with pytest.raises(ValueError):
        pm.p_pa_instantaneous(0.2)
    with pytest.raises(ValueError):
        pm.p_pa_instantaneous(-0.01)


def test_pa_frame_average():
    idle = ScenarioConfig(x_dl=0.0)
    assert pm.p_pa_frame_average(idle) == pytest.approx(0.0600, abs=5e-5)
    assert 1024 * pm.p_pa_frame_average(idle) / 0.8 == pytest.approx(76.8, abs=0.05)
    off = ScenarioConfig(x_dl=0.0, tau_dl=0.0, tau_ul=0.0, delta_pa_idle=0.0)
    assert pm.p_pa_frame_average(off) == 0.0
    for x in (0.0, 0.3, 1.0):
        assert close(pm.p_pa_frame_average(ScenarioConfig(x_dl=x)), oracles.pa_frame_average(x, 100 / 1024))


# totals ---------------------------------------------------------------------

@pytest.mark.parametrize("m_rf", [16, 64, 1024])
@pytest.mark.parametrize("x", [0.0, 0.3, 1.0])
def test_total_matches_oracle(m_rf, x):
    c = ScenarioConfig(M_rf=m_rf, x_dl=x, x_ul=x)
    rates = (x * 5e9, x * 1e9)
    assert close(pm.p_total(c, rates).total, oracles.total(m_rf, x, *rates), rel=1e-11)


def test_breakdown_split_and_serialization():
    b = pm.p_total(ScenarioConfig(M_rf=16), (1e9, 0.5e9))
    assert close(b.total, sum(b.contributions.values()))
    parts = [b.digital_load_independent, b.digital_load_dependent, b.analog_load_independent,
             b.analog_load_dependent, b.pa_load_independent, b.pa_load_dependent]
    assert close(b.total, sum(parts))
    zero = pm.p_total(ScenarioConfig(M_rf=16, x_dl=0.0, x_ul=0.0))
    assert close(zero.total, b.load_independent)
    assert zero.digital_load_dependent == 0 and zero.pa_load_dependent == 0
    assert '"total"' in b.to_json()
    header, row = b.to_csv().strip().split("\n")
    assert len(header.split(",")) == len(row.split(","))
    assert "active_pa_per_antenna" in header


def test_total_zero_when_everything_off():
    c = ScenarioConfig(
        tau_dl=0.0, tau_ul=0.0, x_dl=0.0, x_ul=0.0,
        delta_dig_idle=0.0, delta_ana_idle=0.0, delta_pa_idle=0.0,
    )
    assert pm.p_total(c).total == 0.0


def test_fully_digital_reference_totals():
    assert pm.p_total(ScenarioConfig(M_rf=16), (1.34e9, 0.94e9)).total == pytest.approx(740, rel=0.15)
    assert pm.p_total(ScenarioConfig(), (15.5e9, 4.2e9)).total == pytest.approx(1658, rel=0.15)


# properties -----------------------------------------------------------------

loads = st.floats(0.0, 1.0)
m_rfs = st.sampled_from([8, 16, 32, 64, 128, 256, 512, 1024])
deltas = st.floats(0.0, 1.0)


@given(x_dl=loads, x_ul=loads, m_rf=m_rfs, r=st.floats(0, 40), mode=st.sampled_from(["full", "unloaded"]))
def test_additivity(x_dl, x_ul, m_rf, r, mode):
    c = ScenarioConfig(M_rf=m_rf, x_dl=x_dl, x_ul=x_ul, signaling_weight_mode=mode)
    b = pm.p_total(c, (x_dl * r * 1e9, x_ul * r * 0.2e9))
    assert math.isclose(b.total, sum(b.contributions.values()), rel_tol=1e-12)
    assert math.isclose(b.total, b.digital + b.analog + b.pa, rel_tol=1e-12)


@given(x_dl=loads, x_ul=loads, m_rf=m_rfs, d=st.tuples(*[deltas] * 6))
def test_load_dependent_nonnegative(x_dl, x_ul, m_rf, d):
    c = ScenarioConfig(M_rf=m_rf, x_dl=x_dl, x_ul=x_ul, delta_dig_micro=d[0], delta_dig_idle=d[1],
                       delta_ana_micro=d[2], delta_ana_idle=d[3], delta_pa_micro=d[4], delta_pa_idle=d[5])
    b = pm.p_total(c, (x_dl * 1e10, x_ul * 2e9))
    for v in (b.digital_load_dependent, b.analog_load_dependent, b.pa_load_dependent):
        assert v >= -1e-12 * b.total


@given(a=loads, b=loads, other=loads, m_rf=m_rfs)
def test_monotone_in_load(a, b, other, m_rf):
    lo, hi = sorted((a, b))
    base = ScenarioConfig(M_rf=m_rf)
    p = lambda x_dl, x_ul: pm.p_total(base.replace(x_dl=x_dl, x_ul=x_ul), (x_dl * 1e10, x_ul * 2e9)).total
    assert p(lo, other) <= p(hi, other) * (1 + 1e-12)
    assert p(other, lo) <= p(other, hi) * (1 + 1e-12)


@given(x=loads)
def test_monotone_in_rf_chains_and_bandwidth(x):
    totals = [pm.p_total(ScenarioConfig(M_rf=m, x_dl=x, x_ul=x)).total for m in (8, 16, 32, 64, 128, 256, 512, 1024)]
    assert all(a <= b for a, b in zip(totals, totals[1:]))
    bw = [pm.p_total(ScenarioConfig(M_rf=64, B=b, x_dl=x, x_ul=x)).total for b in (50e6, 100e6, 200e6, 400e6, 500e6)]
    assert all(a <= b for a, b in zip(bw, bw[1:]))


@given(x=loads, e=st.integers(3, 6))
def test_pa_linear_in_antennas(x, e):
    """Holding P_a fixed, PA power doubles with the array."""
    n = 2 ** e
    small = ScenarioConfig(M_ant_rows=n, M_ant_cols=n, M_rf=n * n, x_dl=x)
    big = ScenarioConfig(M_ant_rows=n, M_ant_cols=2 * n, M_rf=2 * n * n, x_dl=x)
    ratio = pm.p_total(big).pa / pm.p_total(small).pa
    assert abs(ratio - 2.0) <= 1e-12


@given(x=loads, m_rf=m_rfs)
def test_load_independent_floor_positive(x, m_rf):
    b = pm.p_total(ScenarioConfig(M_rf=m_rf, x_dl=x, x_ul=x))
    assert b.digital_load_independent > 0 and b.analog_load_independent > 0


@given(p=st.floats(0.0, 0.1), alpha=st.floats(0.0, 1.0), xi=st.floats(0.0, 1.0))
def test_pa_instantaneous_bounds(p, alpha, xi):
    consts = PaConstants(alpha=alpha, xi=xi)
    v = pm.p_pa_instantaneous(p, consts)
    assert v >= pm.p_pa_instantaneous(0.0, consts) - 1e-15
    assert v <= pm.p_pa_instantaneous(0.1, consts) + 1e-15


def test_analog_constants_reject_nonpositive():
    with pytest.raises(ValueError):
        AnalogHardwareConstants(P_lo=0.0)
