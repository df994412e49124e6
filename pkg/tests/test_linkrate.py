import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fr3sim import linkrate
from fr3sim.beamforming import DegenerateChannelError, build
from fr3sim.channel import ChannelParams, generate_rayleigh
from fr3sim.linkrate import (
    dl_terms, energy_efficiency, ergodic_rates, ergodic_rates_multi, leakage, sinr_dl, sinr_ul,
    ul_terms,
)
from fr3sim.scenario import ScenarioConfig


def small(**kw):
    """4x4 array, 4 users, 8 evaluated subcarriers."""
    base = dict(M_ant_rows=4, M_ant_cols=4, K=4, M_rf=16, channel=ChannelParams(n_sc_eval=8))
    base.update(kw)
    return ScenarioConfig(**base)


def test_single_user_fully_digital_closed_form():
    h = np.array([[[1 + 1j, 2.0, -0.5j, 0.25]]])  # (N=1, K=1, M=4)
    bf = build(h, 2, 2, 4, fully_digital=True)
    gain = np.sum(np.abs(h) ** 2)
    assert sinr_dl(h, bf, 3.0, 16, 1e-3)[0, 0] == pytest.approx(3.0 * gain / (16 * 1e-3), rel=1e-12)
    assert sinr_ul(h, bf, 0.2, 8, 1e-3)[0, 0] == pytest.approx(0.2 * gain / (8 * 1e-3), rel=1e-12)


def test_zero_power_gives_zero_sinr():
    H = generate_rayleigh(4, 16, 2, seed=0).H
    bf = build(H, 4, 4, 8)
    assert np.all(sinr_dl(H, bf, 0.0, 16, 1e-12) == 0)
    assert np.all(sinr_ul(H, bf, 0.0, 16, 1e-12) == 0)


def test_zf_sinr_identity():
    # with interference nulled, SINR_k = p |g_kk|^2 / (q sigma^2)
    H = generate_rayleigh(4, 16, 3, seed=1).H
    bf = build(H, 4, 4, 8)
    s, i, n = dl_terms(H, bf, 2.0, 32, 1e-9)
    assert np.max(i) <= 1e-12 * np.min(s)
    G = bf.effective(H) @ bf.W_dig
    expected = 2.0 * np.abs(np.diagonal(G, axis1=1, axis2=2)) ** 2 / (32 * 1e-9)
    assert np.allclose(sinr_dl(H, bf, 2.0, 32, 1e-9), expected, rtol=1e-10)
    assert leakage(ul_terms(H, bf, 0.2, 32, 1e-9)) <= 1e-12


def test_ul_noise_matches_monte_carlo():
    H = generate_rayleigh(4, 16, 1, seed=2).H
    bf = build(H, 4, 4, 8)
    sigma2 = 2.5
    _, _, noise = ul_terms(H, bf, 1.0, 1, sigma2)
    rng = np.random.default_rng(0)
    n = math.sqrt(sigma2 / 2) * (rng.standard_normal((16, 100_000)) + 1j * rng.standard_normal((16, 100_000)))
    measured = np.mean(np.abs(bf.combiner()[0] @ n) ** 2, axis=1)
    assert np.allclose(measured, noise[0], rtol=0.03)


def test_zero_load_gives_zero_rate():
    rep = ergodic_rates(small(x_dl=0.0, x_ul=0.0), n_drops=2, seed=1)
    assert rep.R_dl == 0 and rep.R_ul == 0


@settings(max_examples=15)
@given(x_dl=st.floats(0.01, 1.0), x_ul=st.floats(0.01, 1.0), tau_dl=st.floats(0.1, 0.7))
def test_rates_proportional_to_load_times_tau(x_dl, x_ul, tau_dl):
    ref = ergodic_rates(small(), n_drops=2, seed=3)
    c = small(x_dl=x_dl, x_ul=x_ul, tau_dl=tau_dl, tau_ul=0.25)
    rep = ergodic_rates(c, n_drops=2, seed=3)
    assert rep.R_dl == pytest.approx(ref.R_dl * x_dl * tau_dl / 0.75, rel=1e-12)
    assert rep.R_ul == pytest.approx(ref.R_ul * x_ul, rel=1e-12)


def test_seed_determinism_across_workers():
    c = small(M_rf=8)
    one = ergodic_rates(c, n_drops=6, seed=9, workers=1)
    many = ergodic_rates(c, n_drops=6, seed=9, workers=4)
    assert np.array_equal(one.sum_se_dl, many.sum_se_dl)
    assert np.array_equal(one.sum_se_ul, many.sum_se_ul)
    assert one.R_dl == many.R_dl
    assert ergodic_rates(c, n_drops=6, seed=10).R_dl != one.R_dl


def test_thread_cap_from_environment(monkeypatch):
    monkeypatch.setenv("FR3SIM_THREADS", "1")
    assert linkrate.worker_count() == 1
    assert linkrate.worker_count(3) == 3


def test_common_drops_share_channels():
    a = small(M_rf=8)
    both = ergodic_rates_multi([a, small(M_rf=16)], n_drops=3, seed=5)
    alone = ergodic_rates(a, n_drops=3, seed=5)
    assert np.array_equal(both[0].sum_se_dl, alone.sum_se_dl)
    with pytest.raises(ValueError):
        ergodic_rates_multi([a, small(K=2)], n_drops=1)


def test_degenerate_drop_is_regenerated(monkeypatch):
    real_build = linkrate.build_for
    calls = {"n": 0}

    def flaky(H, config):
        calls["n"] += 1
        if calls["n"] == 1:
            raise DegenerateChannelError("rank deficient")
        return real_build(H, config)

    monkeypatch.setattr(linkrate, "build_for", flaky)
    rep = ergodic_rates(small(), n_drops=1, seed=0, workers=1)
    assert rep.regenerated == 1 and rep.R_dl > 0


def test_persistent_degeneracy_raises(monkeypatch):
    def broken(H, config):
        raise DegenerateChannelError("rank deficient")

    monkeypatch.setattr(linkrate, "build_for", broken)
    with pytest.raises(DegenerateChannelError):
        ergodic_rates(small(), n_drops=1, workers=1)


def test_report_serialization_and_leakage():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = ergodic_rates(small(), n_drops=1, seed=0, keep_sinr=True)
    d = rep.to_dict()
    assert d["stderr_dl"] is None and d["model"] == "clustered"
    assert rep.sinr_dl.shape == (1, 8, 4)
    assert rep.extra["max_zf_leakage"] <= 1e-12
    assert '"R_dl"' in rep.to_json()


def test_energy_efficiency():
    assert energy_efficiency((1e9, 5e8), 100.0) == 1.5e7
    with pytest.raises(ValueError):
        energy_efficiency((1.0, 1.0), 0.0)
