"""Closed-form base-station power consumption.

Each subcomponent has an active-mode power made of a static term and a dynamic
term ``f_s * Xi / eta`` (``Xi`` in complex operations per sample, ``eta`` in
complex GOPS/W). Active powers are averaged over the data, signaling,
micro-sleep and idle phases of the frame and divided by the supply/cooling
efficiency of their component.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .hardware import GOPS, AnalogHardwareConstants, DigitalHardwareConstants, PaConstants
from .scenario import DL, UL, ScenarioConfig, log2_int, phase_weights

ENCODER_OPS = 14 / (3 * 8)
DECODER_OPS = 5 * 35 / (2 * 3)


def _dynamic(f_s: float, ops_per_sample: float, eta: float) -> float:
    return f_s * ops_per_sample / (eta * GOPS)


def n_fpgas(m_rf: int, consts: DigitalHardwareConstants) -> int:
    return math.ceil(m_rf / consts.antennas_per_fpga)


# digital subcomponents --------------------------------------------------------

def p_coder(direction: str, rate_over_beff: float, f_s1: float,
            consts: DigitalHardwareConstants = DigitalHardwareConstants()) -> float:
    """Channel encoder (DL) or decoder (UL); ``rate_over_beff`` is ``R_i / B_eff``."""
    if rate_over_beff < 0:
        raise ValueError("rate must be non-negative")
    if direction == DL:
        return consts.P_encoder_s + _dynamic(f_s1, ENCODER_OPS * rate_over_beff, consts.eta_encoder)
    if direction == UL:
        return consts.P_decoder_s + _dynamic(f_s1, DECODER_OPS * rate_over_beff, consts.eta_decoder)
    raise ValueError(f"direction must be 'DL' or 'UL', got {direction!r}")


def precoder_ops(K: int, m_rf: int, upsilon_coh: float) -> float:
    return 2 * K + (K ** 3 / (3 * m_rf) + 3 * K ** 2 + K) / upsilon_coh


def p_precoder_combiner(kind: str, m_rf: int, K: int, f_s1: float, upsilon_coh: float = math.inf,
                        consts: DigitalHardwareConstants = DigitalHardwareConstants()) -> float:
    """ZF precoder (``kind="precoder"``) or combiner (``kind="combiner"``) on FPGAs."""
    if kind == "precoder":
        return (n_fpgas(m_rf, consts) * consts.P_precoder_s
                + _dynamic(f_s1, m_rf * precoder_ops(K, m_rf, upsilon_coh), consts.eta_precoder))
    if kind == "combiner":
        return (n_fpgas(m_rf, consts) * consts.P_combiner_s
                + _dynamic(f_s1, m_rf * 2 * K, consts.eta_combiner))
    raise ValueError(f"kind must be 'precoder' or 'combiner', got {kind!r}")


def fft_ops(Q_ifft: int) -> float:
    return 1.5 * log2_int(Q_ifft)


def p_fft(m_rf: int, Q_ifft: int, f_s2: float,
          consts: DigitalHardwareConstants = DigitalHardwareConstants()) -> float:
    """IFFT (DL) or FFT (UL); both cost the same."""
    return consts.P_ifft_s + _dynamic(f_s2, m_rf * fft_ops(Q_ifft), consts.eta_ifft)


def p_dpd(m_rf: int, f_s2: float, consts: DigitalHardwareConstants = DigitalHardwareConstants()) -> float:
    return consts.P_dpd_s + _dynamic(f_s2, m_rf * consts.Xi_dpd, consts.eta_dpd)


def p_bb_filter(m_rf: int, f_s2: float,
                consts: DigitalHardwareConstants = DigitalHardwareConstants()) -> float:
    ops = consts.n_taps_bb * consts.oversampling_bb
    return n_fpgas(m_rf, consts) * consts.P_bb_s + _dynamic(f_s2, m_rf * ops, consts.eta_bb)


def digital_parts(direction: str, config: ScenarioConfig, rate: float) -> dict[str, float]:
    """Active powers of the digital chain of one direction, keyed by subcomponent."""
    c, d = config, config.digital
    if direction == DL:
        return {
            "encoder": p_coder(DL, rate / c.B_eff, c.f_s1, d),
            "precoder": p_precoder_combiner("precoder", c.M_rf, c.K, c.f_s1, c.upsilon_coh, d),
            "ifft": p_fft(c.M_rf, c.Q_ifft, c.f_s2, d),
            "dpd": p_dpd(c.M_rf, c.f_s2, d),
            "bb_filter_dl": p_bb_filter(c.M_rf, c.f_s2, d),
        }
    if direction == UL:
        return {
            "decoder": p_coder(UL, rate / c.B_eff, c.f_s1, d),
            "combiner": p_precoder_combiner("combiner", c.M_rf, c.K, c.f_s1, c.upsilon_coh, d),
            "fft": p_fft(c.M_rf, c.Q_ifft, c.f_s2, d),
            "bb_filter_ul": p_bb_filter(c.M_rf, c.f_s2, d),
        }
    raise ValueError(f"direction must be 'DL' or 'UL', got {direction!r}")


def p_digital_active(direction: str, config: ScenarioConfig, rates: tuple[float, float] = (0.0, 0.0)) -> float:
    """Active digital power of DL (encoder, precoder, IFFT, DPD, filter) or UL
    (decoder, combiner, FFT, filter). ``rates`` is ``(R_dl, R_ul)`` in bit/s."""
    rate = rates[0] if direction == DL else rates[1]
    return sum(digital_parts(direction, config, rate).values())


# analog subcomponents ---------------------------------------------------------

def p_dac(consts: AnalogHardwareConstants = AnalogHardwareConstants()) -> float:
    return consts.dac_static_coeff * 2 ** consts.b_dac + consts.dac_dynamic_coeff * consts.b_dac * consts.f_dac


def p_adc(consts: AnalogHardwareConstants = AnalogHardwareConstants()) -> float:
    """Walden figure of merit times sampling rate times ``2**bits``."""
    return consts.walden_fom * consts.f_adc * 2 ** consts.b_adc


def p_mixer(f_c: float, consts: AnalogHardwareConstants = AnalogHardwareConstants()) -> float:
    return consts.Xi_mix * f_c


def p_ps(B: float, consts: AnalogHardwareConstants = AnalogHardwareConstants()) -> float:
    return consts.Xi_ps * B


def p_lna(B: float, consts: AnalogHardwareConstants = AnalogHardwareConstants()) -> float:
    return consts.Xi_lna * B


def analog_chain_parts(direction: str, config: ScenarioConfig) -> dict[str, float]:
    """Per-RF-chain active powers; I and Q branches double DAC/ADC, filter and mixer."""
    a = config.analog
    parts = {
        "rf_filter": 2 * a.P_filter_rf,
        "mixer": 2 * p_mixer(config.f_c, a),
        "ps": config.M_ps * p_ps(config.B, a),
    }
    if direction == DL:
        parts["dac"] = 2 * p_dac(a)
    elif direction == UL:
        parts["adc"] = 2 * p_adc(a)
        parts["lna"] = p_lna(config.B, a)
    else:
        raise ValueError(f"direction must be 'DL' or 'UL', got {direction!r}")
    return parts


def p_analog_active(direction: str, config: ScenarioConfig) -> float:
    """``P_LO + M_rf * P_chain``; the phase-shifter term vanishes when fully digital."""
    chain = sum(analog_chain_parts(direction, config).values())
    return config.analog.P_lo + config.M_rf * chain


# power amplifier --------------------------------------------------------------

def p_pa_instantaneous(p: float, consts: PaConstants = PaConstants()) -> float:
    """Consumption of one PA delivering output power ``p`` (``0 <= p <= P_max``)."""
    if p < 0:
        raise ValueError("output power must be non-negative")
    if p > consts.P_max * (1 + 1e-12):
        raise ValueError(f"output power {p} W exceeds P_max = {consts.P_max} W")
    P_max, a, eta = consts.P_max, consts.alpha, consts.eta_max
    return consts.xi * P_max ** a / eta + (1 - consts.xi) * P_max ** (1 - a) * p ** a / eta


def p_pa_frame_average(config: ScenarioConfig, load: float | None = None) -> float:
    """Frame-averaged consumption of one PA (DL only)."""
    w = phase_weights(DL, config, load)
    pa = config.pa
    idle = p_pa_instantaneous(0.0, pa)
    return (w.w_data * p_pa_instantaneous(config.P_a, pa)
            + w.w_sig * p_pa_instantaneous(config.zeta_dl_sig * pa.P_max, pa)
            + w.w_micro * idle * config.delta_pa_micro
            + w.w_idle * idle * config.delta_pa_idle)


# totals -----------------------------------------------------------------------

AUDIT_FIELDS = ("encoder", "decoder", "precoder", "combiner", "ifft", "fft", "dpd", "bb_filter",
                "dac", "adc", "mixer", "ps", "lna", "lo", "rf_filter", "pa_per_antenna")


@dataclass
class PowerBreakdown:
    """Frame-averaged consumption in watts, after supply/cooling losses.

    ``load_independent`` is the value at zero load (and hence zero rate);
    ``load_dependent`` is the remainder at the requested loads. ``active`` holds
    the active-mode power of each subcomponent for auditing, and
    ``contributions`` the share of each subcomponent in ``total``.
    """

    digital_load_independent: float
    digital_load_dependent: float
    analog_load_independent: float
    analog_load_dependent: float
    pa_load_independent: float
    pa_load_dependent: float
    x_dl: float
    x_ul: float
    R_dl: float
    R_ul: float
    active: dict[str, float] = field(default_factory=dict)
    contributions: dict[str, float] = field(default_factory=dict)

    @property
    def digital(self) -> float:
        return self.digital_load_independent + self.digital_load_dependent

    @property
    def analog(self) -> float:
        return self.analog_load_independent + self.analog_load_dependent

    @property
    def pa(self) -> float:
        return self.pa_load_independent + self.pa_load_dependent

    @property
    def total(self) -> float:
        return self.digital + self.analog + self.pa

    @property
    def load_independent(self) -> float:
        return self.digital_load_independent + self.analog_load_independent + self.pa_load_independent

    def flat(self) -> dict[str, float]:
        """One flat record: component splits, totals and audit fields."""
        row = {k: v for k, v in asdict(self).items() if k not in ("active", "contributions")}
        row.update(digital=self.digital, analog=self.analog, pa=self.pa, total=self.total)
        for name in AUDIT_FIELDS:
            row[f"active_{name}"] = self.active.get(name, float("nan"))
        return row

    def to_json(self, **kwargs) -> str:
        data = self.flat()
        data["contributions"] = self.contributions
        return json.dumps(data, **kwargs)

    def to_csv(self, header: bool = True) -> str:
        row = self.flat()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        if header:
            writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


def _frame_average(config: ScenarioConfig, x_dl: float, x_ul: float, rates: tuple[float, float]):
    """Supply-divided frame averages plus per-subcomponent contributions."""
    contrib: dict[str, float] = {}
    totals = {"digital": 0.0, "analog": 0.0, "pa": 0.0}
    for direction, x, rate in ((DL, x_dl, rates[0]), (UL, x_ul, rates[1])):
        w = phase_weights(direction, config, x)
        dig = (w.w_data + w.w_sig + w.w_micro * config.delta_dig_micro
               + w.w_idle * config.delta_dig_idle) / config.eta_dig_sc
        ana = (w.w_data + w.w_sig + w.w_micro * config.delta_ana_micro
               + w.w_idle * config.delta_ana_idle) / config.eta_ana_sc
        for name, p in digital_parts(direction, config, rate).items():
            contrib[name] = dig * p
            totals["digital"] += dig * p
        suffix = direction.lower()
        contrib[f"lo_{suffix}"] = ana * config.analog.P_lo
        totals["analog"] += ana * config.analog.P_lo
        for name, p in analog_chain_parts(direction, config).items():
            key = f"{name}_{suffix}" if name in ("rf_filter", "mixer", "ps") else name
            contrib[key] = ana * config.M_rf * p
            totals["analog"] += ana * config.M_rf * p
    pa = config.M_ant * p_pa_frame_average(config, x_dl) / config.eta_pa_sc
    contrib["pa"] = pa
    totals["pa"] = pa
    return totals, contrib


def p_total(config: ScenarioConfig, rates: tuple[float, float] = (0.0, 0.0)) -> PowerBreakdown:
    """Total consumption at the config's loads with ``rates = (R_dl, R_ul)`` in bit/s.

    The rates must be those achieved at the config's loads; the zero-load
    reference is evaluated at zero rate.
    """
    R_dl, R_ul = float(rates[0]), float(rates[1])
    if R_dl < 0 or R_ul < 0:
        raise ValueError("rates must be non-negative")
    at_load, contrib = _frame_average(config, config.x_dl, config.x_ul, (R_dl, R_ul))
    at_zero, _ = _frame_average(config, 0.0, 0.0, (0.0, 0.0))

    dl, ul = digital_parts(DL, config, R_dl), digital_parts(UL, config, R_ul)
    a = config.analog
    active = {
        "encoder": dl["encoder"], "decoder": ul["decoder"],
        "precoder": dl["precoder"], "combiner": ul["combiner"],
        "ifft": dl["ifft"], "fft": ul["fft"], "dpd": dl["dpd"], "bb_filter": dl["bb_filter_dl"],
        "dac": p_dac(a), "adc": p_adc(a), "mixer": p_mixer(config.f_c, a),
        "ps": p_ps(config.B, a) if config.M_ps else 0.0, "lna": p_lna(config.B, a),
        "lo": a.P_lo, "rf_filter": a.P_filter_rf,
        "pa_per_antenna": p_pa_frame_average(config),
        "digital_dl": sum(dl.values()), "digital_ul": sum(ul.values()),
        "analog_dl": p_analog_active(DL, config), "analog_ul": p_analog_active(UL, config),
    }
    return PowerBreakdown(
        digital_load_independent=at_zero["digital"],
        digital_load_dependent=at_load["digital"] - at_zero["digital"],
        analog_load_independent=at_zero["analog"],
        analog_load_dependent=at_load["analog"] - at_zero["analog"],
        pa_load_independent=at_zero["pa"],
        pa_load_dependent=at_load["pa"] - at_zero["pa"],
        x_dl=config.x_dl, x_ul=config.x_ul, R_dl=R_dl, R_ul=R_ul,
        active=active, contributions=contrib,
    )
