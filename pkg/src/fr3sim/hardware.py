"""Hardware constants of the digital, analog and power-amplifier stages.

Efficiencies are in complex GOPS/W, i.e. 1e9 complex operations per second
per watt. Powers are in watts.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

GOPS = 1e9


class ConstantsError(ValueError):
    """Raised when a hardware constant lies outside its admissible range."""


def _check_positive(obj) -> None:
    for f in fields(obj):
        value = getattr(obj, f.name)
        if not value > 0:
            raise ConstantsError(f"{type(obj).__name__}.{f.name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class DigitalHardwareConstants:
    # encoder/decoder (ASIC)
    P_encoder_s: float = 0.1
    eta_encoder: float = 2000.0
    P_decoder_s: float = 0.1
    eta_decoder: float = 2000.0
    # precoder/combiner (FPGA, shared among `antennas_per_fpga` RF chains)
    P_precoder_s: float = 1.0
    eta_precoder: float = 200.0
    P_combiner_s: float = 1.0
    eta_combiner: float = 200.0
    antennas_per_fpga: int = 32
    # IFFT/FFT (ASIC)
    P_ifft_s: float = 0.1
    eta_ifft: float = 2000.0
    # DPD (ASIC)
    P_dpd_s: float = 0.1
    eta_dpd: float = 2000.0
    Xi_dpd: float = 50.0
    # baseband filter (FPGA)
    P_bb_s: float = 1.0
    eta_bb: float = 200.0
    n_taps_bb: int = 20
    oversampling_bb: int = 4

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            # taps may be zero to switch the filter's dynamic term off
            if f.name == "n_taps_bb":
                ok = value >= 0
            elif f.name.startswith("eta_") or f.name == "antennas_per_fpga":
                ok = value > 0
            else:
                ok = value >= 0
            if not ok:
                raise ConstantsError(f"DigitalHardwareConstants.{f.name} out of range: {value!r}")


@dataclass(frozen=True)
class AnalogHardwareConstants:
    b_dac: int = 8
    f_dac: float = 5e9
    dac_static_coeff: float = 1.5e-5   # W, multiplies 2**b
    dac_dynamic_coeff: float = 1.5e-12  # W per (bit * S/s)
    walden_fom: float = 70e-15  # J per conversion step
    b_adc: int = 8
    f_adc: float = 5e9
    Xi_mix: float = 2.5e-13  # W/Hz of carrier
    Xi_ps: float = 3.5e-11   # W/Hz of bandwidth
    Xi_lna: float = 2.7e-11  # W/Hz of bandwidth
    P_lo: float = 0.040
    P_filter_rf: float = 0.005

    def __post_init__(self):
        _check_positive(self)


@dataclass(frozen=True)
class PaConstants:
    P_max: float = 0.1
    eta_max: float = 0.15
    alpha: float = 0.75
    xi: float = 0.1

    def __post_init__(self):
        if not self.P_max > 0:
            raise ConstantsError(f"PaConstants.P_max must be > 0, got {self.P_max!r}")
        if not 0 < self.eta_max <= 1:
            raise ConstantsError(f"PaConstants.eta_max must lie in (0, 1], got {self.eta_max!r}")
        for name in ("alpha", "xi"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConstantsError(f"PaConstants.{name} must lie in [0, 1], got {value!r}")
