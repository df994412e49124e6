"""Run parameters, validation and frame-phase weights.

A :class:`ScenarioConfig` carries every quantity a run needs. It is frozen and
validated on construction, so an instance that exists is a valid scenario.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .channel import ChannelParams
from .hardware import AnalogHardwareConstants, DigitalHardwareConstants, PaConstants

DL, UL = "DL", "UL"
DIRECTIONS = (DL, UL)

MODES = ("auto", "hybrid", "fully_digital")
SIGNALING_MODES = ("full", "unloaded")


class ScenarioError(ValueError):
    """A scenario invariant is violated; the message names it."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class ScenarioConfig:
    # carrier, bandwidth, sampling
    f_c: float = 10e9
    B: float = 400e6
    B_eff: float | None = None  # defaults to 0.9 * B
    mu: float = 0.9
    Q_ifft: int = 4096
    delta_f: float = 120e3
    q_dl: int = 3000
    q_ul: int = 3000
    # users and array
    K: int = 8
    M_ant_rows: int = 32
    M_ant_cols: int = 32
    M_rf: int = 1024
    mode: str = "auto"
    # transmit and noise powers
    P_t_dl: float | None = None  # defaults to 100 W * M_ant / 1024
    P_t_ul: float = 0.1
    sigma2_dl: float = dbm_to_watt(-123.0)
    sigma2_ul: float = dbm_to_watt(-123.0)
    # frame
    tau_dl: float = 0.75
    tau_ul: float = 0.25
    tau_dl_sig: float = 1 / 14
    tau_ul_sig: float = 1 / 14
    zeta_dl_sig: float = 1 / 12
    x_dl: float = 1.0
    x_ul: float = 1.0
    signaling_weight_mode: str = "full"
    # sleep reduction factors
    delta_dig_micro: float = 0.5
    delta_dig_idle: float = 0.25
    delta_ana_micro: float = 0.75
    delta_ana_idle: float = 0.5
    delta_pa_micro: float = 0.5
    delta_pa_idle: float = 0.25
    # supply and cooling
    eta_dig_sc: float = 0.8
    eta_ana_sc: float = 0.8
    eta_pa_sc: float = 0.8
    # samples per coherence block: one 14-symbol slot over ~3300 used subcarriers
    upsilon_coh: float = 14 * 3300
    digital: DigitalHardwareConstants = field(default_factory=DigitalHardwareConstants)
    analog: AnalogHardwareConstants = field(default_factory=AnalogHardwareConstants)
    pa: PaConstants = field(default_factory=PaConstants)
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if self.B_eff is None:
            object.__setattr__(self, "B_eff", 0.9 * self.B)
        if self.P_t_dl is None:
            object.__setattr__(self, "P_t_dl", 100.0 * self.M_ant / 1024)
        _validate(self)

    # derived quantities
    @property
    def M_ant(self) -> int:
        return self.M_ant_rows * self.M_ant_cols

    @property
    def fully_digital(self) -> bool:
        if self.mode == "auto":
            return self.M_rf == self.M_ant
        return self.mode == "fully_digital"

    @property
    def M_ps(self) -> int:
        """Phase shifters per RF chain; zero without an analog stage."""
        return 0 if self.fully_digital else self.M_ant // self.M_rf

    @property
    def f_s1(self) -> float:
        """Constellation rate, samples/s."""
        return self.mu * self.B

    @property
    def f_s2(self) -> float:
        """Oversampled rate of IFFT, DPD and baseband filter, samples/s."""
        return self.Q_ifft * self.delta_f

    @property
    def P_a(self) -> float:
        """Average per-PA output power."""
        return self.P_t_dl / self.M_ant

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with changes; derived defaults are recomputed unless given."""
        base = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        if "B" in changes and "B_eff" not in changes:
            base["B_eff"] = None
        if ({"M_ant_rows", "M_ant_cols"} & changes.keys()) and "P_t_dl" not in changes:
            base["P_t_dl"] = None
        base.update(changes)
        return ScenarioConfig(**base)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _validate(c: ScenarioConfig) -> None:
    def fail(msg: str):
        raise ScenarioError(msg)

    for name in ("f_c", "B", "B_eff", "delta_f", "P_t_ul", "sigma2_dl", "sigma2_ul", "upsilon_coh"):
        if not getattr(c, name) > 0:
            fail(f"{name} must be > 0")
    if not c.P_t_dl >= 0:
        fail("P_t_dl must be >= 0")
    for name in ("Q_ifft", "q_dl", "q_ul", "K", "M_ant_rows", "M_ant_cols", "M_rf"):
        value = getattr(c, name)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            fail(f"{name} must be a positive integer")
    if not 0 <= c.mu < 1:
        fail("mu must lie in [0, 1)")
    if c.Q_ifft & (c.Q_ifft - 1):
        fail("Q_ifft is not a power of two")
    ratios = ("tau_dl", "tau_ul", "tau_dl_sig", "tau_ul_sig", "x_dl", "x_ul",
              "delta_dig_micro", "delta_dig_idle", "delta_ana_micro", "delta_ana_idle",
              "delta_pa_micro", "delta_pa_idle")
    for name in ratios:
        if not 0 <= getattr(c, name) <= 1:
            fail(f"{name} must lie in [0, 1]")
    if c.tau_dl + c.tau_ul > 1 + 1e-12:
        fail("tau_dl + tau_ul exceeds 1")
    if not 0 < c.zeta_dl_sig < 1:
        fail("zeta_dl_sig must lie in (0, 1)")
    for name in ("eta_dig_sc", "eta_ana_sc", "eta_pa_sc"):
        if not 0 < getattr(c, name) <= 1:
            fail(f"{name} must lie in (0, 1]")
    if c.mode not in MODES:
        fail(f"mode must be one of {MODES}")
    if c.signaling_weight_mode not in SIGNALING_MODES:
        fail(f"signaling_weight_mode must be one of {SIGNALING_MODES}")
    if not c.K <= c.M_rf <= c.M_ant:
        fail("K <= M_rf <= M_ant violated")
    if c.mode == "fully_digital" and c.M_rf != c.M_ant:
        fail("fully-digital mode requires M_rf == M_ant")
    if not c.fully_digital and c.M_ant % c.M_rf:
        fail("M_rf does not divide M_ant")
    if not c.f_s1 < c.f_s2:
        fail("f_sI must be below f_sII")
    if c.P_a > c.pa.P_max * (1 + 1e-12):
        fail("P_a = P_t_dl / M_ant exceeds the PA maximum output power")


def validate(config: ScenarioConfig | Mapping[str, Any]) -> ScenarioConfig:
    """Return a validated scenario built from a config or a plain mapping.

    Raises :class:`ScenarioError` naming the first violated invariant.
    """
    if isinstance(config, ScenarioConfig):
        _validate(config)
        return config
    return from_dict(config)


_NESTED = {
    "digital": DigitalHardwareConstants,
    "analog": AnalogHardwareConstants,
    "pa": PaConstants,
    "channel": ChannelParams,
}


def _build(cls, data: Mapping[str, Any], where: str):
    if not isinstance(data, Mapping):
        raise ScenarioError(f"{where}: expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ScenarioError(f"{where}: unknown field(s) {', '.join(unknown)}")
    kwargs = dict(data)
    if cls is ScenarioConfig:
        for name, sub in _NESTED.items():
            if name in kwargs:
                kwargs[name] = _build(sub, kwargs[name], f"{where}.{name}")
    elif cls is ChannelParams and isinstance(kwargs.get("los"), list):
        kwargs["los"] = tuple(kwargs["los"])
    try:
        return cls(**kwargs)
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build a scenario from a mapping with exactly the dataclass field names."""
    return _build(ScenarioConfig, data, "scenario")


def load_scenario(path: str | Path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Read a JSON scenario file; fields override ``base`` (or the defaults)."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    if base is None:
        return from_dict(data)
    merged = base.to_dict()
    for name, sub in _NESTED.items():
        if name in data:
            _build(sub, data[name], f"scenario.{name}")  # reject typos early
            merged[name] = merged[name] | data[name]
    for key, value in data.items():
        if key not in _NESTED:
            merged[key] = value
    if "B" in data and "B_eff" not in data:
        merged["B_eff"] = None
    if ({"M_ant_rows", "M_ant_cols"} & data.keys()) and "P_t_dl" not in data:
        merged["P_t_dl"] = None
    return from_dict(merged)


def preset(name: str) -> ScenarioConfig:
    """Named parameter sets. ``paper-fig2``: 32x32 UPA, 400 MHz at 10 GHz, K=8."""
    if name == "paper-fig2":
        return ScenarioConfig()
    raise ScenarioError(f"unknown preset {name!r}")


# frame-phase weights ---------------------------------------------------------

@dataclass(frozen=True)
class PhaseWeights:
    """Frame-averaging coefficients applied to a component's active power."""

    w_data: float
    w_sig: float
    w_micro: float
    w_idle: float

    def average(self, p_active: float, delta_micro: float, delta_idle: float) -> float:
        return p_active * (self.w_data + self.w_sig
                           + self.w_micro * delta_micro + self.w_idle * delta_idle)


def _direction_params(direction: str, config: ScenarioConfig) -> tuple[float, float, float]:
    if direction == DL:
        return config.tau_dl, config.tau_dl_sig, config.x_dl
    if direction == UL:
        return config.tau_ul, config.tau_ul_sig, config.x_ul
    raise ValueError(f"direction must be 'DL' or 'UL', got {direction!r}")


def phase_weights(direction: str, config: ScenarioConfig, load: float | None = None) -> PhaseWeights:
    """Weights of the data, signaling, micro-sleep and idle phases.

    ``load`` overrides the config's load for ``direction``. In ``full``
    mode the signaling phase is weighted by ``tau * tau_sig``; in
    ``unloaded`` mode only the unused share signals, ``(1 - x) * tau * tau_sig``.
    """
    tau, tau_sig, x = _direction_params(direction, config)
    if load is not None:
        x = load
    w_sig = tau * tau_sig
    if config.signaling_weight_mode == "unloaded":
        w_sig *= 1.0 - x
    return PhaseWeights(
        w_data=x * tau,
        w_sig=w_sig,
        w_micro=tau * (1.0 - x) * (1.0 - tau_sig),
        w_idle=1.0 - tau,
    )


def is_power_of_two(n: int) -> bool:
    return n > 0 and not n & (n - 1)


def log2_int(n: int) -> int:
    if not is_power_of_two(n):
        raise ScenarioError(f"Q_ifft={n} is not a power of two")
    return n.bit_length() - 1


__all__ = [
    "DL", "UL", "DIRECTIONS", "ScenarioConfig", "ScenarioError", "PhaseWeights",
    "validate", "phase_weights", "from_dict", "load_scenario", "preset", "dbm_to_watt",
    "is_power_of_two", "log2_int",
]
