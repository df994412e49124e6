"""Power consumption, hybrid beamforming and energy efficiency of a large-array
base station in the upper mid-band."""
from .beamforming import BeamformerSet, DegenerateChannelError, build, build_for, zf_digital
from .channel import ChannelParams, ChannelRealization, generate_clustered, generate_rayleigh, realize
from .linkrate import RateReport, energy_efficiency, ergodic_rates, ergodic_rates_multi, sinr_dl, sinr_ul
from .powermodel import PowerBreakdown, p_total
from .scenario import DL, UL, ScenarioConfig, ScenarioError, load_scenario, phase_weights, preset, validate
from .sweep import Table, export, read_csv, sweep_antennas, sweep_loads, sweep_rf_chains

__version__ = "0.1.0"
