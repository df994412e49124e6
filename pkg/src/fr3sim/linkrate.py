"""DL/UL SINRs, Monte Carlo ergodic sum rates and energy efficiency."""
from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .beamforming import BeamformerSet, DegenerateChannelError, build_for
from .channel import realize, subcarrier_offsets
from .scenario import ScenarioConfig

MAX_REGENERATIONS = 10


def _gains(H: np.ndarray, bf: BeamformerSet) -> np.ndarray:
    """``G[nu, k, k'] = h_k^T W_ana w_dig,k'``."""
    return bf.effective(H) @ bf.W_dig


def dl_terms(H: np.ndarray, bf: BeamformerSet, p_tx: float, q: int, noise: float):
    """Signal, interference and noise powers of the DL SINR, each ``(N_sc, K)``."""
    G = np.abs(_gains(H, bf)) ** 2
    signal = np.diagonal(G, axis1=-2, axis2=-1)
    interference = G.sum(axis=-1) - signal
    return p_tx * signal, p_tx * interference, np.full_like(signal, q * noise)


def ul_terms(H: np.ndarray, bf: BeamformerSet, p_tx: float, q: int, noise: float):
    """UL counterpart of :func:`dl_terms` with combiner rows ``v_dig,k^T V_ana``;
    the effective noise of user ``k`` is ``noise * ||v_dig,k^T V_ana||^2``."""
    V = bf.combiner()  # (N, K, M_ant)
    C = np.abs(V @ np.conj(np.swapaxes(H, -1, -2))) ** 2  # [nu, k, k'] = |v_k^T V_ana h_k'^*|^2
    signal = np.diagonal(C, axis1=-2, axis2=-1)
    interference = C.sum(axis=-1) - signal
    return p_tx * signal, p_tx * interference, q * noise * np.sum(np.abs(V) ** 2, axis=-1)


def _sinr(terms) -> np.ndarray:
    signal, interference, noise = terms
    return signal / (interference + noise)


def leakage(terms) -> float:
    """Largest share of the SINR denominator taken by inter-user interference."""
    _, interference, noise = terms
    return float(np.max(np.abs(interference) / (np.abs(interference) + noise)))


def sinr_dl(H: np.ndarray, bf: BeamformerSet, p_tx: float, q: int, noise: float) -> np.ndarray:
    """DL SINR of every user and subcarrier, shape ``(N_sc, K)``."""
    return _sinr(dl_terms(H, bf, p_tx, q, noise))


def sinr_ul(H: np.ndarray, bf: BeamformerSet, p_tx: float, q: int, noise: float) -> np.ndarray:
    """UL SINR of every user and subcarrier, shape ``(N_sc, K)``."""
    return _sinr(ul_terms(H, bf, p_tx, q, noise))


def _finite(v: float) -> float | None:
    # JSON has no NaN; a single drop has no standard error
    return v if np.isfinite(v) else None


@dataclass
class RateReport:
    """Ergodic sum rates in bit/s with the per-drop spectral sums behind them.

    ``sum_se_dl[d]`` is the drop-``d`` average over subcarriers of
    ``sum_k log2(1 + SINR)``.
    """

    R_dl: float
    R_ul: float
    stderr_dl: float
    stderr_ul: float
    n_drops: int
    seed: int
    model: str
    M_rf: int
    fully_digital: bool
    sum_se_dl: np.ndarray
    sum_se_ul: np.ndarray
    sinr_dl: np.ndarray | None = None  # (n_drops, N_sc, K)
    sinr_ul: np.ndarray | None = None
    regenerated: int = 0
    ee: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, per_drop: bool = False) -> dict:
        out = {
            "R_dl": self.R_dl, "R_ul": self.R_ul,
            "R_dl_gbps": self.R_dl / 1e9, "R_ul_gbps": self.R_ul / 1e9,
            "stderr_dl": _finite(self.stderr_dl), "stderr_ul": _finite(self.stderr_ul),
            "n_drops": self.n_drops, "seed": self.seed, "model": self.model,
            "M_rf": self.M_rf, "fully_digital": self.fully_digital,
            "regenerated": self.regenerated, "ee_bit_per_joule": self.ee,
        }
        if per_drop:
            out["sum_se_dl"] = self.sum_se_dl.tolist()
            out["sum_se_ul"] = self.sum_se_ul.tolist()
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def write_per_drop_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("drop,sum_se_dl,sum_se_ul\n")
            for d, (a, b) in enumerate(zip(self.sum_se_dl, self.sum_se_ul)):
                fh.write(f"{d},{a!r},{b!r}\n")

    def scaled_to_load(self, config: ScenarioConfig) -> tuple[float, float]:
        """Rates at ``config``'s loads, given a report computed at full load."""
        return self.R_dl * config.x_dl, self.R_ul * config.x_ul


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("FR3SIM_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, os.cpu_count() or 1))


def drop_seed(seed: int, drop: int, attempt: int = 0) -> np.random.SeedSequence:
    """Substream of one drop, independent of worker count and scheduling."""
    return np.random.SeedSequence([seed, drop, attempt])


def _check_shared_channel(configs: Sequence[ScenarioConfig]) -> None:
    keys = {(c.K, c.M_ant_rows, c.M_ant_cols, c.channel, c.f_c, c.q_dl, c.q_ul, c.delta_f)
            for c in configs}
    if len(keys) != 1:
        raise ValueError("configs evaluated on common drops must share the channel setup")


def _evaluate_drop(configs: Sequence[ScenarioConfig], seed: int, drop: int, keep_sinr: bool):
    base = configs[0]
    # same frequency grid in both directions: q_dl and q_ul only set the spacing
    freqs = subcarrier_offsets(base.q_dl, base.delta_f, base.channel.n_sc_eval)
    for attempt in range(MAX_REGENERATIONS):
        real = realize(base.K, base.M_ant_rows, base.M_ant_cols, freqs, base.f_c,
                       base.channel, drop_seed(seed, drop, attempt))
        try:
            out = []
            for c in configs:
                bf = build_for(real.H, c)
                t_dl = dl_terms(real.H, bf, c.P_t_dl, c.q_dl, c.sigma2_dl)
                t_ul = ul_terms(real.H, bf, c.P_t_ul, c.q_ul, c.sigma2_ul)
                s_dl, s_ul = _sinr(t_dl), _sinr(t_ul)
                out.append((
                    np.log2(1 + s_dl).sum(axis=-1).mean(),
                    np.log2(1 + s_ul).sum(axis=-1).mean(),
                    s_dl if keep_sinr else None,
                    s_ul if keep_sinr else None,
                    max(leakage(t_dl), leakage(t_ul)),
                ))
            return out, attempt
        except DegenerateChannelError:
            continue
    raise DegenerateChannelError(f"drop {drop}: no full-rank channel after {MAX_REGENERATIONS} attempts")


def ergodic_rates_multi(configs: Sequence[ScenarioConfig], n_drops: int = 200, seed: int = 42,
                        workers: int | None = None, keep_sinr: bool = False) -> list[RateReport]:
    """Rates of several configs evaluated on the same channel drops.

    All configs must share users, array and channel settings; they may differ
    in RF chains, mode, powers and loads. Rates are
    ``x * tau * B_eff * mean_drops(mean_nu sum_k log2(1 + SINR))``, which is the
    ergodic sum over all ``q`` subcarriers scaled from the evaluation grid.
    """
    if n_drops < 1:
        raise ValueError("n_drops must be >= 1")
    configs = list(configs)
    _check_shared_channel(configs)
    n_workers = min(worker_count(workers), n_drops)
    if n_workers == 1:
        results = [_evaluate_drop(configs, seed, d, keep_sinr) for d in range(n_drops)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda d: _evaluate_drop(configs, seed, d, keep_sinr), range(n_drops)))
    regenerated = sum(1 for _, attempt in results if attempt)

    reports = []
    for i, c in enumerate(configs):
        se_dl = np.array([r[0][i][0] for r in results])
        se_ul = np.array([r[0][i][1] for r in results])
        pre_dl = c.x_dl * c.tau_dl * c.B_eff
        pre_ul = c.x_ul * c.tau_ul * c.B_eff
        err = (lambda a: a.std(ddof=1) / np.sqrt(n_drops)) if n_drops > 1 else (lambda a: float("nan"))
        rep = RateReport(
            R_dl=float(pre_dl * se_dl.mean()), R_ul=float(pre_ul * se_ul.mean()),
            stderr_dl=float(pre_dl * err(se_dl)), stderr_ul=float(pre_ul * err(se_ul)),
            n_drops=n_drops, seed=seed, model=c.channel.model, M_rf=c.M_rf,
            fully_digital=c.fully_digital, sum_se_dl=se_dl, sum_se_ul=se_ul,
            sinr_dl=np.stack([r[0][i][2] for r in results]) if keep_sinr else None,
            sinr_ul=np.stack([r[0][i][3] for r in results]) if keep_sinr else None,
            regenerated=regenerated,
            extra={"max_zf_leakage": max(r[0][i][4] for r in results)},
        )
        for name, R, s in (("DL", rep.R_dl, rep.stderr_dl), ("UL", rep.R_ul, rep.stderr_ul)):
            if R > 0 and s > 0.02 * R:
                warnings.warn(f"{name} rate standard error {s / R:.1%} exceeds 2% "
                              f"(M_rf={c.M_rf}, {n_drops} drops)", stacklevel=2)
        reports.append(rep)
    return reports


def ergodic_rates(config: ScenarioConfig, n_drops: int = 200, seed: int = 42,
                  workers: int | None = None, keep_sinr: bool = False) -> RateReport:
    return ergodic_rates_multi([config], n_drops, seed, workers, keep_sinr)[0]


def energy_efficiency(rates, power) -> float:
    """``(R_dl + R_ul) / P_cons`` in bit/J.

    ``rates`` is a :class:`RateReport` or a ``(R_dl, R_ul)`` pair; ``power`` a
    breakdown with a ``total`` or a number of watts.
    """
    R_dl, R_ul = (rates.R_dl, rates.R_ul) if isinstance(rates, RateReport) else rates
    p = getattr(power, "total", power)
    if not p > 0:
        raise ValueError("consumed power must be positive")
    return (R_dl + R_ul) / p
