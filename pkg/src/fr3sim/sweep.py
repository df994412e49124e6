"""Parameter sweeps over RF chains, array size and load, plus table export.

Every sweep returns a :class:`Table`: an ordered list of flat rows with a fixed
column order, so that CSV and JSON output are stable. Rates are computed once
per grid point at full load on common channel drops and then scaled to each
load, because ergodic rates are exactly proportional to ``x * tau``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .linkrate import energy_efficiency, ergodic_rates_multi
from .powermodel import p_total
from .scenario import ScenarioConfig, ScenarioError

MARKER_LOAD = 0.3

SPLIT_COLUMNS = (
    "digital_load_independent", "digital_load_dependent",
    "analog_load_independent", "analog_load_dependent",
    "pa_load_independent", "pa_load_dependent",
)

RF_COLUMNS = (
    "M_rf", "mode", "M_ps", "x_dl", "x_ul", *SPLIT_COLUMNS, "load_independent", "total",
    "R_dl", "R_ul", "stderr_dl", "stderr_ul", "ee",
    "total_30", "R_dl_30", "R_ul_30", "ee_30", "max_zf_leakage",
)

ANT_COLUMNS = (
    "M_ant", "rows", "cols", "P_t_dl", "pa_load_independent", "pa_load_dependent",
    "pa_total", "pa_30",
)

LOAD_COLUMNS = (
    "x_dl", "x_ul", *SPLIT_COLUMNS, "load_independent", "total", "R_dl", "R_ul", "ee",
)


@dataclass
class Table:
    """Rows sharing one column order.

    ``x`` names the column used as the bar position and ``stacks`` the
    columns stacked on each bar in plot data.
    """

    name: str
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)
    x: str | None = None
    stacks: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def row(self, key: str, value) -> dict:
        for r in self.rows:
            if r[key] == value:
                return r
        raise KeyError(f"no row with {key} == {value!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            # repr keeps every float bit-exact through a re-parse
            writer.writerow([repr(float(r[c])) if isinstance(r[c], float) else r[c] for c in self.columns])
        return buf.getvalue()

    def to_json(self, **kwargs) -> str:
        return json.dumps({"name": self.name, "columns": list(self.columns),
                           "rows": [{c: _jsonable(r[c]) for c in self.columns} for r in self.rows]},
                          **kwargs)

    def plot_data(self) -> dict:
        """Renderer-agnostic stacked-bar description."""
        return {
            "name": self.name,
            "x": {"column": self.x, "values": self.column(self.x) if self.x else []},
            "stacks": [{"name": s, "values": [_jsonable(v) for v in self.column(s)]}
                       for s in self.stacks],
        }


def _jsonable(v):
    if isinstance(v, float):
        return float(v) if math.isfinite(v) else None
    return v


def _parse_cell(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_csv(path_or_text, name: str = "") -> Table:
    """Parse a CSV written by :func:`export` back into a :class:`Table`."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text()
    reader = csv.reader(io.StringIO(text))
    columns = tuple(next(reader))
    rows = [dict(zip(columns, map(_parse_cell, line))) for line in reader if line]
    return Table(name, columns, rows)


def export(table: Table, path: str | Path, format: str = "csv", plot_data: bool = True) -> Path:
    """Write ``table`` as CSV or JSON; with ``plot_data`` also ``<stem>.plot.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "csv":
        path.write_text(table.to_csv())
    elif format == "json":
        path.write_text(table.to_json(indent=2))
    else:
        raise ValueError(f"unknown export format {format!r}")
    if plot_data and table.x:
        path.with_suffix(".plot.json").write_text(json.dumps(table.plot_data(), indent=2))
    return path


# sweeps -----------------------------------------------------------------------

def _point(base: ScenarioConfig, m_rf: int) -> ScenarioConfig:
    if m_rf != base.M_ant and base.M_ant % m_rf:
        raise ScenarioError(f"M_rf={m_rf} neither divides nor equals M_ant={base.M_ant}")
    mode = "fully_digital" if m_rf == base.M_ant else "hybrid"
    return base.replace(M_rf=m_rf, mode=mode)


def full_load_rates(configs: Sequence[ScenarioConfig], n_drops: int, seed: int,
                    assume_rates: tuple[float, float] | None = None, workers: int | None = None,
                    quiet: bool = False):
    """Full-load ``(R_dl, R_ul, stderr_dl, stderr_ul, max_zf_leakage)`` per config
    on common drops. Assumed rates carry a NaN leakage."""
    if assume_rates is not None:
        return [(float(assume_rates[0]), float(assume_rates[1]), 0.0, 0.0, math.nan)] * len(configs)
    full = [c.replace(x_dl=1.0, x_ul=1.0) for c in configs]
    with warnings.catch_warnings():
        if quiet:
            warnings.simplefilter("ignore")
        reports = ergodic_rates_multi(full, n_drops=n_drops, seed=seed, workers=workers)
    return [(r.R_dl, r.R_ul, r.stderr_dl, r.stderr_ul, r.extra["max_zf_leakage"]) for r in reports]


def _ee(rates, total: float) -> float:
    return energy_efficiency(rates, total) if total > 0 else math.nan


def _power_row(config: ScenarioConfig, full: tuple[float, float]) -> dict:
    rates = (config.x_dl * full[0], config.x_ul * full[1])
    b = p_total(config, rates)
    row = {k: getattr(b, k) for k in SPLIT_COLUMNS}
    row.update(load_independent=b.load_independent, total=b.total,
               R_dl=rates[0], R_ul=rates[1], ee=_ee(rates, b.total))
    return row


def sweep_rf_chains(base: ScenarioConfig, m_rf_list: Iterable[int] = (16, 32, 64, 128, 256, 512, 1024),
                    loads: tuple[float, float] | None = None, n_drops: int = 200, seed: int = 42,
                    assume_rates: tuple[float, float] | None = None, workers: int | None = None,
                    quiet: bool = False) -> Table:
    """Power splits, rates and EE versus the number of RF chains.

    ``loads`` defaults to the base config's ``(x_dl, x_ul)``. The point with
    ``M_rf == M_ant`` runs fully digital, all others hybrid. Columns ending in
    ``_30`` repeat the evaluation at 30% load in both directions.
    """
    if loads is not None:
        base = base.replace(x_dl=loads[0], x_ul=loads[1])
    configs = [_point(base, int(m)) for m in m_rf_list]
    table = Table("rf_chains", RF_COLUMNS, x="M_rf", stacks=SPLIT_COLUMNS[:4])
    if not configs:
        return table
    rates = full_load_rates(configs, n_drops, seed, assume_rates, workers, quiet)
    for c, (R_dl, R_ul, s_dl, s_ul, leak) in zip(configs, rates):
        row = {"M_rf": c.M_rf, "mode": "fully_digital" if c.fully_digital else "hybrid",
               "M_ps": c.M_ps, "x_dl": c.x_dl, "x_ul": c.x_ul}
        row.update(_power_row(c, (R_dl, R_ul)))
        row["stderr_dl"], row["stderr_ul"] = c.x_dl * s_dl, c.x_ul * s_ul
        marker = _power_row(c.replace(x_dl=MARKER_LOAD, x_ul=MARKER_LOAD), (R_dl, R_ul))
        row.update(total_30=marker["total"], R_dl_30=marker["R_dl"], R_ul_30=marker["R_ul"],
                   ee_30=marker["ee"], max_zf_leakage=leak)
        table.rows.append(row)
    return table


def upa_dims(m_ant: int) -> tuple[int, int]:
    """Most nearly square ``rows x cols`` factorization with ``rows <= cols``."""
    if m_ant < 1:
        raise ScenarioError("M_ant must be a positive integer")
    rows = max(r for r in range(1, math.isqrt(m_ant) + 1) if m_ant % r == 0)
    return rows, m_ant // rows


def sweep_antennas(base: ScenarioConfig,
                   m_ant_list: Iterable[int] = (16, 32, 64, 128, 256, 512, 1024)) -> Table:
    """PA load-independent and load-dependent consumption versus array size.

    The DL transmit power scales as ``100 W * M_ant / 1024``. The PA does not
    depend on rates, so no channel drops are needed. ``pa_30`` is the PA power
    at 30% DL load.
    """
    table = Table("antennas", ANT_COLUMNS, x="M_ant", stacks=("pa_load_independent", "pa_load_dependent"))
    for m in m_ant_list:
        rows, cols = upa_dims(int(m))
        c = base.replace(M_ant_rows=rows, M_ant_cols=cols, M_rf=rows * cols, mode="fully_digital",
                         K=min(base.K, rows * cols))
        b = p_total(c)
        marker = p_total(c.replace(x_dl=MARKER_LOAD))
        table.rows.append({
            "M_ant": c.M_ant, "rows": rows, "cols": cols, "P_t_dl": c.P_t_dl,
            "pa_load_independent": b.pa_load_independent, "pa_load_dependent": b.pa_load_dependent,
            "pa_total": b.pa, "pa_30": marker.pa,
        })
    return table


def sweep_loads(base: ScenarioConfig, x_grid: Iterable[tuple[float, float]], n_drops: int = 200,
                seed: int = 42, assume_rates: tuple[float, float] | None = None,
                workers: int | None = None, quiet: bool = False) -> Table:
    """Total consumption and EE over a grid of ``(x_dl, x_ul)`` loads."""
    grid = [(float(a), float(b)) for a, b in x_grid]
    table = Table("loads", LOAD_COLUMNS)
    if not grid:
        return table
    (R_dl, R_ul, *_), = full_load_rates([base], n_drops, seed, assume_rates, workers, quiet)
    for x_dl, x_ul in grid:
        c = base.replace(x_dl=x_dl, x_ul=x_ul)
        table.rows.append({"x_dl": x_dl, "x_ul": x_ul, **_power_row(c, (R_dl, R_ul))})
    return table


__all__ = [
    "Table", "export", "read_csv", "sweep_rf_chains", "sweep_antennas", "sweep_loads",
    "full_load_rates", "upa_dims", "MARKER_LOAD", "RF_COLUMNS", "ANT_COLUMNS", "LOAD_COLUMNS",
]
