"""Comparison of sweep output against published reference values.

Targets and tolerances live in ``data/reference_targets.json``. A figure run
produces its table plus a list of :class:`Check` verdicts; informational
checks (``gating=False``) are reported but never fail a run.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .scenario import ScenarioConfig, preset
from .sweep import Table, export, sweep_antennas, sweep_rf_chains

FIGURES = ("fig2a", "fig2b", "fig2c", "totals")

# drops of the rate pre-pass when rates only feed the coder power terms
POWER_PREPASS_DROPS = 4


@lru_cache(maxsize=1)
def targets() -> dict:
    text = resources.files("fr3sim").joinpath("data/reference_targets.json").read_text()
    return json.loads(text)


@dataclass
class Check:
    figure: str
    quantity: str
    key: str
    value: float
    target: float | None
    tolerance: float | None
    passed: bool
    gating: bool = True
    note: str = ""

    @property
    def rel_err(self) -> float:
        if self.target in (None, 0):
            return math.nan
        return (self.value - self.target) / self.target

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rel_err"] = None if math.isnan(self.rel_err) else self.rel_err
        return d


def _within(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol * abs(target)


def _bar_checks(figure: str, table: Table, key: str, ref: dict, notes: dict | None = None) -> list[Check]:
    tol = ref["tolerance"]
    out = []
    for name, values in ref["series"].items():
        for k, target in zip(ref[key], values):
            v = table.row(key, k)[name]
            out.append(Check(figure, name, f"{key}={k}", v, target, tol, _within(v, target, tol),
                             note=(notes or {}).get(name, "")))
    return out


@dataclass
class FigureResult:
    figure: str
    table: Table
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.gating)

    def summary(self) -> dict:
        return {"figure": self.figure, "passed": self.passed,
                "n_checks": sum(c.gating for c in self.checks),
                "n_failed": sum(c.gating and not c.passed for c in self.checks),
                "checks": [c.to_dict() for c in self.checks]}


def run_fig2a(base: ScenarioConfig, n_drops: int = POWER_PREPASS_DROPS, seed: int = 42,
              assume_rates=None) -> FigureResult:
    ref = targets()["fig2a"]
    table = sweep_rf_chains(base, ref["M_rf"], loads=(1.0, 1.0), n_drops=n_drops, seed=seed,
                            assume_rates=assume_rates, quiet=True)
    return FigureResult("fig2a", table, _bar_checks("fig2a", table, "M_rf", ref, ref.get("notes")))


def run_fig2b(base: ScenarioConfig) -> FigureResult:
    ref = targets()["fig2b"]
    table = sweep_antennas(base.replace(x_dl=1.0, x_ul=1.0), ref["M_ant"])
    checks = _bar_checks("fig2b", table, "M_ant", ref)
    tol = ref["doubling_tolerance"]
    for name in ref["series"]:
        col = table.column(name)
        for m, a, b in zip(ref["M_ant"][1:], col, col[1:]):
            ratio = b / a
            checks.append(Check("fig2b", f"{name}_doubling", f"M_ant={m}", ratio, 2.0, tol,
                                _within(ratio, 2.0, tol)))
    return FigureResult("fig2b", table, checks)


def run_fig2c(base: ScenarioConfig, n_drops: int = 200, seed: int = 42, workers=None) -> FigureResult:
    ref = targets()["fig2c"]
    table = sweep_rf_chains(base, ref["M_rf"], loads=(1.0, 1.0), n_drops=n_drops, seed=seed,
                            workers=workers)
    checks = []
    dl = table.column("R_dl")
    for m, a, b in zip(ref["M_rf"][1:], dl, dl[1:]):
        checks.append(Check("fig2c", "R_dl_nondecreasing", f"M_rf={m}", b - a, None, None, b >= a,
                            note="difference to the previous M_rf on common drops, bit/s"))
    fd_target = ref["series"]["R_dl_gbps"][-1]
    fd = dl[-1] / 1e9
    factor = ref["fully_digital_dl_factor"]
    checks.append(Check("fig2c", "R_dl_fully_digital_gbps", f"M_rf={ref['M_rf'][-1]}", fd, fd_target,
                        None, fd_target / factor <= fd <= fd_target * factor,
                        note=f"within a factor {factor:g}"))
    ee = table.column("ee")
    i_max = max(range(len(ee)), key=ee.__getitem__)
    unimodal = (all(a <= b for a, b in zip(ee[:i_max], ee[1:i_max + 1]))
                and all(a >= b for a, b in zip(ee[i_max:], ee[i_max + 1:])))
    interior = 0 < i_max < len(ee) - 1 and table.rows[i_max]["mode"] == "hybrid"
    checks.append(Check("fig2c", "ee_unimodal_interior_max", f"M_rf={ref['M_rf'][i_max]}",
                        ee[i_max] / 1e6, None, None, unimodal and interior,
                        note="EE in Mbit/J at the maximum"))
    ratio = ee[i_max] / ee[-1]
    need = ref["min_hybrid_over_fully_digital_ee"]
    checks.append(Check("fig2c", "ee_hybrid_over_fully_digital", "full load", ratio, need, None,
                        ratio >= need, note=f"must be >= {need:g}"))
    # channel stand-in: absolute rates and EE are informational only
    for name, col, scale in (("R_dl_gbps", "R_dl", 1e-9), ("R_ul_gbps", "R_ul", 1e-9)):
        for m, target in zip(ref["M_rf"], ref["series"][name]):
            v = table.row("M_rf", m)[col] * scale
            checks.append(Check("fig2c", name, f"M_rf={m}", v, target, None, True, gating=False))
    for name, col in (("ee_full_load_mbit_per_joule", "ee"), ("ee_30pct_load_mbit_per_joule", "ee_30")):
        for m, target in zip(ref["M_rf"], ref[name]):
            v = table.row("M_rf", m)[col] / 1e6
            checks.append(Check("fig2c", name, f"M_rf={m}", v, target, None, True, gating=False))
    return FigureResult("fig2c", table, checks)


def run_totals(base: ScenarioConfig, n_drops: int = POWER_PREPASS_DROPS, seed: int = 42,
               assume_rates=None) -> FigureResult:
    ref = targets()["totals"]
    m_rf = sorted({c["M_rf"] for c in ref["cases"]})
    table = sweep_rf_chains(base, m_rf, loads=(1.0, 1.0), n_drops=n_drops, seed=seed,
                            assume_rates=assume_rates, quiet=True)
    tol = ref["tolerance"]
    checks = []
    for case in ref["cases"]:
        row = table.row("M_rf", case["M_rf"])
        v = row["total"] if case["load"] == 1.0 else row["total_30"]
        if case["load"] not in (1.0, 0.3):
            raise ValueError("totals cases must be at 100% or 30% load")
        checks.append(Check("totals", "total", f"M_rf={case['M_rf']},x={case['load']:g}", v,
                            case["total"], tol, _within(v, case["total"], tol)))
    return FigureResult("totals", table, checks)


def reproduce(figure: str, base: ScenarioConfig | None = None, out_dir: str | Path | None = None,
              n_drops: int | None = None, seed: int = 42, assume_rates=None) -> FigureResult:
    """Run one figure's sweep, compare with its targets and optionally write files.

    Written files: ``<figure>.csv``, ``<figure>.plot.json`` and
    ``<figure>.summary.json`` under ``out_dir``.
    """
    base = base or preset("paper-fig2")
    if figure == "fig2a":
        result = run_fig2a(base, n_drops or POWER_PREPASS_DROPS, seed, assume_rates)
    elif figure == "fig2b":
        result = run_fig2b(base)
    elif figure == "fig2c":
        result = run_fig2c(base, n_drops or 200, seed)
    elif figure == "totals":
        result = run_totals(base, n_drops or POWER_PREPASS_DROPS, seed, assume_rates)
    else:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    if out_dir is not None:
        out = Path(out_dir)
        export(result.table, out / f"{figure}.csv")
        (out / f"{figure}.summary.json").write_text(json.dumps(result.summary(), indent=2))
    return result


def format_checks(checks: list[Check]) -> str:
    """Human-readable comparison table."""
    seen = set()
    lines = [f"{'quantity':<34} {'point':<18} {'value':>12} {'target':>10} {'rel.err':>8} {'tol':>6}  verdict"]
    for c in checks:
        target = "" if c.target is None else f"{c.target:10.4g}"
        rel = "" if math.isnan(c.rel_err) else f"{c.rel_err:+8.1%}"
        tol = "" if c.tolerance is None else f"{c.tolerance:6.0%}" if c.tolerance >= 0.01 else f"{c.tolerance:6.0e}"
        verdict = ("PASS" if c.passed else "FAIL") if c.gating else "info"
        line = f"{c.quantity:<34} {c.key:<18} {c.value:12.6g} {target:>10} {rel:>8} {tol:>6}  {verdict}"
        if c.note and (c.quantity, c.note) not in seen:
            seen.add((c.quantity, c.note))
            line += f"  ({c.note})"
        lines.append(line)
    return "\n".join(lines)
