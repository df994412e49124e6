"""
Energy efficiency versus RF chains
==================================

Combine Monte Carlo rates with the power model and look for the RF-chain
count that moves the most bits per joule. All configurations see the same
channel drops, so differences between them are not sampling noise.

The full study uses 200 drops on 64 subcarriers (about a minute and a half);
20 drops give the same picture with wider error bars.
"""

# %%
# Rates and power on common drops
# -------------------------------

from fr3sim import preset
from fr3sim.sweep import sweep_rf_chains

base = preset("paper-fig2")
table = sweep_rf_chains(base, n_drops=20, seed=42, quiet=True)

print(f"{'M_rf':>5} {'mode':>14} {'R_dl Gb/s':>10} {'R_ul Gb/s':>10} {'P W':>8} {'EE Mb/J':>8} {'EE@30%':>7}")
for r in table.rows:
    print(f"{r['M_rf']:5d} {r['mode']:>14} {r['R_dl'] / 1e9:10.2f} {r['R_ul'] / 1e9:10.2f} "
          f"{r['total']:8.1f} {r['ee'] / 1e6:8.2f} {r['ee_30'] / 1e6:7.2f}")

# %%
# The DL rate keeps rising with more chains but flattens, while power grows
# roughly linearly. EE therefore peaks at an intermediate hybrid size.

ee = table.column("ee")
best = max(table.rows, key=lambda r: r["ee"])
print(f"best M_rf = {best['M_rf']}, {best['ee'] / ee[-1]:.2f}x the fully digital EE")

# %%
# Export
# ------
# Tables serialize to CSV and JSON with a stacked-bar description for any
# plotting tool.

import tempfile
from pathlib import Path

from fr3sim.sweep import export

out = Path(tempfile.mkdtemp()) / "ee.csv"
export(table, out)
print(sorted(p.name for p in out.parent.iterdir()))
