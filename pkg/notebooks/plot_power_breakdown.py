"""
Where the watts go
==================

Break the base-station consumption of a 1024-antenna array into digital,
analog and PA parts, and see how the split moves with the number of RF
chains and with the resource load.

Rates only enter through the channel coder, so fixed rates are assumed here
to keep the script instant.
"""

# %%
# One scenario
# ------------
# The preset holds the default system: 10 GHz carrier, 400 MHz bandwidth,
# 8 users and a 32x32 array. 16 RF chains means subarrays of 64 phase shifters.

from fr3sim import p_total, preset

base = preset("paper-fig2")
hybrid = base.replace(M_rf=16, mode="hybrid")
rates = (13.44e9, 2.35e9)  # bit/s, DL and UL

b = p_total(hybrid, rates)
print(f"total {b.total:.1f} W, of which load-independent {b.load_independent:.1f} W")
for part in ("digital", "analog", "pa"):
    print(f"  {part:<8} {getattr(b, part):8.1f} W")

# %%
# Every component is tracked separately; ``contributions`` lists them with
# their share of the total.

top = sorted(b.contributions.items(), key=lambda kv: -kv[1])[:5]
for name, watts in top:
    print(f"{name:<28} {watts:8.2f} W")

# %%
# RF chains
# ---------
# More chains cost more converters and more digital processing per sample, while
# the phase-shifter count per chain shrinks. The last point is fully digital.

from fr3sim.sweep import sweep_rf_chains

table = sweep_rf_chains(base, assume_rates=rates)
print(f"{'M_rf':>5} {'digital':>9} {'analog':>9} {'PA':>9} {'total':>9}")
for row in table.rows:
    digital = row["digital_load_independent"] + row["digital_load_dependent"]
    analog = row["analog_load_independent"] + row["analog_load_dependent"]
    pa = row["pa_load_independent"] + row["pa_load_dependent"]
    print(f"{row['M_rf']:5d} {digital:9.1f} {analog:9.1f} {pa:9.1f} {row['total']:9.1f}")

# %%
# Load
# ----
# At zero load the station still draws its load-independent floor, set by
# sleep states during micro-sleep and idle phases.

from fr3sim.sweep import sweep_loads

loads = [(x, x) for x in (0.0, 0.1, 0.3, 0.5, 1.0)]
for row in sweep_loads(hybrid, loads, assume_rates=rates).rows:
    print(f"x = {row['x_dl']:.1f}: {row['total']:7.1f} W")
