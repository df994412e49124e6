"""
Hybrid beams on a clustered channel
===================================

Draw one wideband channel, pick the analog beams of a partially connected
array and check what zero-forcing leaves of the inter-user interference.
"""

# %%
# A channel drop
# --------------
# ``realize`` places 8 users in the cell, draws clustered multipath for a
# 32x32 array and applies pathloss. Subcarriers are spread across the band.

import numpy as np

from fr3sim.channel import ChannelParams, realize, subcarrier_offsets

freqs = subcarrier_offsets(3000, 120e3, 16)
drop = realize(8, 32, 32, freqs, 10e9, ChannelParams(), seed=7)
print(drop.H.shape)  # (subcarriers, users, antennas)

# %%
# User gains span orders of magnitude because of distance and blockage.

gain_db = 10 * np.log10(np.mean(np.abs(drop.H) ** 2, axis=(0, 2)))
print(np.round(gain_db, 1))

# %%
# Analog selection
# ----------------
# With 64 RF chains each subarray is 4x4. Each one keeps the DFT beam that
# collects the most energy from all users over all subcarriers. The metric
# sums raw powers, so a user 30 dB above the rest can steer every subarray
# to the same beam.

from fr3sim.beamforming import build

bf = build(drop.H, 32, 32, 64)
print(f"subarray {bf.sub_rows}x{bf.sub_cols}, beams used: {np.unique(bf.beam_indices).size} distinct")

# %%
# ZF on the effective channel nulls cross-talk to round-off.

G = bf.effective(drop.H) @ bf.W_dig
signal = np.abs(np.diagonal(G, axis1=1, axis2=2)) ** 2
cross = np.abs(G * (1 - np.eye(8))) ** 2
print(f"worst cross/signal ratio {cross.max() / signal.min():.1e}")

# %%
# The UL combiner is the conjugate transpose of the DL precoder, so the
# same matrices serve both directions.

print(np.allclose(bf.combiner(), np.conj(np.swapaxes(bf.precoder(), 1, 2))))
