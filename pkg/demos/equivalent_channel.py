##########################################################################
# demo: baud-sampled matched filter equals a one-tap discrete channel
#
# Push QPSK frames through the continuous-time simulation (phase noise plus
# AWGN, then integrate-and-dump per slot) and compare the per-slot outputs
# with direct draws from the discrete model mu*A + W', where W' carries the
# thermal noise plus the self-noise term (1 - |mu|^2) |A|^2 Delta/T left by
# the finite grid. Clouds and second moments should agree.
##########################################################################

import matplotlib
matplotlib.use("Agg")

import numpy as np
import matplotlib.pyplot as plt

from phaselab import (
    ChannelConfig,
    SymbolFrame,
    WrappedGaussian,
    apply_channel_matrix,
    equivalent_channel,
    load_constellation,
    make_grid,
    matched_filter_matrix,
    modulate,
)

## settings

sigma2 = 0.5
N0 = 0.2
Es = 1.0
trials = 4000
grid = make_grid(2.0, 256, 1.0)

qpsk = load_constellation("qpsk")
frame = SymbolFrame(qpsk.points * np.sqrt(Es))
cfg = ChannelConfig(grid, WrappedGaussian(sigma2), N0=N0, Es=Es, seed=7)

## run both paths on the same repeated frame

base = modulate(frame, grid).samples
X = np.tile(base, (trials, 1))
Y = apply_channel_matrix(X, cfg, cfg.stream(1))
pipeline = matched_filter_matrix(Y, grid)

oracle = equivalent_channel(np.tile(frame.symbols, (trials, 1)), cfg.mu, cfg.N0, cfg.stream(2))

## compare second moments per slot

residual = (1.0 - abs(cfg.mu) ** 2) * np.abs(frame.symbols) ** 2 * grid.delta / grid.T
print(f"mu = {cfg.mu.real:.6f}, N0 = {N0}, grid residual var per slot: {residual[0]:.5f}")
print("slot  pipeline mean        oracle mean         pipeline var  oracle var+resid")
for j, slot in enumerate(frame.slots):
    pm, om = pipeline[:, j].mean(), oracle[:, j].mean()
    pv = pipeline[:, j].var()
    ov = oracle[:, j].var() + residual[j]
    print(f"{slot:4d}  {pm.real:+.4f}{pm.imag:+.4f}j  {om.real:+.4f}{om.imag:+.4f}j  "
          f"{pv:.5f}       {ov:.5f}")

## scatter the two clouds for one slot

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.6), sharex=True, sharey=True)
for ax, Z, title in ((ax1, pipeline, "continuous pipeline output"),
                     (ax2, oracle, "discrete one-tap draw")):
    ax.plot(Z[:, 0].real, Z[:, 0].imag, ".", ms=2, alpha=0.3)
    a = frame.symbols[0]
    ax.plot(a.real, a.imag, "r+", ms=12, mew=2, label="sent symbol")
    mu_a = cfg.mu * a
    ax.plot(mu_a.real, mu_a.imag, "kx", ms=10, mew=2, label=r"$\mu A$")
    ax.set_title(title)
    ax.set_xlabel("real")
    ax.set_aspect("equal")
    ax.legend(fontsize=8)
ax1.set_ylabel("imag")

fig.suptitle(rf"QPSK slot 0, $\sigma^2={sigma2}$, $N_0={N0}$: matched filter vs equivalent channel")
fig.tight_layout()
fig.savefig("equivalent_channel.png", dpi=120)
print("wrote equivalent_channel.png")
