# %% [markdown]
# # Injecting label noise
#
# Corrupt 100k labels with uniform noise and read the matrix back from the
# confusion counts.

# %%
import numpy as np

from noisylab import build_asymmetric, build_uniform, corrupt_labels, empirical_transition, make_rng

rng = make_rng(0)
clean = rng.integers(10, size=100_000)

# %%
for eta in (0.2, 0.4, 0.6, 0.8):
    T = build_uniform(10, eta)
    noisy = corrupt_labels(clean, T, rng)
    emp = empirical_transition(clean, noisy, 10)
    print(f"eta={eta}: flipped {np.mean(noisy != clean):.4f}, max |empirical - T| = {np.abs(emp - T).max():.4f}")

# %% Asymmetric (pair-flip) noise, default pattern i -> i+1
A = build_asymmetric(10, 0.3)
emp = empirical_transition(clean, corrupt_labels(clean, A, rng), 10)
print("row 0 of the empirical matrix:", np.round(emp[0], 3))
