# %% [markdown]
# # Smoothing a transition matrix
#
# Three ways to flatten a transition matrix, and why the power method is the
# safe default when the matrix has zeros.

# %%
import numpy as np

from noisylab import (build_asymmetric, build_uniform, compute_alpha, effective_uniform_rate,
                      smooth_linear, smooth_power, smooth_temperature)

np.set_printoptions(precision=4, suppress=True)

# %% Uniform noise: every method gives another uniform-noise matrix
T = build_uniform(3, 0.4)
print("T\n", T)
print("power beta=0.5\n", smooth_power(T, 0.5))
print("effective noise rate after smoothing:", effective_uniform_rate(smooth_power(T, 0.5)))
print("temperature gamma=2 (same as power 0.5)\n", smooth_temperature(T, 2.0))

# %% Asymmetric noise has structural zeros
A = build_asymmetric(3, 0.3)
print("A\n", A)
print("power keeps the zeros\n", smooth_power(A, 0.5))
print("linear fills them in\n", smooth_linear(A, 0.8))
try:
    smooth_temperature(A, 1.1)
except ValueError as exc:
    print("temperature:", exc)

# %% How much of the original posterior survives: alpha as a function of beta
for beta in (0.0, 0.1, 0.3, 0.5, 0.8, 1.0):
    print(f"beta={beta:.1f}  alpha(c=10, eta=0.4) = {compute_alpha(10, 0.4, beta):.4f}")
