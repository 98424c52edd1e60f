# %% [markdown]
# # Forward loss as label correction
#
# The gradient of the forward loss equals the cross-entropy gradient against
# the posterior of the clean label. Smoothing the matrix moves that posterior
# toward the classifier's own prediction.

# %%
import numpy as np

from noisylab import (SmoothingConfig, alpha_posterior, build_uniform, clean_posterior, forward_loss,
                      init_mlp, make_rng, smoothed_posterior, verify_gradient_identity)

np.set_printoptions(precision=4, suppress=True)
rng = make_rng(0)

# %% A worked example
p = np.array([0.5, 0.3, 0.2])
T = build_uniform(3, 0.4)
print("forward loss", forward_loss(p, 0, T), "= -log 0.40 =", -np.log(0.4))
print("clean-label posterior", clean_posterior(p, 0, T))

# %% The gradient identity on random networks
for c in (2, 3, 10):
    model = init_mlp([5, 16, c], rng)
    x = rng.standard_normal(5)
    print(f"c={c}: max relative gradient discrepancy",
          verify_gradient_identity(model, x, int(rng.integers(c)), build_uniform(c, 0.4)))

# %% Smoothed posteriors interpolate between the Bayes posterior and p
p = rng.dirichlet(np.ones(10))
T10 = build_uniform(10, 0.4)
for beta in (1.0, 0.5, 0.1, 1e-6):
    q = smoothed_posterior(p, 3, T10, SmoothingConfig("power", beta))
    print(f"beta={beta:g}: q[3]={q[3]:.4f}  alpha-form agrees: {np.allclose(q, alpha_posterior(p, 3, 0.4, beta))}")
print("prediction p[3] =", round(p[3], 4))
