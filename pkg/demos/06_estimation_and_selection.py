# %% [markdown]
# # Estimating T from a trained model, and choosing beta
#
# Perfect-sample estimation reads each row of T off the classifier output at
# a very confident sample. Beta is then chosen on a held-out split scored
# against its *noisy* labels, since clean labels are unavailable in practice.

# %%
import numpy as np

from noisylab.config import ExperimentConfig
from noisylab.harness import estimate_from_warm_model, prepare_data, select_hyperparameter
from noisylab.numerics import spawn_rngs

np.set_printoptions(precision=3, suppress=True)

# %% Estimation: argmax exemplars vs the 97th percentile
for pct in (100.0, 97.0):
    cfg = ExperimentConfig(eta=0.4, epochs=20, milestones=(10, 17), estimator_percentile=pct)
    noise_rng, _, _, rng = spawn_rngs(0, 4)
    data = prepare_data(cfg, noise_rng)
    T_hat = estimate_from_warm_model(cfg, [cfg.dim, *cfg.hidden, cfg.classes], data.train, rng)
    print(f"percentile {pct:g}: mean diagonal {np.diag(T_hat).mean():.3f} (true 0.6)")

# %% Beta selection on a small problem (a few seconds)
cfg = ExperimentConfig(method="fd", eta=0.4, n_per_class=300, epochs=20, milestones=(10, 17))
best, scores = select_hyperparameter(cfg, [0.1, 0.3, 0.5, 0.8, 1.0])
for beta, acc in scores.items():
    print(f"beta={beta}: noisy-validation accuracy {acc:.2f}")
print("selected", best)
