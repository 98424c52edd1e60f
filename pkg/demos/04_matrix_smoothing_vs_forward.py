# %% [markdown]
# # Does smoothing help a classifier trained through the true matrix?
#
# Ten Gaussian blobs with 40% uniform label noise, a 128-128 MLP, 60 epochs.
# CE memorises the noise, the forward loss resists it partly, and the
# smoothed matrix (beta = 0.5) holds up best by the last epoch.
# One seed here; the acceptance test uses five. Takes about half a minute.

# %%
from noisylab.config import ExperimentConfig
from noisylab.harness import run_single

base = dict(eta=0.4, epochs=60, milestones=(30, 50), lr=0.05)
runs = {
    "CE": ExperimentConfig(method="ce", **base),
    "FD": ExperimentConfig(method="fd", **base),
    "FD+LS": ExperimentConfig(method="fd", label_smoothing=0.1, **base),
    "FD+MS": ExperimentConfig(method="fd", smoothing="power", smoothing_param=0.5, **base),
}

# %%
for name, cfg in runs.items():
    rec = run_single(cfg, seed=0)
    curve = " ".join(f"{a:5.1f}" for a in rec.accuracy[::10])
    print(f"{name:6s} best {rec.best_accuracy:5.2f}  last {rec.last_accuracy:5.2f}   every 10 epochs: {curve}")
