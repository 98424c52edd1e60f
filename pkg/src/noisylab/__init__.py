"""Training classifiers under label noise with (smoothed) transition matrices."""
from .estimation import (AdaptationLayer, AlSchedule, al_init_identity, al_train_step,
                         diagonal_trace, estimate_perfect_samples)
from .losses import (LossSpec, alpha_posterior, clean_posterior, forward_loss, loss_and_target,
                     smoothed_posterior, verify_gradient_identity)
from .model import (GradientSet, MlpModel, OptimizerState, backward, forward, init_mlp,
                    load_checkpoint, lr_at_epoch, save_checkpoint, sgd_step)
from .noise import (NoiseSpec, build_asymmetric, build_uniform, corrupt_labels,
                    empirical_transition)
from .numerics import log_sum_exp, make_rng, softmax
from .smoothing import (SmoothingConfig, compute_alpha, effective_uniform_rate, smooth,
                        smooth_linear, smooth_power, smooth_temperature)

__all__ = [
    "AdaptationLayer",
    "AlSchedule",
    "GradientSet",
    "LossSpec",
    "MlpModel",
    "NoiseSpec",
    "OptimizerState",
    "SmoothingConfig",
    "al_init_identity",
    "al_train_step",
    "alpha_posterior",
    "backward",
    "build_asymmetric",
    "build_uniform",
    "clean_posterior",
    "compute_alpha",
    "corrupt_labels",
    "diagonal_trace",
    "effective_uniform_rate",
    "empirical_transition",
    "estimate_perfect_samples",
    "forward",
    "forward_loss",
    "init_mlp",
    "load_checkpoint",
    "log_sum_exp",
    "loss_and_target",
    "lr_at_epoch",
    "make_rng",
    "save_checkpoint",
    "sgd_step",
    "smooth",
    "smooth_linear",
    "smooth_power",
    "smooth_temperature",
    "smoothed_posterior",
    "softmax",
    "verify_gradient_identity",
]

__version__ = "0.1.0"
