"""Training budgets for the figure reproductions.

``desk`` budgets are the reduced configurations the acceptance suite runs;
``paper`` budgets use the published experiment sizes and are not gated;
``smoke`` is a seconds-scale plumbing check.
"""

from .loss import KdeConfig
from .trainer import TrainConfig

SCALES = ("desk", "paper", "smoke")


def fig1_train_config(scale, seed):
    """Wide-model run on the asymmetric two-peak Gaussian target."""
    if scale == "paper":
        dims = dict(input_dim=500, units=500, layer_count=10, total_inputs=5_000_000)
    elif scale == "desk":
        dims = dict(input_dim=32, units=64, layer_count=5, total_inputs=100_000)
    else:
        dims = dict(input_dim=8, units=8, layer_count=2, total_inputs=256)
    return TrainConfig(
        target_name="bimodal_gauss",
        batch_rows=32,
        seed=seed,
        grid_lo=-10.0,
        grid_hi=10.0,
        grid_points=401,
        kde=KdeConfig(),
        **dims,
    )


def fig2_train_config(scale, seed):
    """Width-one model on the double-sided exponential target."""
    if scale == "paper":
        dims = dict(units=500, layer_count=10, total_inputs=10_000_000)
    elif scale == "desk":
        dims = dict(units=64, layer_count=5, total_inputs=200_000)
    else:
        dims = dict(units=8, layer_count=2, total_inputs=256)
    return TrainConfig(
        input_dim=1,
        target_name="laplace",
        batch_rows=32,
        seed=seed,
        grid_lo=-10.0,
        grid_hi=10.0,
        grid_points=401,
        kde=KdeConfig(),
        **dims,
    )


def fig3_train_config(scale, seed):
    """Width-one model on the y^2 exponential target."""
    cfg = fig2_train_config(scale, seed)
    return TrainConfig(
        **{
            **cfg.__dict__,
            "target_name": "y2exp",
            "target_params": {"b": 1.0},
            "grid_lo": -12.0,
            "grid_hi": 12.0,
            "grid_points": 481,
        }
    )


def fig4_train_config(scale, seed):
    """Paired-output model on the 2D bimodal Gaussian target."""
    if scale == "paper":
        dims = dict(units=500, layer_count=10, total_inputs=6_250_000)
    elif scale == "desk":
        dims = dict(units=64, layer_count=6, total_inputs=100_000)
    else:
        dims = dict(units=8, layer_count=2, total_inputs=256)
    return TrainConfig(
        input_dim=32,
        target_name="bimodal_gauss_2d",
        batch_rows=32,
        seed=seed,
        grid_lo=-6.0,
        grid_hi=6.0,
        grid_points=41,
        kde=KdeConfig(),
        **dims,
    )


TRAIN_CONFIGS = {
    "fig1": fig1_train_config,
    "fig2": fig2_train_config,
    "fig3": fig3_train_config,
    "fig4": fig4_train_config,
}
