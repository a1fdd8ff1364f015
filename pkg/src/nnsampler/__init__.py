"""Neural sampler for explicitly known densities.

Trains a dense network to map uniform noise to samples of a normalized
target density by minimizing KDE-based divergences, and ships the four
classical samplers plus an evaluation harness for comparison.
"""

import os as _os

# NNSAMPLER_THREADS caps internal parallelism.  The compute here is many
# small operations, so the only pools in play are the BLAS ones; the caps
# must be exported before numpy first loads to take effect.
_threads = _os.environ.get("NNSAMPLER_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _threads)

from ._kernels import backend as kernel_backend
from .grids import EvalGrid, EvalGrid2d
from .loss import KdeConfig, LossBreakdown
from .targets import TargetDensity, make_target, tabulate
from .trainer import TrainConfig, load_checkpoint, sample_model, save_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "EvalGrid",
    "EvalGrid2d",
    "KdeConfig",
    "LossBreakdown",
    "TargetDensity",
    "TrainConfig",
    "kernel_backend",
    "load_checkpoint",
    "make_target",
    "sample_model",
    "save_checkpoint",
    "tabulate",
    "train",
    "__version__",
]
