"""Adam optimizer over the model's flat parameter list."""

from dataclasses import dataclass, field

import numpy as np


class NonFiniteGradientError(FloatingPointError):
    """A gradient entry was NaN or infinite; carries its location."""

    def __init__(self, param_index, flat_index):
        self.param_index = param_index
        self.flat_index = flat_index
        super().__init__(
            f"non-finite gradient in parameter {param_index} at flat index {flat_index}"
        )


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters.

    Defaults are the optimizer's standard values: lr=1e-3, beta1=0.9,
    beta2=0.999, eps_hat=1e-8.
    """

    m: list = field(repr=False)
    v: list = field(repr=False)
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8

    @classmethod
    def init(cls, params, lr=1e-3, beta1=0.9, beta2=0.999, eps_hat=1e-8):
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            t=0,
            lr=lr,
            beta1=beta1,
            beta2=beta2,
            eps_hat=eps_hat,
        )


def adam_step(state, params, grads):
    """One update with bias correction; mutates params and state in place.

    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps_hat)

    Returns (params, state) for convenience.  Raises
    NonFiniteGradientError before touching anything if any gradient
    entry is not finite.
    """
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("params/grads do not match the optimizer state")
    for idx, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            flat = int(np.flatnonzero(~np.isfinite(np.ravel(g)))[0])
            raise NonFiniteGradientError(idx, flat)
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**state.t
    corr2 = 1.0 - b2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.lr * (m / corr1) / (np.sqrt(v / corr2) + state.eps_hat)
    return params, state
