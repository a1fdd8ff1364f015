"""Pure numpy reference implementation of the hot KDE kernels.

Used when the compiled extension is unavailable or when
NNSAMPLER_PURE_PYTHON is set.  Must stay numerically equivalent to
``_core`` (same formulas; results agree to float64 rounding).
"""

import numpy as np

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))

# Kernel terms whose exponent falls below -700 are flushed to zero, exactly
# as in the compiled backend; exp(-700) ~ 1e-304 is already negligible and
# anything smaller would hit slow denormal arithmetic.
_EXP_CUTOFF = 700.0


def _kernel_terms(samples, h, grid_points):
    d = grid_points[None, :] - samples[:, None]
    t = (0.5 / (h * h)) * d * d
    keep = t < _EXP_CUTOFF
    e = np.exp(-np.minimum(t, _EXP_CUTOFF))
    e[~keep] = 0.0
    return d, e


def kde_values(samples, h, grid_points):
    """Gaussian KDE of `samples` with bandwidth h at each grid point.

    p(g) = (1 / (m h sqrt(2 pi))) * sum_j exp(-(g - y_j)^2 / (2 h^2))
    """
    m = samples.shape[0]
    _, e = _kernel_terms(samples, h, grid_points)
    return e.sum(axis=0) / (m * h * _SQRT_2PI)


def kde_sample_grad(samples, h, grid_points, upstream):
    """Gradient of sum_g upstream(g) * p(g) with respect to each sample.

    d/dy_j = sum_g upstream(g) * (g - y_j) / (m h^3 sqrt(2 pi))
             * exp(-(g - y_j)^2 / (2 h^2))
    """
    m = samples.shape[0]
    d, e = _kernel_terms(samples, h, grid_points)
    return ((e * d) @ upstream) / (m * h**3 * _SQRT_2PI)
