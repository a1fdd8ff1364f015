"""Three-part training objective and its exact output gradients.

The scalar loss for an output batch is

    row term   mean over batch rows of divergence(KDE(row), target)
    col term   mean over columns of divergence(KDE(column), target)
    well term  linear penalty on outputs outside the grid window

where the divergence defaults to the symmetrized Kullback-Leibler integral
evaluated by the trapezoid rule on the grid.  Bandwidths are recomputed per
sample set but treated as constants in the gradients.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .grids import EvalGrid, EvalGrid2d

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))

#: Fallback bandwidth when a sample set has no spread.
H_MIN = 1e-3

JSD_MODES = ("symmetric", "mixture")
COMPARE_MODES = ("jsd", "mse")


@dataclass(frozen=True)
class KdeConfig:
    """KDE and divergence settings shared by training and evaluation.

    bandwidth None means the Silverman rule per sample set; a float fixes h.
    eps is the density floor applied inside logarithms.
    """

    bandwidth: float | None = None
    eps: float = 1e-12
    jsd_mode: str = "symmetric"
    compare: str = "jsd"

    def __post_init__(self):
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"fixed bandwidth must be > 0, got {self.bandwidth}")
        if not 0 < self.eps <= 1e-3:
            raise ValueError(f"eps must lie in (0, 1e-3], got {self.eps}")
        if self.jsd_mode not in JSD_MODES:
            raise ValueError(f"jsd_mode must be one of {JSD_MODES}")
        if self.compare not in COMPARE_MODES:
            raise ValueError(f"compare must be one of {COMPARE_MODES}")


@dataclass(frozen=True)
class LossBreakdown:
    """The three loss parts and their sum (total is derived, not stored)."""

    row_term: float
    col_term: float
    well_term: float

    @property
    def total(self):
        return self.row_term + self.col_term + self.well_term


def silverman_bandwidth(samples):
    """Rule-of-thumb bandwidth 0.9 * min(std, IQR/1.34) * m^(-1/5).

    std uses the unbiased estimator.  Degenerate inputs (no spread) fall
    back to H_MIN with a warning.
    """
    samples = np.asarray(samples, dtype=float)
    m = samples.shape[0]
    if m < 2:
        raise ValueError("silverman bandwidth needs at least 2 samples")
    sd = samples.std(ddof=1)
    q75, q25 = np.percentile(samples, [75, 25])
    a = min(sd, (q75 - q25) / 1.34)
    if not a > 0:
        warnings.warn(
            "degenerate sample spread, falling back to minimum bandwidth",
            RuntimeWarning,
            stacklevel=2,
        )
        return H_MIN
    return 0.9 * a * m ** (-0.2)


def _bandwidth_for(samples, cfg):
    if cfg.bandwidth is not None:
        return cfg.bandwidth
    return silverman_bandwidth(samples)


def gaussian_kde(samples, h, grid):
    """Gaussian kernel density estimate of 1D samples on the grid."""
    samples = np.ascontiguousarray(samples, dtype=float)
    if samples.ndim != 1 or samples.shape[0] == 0:
        raise ValueError("samples must be a nonempty 1D array")
    if not h > 0:
        raise ValueError(f"bandwidth must be > 0, got {h}")
    return kernels.kde_values(samples, float(h), grid.points)


def kde_grad_samples(samples, h, grid, upstream):
    """Gradient of upstream . kde(samples) with respect to the samples."""
    samples = np.ascontiguousarray(samples, dtype=float)
    if samples.ndim != 1 or samples.shape[0] == 0:
        raise ValueError("samples must be a nonempty 1D array")
    if not h > 0:
        raise ValueError(f"bandwidth must be > 0, got {h}")
    upstream = np.ascontiguousarray(upstream, dtype=float)
    if upstream.shape != grid.points.shape:
        raise ValueError("upstream must have one entry per grid point")
    return kernels.kde_sample_grad(samples, float(h), grid.points, upstream)


def _clamped(p, q, eps):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch {p.shape} vs {q.shape}")
    return np.maximum(p, eps), np.maximum(q, eps)


def _weighted_jsd(p, q, w, eps):
    pc, qc = _clamped(p, q, eps)
    integrand = 0.5 * (pc * np.log(pc / qc) + qc * np.log(qc / pc))
    return float(np.sum(w * integrand))


def _weighted_jsd_grad_p(p, q, w, eps):
    pc, qc = _clamped(p, q, eps)
    grad = 0.5 * w * (np.log(pc / qc) + 1.0 - qc / pc)
    # The floor max(p, eps) is flat below eps, so clamped entries get zero.
    grad[np.asarray(p) < eps] = 0.0
    return grad


def _weighted_jsd_mixture(p, q, w, eps):
    pc, qc = _clamped(p, q, eps)
    mc = 0.5 * (pc + qc)
    integrand = 0.5 * (pc * np.log(pc / mc) + qc * np.log(qc / mc))
    return float(np.sum(w * integrand))


def _weighted_jsd_mixture_grad_p(p, q, w, eps):
    pc, qc = _clamped(p, q, eps)
    mc = 0.5 * (pc + qc)
    grad = 0.5 * w * np.log(pc / mc)
    grad[np.asarray(p) < eps] = 0.0
    return grad


def _weighted_mse(p, q, w):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.sum(w * (p - q) ** 2))


def _weighted_mse_grad_p(p, q, w):
    return 2.0 * w * (np.asarray(p, dtype=float) - np.asarray(q, dtype=float))


def _compare_with_grad(p, q, w, cfg):
    if cfg.compare == "mse":
        return _weighted_mse(p, q, w), _weighted_mse_grad_p(p, q, w)
    if cfg.jsd_mode == "mixture":
        return (
            _weighted_jsd_mixture(p, q, w, cfg.eps),
            _weighted_jsd_mixture_grad_p(p, q, w, cfg.eps),
        )
    return _weighted_jsd(p, q, w, cfg.eps), _weighted_jsd_grad_p(p, q, w, cfg.eps)


def jsd(p, q, grid, eps):
    """Symmetrized KL divergence 0.5*int[p log(p/q) + q log(q/p)] on the grid.

    Both densities are floored at eps before the logarithms; the result is
    nonnegative and symmetric in (p, q).
    """
    return _weighted_jsd(p, q, grid.trapezoid_weights, eps)


def jsd_grad_p(p, q, grid, eps):
    """Gradient of :func:`jsd` with respect to the entries of p.

    Entries where p fell below the floor carry zero gradient.
    """
    return _weighted_jsd_grad_p(p, q, grid.trapezoid_weights, eps)


def jsd_mixture(p, q, grid, eps):
    """Mixture-based Jensen-Shannon divergence on the grid (<= log 2)."""
    return _weighted_jsd_mixture(p, q, grid.trapezoid_weights, eps)


def potential_well(samples, lo, hi, slope):
    """Linear penalty outside [lo, hi]; returns (value, gradient).

    Zero inside the window, slope * distance outside; the gradient is
    -slope / 0 / +slope with zero at the kinks.
    """
    if not lo < hi:
        raise ValueError(f"well needs lo < hi, got [{lo}, {hi}]")
    if not slope > 0:
        raise ValueError(f"well slope must be > 0, got {slope}")
    y = np.asarray(samples, dtype=float)
    value = slope * float(np.sum(np.maximum(0.0, lo - y) + np.maximum(0.0, y - hi)))
    grad = slope * ((y > hi).astype(float) - (y < lo).astype(float))
    return value, grad


def total_loss(outputs, target_tab, grid, cfg, slope):
    """Row KDE term + column KDE term + potential well over an output batch.

    Parameters
    ----------
    outputs : (m, n) array
        Network outputs; rows are output vectors, columns are positions.
    target_tab : (G,) array
        Target density tabulated on `grid`.
    grid : EvalGrid
    cfg : KdeConfig
    slope : float
        Well slope; the well window is the grid's [lo, hi].

    Returns (LossBreakdown, dL/dOutputs).  A single-column batch trains the
    column term alone; a single-row batch skips the column term with a
    warning (one point per column is a degenerate KDE).  Silverman
    bandwidths are recomputed per row/column but held constant in the
    gradient.
    """
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim != 2:
        raise ValueError(f"outputs must be 2D (rows x positions), got {outputs.ndim}D")
    m, n = outputs.shape
    if target_tab.shape != grid.points.shape:
        raise ValueError("target tabulation does not match the grid")
    w = grid.trapezoid_weights
    grad = np.zeros_like(outputs)

    row_term = 0.0
    if n >= 2:
        acc = 0.0
        for r in range(m):
            row = np.ascontiguousarray(outputs[r])
            h = _bandwidth_for(row, cfg)
            p = kernels.kde_values(row, h, grid.points)
            value, dp = _compare_with_grad(p, target_tab, w, cfg)
            acc += value
            grad[r] += kernels.kde_sample_grad(row, h, grid.points, dp / m)
        row_term = acc / m

    col_term = 0.0
    if m >= 2:
        acc = 0.0
        for i in range(n):
            col = np.ascontiguousarray(outputs[:, i])
            h = _bandwidth_for(col, cfg)
            p = kernels.kde_values(col, h, grid.points)
            value, dp = _compare_with_grad(p, target_tab, w, cfg)
            acc += value
            grad[:, i] += kernels.kde_sample_grad(col, h, grid.points, dp / n)
        col_term = acc / n
    else:
        warnings.warn(
            "single-row batch: column KDE term skipped",
            RuntimeWarning,
            stacklevel=2,
        )

    well_value, well_grad = potential_well(outputs, grid.lo, grid.hi, slope)
    grad += well_grad

    return LossBreakdown(row_term, col_term, well_value), grad


def gaussian_kde_2d(points, h1, h2, grid):
    """Product-Gaussian KDE of (y1, y2) points on a 2D lattice."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty (k, 2) array")
    if not (h1 > 0 and h2 > 0):
        raise ValueError(f"bandwidths must be > 0, got ({h1}, {h2})")
    k = points.shape[0]
    g1 = grid.axis1.points
    g2 = grid.axis2.points
    a = np.exp(-0.5 * ((g1[None, :] - points[:, 0:1]) / h1) ** 2)
    b = np.exp(-0.5 * ((g2[None, :] - points[:, 1:2]) / h2) ** 2)
    return (a.T @ b) / (k * 2.0 * np.pi * h1 * h2)


def _kde_2d_grad_points(points, h1, h2, grid, upstream):
    """Gradient of sum(upstream * kde_2d(points)) w.r.t. the points."""
    k = points.shape[0]
    g1 = grid.axis1.points
    g2 = grid.axis2.points
    d1 = g1[None, :] - points[:, 0:1]
    d2 = g2[None, :] - points[:, 1:2]
    a = np.exp(-0.5 * (d1 / h1) ** 2)
    b = np.exp(-0.5 * (d2 / h2) ** 2)
    norm = 1.0 / (k * 2.0 * np.pi * h1 * h2)
    # f1[j, :] collects the upstream mass seen by point j along axis 2.
    f1 = b @ upstream.T
    f2 = a @ upstream
    grad = np.empty_like(points)
    grad[:, 0] = np.sum(a * (d1 / h1**2) * f1, axis=1) * norm
    grad[:, 1] = np.sum(b * (d2 / h2**2) * f2, axis=1) * norm
    return grad


def _bandwidths_2d(points, cfg):
    if cfg.bandwidth is not None:
        return cfg.bandwidth, cfg.bandwidth
    return silverman_bandwidth(points[:, 0]), silverman_bandwidth(points[:, 1])


def jsd_2d(p, q, grid, eps):
    """Symmetrized KL divergence between 2D tabulations (double trapezoid)."""
    return _weighted_jsd(p, q, grid.trapezoid_weights, eps)


def total_loss_2d(outputs, target_tab, grid, cfg, slope):
    """Two-dimensional analogue of :func:`total_loss`.

    Each batch row holds consecutive (y1, y2) pairs; the row term compares
    the 2D KDE of a row's points to the target, the column term does the
    same for each pair position across the batch.
    """
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim != 2 or outputs.shape[1] % 2:
        raise ValueError("outputs must be (m, 2k) with consecutive pairs")
    m, width = outputs.shape
    n_points = width // 2
    if target_tab.shape != grid.shape:
        raise ValueError("target tabulation does not match the grid")
    w = grid.trapezoid_weights
    grad = np.zeros_like(outputs)

    row_term = 0.0
    if n_points >= 2:
        acc = 0.0
        for r in range(m):
            pts = outputs[r].reshape(n_points, 2)
            h1, h2 = _bandwidths_2d(pts, cfg)
            p = gaussian_kde_2d(pts, h1, h2, grid)
            value, dp = _compare_with_grad(p, target_tab, w, cfg)
            acc += value
            gpts = _kde_2d_grad_points(pts, h1, h2, grid, dp / m)
            grad[r] += gpts.reshape(-1)
        row_term = acc / m

    col_term = 0.0
    if m >= 2:
        acc = 0.0
        for i in range(n_points):
            pts = outputs[:, 2 * i : 2 * i + 2]
            h1, h2 = _bandwidths_2d(pts, cfg)
            p = gaussian_kde_2d(pts, h1, h2, grid)
            value, dp = _compare_with_grad(p, target_tab, w, cfg)
            acc += value
            grad[:, 2 * i : 2 * i + 2] += _kde_2d_grad_points(
                pts, h1, h2, grid, dp / n_points
            )
        col_term = acc / n_points
    else:
        warnings.warn(
            "single-row batch: column KDE term skipped",
            RuntimeWarning,
            stacklevel=2,
        )

    lo1, hi1 = grid.axis1.lo, grid.axis1.hi
    lo2, hi2 = grid.axis2.lo, grid.axis2.hi
    v1, g1 = potential_well(outputs[:, 0::2], lo1, hi1, slope)
    v2, g2 = potential_well(outputs[:, 1::2], lo2, hi2, slope)
    grad[:, 0::2] += g1
    grad[:, 1::2] += g2

    return LossBreakdown(row_term, col_term, v1 + v2), grad
