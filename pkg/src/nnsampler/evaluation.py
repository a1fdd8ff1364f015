"""Measurement apparatus: histograms, averaged KDEs, 2D KDE, divergence to
the target, dependence diagnostics, and the KS goodness-of-fit statistic."""

from dataclasses import dataclass

import numpy as np

from .loss import (
    _compare_with_grad,
    gaussian_kde,
    gaussian_kde_2d,
    silverman_bandwidth,
)


@dataclass(frozen=True)
class Histogram:
    """Density-normalized histogram with uniform bins.

    Out-of-range samples are tallied in `overflow` and excluded from the
    normalization, so heights integrate to one whenever any sample landed
    inside.
    """

    edges: np.ndarray
    counts: np.ndarray
    heights: np.ndarray
    overflow: int

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def histogram(samples, lo, hi, bins):
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("histogram needs at least one sample")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if not lo < hi:
        raise ValueError(f"histogram needs lo < hi, got [{lo}, {hi}]")
    counts, edges = np.histogram(samples, bins=bins, range=(float(lo), float(hi)))
    inside = int(counts.sum())
    width = (hi - lo) / bins
    if inside > 0:
        heights = counts / (inside * width)
    else:
        heights = np.zeros(bins)
    return Histogram(edges, counts, heights, samples.size - inside)


def mean_kde(vectors, grid, bandwidth=None):
    """Arithmetic mean of the per-vector KDEs on the grid.

    bandwidth None applies the Silverman rule to each vector separately.
    """
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if not vectors:
        raise ValueError("mean_kde needs at least one vector")
    acc = np.zeros_like(np.asarray(grid.points))
    for v in vectors:
        h = bandwidth if bandwidth is not None else silverman_bandwidth(v)
        acc += gaussian_kde(v, h, grid)
    return acc / len(vectors)


def kde_2d(points, h, grid):
    """Product-Gaussian KDE of (y1, y2) points on a 2D lattice.

    h may be a scalar or an (h1, h2) pair; None applies the Silverman rule
    per axis.
    """
    points = np.asarray(points, dtype=float)
    if h is None:
        h1 = silverman_bandwidth(points[:, 0])
        h2 = silverman_bandwidth(points[:, 1])
    elif np.isscalar(h):
        h1 = h2 = float(h)
    else:
        h1, h2 = (float(v) for v in h)
    return gaussian_kde_2d(points, h1, h2, grid)


def dependence_scatter(outputs, i, j):
    """Column pair (y_i, y_j) across the batch plus their Pearson r."""
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim != 2:
        raise ValueError("outputs must be a 2D batch")
    m, n = outputs.shape
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"need two distinct column indices in [0, {n}), got ({i}, {j})")
    if m < 3:
        raise ValueError("correlation needs at least 3 rows")
    pairs = outputs[:, [i, j]]
    r = float(np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1])
    return pairs, r


def divergence_to_target(samples, target_tab, grid, cfg):
    """Divergence between the KDE of the samples and the tabulated target."""
    samples = np.asarray(samples, dtype=float)
    h = cfg.bandwidth if cfg.bandwidth is not None else silverman_bandwidth(samples)
    p = gaussian_kde(samples, h, grid)
    value, _ = _compare_with_grad(p, target_tab, grid.trapezoid_weights, cfg)
    return value


def divergence_to_target_2d(points, target_tab, grid, cfg):
    """2D analogue of :func:`divergence_to_target` for (y1, y2) points."""
    points = np.asarray(points, dtype=float)
    if cfg.bandwidth is not None:
        h1 = h2 = cfg.bandwidth
    else:
        h1 = silverman_bandwidth(points[:, 0])
        h2 = silverman_bandwidth(points[:, 1])
    p = gaussian_kde_2d(points, h1, h2, grid)
    value, _ = _compare_with_grad(p, target_tab, grid.trapezoid_weights, cfg)
    return value


def ks_statistic(samples, cdf):
    """Two-sided Kolmogorov-Smirnov distance between the empirical CDF of
    the samples and a reference CDF callable."""
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n == 0:
        raise ValueError("KS statistic needs at least one sample")
    f = np.asarray(cdf(samples), dtype=float)
    steps_hi = np.arange(1, n + 1) / n
    steps_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(f - steps_hi), np.abs(f - steps_lo))))
