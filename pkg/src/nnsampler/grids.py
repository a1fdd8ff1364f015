"""Uniform evaluation lattices with trapezoid quadrature weights."""

import numpy as np


class EvalGrid:
    """Uniformly spaced 1D lattice on [lo, hi].

    Carries the lattice points plus the trapezoid weights used for every
    integral in the package, so that quadrature and its gradients stay
    consistent everywhere.
    """

    def __init__(self, lo, hi, points):
        lo, hi, points = float(lo), float(hi), int(points)
        if not lo < hi:
            raise ValueError(f"grid needs lo < hi, got [{lo}, {hi}]")
        if points < 2:
            raise ValueError(f"grid needs at least 2 points, got {points}")
        self.lo = lo
        self.hi = hi
        self.points = np.linspace(lo, hi, points)
        self.spacing = (hi - lo) / (points - 1)
        w = np.full(points, self.spacing)
        w[0] *= 0.5
        w[-1] *= 0.5
        self.trapezoid_weights = w

    @property
    def size(self):
        return self.points.shape[0]

    def integrate(self, values):
        """Trapezoid-rule integral of values tabulated on this grid."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.points.shape:
            raise ValueError(
                f"expected {self.points.shape[0]} values, got {values.shape}"
            )
        return float(self.trapezoid_weights @ values)

    def cache_key(self):
        return ("1d", self.lo, self.hi, self.size)

    def __repr__(self):
        return f"EvalGrid({self.lo}, {self.hi}, {self.size})"


class EvalGrid2d:
    """Product lattice of two 1D grids; axis 0 is y1, axis 1 is y2."""

    def __init__(self, axis1, axis2):
        if not isinstance(axis1, EvalGrid) or not isinstance(axis2, EvalGrid):
            raise TypeError("EvalGrid2d takes two EvalGrid axes")
        self.axis1 = axis1
        self.axis2 = axis2
        # Outer product of the per-axis trapezoid weights gives the 2D rule.
        self.trapezoid_weights = np.outer(
            axis1.trapezoid_weights, axis2.trapezoid_weights
        )

    @classmethod
    def square(cls, lo, hi, points):
        return cls(EvalGrid(lo, hi, points), EvalGrid(lo, hi, points))

    @property
    def shape(self):
        return (self.axis1.size, self.axis2.size)

    def meshes(self):
        """Coordinate arrays of shape (G1, G2) in 'ij' indexing."""
        return np.meshgrid(self.axis1.points, self.axis2.points, indexing="ij")

    def integrate(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape != self.shape:
            raise ValueError(f"expected shape {self.shape}, got {values.shape}")
        return float(np.sum(self.trapezoid_weights * values))

    def cache_key(self):
        return ("2d", self.axis1.cache_key(), self.axis2.cache_key())

    def __repr__(self):
        return f"EvalGrid2d({self.axis1!r}, {self.axis2!r})"
