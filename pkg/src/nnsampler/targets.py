"""Built-in target densities and the container for user-supplied ones.

Every target is an explicitly known, normalized probability density with a
finite evaluation window that encloses all but a negligible fraction of its
mass.  Densities are plain vectorized functions; :class:`TargetDensity`
bundles one with its dimension, bounds and a name used by the CLI.
"""

import numpy as np

from .grids import EvalGrid, EvalGrid2d

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def bimodal_gauss_pdf(y):
    """Asymmetric two-peak Gaussian density on the real line.

    Equal-mass mixture of a narrow mode at +1 (std 1/2) and a wide mode at
    -3 (std 1); integrates to one.
    """
    y = np.asarray(y, dtype=float)
    val = 2.0 * np.exp(-2.0 * (y - 1.0) ** 2) + np.exp(-0.5 * (y + 3.0) ** 2)
    return val / (2.0 * _SQRT_2PI)


def laplace_pdf(y):
    """Double-sided exponential density, 0.5 * exp(-|y|)."""
    y = np.asarray(y, dtype=float)
    return 0.5 * np.exp(-np.abs(y))


def y2exp_pdf(y, b):
    """Density proportional to y^2 * exp(-b|y|), normalized by b^3/4.

    Bimodal with modes at +-2/b and a zero at the origin; its inverse CDF
    has no closed form, which makes it a useful stress target.
    """
    b = float(b)
    if b <= 0:
        raise ValueError(f"shape parameter b must be positive, got {b}")
    y = np.asarray(y, dtype=float)
    return 0.25 * b**3 * y**2 * np.exp(-b * np.abs(y))


def bimodal_gauss_2d_pdf(y1, y2):
    """Equal-weight mixture of unit-variance isotropic Gaussians at
    (1.5, 1.5) and (-1.5, -1.5)."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    a = np.exp(-0.5 * ((y1 - 1.5) ** 2 + (y2 - 1.5) ** 2))
    b = np.exp(-0.5 * ((y1 + 1.5) ** 2 + (y2 + 1.5) ** 2))
    return 0.5 * (a + b) / (2.0 * np.pi)


class TargetDensity:
    """An explicitly known, normalized density with its evaluation window.

    Parameters
    ----------
    name : str
        Identifier used in configs and CLI output.
    dim : int
        1 or 2.
    pdf : callable
        Vectorized density: for dim=1 maps an array of points to densities;
        for dim=2 takes two coordinate arrays.
    bounds : sequence of (lo, hi)
        One closed interval per axis; at most ~1e-3 of the mass may lie
        outside.
    """

    def __init__(self, name, dim, pdf, bounds):
        dim = int(dim)
        if dim not in (1, 2):
            raise ValueError(f"only 1D and 2D targets are supported, got dim={dim}")
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != dim:
            raise ValueError(f"need {dim} bound pairs, got {len(bounds)}")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"bad bounds [{lo}, {hi}]")
        self.name = name
        self.dim = dim
        self.pdf = pdf
        self.bounds = bounds
        self._tab_cache = {}

    def __repr__(self):
        return f"TargetDensity({self.name!r}, dim={self.dim})"


def tabulate(target, grid):
    """Evaluate a target on a grid, caching the result per (target, grid).

    Returns a (G,) vector for 1D targets or a (G1, G2) array for 2D ones.
    """
    grid_dim = 2 if isinstance(grid, EvalGrid2d) else 1
    if not isinstance(grid, (EvalGrid, EvalGrid2d)):
        raise TypeError(f"expected EvalGrid or EvalGrid2d, got {type(grid)!r}")
    if target.dim != grid_dim:
        raise ValueError(
            f"target {target.name!r} is {target.dim}D but grid is {grid_dim}D"
        )
    key = grid.cache_key()
    cached = target._tab_cache.get(key)
    if cached is not None:
        return cached
    if target.dim == 1:
        values = np.asarray(target.pdf(grid.points), dtype=float)
    else:
        m1, m2 = grid.meshes()
        values = np.asarray(target.pdf(m1, m2), dtype=float)
    values.setflags(write=False)
    target._tab_cache[key] = values
    return values


def bimodal_gauss():
    return TargetDensity("bimodal_gauss", 1, bimodal_gauss_pdf, [(-10.0, 10.0)])


def laplace():
    return TargetDensity("laplace", 1, laplace_pdf, [(-10.0, 10.0)])


def y2exp(b=1.0):
    return TargetDensity(
        "y2exp", 1, lambda y, _b=float(b): y2exp_pdf(y, _b), [(-10.0, 10.0)]
    )


def bimodal_gauss_2d():
    return TargetDensity(
        "bimodal_gauss_2d",
        2,
        bimodal_gauss_2d_pdf,
        [(-6.0, 6.0), (-6.0, 6.0)],
    )


_REGISTRY = {
    "bimodal_gauss": (bimodal_gauss, ()),
    "laplace": (laplace, ()),
    "y2exp": (y2exp, ("b",)),
    "bimodal_gauss_2d": (bimodal_gauss_2d, ()),
}


def target_names():
    return sorted(_REGISTRY)


def make_target(name, **params):
    """Build a built-in target by name; y2exp accepts the shape b."""
    try:
        factory, accepted = _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown target {name!r}; known: {', '.join(target_names())}"
        ) from None
    unknown = set(params) - set(accepted)
    if unknown:
        raise ValueError(f"target {name!r} does not take {sorted(unknown)}")
    return factory(**params)
