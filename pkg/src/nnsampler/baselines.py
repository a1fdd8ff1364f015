"""The four conventional samplers: inversion, rejection, mixture, MCMC.

All randomness flows through a single uniform-source generator; Gaussian
draws are produced by pushing uniforms through a rational approximation of
the normal quantile, which keeps every sampler reproducible from one seed.
"""

from dataclasses import dataclass

import numpy as np

from .grids import EvalGrid
from .targets import tabulate


class EnvelopeViolationError(RuntimeError):
    """The rejection envelope c * proposal(y) dropped below the target."""


# Wichura's PPND16 rational approximation of the standard normal quantile;
# absolute error below 1e-9 over the open unit interval.
_A = (
    3.3871328727963666080, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
)
_B = (
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
)
_C = (
    1.42343711074968357734, 4.63033784615654529590, 5.76949722146069140550,
    3.64784832476320460504, 1.27045825245236838258, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
)
_D = (
    1.0, 2.05319162663775882187, 1.67638483018380384940,
    6.89767334985100004550e-1, 1.48103976427480074590e-1,
    1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9,
)
_E = (
    6.65790464350110377720, 5.46378491116411436990, 1.78482653991729133580,
    2.96560571828504891230e-1, 2.65321895265761230930e-2,
    1.24266094738807843860e-3, 2.71155556874348757815e-5,
    2.01033439929228813265e-7,
)
_F = (
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4,
    1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15,
)


def _poly(coeffs, r):
    acc = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * r + c
    return acc


def normal_quantile(u):
    """Inverse standard normal CDF for u in the open unit interval."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("normal_quantile needs u strictly inside (0, 1)")
    q = u - 0.5
    central = np.abs(q) <= 0.425

    r_c = 0.180625 - q * q
    val_central = q * _poly(_A, r_c) / _poly(_B, r_c)

    tail_p = np.where(q < 0, u, 1.0 - u)
    # Clamp to keep log() quiet on the branch that is not taken.
    r_t = np.sqrt(-np.log(np.where(central, 0.5, tail_p)))
    near = r_t <= 5.0
    r1 = r_t - 1.6
    r2 = r_t - 5.0
    val_tail = np.where(
        near,
        _poly(_C, r1) / _poly(_D, r1),
        _poly(_E, r2) / _poly(_F, r2),
    )
    val_tail = np.where(q < 0, -val_tail, val_tail)

    out = np.where(central, val_central, val_tail)
    return out if out.ndim else float(out)


def _standard_normal(count, rng):
    # rng.random() lives in [0, 1); nudge exact zeros into the domain.
    u = rng.random(count)
    u = np.maximum(u, 1e-300)
    return normal_quantile(u)


def laplace_cdf(y):
    """CDF of the 0.5*exp(-|y|) density."""
    y = np.asarray(y, dtype=float)
    return np.where(y < 0, 0.5 * np.exp(np.minimum(y, 0.0)), 1.0 - 0.5 * np.exp(-y))


def inverse_cdf_laplace(u):
    """Analytic quantile of the 0.5*exp(-|y|) density; u in (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("inverse_cdf_laplace needs u strictly inside (0, 1)")
    out = np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))
    return out if out.ndim else float(out)


class NumericInverseCdf:
    """Monotone inverse of a tabulated CDF: cumulative trapezoid of the
    density, renormalized to end at one, inverted by bisection plus linear
    interpolation."""

    def __init__(self, target, grid):
        if target.dim != 1:
            raise ValueError("numeric inversion is 1D only")
        density = tabulate(target, grid)
        dx = grid.spacing
        cdf = np.empty(grid.size)
        cdf[0] = 0.0
        np.cumsum(0.5 * dx * (density[1:] + density[:-1]), out=cdf[1:])
        total = cdf[-1]
        if not total > 0:
            raise ValueError("target has zero mass on the grid")
        self.cdf = cdf / total
        self.ys = grid.points

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0) or np.any(u > 1):
            raise ValueError("u must lie in [0, 1]")
        idx = np.searchsorted(self.cdf, u, side="left")
        idx = np.clip(idx, 1, self.cdf.size - 1)
        lo_f = self.cdf[idx - 1]
        hi_f = self.cdf[idx]
        span = hi_f - lo_f
        frac = np.where(span > 0, (u - lo_f) / np.where(span > 0, span, 1.0), 0.0)
        frac = np.clip(frac, 0.0, 1.0)
        out = self.ys[idx - 1] + frac * (self.ys[idx] - self.ys[idx - 1])
        return out if out.ndim else float(out)


def numeric_inverse_cdf(target, grid):
    """Build the monotone u -> y interpolant for a 1D target."""
    return NumericInverseCdf(target, grid)


def inversion_sample(target, grid, count, rng):
    """i.i.d. samples through the numeric inverse CDF."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    inv = NumericInverseCdf(target, grid)
    return inv(rng.random(count))


@dataclass
class RejectionSpec:
    """Proposal density with its sampler and the envelope constant c.

    The envelope c * proposal(y) >= target(y) is checked on the grid at
    construction; violations seen at runtime raise.
    """

    proposal: object
    proposal_sampler: object
    c: float
    grid: EvalGrid

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"envelope constant must be > 0, got {self.c}")

    def validate_against(self, target):
        rho = tabulate(target, self.grid)
        beta = tabulate(self.proposal, self.grid)
        if np.any(rho > self.c * beta):
            g = self.grid.points[np.argmax(rho - self.c * beta)]
            raise ValueError(
                f"envelope c*proposal < target on the grid (e.g. at y={g:g})"
            )


def make_rejection_spec(target, proposal, grid, safety=1.01):
    """Envelope from the grid maximum of target/proposal times a safety
    factor; the proposal is sampled by numeric inversion on the same grid
    (i.e. truncated to the grid window)."""
    rho = tabulate(target, grid)
    beta = tabulate(proposal, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(beta > 0, rho / beta, np.inf)
    ratio = ratio[rho > 0]
    if ratio.size and not np.all(np.isfinite(ratio)):
        raise ValueError("proposal vanishes where the target does not; no valid c")
    c = float(ratio.max()) * safety if ratio.size else 1.0
    inv = NumericInverseCdf(proposal, grid)
    spec = RejectionSpec(proposal, lambda k, r: inv(r.random(k)), c, grid)
    spec.validate_against(target)
    return spec


def rejection_sample(target, spec, count, rng, chunk=65536):
    """Accept-reject until `count` samples; returns (samples, acceptance_rate).

    The rate counts proposals up to and including the one that produced the
    final accepted sample.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    kept = []
    n_kept = 0
    proposed = 0
    while n_kept < count:
        y = np.asarray(spec.proposal_sampler(chunk, rng), dtype=float)
        beta = np.asarray(spec.proposal.pdf(y), dtype=float)
        rho = np.asarray(target.pdf(y), dtype=float)
        bad = rho > spec.c * beta
        if np.any(bad):
            raise EnvelopeViolationError(
                f"target exceeds envelope at y={y[np.argmax(bad)]:g}"
            )
        r = rng.random(chunk) * (spec.c * beta)
        accepted = r < rho
        need = count - n_kept
        hits = np.flatnonzero(accepted)
        if hits.size >= need:
            last = hits[need - 1]
            kept.append(y[hits[:need]])
            n_kept += need
            proposed += int(last) + 1
        else:
            kept.append(y[hits])
            n_kept += hits.size
            proposed += chunk
    samples = np.concatenate(kept)
    return samples, n_kept / proposed


@dataclass(frozen=True)
class MixtureSpec:
    """Gaussian mixture components as (weight, mean, std) triples.

    Weights are normalized to sum to one; stds must be positive.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), float(mu), float(sd)) for w, mu, sd in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        weights = np.array([w for w, _, _ in comps])
        if np.any(weights < 0) or not weights.sum() > 0:
            raise ValueError("weights must be nonnegative with positive sum")
        if any(sd <= 0 for _, _, sd in comps):
            raise ValueError("component stds must be positive")
        weights = weights / weights.sum()
        object.__setattr__(
            self,
            "components",
            tuple((w, mu, sd) for w, (_, mu, sd) in zip(weights, comps)),
        )

    def pdf(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y, dtype=float)
        for w, mu, sd in self.components:
            out += w * np.exp(-0.5 * ((y - mu) / sd) ** 2) / (sd * np.sqrt(2 * np.pi))
        return out


def mixture_sample(spec, count, rng):
    """Categorical draw over the weights, then one Gaussian draw per sample."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    weights = np.array([w for w, _, _ in spec.components])
    means = np.array([mu for _, mu, _ in spec.components])
    stds = np.array([sd for _, _, sd in spec.components])
    which = np.searchsorted(np.cumsum(weights), rng.random(count), side="right")
    which = np.minimum(which, len(weights) - 1)
    z = _standard_normal(count, rng)
    return means[which] + stds[which] * z


@dataclass
class MhSpec:
    """Random-walk Metropolis settings: Gaussian proposal std, start point
    (None picks the target's mode by grid argmax), burn-in length."""

    sigma_q: float = 0.5
    y0: float | None = None
    burn_in: int = 1000

    def __post_init__(self):
        if not self.sigma_q > 0:
            raise ValueError(f"proposal std must be > 0, got {self.sigma_q}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")


def _default_start(target):
    lo, hi = target.bounds[0]
    grid = EvalGrid(lo, hi, 4097)
    tab = tabulate(target, grid)
    return float(grid.points[int(np.argmax(tab))])


def metropolis_hastings(target, spec, count, rng):
    """Random-walk chain with the symmetric-proposal accept rule.

    Runs burn_in + count transitions from y0 and returns the last `count`
    states; a rejected proposal repeats the current state.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if target.dim != 1:
        raise ValueError("the chain sampler is 1D only")
    y = spec.y0 if spec.y0 is not None else _default_start(target)
    rho = float(target.pdf(y))
    if not rho > 0:
        raise ValueError(f"target density is zero at the start point y0={y}")
    total = spec.burn_in + count
    steps = spec.sigma_q * _standard_normal(total, rng)
    accept_u = rng.random(total)
    out = np.empty(count)
    pdf = target.pdf
    for t in range(total):
        y_new = y + steps[t]
        rho_new = float(pdf(y_new))
        # r <= rho'/rho without dividing, so a zero-density state is safe.
        if accept_u[t] * rho <= rho_new:
            y = y_new
            rho = rho_new
        if t >= spec.burn_in:
            out[t - spec.burn_in] = y
    return out
