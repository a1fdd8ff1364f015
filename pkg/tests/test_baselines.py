import math

import numpy as np
import pytest

from nnsampler.baselines import (
    EnvelopeViolationError,
    MhSpec,
    MixtureSpec,
    NumericInverseCdf,
    RejectionSpec,
    inverse_cdf_laplace,
    inversion_sample,
    laplace_cdf,
    make_rejection_spec,
    metropolis_hastings,
    mixture_sample,
    normal_quantile,
    numeric_inverse_cdf,
    rejection_sample,
)
from nnsampler.evaluation import ks_statistic
from nnsampler.grids import EvalGrid
from nnsampler.targets import TargetDensity, laplace, tabulate, y2exp

KS_CRIT_1E4 = 0.0163  # alpha = 0.01, n = 10^4


def _phi(x):
    return 0.5 * (1 + np.vectorize(math.erf)(np.asarray(x) / np.sqrt(2)))


class TestNormalQuantile:
    def test_high_accuracy_vs_scipy(self):
        from scipy.special import ndtri

        u = np.linspace(1e-9, 1 - 1e-9, 200_001)
        err = np.abs(normal_quantile(u) - ndtri(u))
        assert err.max() < 1e-9

    def test_tails(self):
        from scipy.special import ndtri

        for u in (1e-300, 1e-30, 1e-12, 1 - 1e-12):
            assert abs(normal_quantile(u) - ndtri(u)) < 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            normal_quantile(0.0)
        with pytest.raises(ValueError):
            normal_quantile(1.0)

    def test_symmetry(self):
        u = np.linspace(0.01, 0.49, 50)
        np.testing.assert_allclose(
            normal_quantile(u), -normal_quantile(1 - u), atol=1e-12
        )


class TestLaplaceInverse:
    def test_values(self):
        assert inverse_cdf_laplace(0.5) == 0.0
        np.testing.assert_allclose(inverse_cdf_laplace(0.25), np.log(0.5), rtol=1e-12)
        np.testing.assert_allclose(inverse_cdf_laplace(0.9), -np.log(0.2), rtol=1e-12)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                inverse_cdf_laplace(bad)

    def test_roundtrip_with_cdf(self):
        u = np.linspace(0.001, 0.999, 999)
        np.testing.assert_allclose(laplace_cdf(inverse_cdf_laplace(u)), u, atol=1e-12)


class TestNumericInverseCdf:
    def test_laplace_median(self):
        grid = EvalGrid(-12, 12, 4097)
        inv = numeric_inverse_cdf(laplace(), grid)
        assert abs(inv(0.5)) <= grid.spacing

    def test_supnorm_vs_analytic(self):
        grid = EvalGrid(-12, 12, 8192)
        inv = numeric_inverse_cdf(laplace(), grid)
        u = np.linspace(0.01, 0.99, 9801)
        err = np.abs(inv(u) - inverse_cdf_laplace(u))
        assert err.max() < 1e-3

    def test_y2exp_median_at_zero(self):
        grid = EvalGrid(-12, 12, 4097)
        inv = numeric_inverse_cdf(y2exp(1.0), grid)
        assert abs(inv(0.5)) <= grid.spacing

    def test_monotone(self):
        grid = EvalGrid(-12, 12, 1025)
        inv = numeric_inverse_cdf(y2exp(1.0), grid)
        rng = np.random.default_rng(0)
        for _ in range(200):
            u1, u2 = np.sort(rng.random(2))
            assert inv(u1) <= inv(u2)

    def test_zero_mass_rejected(self):
        zero = TargetDensity("zero", 1, lambda y: np.zeros_like(np.asarray(y, float)), [(-1, 1)])
        with pytest.raises(ValueError):
            numeric_inverse_cdf(zero, EvalGrid(-1, 1, 33))


class TestInversionSample:
    def test_ks_against_analytic_cdf(self):
        grid = EvalGrid(-12, 12, 8193)
        samples = inversion_sample(laplace(), grid, 10_000, np.random.default_rng(42))
        assert ks_statistic(samples, laplace_cdf) < KS_CRIT_1E4

    def test_empirical_mean(self):
        grid = EvalGrid(-12, 12, 8193)
        samples = inversion_sample(laplace(), grid, 10_000, np.random.default_rng(42))
        assert -0.06 < samples.mean() < 0.06

    def test_deterministic(self):
        grid = EvalGrid(-10, 10, 1025)
        a = inversion_sample(laplace(), grid, 100, np.random.default_rng(5))
        b = inversion_sample(laplace(), grid, 100, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)


class TestRejectionSample:
    def test_identical_target_and_proposal_accepts_everything(self):
        grid = EvalGrid(-12, 12, 4097)
        target = laplace()
        inv = numeric_inverse_cdf(target, grid)
        spec = RejectionSpec(target, lambda k, r: inv(r.random(k)), 1.0, grid)
        spec.validate_against(target)
        samples, rate = rejection_sample(target, spec, 5000, np.random.default_rng(1))
        assert rate == 1.0
        assert samples.shape == (5000,)

    def test_acceptance_rate_matches_envelope(self):
        # Truncated to the grid window the density ratio peaks at 72, so the
        # acceptance rate should sit near 1/c.
        grid = EvalGrid(-12, 12, 8193)
        target = y2exp(1.0)
        spec = make_rejection_spec(target, laplace(), grid, safety=1.01)
        np.testing.assert_allclose(spec.c, 72 * 1.01, rtol=1e-3)
        samples, rate = rejection_sample(target, spec, 10_000, np.random.default_rng(2))
        assert abs(rate - 1 / spec.c) < 0.02
        inv = numeric_inverse_cdf(target, grid)
        ks = ks_statistic(samples, lambda y: np.interp(y, inv.ys, inv.cdf))
        assert ks < KS_CRIT_1E4

    def test_runtime_envelope_violation(self):
        # Coarse two-point grid misses the peak at zero, so the constructed
        # envelope is too small and the violation must surface at runtime.
        coarse = EvalGrid(-1, 1, 2)
        peak = TargetDensity(
            "peak", 1, lambda y: 2.0 * np.exp(-50 * np.asarray(y, float) ** 2) + 1e-3, [(-1, 1)]
        )
        flat = TargetDensity(
            "flat", 1, lambda y: 0.5 * np.ones_like(np.asarray(y, float)), [(-1, 1)]
        )
        spec = make_rejection_spec(peak, flat, coarse)
        with pytest.raises(EnvelopeViolationError):
            rejection_sample(peak, spec, 1000, np.random.default_rng(3))

    def test_vanishing_proposal_rejected(self):
        grid = EvalGrid(-2, 2, 257)
        box = TargetDensity(
            "box", 1, lambda y: np.where(np.abs(y) <= 0.5, 1.0, 0.0), [(-2, 2)]
        )
        with pytest.raises(ValueError):
            make_rejection_spec(laplace(), box, grid)


class TestMixtureSample:
    def test_single_mode_is_standard_normal(self):
        spec = MixtureSpec(((1.0, 0.0, 1.0),))
        samples = mixture_sample(spec, 10_000, np.random.default_rng(4))
        assert ks_statistic(samples, _phi) < KS_CRIT_1E4

    def test_two_mode_split(self):
        # P(y < -1) for modes at -3 and 1 is Phi(2)/2 + Phi(-2)/2 = 1/2.
        spec = MixtureSpec(((0.5, -3.0, 1.0), (0.5, 1.0, 1.0)))
        samples = mixture_sample(spec, 10_000, np.random.default_rng(5))
        frac = np.mean(samples < -1.0)
        assert abs(frac - 0.5) < 0.015

    def test_weights_normalized(self):
        spec = MixtureSpec(((2.0, 0.0, 1.0), (6.0, 5.0, 1.0)))
        weights = [w for w, _, _ in spec.components]
        np.testing.assert_allclose(weights, [0.25, 0.75], rtol=1e-12)

    def test_zero_std_rejected(self):
        with pytest.raises(ValueError):
            MixtureSpec(((1.0, 0.0, 0.0),))

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            MixtureSpec(((-1.0, 0.0, 1.0), (2.0, 1.0, 1.0)))

    def test_deterministic(self):
        spec = MixtureSpec(((0.3, -1.0, 0.5), (0.7, 2.0, 1.5)))
        a = mixture_sample(spec, 64, np.random.default_rng(6))
        b = mixture_sample(spec, 64, np.random.default_rng(6))
        np.testing.assert_array_equal(a, b)


class TestMetropolisHastings:
    def test_uphill_proposals_always_accepted(self):
        # On a flat density the ratio is always 1, so every proposal is
        # accepted and the chain never repeats a state.
        flat = TargetDensity(
            "flat", 1, lambda y: np.ones_like(np.asarray(y, float)), [(-100, 100)]
        )
        spec = MhSpec(sigma_q=0.5, y0=0.0, burn_in=0)
        chain = metropolis_hastings(flat, spec, 2000, np.random.default_rng(7))
        assert np.all(np.diff(chain) != 0)

    def test_fixed_seed_reproducible(self):
        spec = MhSpec(sigma_q=0.5, burn_in=100)
        a = metropolis_hastings(y2exp(1.0), spec, 500, np.random.default_rng(8))
        b = metropolis_hastings(y2exp(1.0), spec, 500, np.random.default_rng(8))
        np.testing.assert_array_equal(a, b)

    def test_zero_density_start_rejected(self):
        spec = MhSpec(sigma_q=0.5, y0=0.0)  # y2exp vanishes at the origin
        with pytest.raises(ValueError):
            metropolis_hastings(y2exp(1.0), spec, 100, np.random.default_rng(9))

    def test_default_start_is_target_mode(self):
        spec = MhSpec(sigma_q=0.5, burn_in=0)
        chain = metropolis_hastings(y2exp(1.0), spec, 1, np.random.default_rng(10))
        # Mode of y^2 exp(-|y|) is at |y| = 2; the first state stays nearby.
        assert 0.5 < abs(chain[0]) < 4.0

    def test_transition_kernel_matches_quadrature_oracle(self):
        # Three-cell staircase density; at stationarity the within-cell law
        # is uniform, so the cell-to-cell kernel has a closed form in Phi.
        heights = np.array([0.2, 0.5, 0.3])
        cells = [(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]

        def stair_pdf(y):
            y = np.asarray(y, dtype=float)
            out = np.zeros_like(y)
            for h, (lo, hi) in zip(heights, cells):
                out = np.where((y >= lo) & (y < hi), h, out)
            return out

        stair = TargetDensity("stair", 1, stair_pdf, [(0.0, 3.0)])
        sigma = 0.8

        def kernel_oracle():
            t = np.linspace(0.0, 1.0, 2001)
            k = np.zeros((3, 3))
            for i in range(3):
                x = cells[i][0] + t
                for j in range(3):
                    if i == j:
                        continue
                    mass = _phi((cells[j][1] - x) / sigma) - _phi((cells[j][0] - x) / sigma)
                    accept = min(1.0, heights[j] / heights[i])
                    k[i, j] = np.trapezoid(mass * accept, t)
                k[i, i] = 1.0 - k[i].sum()
            return k

        spec = MhSpec(sigma_q=sigma, y0=1.5, burn_in=2000)
        chain = metropolis_hastings(stair, spec, 200_000, np.random.default_rng(11))
        idx = np.clip(chain.astype(int), 0, 2)
        counts = np.zeros((3, 3))
        for a, b in zip(idx[:-1], idx[1:]):
            counts[a, b] += 1
        empirical = counts / counts.sum(axis=1, keepdims=True)
        assert np.max(np.abs(empirical - kernel_oracle())) < 0.02
