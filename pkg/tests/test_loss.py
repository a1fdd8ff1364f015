import numpy as np
import pytest

from nnsampler.grids import EvalGrid, EvalGrid2d
from nnsampler.loss import (
    H_MIN,
    KdeConfig,
    gaussian_kde,
    gaussian_kde_2d,
    jsd,
    jsd_2d,
    jsd_grad_p,
    jsd_mixture,
    kde_grad_samples,
    potential_well,
    silverman_bandwidth,
    total_loss,
    total_loss_2d,
)

SQRT_2PI = np.sqrt(2 * np.pi)


def _normal_pdf(x, mu=0.0, sd=1.0):
    return np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * SQRT_2PI)


class TestSilvermanBandwidth:
    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=100)
        q75, q25 = np.percentile(x, [75, 25])
        expected = 0.9 * min(x.std(ddof=1), (q75 - q25) / 1.34) * 100 ** (-0.2)
        np.testing.assert_allclose(silverman_bandwidth(x), expected, rtol=1e-12)

    def test_degenerate_falls_back(self):
        with pytest.warns(RuntimeWarning):
            h = silverman_bandwidth(np.ones(50))
        assert h == H_MIN

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            silverman_bandwidth(np.array([1.0]))

    def test_scaling_homogeneity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.normal(size=int(rng.integers(5, 200)))
            c = float(rng.uniform(0.1, 10))
            np.testing.assert_allclose(
                silverman_bandwidth(c * x), c * silverman_bandwidth(x), rtol=1e-12
            )


class TestGaussianKde:
    def test_single_sample_peak(self):
        grid = EvalGrid(-5, 5, 11)
        p = gaussian_kde(np.array([0.0]), 1.0, grid)
        np.testing.assert_allclose(p[5], 1 / SQRT_2PI, rtol=1e-12)

    def test_two_samples_midpoint(self):
        grid = EvalGrid(-4, 4, 9)
        p = gaussian_kde(np.array([-1.0, 1.0]), 1.0, grid)
        np.testing.assert_allclose(p[4], np.exp(-0.5) / SQRT_2PI, rtol=1e-12)

    def test_nonnegative_and_normalized(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            samples = rng.normal(scale=rng.uniform(0.5, 2), size=50)
            h = silverman_bandwidth(samples)
            lo = samples.min() - 8 * h
            hi = samples.max() + 8 * h
            grid = EvalGrid(lo, hi, 2048)
            p = gaussian_kde(samples, h, grid)
            assert np.all(p >= 0)
            np.testing.assert_allclose(grid.integrate(p), 1.0, atol=1e-3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gaussian_kde(np.array([]), 1.0, EvalGrid(-1, 1, 5))

    def test_matches_quadratic_form_oracle(self):
        # Straight-line reimplementation of the kernel sum.
        rng = np.random.default_rng(3)
        samples = rng.normal(size=17)
        grid = EvalGrid(-6, 6, 101)
        h = 0.4
        expected = np.zeros(grid.size)
        for y in samples:
            expected += np.exp(-0.5 * ((grid.points - y) / h) ** 2)
        expected /= len(samples) * h * SQRT_2PI
        np.testing.assert_allclose(gaussian_kde(samples, h, grid), expected, rtol=1e-12)


class TestJsd:
    def test_identical_densities(self):
        grid = EvalGrid(-5, 5, 301)
        p = _normal_pdf(grid.points)
        assert jsd(p, p, grid, 1e-12) == 0.0

    def test_gaussian_closed_form(self):
        # Symmetrized KL between unit-variance Gaussians one apart is 1/2.
        grid = EvalGrid(-12, 13, 4096)
        p = _normal_pdf(grid.points, 0.0)
        q = _normal_pdf(grid.points, 1.0)
        np.testing.assert_allclose(jsd(p, q, grid, 1e-12), 0.5, atol=1e-3)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(4)
        grid = EvalGrid(-8, 8, 257)
        p = _normal_pdf(grid.points, rng.uniform(-2, 2), rng.uniform(0.5, 2))
        q = _normal_pdf(grid.points, rng.uniform(-2, 2), rng.uniform(0.5, 2))
        assert jsd(p, q, grid, 1e-12) == jsd(q, p, grid, 1e-12)

    def test_nonnegative_on_random_mixtures(self):
        rng = np.random.default_rng(5)
        grid = EvalGrid(-10, 10, 401)
        for _ in range(100):
            def mix():
                w = rng.dirichlet(np.ones(3))
                mus = rng.uniform(-4, 4, 3)
                sds = rng.uniform(0.3, 2, 3)
                return sum(
                    wi * _normal_pdf(grid.points, m, s) for wi, m, s in zip(w, mus, sds)
                )
            p, q = mix(), mix()
            assert jsd(p, q, grid, 1e-12) >= 0
            assert jsd(p, p, grid, 1e-12) == 0.0

    def test_length_mismatch(self):
        grid = EvalGrid(-1, 1, 11)
        with pytest.raises(ValueError):
            jsd(np.ones(11), np.ones(12), grid, 1e-12)

    def test_mixture_mode_bounded_by_log2(self):
        grid = EvalGrid(-30, 30, 2001)
        p = _normal_pdf(grid.points, -20, 0.5)
        q = _normal_pdf(grid.points, 20, 0.5)
        v = jsd_mixture(p, q, grid, 1e-300)
        np.testing.assert_allclose(v, np.log(2), atol=1e-3)
        assert jsd_mixture(p, p, grid, 1e-12) == 0.0


class TestJsdGrad:
    def test_zero_at_equality(self):
        grid = EvalGrid(-5, 5, 101)
        p = _normal_pdf(grid.points)
        np.testing.assert_array_equal(jsd_grad_p(p, p, grid, 1e-12), np.zeros(101))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        grid = EvalGrid(-3, 3, 41)
        for _ in range(25):
            p = rng.uniform(0.05, 1.0, grid.size)
            q = rng.uniform(0.05, 1.0, grid.size)
            grad = jsd_grad_p(p, q, grid, 1e-12)
            h = 1e-7
            for i in rng.integers(0, grid.size, 5):
                pp = p.copy()
                pp[i] += h
                pm = p.copy()
                pm[i] -= h
                fd = (jsd(pp, q, grid, 1e-12) - jsd(pm, q, grid, 1e-12)) / (2 * h)
                denom = max(abs(grad[i]), abs(fd))
                assert abs(grad[i] - fd) / denom < 1e-6

    def test_clamped_entries_have_zero_gradient(self):
        grid = EvalGrid(-2, 2, 21)
        eps = 1e-6
        p = np.full(grid.size, 0.3)
        q = np.full(grid.size, 0.4)
        p[7] = 1e-9  # below the floor
        grad = jsd_grad_p(p, q, grid, eps)
        assert grad[7] == 0.0
        v0 = jsd(p, q, grid, eps)
        p[7] = 1e-8  # still below the floor
        assert jsd(p, q, grid, eps) == v0


class TestKdeGradSamples:
    def test_zero_upstream(self):
        grid = EvalGrid(-4, 4, 33)
        g = kde_grad_samples(np.array([0.3, -0.5]), 0.5, grid, np.zeros(33))
        np.testing.assert_array_equal(g, np.zeros(2))

    def test_symmetric_upstream_centered_sample(self):
        grid = EvalGrid(-4, 4, 33)
        upstream = np.exp(-np.abs(grid.points))  # even function
        g = kde_grad_samples(np.array([0.0]), 0.7, grid, upstream)
        np.testing.assert_allclose(g, 0.0, atol=1e-15)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        grid = EvalGrid(-5, 5, 65)
        for _ in range(25):
            samples = rng.normal(size=6)
            upstream = rng.normal(size=grid.size)
            h = float(rng.uniform(0.2, 1.0))
            grad = kde_grad_samples(samples, h, grid, upstream)
            step = 1e-6
            for j in range(6):
                sp = samples.copy()
                sp[j] += step
                sm = samples.copy()
                sm[j] -= step
                fd = (
                    upstream @ gaussian_kde(sp, h, grid)
                    - upstream @ gaussian_kde(sm, h, grid)
                ) / (2 * step)
                denom = max(abs(grad[j]), abs(fd), 1e-9)
                assert abs(grad[j] - fd) / denom < 1e-6


class TestPotentialWell:
    def test_inside_is_flat_zero(self):
        v, g = potential_well(np.array([-1.0, 0.0, 2.0]), -3, 3, 1.0)
        assert v == 0.0
        np.testing.assert_array_equal(g, np.zeros(3))

    def test_linear_sides(self):
        v, g = potential_well(np.array([4.0]), -3, 3, 1.0)
        assert v == 1.0
        np.testing.assert_array_equal(g, [1.0])
        v, g = potential_well(np.array([-5.0]), -3, 3, 2.0)
        assert v == 4.0
        np.testing.assert_array_equal(g, [-2.0])

    def test_zero_at_kinks(self):
        _, g = potential_well(np.array([-3.0, 3.0]), -3, 3, 1.0)
        np.testing.assert_array_equal(g, np.zeros(2))

    def test_permutation_invariant(self):
        rng = np.random.default_rng(8)
        y = rng.uniform(-6, 6, 40)
        v1, _ = potential_well(y, -3, 3, 1.3)
        v2, _ = potential_well(y[::-1], -3, 3, 1.3)
        np.testing.assert_allclose(v1, v2, rtol=1e-12)


@pytest.fixture(scope="module")
def laplace_setup():
    from nnsampler.targets import laplace, tabulate

    grid = EvalGrid(-10, 10, 128)
    return grid, tabulate(laplace(), grid)


class TestTotalLoss:
    def test_total_is_exact_sum(self, laplace_setup):
        grid, tab = laplace_setup
        rng = np.random.default_rng(9)
        bd, _ = total_loss(rng.normal(size=(4, 8)), tab, grid, KdeConfig(), 1.0)
        assert bd.total == bd.row_term + bd.col_term + bd.well_term

    def test_good_samples_score_lower_than_bad(self, laplace_setup):
        grid, tab = laplace_setup
        rng = np.random.default_rng(10)
        u = rng.random((8, 64))
        good = np.where(u < 0.5, np.log(2 * u), -np.log(2 * (1 - u)))
        bad = rng.uniform(5, 9, size=(8, 64))
        cfg = KdeConfig()
        bd_good, _ = total_loss(good, tab, grid, cfg, 1.0)
        bd_bad, _ = total_loss(bad, tab, grid, cfg, 1.0)
        assert bd_good.total < bd_bad.total
        assert bd_good.well_term == 0.0

    @pytest.mark.parametrize("cfg", [
        KdeConfig(bandwidth=0.35),
        KdeConfig(bandwidth=0.5, jsd_mode="mixture"),
        KdeConfig(bandwidth=0.5, compare="mse"),
    ])
    def test_gradient_matches_finite_differences(self, laplace_setup, cfg):
        # Fixed bandwidth: the gradient treats h as a constant, so the
        # finite-difference oracle must see the same h.
        grid, tab = laplace_setup
        rng = np.random.default_rng(11)
        outputs = rng.normal(scale=2.0, size=(4, 8))
        outputs[0, 0] = 10.5  # exercise the well branch
        _, grad = total_loss(outputs, tab, grid, cfg, 1.0)
        h = 1e-5
        for r in range(4):
            for c in range(8):
                yp = outputs.copy()
                yp[r, c] += h
                ym = outputs.copy()
                ym[r, c] -= h
                fp = total_loss(yp, tab, grid, cfg, 1.0)[0].total
                fm = total_loss(ym, tab, grid, cfg, 1.0)[0].total
                fd = (fp - fm) / (2 * h)
                denom = max(abs(grad[r, c]), abs(fd), 1e-3)
                assert abs(grad[r, c] - fd) / denom < 1e-4

    def test_single_row_skips_column_term(self, laplace_setup):
        grid, tab = laplace_setup
        rng = np.random.default_rng(12)
        with pytest.warns(RuntimeWarning):
            bd, _ = total_loss(rng.normal(size=(1, 16)), tab, grid, KdeConfig(), 1.0)
        assert bd.col_term == 0.0
        assert bd.row_term > 0.0

    def test_single_column_skips_row_term(self, laplace_setup):
        grid, tab = laplace_setup
        rng = np.random.default_rng(13)
        bd, _ = total_loss(rng.normal(size=(16, 1)), tab, grid, KdeConfig(), 1.0)
        assert bd.row_term == 0.0
        assert bd.col_term > 0.0

    def test_row_permutation_equivariance(self, laplace_setup):
        grid, tab = laplace_setup
        rng = np.random.default_rng(14)
        outputs = rng.normal(size=(6, 12))
        perm = rng.permutation(6)
        bd1, g1 = total_loss(outputs, tab, grid, KdeConfig(bandwidth=0.4), 1.0)
        bd2, g2 = total_loss(outputs[perm], tab, grid, KdeConfig(bandwidth=0.4), 1.0)
        np.testing.assert_array_equal(g2, g1[perm])
        np.testing.assert_allclose(bd2.total, bd1.total, rtol=1e-12)


class TestLoss2d:
    @pytest.fixture(scope="class")
    def setup2d(self):
        from nnsampler.targets import bimodal_gauss_2d, tabulate

        grid = EvalGrid2d.square(-6, 6, 31)
        return grid, tabulate(bimodal_gauss_2d(), grid)

    def test_kde_2d_single_point_peak(self):
        grid = EvalGrid2d.square(-2, 2, 21)
        p = gaussian_kde_2d(np.array([[0.0, 0.0]]), 0.5, 0.5, grid)
        np.testing.assert_allclose(p[10, 10], 1 / (2 * np.pi * 0.25), rtol=1e-12)

    def test_kde_2d_normalization(self):
        rng = np.random.default_rng(15)
        pts = rng.normal(size=(40, 2))
        grid = EvalGrid2d.square(-9, 9, 181)
        p = gaussian_kde_2d(pts, 0.5, 0.5, grid)
        np.testing.assert_allclose(grid.integrate(p), 1.0, atol=5e-3)

    def test_jsd_2d_zero_at_equality(self, setup2d):
        grid, tab = setup2d
        assert jsd_2d(tab, tab, grid, 1e-12) == 0.0

    def test_gradient_matches_finite_differences(self, setup2d):
        grid, tab = setup2d
        rng = np.random.default_rng(16)
        outputs = rng.normal(scale=2.0, size=(3, 8))  # 3 rows of 4 points
        cfg = KdeConfig(bandwidth=0.6)
        _, grad = total_loss_2d(outputs, tab, grid, cfg, 1.0)
        h = 1e-5
        for r in range(3):
            for c in range(8):
                yp = outputs.copy()
                yp[r, c] += h
                ym = outputs.copy()
                ym[r, c] -= h
                fp = total_loss_2d(yp, tab, grid, cfg, 1.0)[0].total
                fm = total_loss_2d(ym, tab, grid, cfg, 1.0)[0].total
                fd = (fp - fm) / (2 * h)
                denom = max(abs(grad[r, c]), abs(fd), 1e-3)
                assert abs(grad[r, c] - fd) / denom < 1e-4

    def test_odd_width_rejected(self, setup2d):
        grid, tab = setup2d
        with pytest.raises(ValueError):
            total_loss_2d(np.zeros((4, 7)), tab, grid, KdeConfig(), 1.0)


class TestKdeConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            KdeConfig(bandwidth=0.0)
        with pytest.raises(ValueError):
            KdeConfig(eps=0.0)
        with pytest.raises(ValueError):
            KdeConfig(eps=1e-2)
        with pytest.raises(ValueError):
            KdeConfig(jsd_mode="other")
        with pytest.raises(ValueError):
            KdeConfig(compare="other")
