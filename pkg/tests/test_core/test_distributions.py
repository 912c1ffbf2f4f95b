import itertools
import unittest

import numpy as np
from scipy import integrate, stats

from regimerisk.core.distributions import (
    DistributionRegistry,
    dist_abs_moment,
    dist_cdf,
    dist_logpdf,
    dist_pdf,
    dist_quantile,
    dist_sample,
)
from regimerisk.exceptions import InvalidParameterError
from regimerisk.models.dist_model import DistSpec

PROBABILITIES = np.array([0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999])


def parameter_grid():
    specs = [DistSpec(family="normal")]
    specs += [DistSpec(family="skew_normal", skew=xi) for xi in (0.7, 1.0, 1.3)]
    specs += [DistSpec(family="student_t", shape=nu) for nu in (4.0, 8.0, 20.0)]
    specs += [DistSpec(family="skew_student_t", skew=xi, shape=nu)
              for xi, nu in itertools.product((0.7, 1.0, 1.3), (4.0, 8.0, 20.0))]
    specs += [DistSpec(family="ged", shape=nu) for nu in (1.0, 1.5, 2.5)]
    return specs


def kinks(d):
    """Points where the density may not be smooth: 0 and the skew junction."""
    family = DistributionRegistry.get_family(d.family)
    location, scale, _ = family.moments(d.skew, d.shape)
    return sorted({0.0, -location / scale})


def integrate_density(d, weight):
    points = kinks(d)
    edges = [-np.inf, *points, np.inf]
    total = 0.0
    for low, high in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(lambda z: weight(z) * dist_pdf(d, z), low, high, epsabs=1e-13, epsrel=1e-12,
                                  limit=500)
        total += value
    return total


class TestStandardization(unittest.TestCase):
    def test_moments(self):
        for d in parameter_grid():
            with self.subTest(spec=d.to_dict()):
                self.assertAlmostEqual(integrate_density(d, lambda z: 1.0), 1.0, delta=1e-8)
                self.assertLess(abs(integrate_density(d, lambda z: z)), 1e-8)
                self.assertLess(abs(integrate_density(d, lambda z: z * z) - 1.0), 1e-6)

    def test_cdf_quantile_inverse(self):
        for d in parameter_grid():
            with self.subTest(spec=d.to_dict()):
                np.testing.assert_allclose(dist_cdf(d, dist_quantile(d, PROBABILITIES)), PROBABILITIES,
                                           rtol=0, atol=1e-9)

    def test_abs_moment_matches_quadrature(self):
        for d in parameter_grid():
            with self.subTest(spec=d.to_dict()):
                self.assertAlmostEqual(dist_abs_moment(d), integrate_density(d, abs), delta=1e-8)


class TestDensity(unittest.TestCase):
    def test_normal_at_zero(self):
        self.assertAlmostEqual(dist_pdf(DistSpec(family="normal"), 0.0), 0.3989423, places=7)

    def test_skew_one_reduces_to_symmetric(self):
        z = np.linspace(-6, 6, 101)
        for symmetric, skewed in [(DistSpec(family="student_t", shape=5.0),
                                   DistSpec(family="skew_student_t", skew=1.0, shape=5.0)),
                                  (DistSpec(family="normal"), DistSpec(family="skew_normal", skew=1.0))]:
            np.testing.assert_allclose(dist_pdf(skewed, z), dist_pdf(symmetric, z), rtol=0, atol=1e-12)
            np.testing.assert_allclose(dist_cdf(skewed, z), dist_cdf(symmetric, z), rtol=0, atol=1e-12)

    def test_student_matches_scaled_t(self):
        d = DistSpec(family="student_t", shape=5.0)
        scale = np.sqrt(3.0 / 5.0)
        self.assertAlmostEqual(dist_pdf(d, 1.0), stats.t.pdf(1.0, 5.0, scale=scale), places=12)

    def test_logpdf_consistent(self):
        d = DistSpec(family="skew_student_t", skew=0.85, shape=8.0)
        z = np.array([-3.0, -0.2, 0.0, 0.4, 2.5])
        np.testing.assert_allclose(dist_logpdf(d, z), np.log(dist_pdf(d, z)), rtol=1e-12)
        self.assertIsInstance(dist_logpdf(d, 0.1), float)

    def test_pdf_non_negative(self):
        d = DistSpec(family="skew_normal", skew=1.4)
        self.assertTrue(np.all(dist_pdf(d, np.linspace(-10, 10, 201)) >= 0.0))


class TestCdf(unittest.TestCase):
    def test_symmetric_center(self):
        for d in [DistSpec(family="normal"), DistSpec(family="student_t", shape=6.0), DistSpec(family="ged", shape=1.5)]:
            self.assertAlmostEqual(dist_cdf(d, 0.0), 0.5, places=14)

    def test_monotone_with_limits(self):
        d = DistSpec(family="skew_student_t", skew=1.5, shape=5.0)
        values = dist_cdf(d, np.linspace(-50, 50, 2001))
        self.assertTrue(np.all(np.diff(values) >= 0.0))
        self.assertLess(values[0], 1e-5)
        self.assertGreater(values[-1], 1 - 1e-5)

    def test_round_trip(self):
        d = DistSpec(family="skew_student_t", skew=1.5, shape=5.0)
        self.assertAlmostEqual(dist_cdf(d, dist_quantile(d, 0.3)), 0.3, delta=1e-9)


class TestQuantile(unittest.TestCase):
    def test_normal(self):
        self.assertAlmostEqual(dist_quantile(DistSpec(family="normal"), 0.05), -1.6448536, places=7)

    def test_symmetric_median(self):
        for d in [DistSpec(family="normal"), DistSpec(family="student_t", shape=4.5), DistSpec(family="ged", shape=1.2)]:
            self.assertAlmostEqual(dist_quantile(d, 0.5), 0.0, places=12)

    def test_ged_against_bisection(self):
        d = DistSpec(family="ged", shape=1.5)
        low, high = -10.0, 10.0
        while high - low > 1e-13:
            middle = 0.5 * (low + high)
            if dist_cdf(d, middle) < 0.9:
                low = middle
            else:
                high = middle
        self.assertAlmostEqual(dist_quantile(d, 0.9), 0.5 * (low + high), delta=1e-9)

    def test_vector_shape(self):
        d = DistSpec(family="skew_normal", skew=0.8)
        self.assertEqual(dist_quantile(d, np.array([[0.1, 0.2], [0.3, 0.4]])).shape, (2, 2))

    def test_outside_unit_interval(self):
        d = DistSpec(family="normal")
        for p in (0.0, 1.0, -0.1, 1.5, np.nan):
            with self.assertRaises(InvalidParameterError):
                dist_quantile(d, p)


class TestAbsMoment(unittest.TestCase):
    def test_normal(self):
        self.assertAlmostEqual(dist_abs_moment(DistSpec(family="normal")), 0.7978846, places=7)

    def test_student_limit(self):
        value = dist_abs_moment(DistSpec(family="student_t", shape=1e6))
        self.assertAlmostEqual(value, np.sqrt(2.0 / np.pi), places=5)

    def test_skew_student(self):
        d = DistSpec(family="skew_student_t", skew=1.3, shape=6.0)
        self.assertAlmostEqual(dist_abs_moment(d), integrate_density(d, abs), delta=1e-8)


class TestSample(unittest.TestCase):
    def test_normal_moments(self):
        draws = dist_sample(DistSpec(family="normal"), 100_000, seed=1)
        self.assertLess(abs(draws.mean()), 0.02)
        self.assertTrue(0.98 <= draws.var() <= 1.02)

    def test_deterministic(self):
        d = DistSpec(family="ged", shape=1.3)
        np.testing.assert_array_equal(dist_sample(d, 50, seed=7), dist_sample(d, 50, seed=7))

    def test_kolmogorov_distance(self):
        d = DistSpec(family="skew_student_t", skew=1.5, shape=5.0)
        draws = dist_sample(d, 100_000, seed=3)
        statistic = stats.kstest(draws, lambda x: dist_cdf(d, x)).statistic
        self.assertLess(statistic, 0.01)

    def test_invalid_size(self):
        with self.assertRaises(InvalidParameterError):
            dist_sample(DistSpec(family="normal"), 0, seed=1)


class TestDistSpec(unittest.TestCase):
    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            DistSpec(family="student_t", shape=2.0)
        with self.assertRaises(ValueError):
            DistSpec(family="ged", shape=0.0)
        with self.assertRaises(ValueError):
            DistSpec(family="normal", skew=1.2)
        with self.assertRaises(ValueError):
            DistSpec(family="skew_normal", skew=-1.0)

    def test_serialization(self):
        self.assertEqual(DistSpec(family="skew_student_t", skew=0.85, shape=7.5).to_dict(),
                         {"family": "skew_student_t", "skew": 0.85, "shape": 7.5})


if __name__ == "__main__":
    unittest.main()
