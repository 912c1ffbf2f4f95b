import unittest

import numpy as np
from scipy import stats

from regimerisk.core.distributions import dist_abs_moment, dist_logpdf
from regimerisk.core.garch import (
    arma_egarch_filter,
    arma_egarch_loglik,
    fit_arma_egarch,
    information_criteria,
    loglik_gradient,
    select_margin_distribution,
    simulate_arma_egarch,
)
from regimerisk.exceptions import (
    DegenerateSeriesError,
    InsufficientDataError,
    InvalidParameterError,
    NonFiniteLikelihoodError,
)
from regimerisk.models.config_model import OptimizerConfig
from regimerisk.models.dist_model import DistSpec
from regimerisk.models.garch_model import ArmaEgarchOrders, ArmaEgarchParams, ArmaEgarchSpec, UnivariateFit

EGARCH11 = ArmaEgarchOrders(p_mean=1, q_mean=1, p_var=1, q_var=1)

TRUE_PARAMS = ArmaEgarchParams(mu0=0.05, phi=[0.3], theta=[-0.1], omega=-0.1, alpha=[-0.08], gamma=[0.15],
                               beta=[0.9], dist=DistSpec(family="skew_student_t", skew=1.2, shape=8.0))


def hand_filter(params, r):
    """Step-by-step ARMA(1,1)-eGARCH(1,1) recursion with the pre-sample conventions spelled out."""
    abs_moment = dist_abs_moment(params.dist)
    r_prev, y_prev, z_prev, log_h_prev = np.mean(r), 0.0, 0.0, np.log(np.var(r, ddof=1))
    mu, log_h, z = [], [], []
    for value in r:
        m = params.mu0 + params.phi[0] * r_prev + params.theta[0] * y_prev
        lh = (params.omega + params.alpha[0] * z_prev + params.gamma[0] * (abs(z_prev) - abs_moment)
              + params.beta[0] * log_h_prev)
        y = value - m
        eps = y / np.exp(0.5 * lh)
        mu.append(m)
        log_h.append(lh)
        z.append(eps)
        r_prev, y_prev, z_prev, log_h_prev = value, y, eps, lh
    return np.array(mu), np.exp(np.array(log_h)), np.array(z)


class TestFilter(unittest.TestCase):
    def setUp(self):
        self.r = np.random.default_rng(11).normal(0.0, 0.5, size=300)

    def test_degenerate_recursion(self):
        params = ArmaEgarchParams(mu0=0.2, omega=np.log(0.25), alpha=[0.0], gamma=[0.0], beta=[0.0])
        out = arma_egarch_filter(params, self.r)
        np.testing.assert_allclose(out.mu, 0.2, rtol=0, atol=0)
        np.testing.assert_allclose(out.h, 0.25, rtol=1e-15)

    def test_log_variance_fixed_point(self):
        params = ArmaEgarchParams(omega=0.1, alpha=[0.0], gamma=[0.0], beta=[0.8])
        out = arma_egarch_filter(params, self.r)
        self.assertAlmostEqual(np.log(out.h[-1]), 0.1 / (1 - 0.8), places=12)

    def test_hand_unrolled_recursion(self):
        r = np.array([0.3, -1.2, 0.5, 0.05, -0.4])
        params = TRUE_PARAMS
        mu, h, z = hand_filter(params, r)
        out = arma_egarch_filter(params, r)
        np.testing.assert_allclose(out.mu, mu, rtol=0, atol=1e-12)
        np.testing.assert_allclose(out.h, h, rtol=1e-12)
        np.testing.assert_allclose(out.z, z, rtol=0, atol=1e-12)
        self.assertAlmostEqual(out.loglik, float(np.sum(-0.5 * np.log(h) + dist_logpdf(params.dist, z))), places=10)

    def test_lengths_and_positive_variance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            params = ArmaEgarchParams(
                mu0=rng.uniform(-0.1, 0.1), phi=[rng.uniform(-0.5, 0.5)], theta=[rng.uniform(-0.5, 0.5)],
                omega=rng.uniform(-1, 1), alpha=list(rng.uniform(-0.2, 0.2, 2)), gamma=list(rng.uniform(-0.2, 0.2, 2)),
                beta=[rng.uniform(-0.9, 0.9)], dist=DistSpec(family="ged", shape=rng.uniform(1.0, 2.5)))
            out = arma_egarch_filter(params, self.r)
            self.assertEqual(len(out.mu), len(self.r))
            self.assertEqual(len(out.h), len(self.r))
            self.assertEqual(len(out.z), len(self.r))
            self.assertTrue(np.all(out.h > 0))
            np.testing.assert_allclose(out.residuals, self.r - out.mu, rtol=0, atol=1e-12)

    def test_too_short(self):
        with self.assertRaises(InsufficientDataError):
            arma_egarch_filter(TRUE_PARAMS, np.array([0.1]))

    def test_divergence(self):
        params = ArmaEgarchParams(omega=5.0, alpha=[0.0], gamma=[0.0], beta=[1.5])
        with self.assertRaises(NonFiniteLikelihoodError):
            arma_egarch_filter(params, self.r)


class TestLoglik(unittest.TestCase):
    def setUp(self):
        self.r = np.random.default_rng(2).standard_normal(400)

    def test_iid_normal(self):
        params = ArmaEgarchParams(omega=0.0, alpha=[0.0], gamma=[0.0], beta=[0.0])
        self.assertAlmostEqual(arma_egarch_loglik(params, self.r), float(np.sum(stats.norm.logpdf(self.r))),
                               places=9)

    def test_matches_filter(self):
        self.assertEqual(arma_egarch_loglik(TRUE_PARAMS, self.r), arma_egarch_filter(TRUE_PARAMS, self.r).loglik)

    def test_nested_variance_orders(self):
        small = TRUE_PARAMS
        large = small.model_copy(update={"alpha": [-0.08, 0.0], "gamma": [0.15, 0.0], "beta": [0.9, 0.0]})
        self.assertEqual(arma_egarch_loglik(large, self.r), arma_egarch_loglik(small, self.r))

    def test_nested_mean_orders(self):
        plain = ArmaEgarchParams(mu0=0.01, omega=-0.2)
        padded = ArmaEgarchParams(mu0=0.01, phi=[0.0], theta=[0.0], omega=-0.2, alpha=[0.0], gamma=[0.0], beta=[0.0])
        self.assertEqual(arma_egarch_loglik(padded, self.r), arma_egarch_loglik(plain, self.r))

    def test_gradient_against_central_differences(self):
        rng = np.random.default_rng(8)
        r = self.r[:200]
        for _ in range(5):
            params = TRUE_PARAMS.model_copy(update={
                "mu0": rng.uniform(-0.05, 0.05), "phi": [rng.uniform(-0.3, 0.3)], "theta": [rng.uniform(-0.3, 0.3)],
                "omega": rng.uniform(-0.3, 0.1), "alpha": [rng.uniform(-0.1, 0.1)], "gamma": [rng.uniform(0.0, 0.2)],
                "beta": [rng.uniform(0.5, 0.9)], "dist": DistSpec(family="student_t", shape=rng.uniform(5.0, 15.0))})
            gradient = loglik_gradient(params, r)
            vector = params.to_vector()
            manual = np.empty_like(vector)
            for index in range(vector.size):
                step = 1e-5 * max(abs(vector[index]), 1.0)
                up, down = vector.copy(), vector.copy()
                up[index] += step
                down[index] -= step
                manual[index] = (
                    arma_egarch_loglik(ArmaEgarchParams.from_vector(up, params.orders, params.dist.family), r)
                    - arma_egarch_loglik(ArmaEgarchParams.from_vector(down, params.orders, params.dist.family), r)
                ) / (2 * step)
            self.assertLess(np.linalg.norm(gradient - manual), 1e-4 * np.linalg.norm(manual) + 1e-6)


class TestSimulate(unittest.TestCase):
    def test_fixed_point_variance(self):
        params = ArmaEgarchParams(omega=-0.2, alpha=[0.0], gamma=[0.0], beta=[0.6])
        r = simulate_arma_egarch(params, 100_000, seed=4)
        target = np.exp(-0.2 / (1 - 0.6))
        self.assertLess(abs(np.mean(r ** 2) / target - 1.0), 0.05)

    def test_deterministic(self):
        np.testing.assert_array_equal(simulate_arma_egarch(TRUE_PARAMS, 200, seed=3),
                                      simulate_arma_egarch(TRUE_PARAMS, 200, seed=3))

    def test_family_reduction(self):
        symmetric = TRUE_PARAMS.model_copy(update={"dist": DistSpec(family="normal")})
        skewed = TRUE_PARAMS.model_copy(update={"dist": DistSpec(family="skew_normal", skew=1.0)})
        np.testing.assert_array_equal(simulate_arma_egarch(symmetric, 300, seed=9),
                                      simulate_arma_egarch(skewed, 300, seed=9))

    def test_filter_reproduces_simulated_variance(self):
        r, h = simulate_arma_egarch(TRUE_PARAMS, 2000, burn=0, seed=21, return_variance=True)
        filtered = arma_egarch_filter(TRUE_PARAMS, r)
        np.testing.assert_allclose(filtered.h[500:], h[500:], rtol=1e-10)

    def test_explosive(self):
        params = ArmaEgarchParams(omega=1.0, alpha=[0.0], gamma=[0.0], beta=[1.5])
        with self.assertRaises(NonFiniteLikelihoodError):
            simulate_arma_egarch(params, 2000, seed=1)

    def test_invalid_length(self):
        with self.assertRaises(InvalidParameterError):
            simulate_arma_egarch(TRUE_PARAMS, 0)


class TestFit(unittest.TestCase):
    def test_recovery(self):
        spec = ArmaEgarchSpec(orders=EGARCH11, family="skew_student_t")
        truth = TRUE_PARAMS.to_vector()
        recovered = 0
        for seed in (101, 202, 303):
            r = simulate_arma_egarch(TRUE_PARAMS, 3000, seed=seed)
            fit = fit_arma_egarch(spec, r, seed=seed)
            self.assertTrue(np.all(fit.se[np.isfinite(fit.se)] >= 0))
            finite = fit.pvalues[np.isfinite(fit.pvalues)]
            self.assertTrue(np.all((finite >= 0) & (finite <= 1)))
            if np.all(np.abs(fit.params.to_vector() - truth) <= 3 * fit.se):
                recovered += 1
        self.assertGreaterEqual(recovered, 2)

    def test_deterministic(self):
        spec = ArmaEgarchSpec(orders=ArmaEgarchOrders(p_mean=0, q_mean=0, p_var=1, q_var=1), family="normal")
        r = simulate_arma_egarch(TRUE_PARAMS.model_copy(update={"dist": DistSpec(family="normal")}), 500, seed=5)
        opts = OptimizerConfig(starts=2)
        first = fit_arma_egarch(spec, r, opts, seed=1)
        second = fit_arma_egarch(spec, r, opts, seed=1)
        np.testing.assert_array_equal(first.params.to_vector(), second.params.to_vector())
        self.assertEqual(set(first.information_criteria), {"aic", "bic", "hqic", "shibata"})
        self.assertEqual(first.information_criteria, information_criteria(first))

    def test_constant_series(self):
        with self.assertRaises(DegenerateSeriesError):
            fit_arma_egarch(ArmaEgarchSpec(), np.full(200, 0.01))

    def test_serialization_round_trip(self):
        spec = ArmaEgarchSpec(orders=ArmaEgarchOrders(p_mean=1, q_mean=0, p_var=1, q_var=1), family="student_t")
        r = simulate_arma_egarch(TRUE_PARAMS.model_copy(update={"theta": [], "dist": DistSpec(family="student_t",
                                                                                             shape=6.0)}),
                                 600, seed=12)
        fit = fit_arma_egarch(spec, r, OptimizerConfig(starts=1), seed=0, ticker="AXA")
        payload = fit.to_dict()
        self.assertEqual([row["parameter"] for row in payload["parameters"]],
                         ["mu", "phi_1", "omega", "alpha_1", "beta_1", "gamma_1", "shape"])
        params = ArmaEgarchParams.from_payload(payload)
        self.assertEqual(params, fit.params)
        restored = UnivariateFit.from_dict(payload, filter=arma_egarch_filter(params, r))
        self.assertEqual(restored.ticker, "AXA")
        self.assertEqual(restored.filter.loglik, fit.filter.loglik)
        np.testing.assert_array_equal(restored.se, fit.se)

    def test_select_margin_distribution(self):
        orders = ArmaEgarchOrders(p_mean=0, q_mean=0, p_var=1, q_var=1)
        params = ArmaEgarchParams(omega=-0.1, alpha=[-0.05], gamma=[0.1], beta=[0.9],
                                  dist=DistSpec(family="student_t", shape=5.0))
        r = simulate_arma_egarch(params, 1500, seed=31)
        fit, table = select_margin_distribution(r, orders, families=("normal", "student_t"),
                                                opts=OptimizerConfig(starts=2))
        self.assertEqual(fit.params.dist.family, "student_t")
        self.assertLess(table["student_t"]["bic"], table["normal"]["bic"])

    def test_select_requires_families(self):
        with self.assertRaises(InvalidParameterError):
            select_margin_distribution(np.ones(10), EGARCH11, families=())


if __name__ == "__main__":
    unittest.main()
