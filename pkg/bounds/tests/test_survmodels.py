import warnings

import numpy as np
from django.test import SimpleTestCase

from bounds.datamodel import Dataset
from bounds.exceptions import ConfigurationError, DomainError, FitError
from bounds.survmodels import (
    BeranModel,
    CoxConfig,
    CoxModel,
    KaplanMeierModel,
    SurvivalCurve,
    WeibullModel,
    _weibull_terms,
    breslow_increments,
    fit_beran,
    fit_cox,
    fit_km,
    fit_model,
    fit_weibull,
    hazard_increments,
    model_from_dict,
    quantile,
)


def hand_fixture():
    return Dataset(np.zeros((5, 1)), [1.0, 2.0, 2.0, 3.0, 4.0], [1, 1, 0, 1, 0])


def random_curve(rng, size=None):
    size = size or int(rng.integers(1, 30))
    times = np.cumsum(rng.uniform(0.1, 1.0, size))
    probs = np.cumprod(rng.uniform(0.5, 1.0, size))
    # some flat steps
    flat = rng.uniform(size=size) < 0.2
    for k in np.flatnonzero(flat):
        if k > 0:
            probs[k] = probs[k - 1]
    return SurvivalCurve(times, np.minimum.accumulate(probs))


class SurvivalCurveTests(SimpleTestCase):

    def setUp(self):
        self.curve = SurvivalCurve([1.0, 2.0], [0.8, 0.5])

    def test_right_continuous_evaluation(self):
        self.assertEqual(self.curve(0.5), 1.0)
        self.assertEqual(self.curve(1.0), 0.8)
        self.assertEqual(self.curve.left_limit(1.0), 1.0)
        self.assertEqual(self.curve(3.0), 0.5)

    def test_rejects_increasing_probabilities(self):
        with self.assertRaises(DomainError):
            SurvivalCurve([1.0, 2.0], [0.5, 0.8])

    def test_quantile_examples(self):
        self.assertEqual(quantile(self.curve, 0.8).time, 1.0)
        self.assertEqual(quantile(self.curve, 0.9).time, 1.0)
        self.assertEqual(quantile(self.curve, 0.5).time, 2.0)
        self.assertEqual(quantile(self.curve, 1.0).time, 0.0)

    def test_quantile_saturates_at_grid_end(self):
        result = quantile(self.curve, 0.4)
        self.assertEqual(result.time, 2.0)
        self.assertTrue(result.saturated)

    def test_quantile_rejects_level_outside_unit_interval(self):
        with self.assertRaises(DomainError):
            quantile(self.curve, 1.5)

    def test_hazard_increments_of_two_jump_curve(self):
        increments = hazard_increments(self.curve)
        np.testing.assert_allclose(increments.d_lambda, [0.2, 0.375])

    def test_quantile_inverse_consistency(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            curve = random_curve(rng)
            level = float(rng.uniform(0.0, 1.0))
            result = quantile(curve, level)
            index = int(np.searchsorted(curve.times, result.time))
            if result.saturated:
                self.assertTrue(np.all(curve.probs > level))
                continue
            self.assertLessEqual(curve(result.time), level)
            if index > 0:
                self.assertGreater(curve.probs[index - 1], level)

    def test_product_integral_reconstruction(self):
        rng = np.random.default_rng(23)
        for _ in range(1000):
            curve = random_curve(rng)
            increments = hazard_increments(curve)
            np.testing.assert_allclose(increments.survival_at(curve.times), curve.probs, rtol=1e-12, atol=1e-14)


class KaplanMeierTests(SimpleTestCase):

    def test_event_curve_matches_hand_computation(self):
        model = fit_km(hand_fixture(), 'event')
        np.testing.assert_array_equal(model.grid, [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_allclose(model.probs, [0.8, 0.6, 0.3, 0.3])

    def test_censoring_curve_matches_hand_computation(self):
        model = fit_km(hand_fixture(), 'censoring')
        np.testing.assert_allclose(model.probs, [1.0, 0.75, 0.75, 0.0])

    def test_unknown_role(self):
        with self.assertRaises(ConfigurationError):
            fit_km(hand_fixture(), 'both')


class BeranTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(4)
        w = rng.uniform(0, 4, size=(200, 1))
        t = rng.exponential(np.exp(0.5 * w[:, 0]))
        c = rng.exponential(3.0, size=200)
        self.train = Dataset.from_full(w, t, c)

    def test_large_bandwidth_recovers_kaplan_meier(self):
        beran = fit_beran(self.train, 'event', bandwidth=1e8)
        km = fit_km(self.train, 'event')
        W = np.linspace(0, 4, 7).reshape(-1, 1)
        np.testing.assert_allclose(beran.curves(W).probs, km.curves(W).probs, atol=1e-9)

    def test_curves_are_nonincreasing_in_unit_interval(self):
        probs = fit_beran(self.train, 'event').curves(np.linspace(0, 4, 25).reshape(-1, 1)).probs
        self.assertTrue(np.all(np.diff(probs, axis=1) <= 1e-15))
        self.assertTrue(np.all((probs >= 0) & (probs <= 1)))

    def test_needs_one_covariate(self):
        train = Dataset(np.zeros((4, 2)), [1.0, 2.0, 3.0, 4.0], [1, 1, 1, 1])
        with self.assertRaises(ConfigurationError):
            fit_beran(train, 'event')

    def test_sparse_query_is_logged(self):
        model = fit_beran(self.train, 'event', bandwidth=0.01)
        with self.assertLogs('bounds.survmodels', level='WARNING'):
            model.curves(np.array([[40.0]]))


class CoxTests(SimpleTestCase):

    def test_recovers_coefficients(self):
        rng = np.random.default_rng(8)
        n = 2000
        beta = np.array([0.8, -0.5])
        w = rng.normal(size=(n, 2))
        t = rng.exponential(1.0 / np.exp(w @ beta))
        c = rng.exponential(2.0, size=n)
        model = fit_cox(Dataset.from_full(w, t, c), 'event')
        np.testing.assert_allclose(model.coefficients, beta, atol=0.1)

    def test_constant_covariate_reduces_to_kaplan_meier(self):
        rng = np.random.default_rng(12)
        t = np.round(rng.exponential(size=60), 1) + 0.1
        c = np.round(rng.exponential(2.0, size=60), 1) + 0.1
        train = Dataset.from_full(np.zeros((60, 1)), t, c)
        cox = fit_cox(train, 'event')
        km = fit_km(train, 'event')
        np.testing.assert_allclose(cox.curve([0.0]).probs, km.curve([0.0]).probs, atol=1e-12)

    def test_no_events(self):
        train = Dataset(np.arange(5.0).reshape(-1, 1), [1.0, 2.0, 3.0, 4.0, 5.0], [0, 0, 0, 0, 0])
        with self.assertRaises(FitError):
            fit_cox(train, 'event')

    def test_non_convergence_carries_diagnostics(self):
        rng = np.random.default_rng(1)
        w = rng.normal(size=(100, 1))
        train = Dataset.from_full(w, rng.exponential(np.exp(w[:, 0])), rng.exponential(2.0, size=100))
        with self.assertRaises(FitError) as ctx:
            fit_cox(train, 'event', CoxConfig(max_iter=0))
        self.assertIn('iterations', ctx.exception.diagnostics)

    def test_single_event_among_n_at_risk(self):
        for n in (1, 2, 7, 50):
            with self.subTest(n=n):
                indicator = np.zeros(n)
                indicator[0] = 1.0
                grid, increments = breslow_increments(np.arange(1.0, n + 1), indicator, np.ones(n))
                self.assertEqual(increments[0], 1.0 / n)
                np.testing.assert_array_equal(increments[1:], 0.0)
                _, tied = breslow_increments(np.full(n, 2.0), indicator, np.ones(n))
                np.testing.assert_array_equal(tied, [1.0 / n])

    def test_exponential_baseline_form(self):
        rng = np.random.default_rng(2)
        w = rng.normal(size=(300, 1))
        train = Dataset.from_full(w, rng.exponential(np.exp(-w[:, 0])), rng.exponential(2.0, size=300))
        model = fit_cox(train, 'event', CoxConfig(baseline_form='exponential'))
        probs = model.curves(np.array([[0.0], [1.0]])).probs
        self.assertTrue(np.all(probs[1] <= probs[0] + 1e-15))


class WeibullTests(SimpleTestCase):

    def test_recovers_shape(self):
        rng = np.random.default_rng(31)
        n, shape = 5000, 1.25
        w = rng.uniform(0, 2, size=(n, 1))
        log_t = 0.5 + 0.7 * w[:, 0] + np.log(rng.exponential(size=n)) / shape
        c = rng.exponential(40.0, size=n)
        model = fit_weibull(Dataset.from_full(w, np.exp(log_t), c), 'event')
        self.assertAlmostEqual(model.shape, shape, delta=0.05)
        self.assertAlmostEqual(model.coefficients[0], 0.7, delta=0.1)

    def test_needs_events(self):
        train = Dataset(np.zeros((3, 1)), [1.0, 2.0, 3.0], [1, 0, 0])
        with self.assertRaises(FitError):
            fit_weibull(train, 'event')

    def test_overflowing_trial_step_is_silent(self):
        rng = np.random.default_rng(17)
        X = np.column_stack([np.ones(20), rng.normal(size=(20, 9))])
        log_y = np.log(rng.exponential(size=20))
        indicator = (rng.uniform(size=20) < 0.7).astype(float)
        params = np.r_[np.full(10, 50.0), -800.0]
        with warnings.catch_warnings():
            warnings.simplefilter('error', RuntimeWarning)
            loglik, _, _ = _weibull_terms(params, X, log_y, indicator)
        self.assertFalse(np.isfinite(loglik))


class ModelDocumentTests(SimpleTestCase):

    def test_fitted_models_survive_serialization(self):
        rng = np.random.default_rng(6)
        w = rng.uniform(0, 4, size=(150, 1))
        train = Dataset.from_full(w, rng.exponential(np.exp(0.3 * w[:, 0])), rng.exponential(4.0, size=150))
        W = np.linspace(0, 4, 5).reshape(-1, 1)
        for kind in ('km', 'beran', 'cox', 'weibull'):
            model = fit_model(kind, train, 'event')
            restored = model_from_dict(model.to_dict())
            self.assertIsInstance(restored, type(model))
            np.testing.assert_allclose(restored.curves(W).probs, model.curves(W).probs, rtol=1e-12)

    def test_auto_kind_follows_dimension(self):
        rng = np.random.default_rng(9)
        w1 = rng.uniform(size=(80, 1))
        w3 = rng.uniform(size=(80, 3))
        t, c = rng.exponential(size=80), rng.exponential(2.0, size=80)
        self.assertIsInstance(fit_model('auto', Dataset.from_full(w1, t, c), 'event'), BeranModel)
        self.assertIsInstance(fit_model('auto', Dataset.from_full(w3, t, c), 'event'), WeibullModel)
        self.assertIsInstance(fit_model('auto', Dataset.from_full(w3, t, c), 'censoring'), CoxModel)

    def test_unknown_kind(self):
        with self.assertRaises(ConfigurationError):
            model_from_dict({'kind': 'forest'})
        with self.assertRaises(ConfigurationError):
            fit_model('forest', hand_fixture(), 'event')

    def test_kaplan_meier_document(self):
        model = KaplanMeierModel('event', [1.0, 2.0], [0.8, 0.5], 1)
        self.assertEqual(model.to_dict()['probs'], [0.8, 0.5])


class CurveValidityTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(23)
        w = rng.normal(size=(400, 2))
        t = rng.exponential(np.exp(0.4 * w[:, 0] - 0.3 * w[:, 1]))
        c = rng.exponential(2.5, size=400)
        self.train = Dataset.from_full(w, t, c)
        self.W = np.random.default_rng(24).normal(scale=3.0, size=(1000, 2))

    def test_curves_at_random_covariates(self):
        for kind in ('km', 'cox', 'weibull'):
            for role in ('event', 'censoring'):
                with self.subTest(kind=kind, role=role):
                    probs = fit_model(kind, self.train, role).curves(self.W).probs
                    self.assertEqual(probs.shape[0], 1000)
                    self.assertTrue(np.all(np.isfinite(probs)))
                    self.assertTrue(np.all((probs >= 0) & (probs <= 1)))
                    self.assertTrue(np.all(np.diff(probs, axis=1) <= 1e-15))
