import numpy as np
from django.test import SimpleTestCase

from bounds.calibrate import (
    CalibrationResult,
    TauGrid,
    default_grid,
    finalize,
    make_lpb,
    select,
    select_apac,
    select_marginal,
    sweep,
)
from bounds.exceptions import ConfigurationError, DomainError, NoSelectionError
from bounds.onestep import CoverageReport
from bounds.simgen import generate, get_setting
from bounds.survmodels import KaplanMeierModel, fit_beran


def report(tau, psi_hat, sigma_hat=0.0, n_cal=100):
    return CoverageReport(tau=tau, psi_hat=psi_hat, plug_in=psi_hat, sigma_hat=sigma_hat, clb=psi_hat, n_cal=n_cal)


def selected_or_below_grid(result):
    return -1.0 if result.selected_tau is None else result.selected_tau


class CappedQuantileTests(SimpleTestCase):

    def setUp(self):
        grid = np.arange(1.0, 11.0)
        self.flat_s = KaplanMeierModel('event', grid, np.ones(10), 1)
        self.steep_s = KaplanMeierModel('event', grid, [0.9, 0.7, 0.4, 0.2, 0.1, 0.05, 0.0, 0.0, 0.0, 0.0], 1)
        self.g = KaplanMeierModel('censoring', np.arange(1.0, 8.0), [0.9, 0.8, 0.5, 0.3, 0.1, 0.01, 1e-4], 1)

    def test_zero_tau_gives_zero_bound(self):
        lpb = make_lpb(self.steep_s, self.g, 0.0)
        np.testing.assert_array_equal(lpb(np.array([[0.0], [1.0]])), [0.0, 0.0])

    def test_censoring_cap_binds(self):
        lpb = make_lpb(self.flat_s, self.g, 0.5, eta2=1e-3)
        self.assertEqual(lpb(np.array([[0.0]]))[0], 7.0)

    def test_event_quantile_binds(self):
        lpb = make_lpb(self.steep_s, self.g, 0.5, eta2=1e-3)
        self.assertEqual(lpb(np.array([[0.0]]))[0], 3.0)

    def test_bad_levels(self):
        with self.assertRaises(DomainError):
            make_lpb(self.steep_s, self.g, 1.0)
        with self.assertRaises(DomainError):
            make_lpb(self.steep_s, self.g, 0.5, eta2=0.0)

    def test_roles_are_checked(self):
        with self.assertRaises(ConfigurationError):
            make_lpb(self.g, self.steep_s, 0.5)

    def test_bound_is_monotone_in_tau(self):
        train = generate(get_setting(2), 300, 8)
        s_model = fit_beran(train, 'event')
        g_model = fit_beran(train, 'censoring')
        W = np.random.default_rng(1).uniform(0, 4, size=(1000, 1))
        previous = np.zeros(len(W))
        for tau in np.linspace(0.0, 0.95, 20):
            current = make_lpb(s_model, g_model, tau)(W)
            self.assertTrue(np.all(current >= previous))
            previous = current


class SweepTests(SimpleTestCase):

    def setUp(self):
        data = generate(get_setting(1), 400, 3)
        self.train = data.subset(np.arange(200))
        self.cal = data.subset(np.arange(200, 400))
        self.s_model = fit_beran(self.train, 'event')
        self.g_model = fit_beran(self.train, 'censoring')

    def test_zero_grid_plug_in_is_one(self):
        (only,) = sweep(self.s_model, self.g_model, self.cal, TauGrid((0.0,)))
        self.assertEqual(only.plug_in, 1.0)
        self.assertEqual(only.psi_hat, 1.0)
        self.assertEqual(only.n_cal, 200)

    def test_reports_follow_grid_order(self):
        grid = default_grid(10, 0.9)
        reports = sweep(self.s_model, self.g_model, self.cal, grid)
        self.assertEqual([r.tau for r in reports], list(grid))
        plug = [r.plug_in for r in reports]
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(plug, plug[1:])))

    def test_sweep_matches_single_level_estimate(self):
        from bounds.onestep import EifContext, one_step
        reports = sweep(self.s_model, self.g_model, self.cal, TauGrid((0.0, 0.3)))
        ctx = EifContext(self.s_model, self.g_model, make_lpb(self.s_model, self.g_model, 0.3))
        direct = one_step(ctx, self.cal)
        self.assertAlmostEqual(reports[1].psi_hat, direct.psi_hat, places=12)
        self.assertAlmostEqual(reports[1].sigma_hat, direct.sigma_hat, places=12)


class SelectionTests(SimpleTestCase):

    def test_apac_stops_at_first_failure(self):
        reports = [report(0.1, 0.95), report(0.2, 0.93), report(0.3, 0.89), report(0.4, 0.94)]
        self.assertEqual(select_apac(reports, 0.1, 0.05).selected_tau, 0.2)

    def test_apac_all_pass(self):
        reports = [report(0.1, 0.99), report(0.2, 0.95)]
        self.assertEqual(select_apac(reports, 0.1, 0.05).selected_tau, 0.2)

    def test_apac_first_fails(self):
        reports = [report(0.1, 0.85), report(0.2, 0.95)]
        self.assertIsNone(select_apac(reports, 0.1, 0.05).selected_tau)

    def test_apac_recomputes_lower_bound(self):
        stale = CoverageReport(tau=0.1, psi_hat=0.95, plug_in=0.95, sigma_hat=0.5, clb=0.95, n_cal=100)
        result = select_apac([stale], 0.1, 0.05)
        self.assertIsNone(result.selected_tau)
        self.assertLess(result.reports[0].clb, 0.9)

    def test_marginal(self):
        reports = [report(0.1, 0.95, 0.4), report(0.2, 0.91, 0.4), report(0.3, 0.89, 0.4)]
        result = select_marginal(reports, 0.1)
        self.assertEqual(result.selected_tau, 0.2)
        self.assertIsNone(result.beta)

    def test_selection_ignores_report_order(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            k = int(rng.integers(1, 12))
            reports = [report(round(0.05 * i, 2), float(rng.uniform(0.85, 1.0)), float(rng.uniform(0, 0.5)))
                       for i in range(k)]
            shuffled = [reports[i] for i in rng.permutation(k)]
            for rule in ('apac', 'marginal'):
                self.assertEqual(select(reports, rule, 0.1, 0.05).selected_tau,
                                 select(shuffled, rule, 0.1, 0.05).selected_tau)

    def test_smaller_beta_is_more_conservative_and_apac_below_marginal(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            reports = [report(round(0.05 * i, 2), float(rng.uniform(0.85, 1.0)), float(rng.uniform(0, 0.5)))
                       for i in range(10)]
            loose = select_apac(reports, 0.1, 0.2)
            tight = select_apac(reports, 0.1, 0.01)
            marginal = select_marginal(reports, 0.1)
            self.assertLessEqual(selected_or_below_grid(tight), selected_or_below_grid(loose))
            self.assertLessEqual(selected_or_below_grid(loose), selected_or_below_grid(marginal))

    def test_unknown_rule_and_alpha(self):
        with self.assertRaises(ConfigurationError):
            select([report(0.1, 0.95)], 'greedy', 0.1, 0.05)
        with self.assertRaises(ConfigurationError):
            select_marginal([report(0.1, 0.95)], 1.5)


class FinalizeTests(SimpleTestCase):

    def setUp(self):
        grid = np.arange(1.0, 4.0)
        self.s_model = KaplanMeierModel('event', grid, [0.8, 0.5, 0.1], 1)
        self.g_model = KaplanMeierModel('censoring', grid, [0.9, 0.9, 0.9], 1)

    def test_selected_tau(self):
        result = CalibrationResult(0.3, (report(0.3, 0.95),), 'apac', 0.1, 0.05)
        self.assertEqual(finalize(result, self.s_model, self.g_model).tau, 0.3)

    def test_fallback_to_zero_bound(self):
        result = CalibrationResult(None, (report(0.3, 0.5),), 'apac', 0.1, 0.05)
        with self.assertLogs('bounds.calibrate', level='WARNING'):
            lpb = finalize(result, self.s_model, self.g_model)
        self.assertEqual(lpb.tau, 0.0)
        np.testing.assert_array_equal(lpb(np.array([[0.0]])), [0.0])

    def test_no_fallback(self):
        result = CalibrationResult(None, (report(0.3, 0.5),), 'marginal', 0.1, None)
        with self.assertRaises(NoSelectionError):
            finalize(result, self.s_model, self.g_model, fallback_zero=False)


class TauGridTests(SimpleTestCase):

    def test_default_grid(self):
        grid = default_grid()
        self.assertEqual(len(grid), 100)
        self.assertEqual(grid.values[0], 0.0)
        self.assertAlmostEqual(grid.values[-1], 0.99)
        self.assertEqual(default_grid(1).values, (0.0,))

    def test_invalid_grids(self):
        for values in ((), (0.2, 0.1), (0.1, 1.0), (-0.1,)):
            with self.subTest(values=values):
                with self.assertRaises(ConfigurationError):
                    TauGrid(values)
        with self.assertRaises(ConfigurationError):
            default_grid(0)
