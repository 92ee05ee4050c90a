"""
Tests des constantes explicites, des rapports de bornes, des taux et des suites de validation.
"""

import os
import unittest
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose

from analysis.bounds import BoundReport, apriori_reports
from analysis.constants import BoundConstants, ac_constant, fg_bound, moment_constant, quantitative_bound, r_big
from analysis.rates import (
    ConvergenceRecord, calibrate_c_d, conditional_expectation_sweep, fit_power_law, fit_rate,
    graphon_field_variation, mean_errors, sampling_rate_experiment
)
from analysis.stability import stability_envelope
from analysis.validation import (
    SuiteResult, ValidationSummary, approximation_suite, counterexample_suite, dynamics_suite, metric_suite,
    scheme_suite
)
from config.experiment import load_config
from discretize.partition import equipartition, refine
from discretize.sampling import sample_initial
from dynamics.curves import empirical_curve
from dynamics.particles import solve_particles
from dynamics.picard import flow_picard
from dynamics.time_grid import TimeGrid
from fields.catalogue import build_field
from fields.label_drift_field import label_drift_field, zero_field
from fields.linear_field import linear_field
from measures.builtins import step_measure
from measures.marginal import LabelMarginal
from utils.exceptions import FitError, PreconditionError, ValidationError

SLOW = os.environ.get("FIBRED_SLOW_TESTS") == "1"
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class TestConstants(unittest.TestCase):

    def test_support_radius(self):
        self.assertEqual(r_big(1.0, 0.0), 1.0)
        self.assertAlmostEqual(r_big(0.0, 1.0), np.exp(2.0))
        self.assertAlmostEqual(r_big(1.0, 0.5), 1.5 * np.e)
        with self.assertRaises(ValidationError):
            r_big(-1.0, 0.5)

    def test_moment_constants(self):
        self.assertAlmostEqual(moment_constant(2.0, 0.0), 2.0)
        self.assertAlmostEqual(ac_constant(1.0, 0.5), 3.0 * np.e)

    def test_sampling_bound(self):
        self.assertAlmostEqual(fg_bound(2.0, 1, 100, 0.5), 0.1)
        self.assertAlmostEqual(fg_bound(1.0, 2, 100), np.log(101.0) / 10.0)
        with self.assertRaises(ValidationError):
            fg_bound(1.0, 1, 0)

    def test_quantitative_bound(self):
        constants = BoundConstants.from_norms(0.5, 1.0)
        self.assertAlmostEqual(constants.C_T, np.exp(0.5))
        values = [quantitative_bound(1.0, 0.5, 1.0, 1, N, constants) for N in (8, 64, 512, 4096)]
        self.assertTrue(all(a > b for a, b in zip(values[:-1], values[1:])))
        assert_allclose(values[0], constants.D_r * 2.0 / 2.0 + constants.D_r / 2.0)
        self.assertEqual(quantitative_bound(0.0, 0.0, 0.0, 2, 64, constants), 0.0)
        with_n = quantitative_bound(1.0, 0.0, 0.0, 1, 64, constants, n=4)
        self.assertAlmostEqual(with_n, constants.D_r / 4.0)
        with self.assertRaises(ValidationError):
            quantitative_bound(-1.0, 0.0, 0.0, 1, 64, constants)
        with self.assertRaises(ValidationError):
            quantitative_bound(1.0, 0.0, 0.0, 1, 0, constants)


class TestBoundReport(unittest.TestCase):

    def test_compare(self):
        report = BoundReport.compare("ok", 1.0, 2.0, 0.5)
        self.assertTrue(report.passed)
        self.assertEqual(report.slack, 1.0)
        self.assertEqual(report.to_dict()["t"], 0.5)
        with self.assertLogs("analysis.bounds", level="WARNING"):
            report = BoundReport.compare("ko", 2.0, 1.0)
        self.assertFalse(report.passed)
        self.assertTrue(BoundReport.compare("tol", 1.0 + 1e-9, 1.0, tol=1e-6).passed)

    def test_worst_node(self):
        report = BoundReport.worst("w", np.array([0.1, 0.5, 0.2]), np.array([1.0, 0.6, 1.0]),
                                   np.array([0.0, 0.5, 1.0]))
        self.assertEqual(report.t, 0.5)
        self.assertAlmostEqual(report.slack, 0.1)

    def test_summary(self):
        good = SuiteResult("a", [BoundReport.compare("x", 0.0, 1.0)])
        with self.assertLogs("analysis.bounds", level="WARNING"):
            bad = SuiteResult("b", [BoundReport.compare("y", 2.0, 1.0)])
        summary = ValidationSummary([good, bad])
        self.assertFalse(summary.all_passed)
        self.assertEqual([name for name, _ in summary.failures()], ["b"])
        self.assertEqual(summary.to_dict()["suites"][0]["passed"], True)


class TestAprioriReports(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.mu0 = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.5], [1.5]], None), ([[-1.0], [2.0]], None)])
        self.coarse = equipartition(self.pi, 2)
        self.sample = sample_initial(self.mu0, self.coarse, 4, seed=3)
        self.grid = TimeGrid(1.0, 20)

    def check(self, field):
        traj = solve_particles(field, refine(self.coarse, 4), self.coarse, self.sample, self.grid)
        reports = apriori_reports(empirical_curve(traj), field, traj)
        self.assertEqual({r.name for r in reports},
                         {"support_radius", "fibre_moment", "absolute_continuity",
                          "marginal_invariance", "particle_max"})
        for report in reports:
            self.assertTrue(report.passed, report.to_dict())

    def test_zero_field(self):
        self.check(zero_field())

    def test_linear_field(self):
        self.check(linear_field(-1.0, 0.5))


class TestModelDynamics(unittest.TestCase):
    """Suite dynamique sur les modèles fournis, à N = 400 et T = 2 en mode long."""

    def run_suite(self, name):
        config = load_config(CONFIGS / name)
        field = config.build_field()
        mu0 = config.build_initial()
        n, m, steps = (20, 20, 200) if SLOW else (4, 9, 40)
        suite = dynamics_suite(field, mu0, n, m, TimeGrid(2.0, steps), config.run_seed(n, m),
                               config.integrator, config.quadrature)
        self.assertFalse(field.growth.moment_free)
        self.assertEqual(suite.details["N"], n * m)
        self.assertTrue(suite.passed, [r.to_dict() for r in suite.reports if not r.passed])
        self.assertIn("fibre_moment", {r.name for r in suite.reports})
        return suite

    def test_kuramoto(self):
        self.run_suite("kuramoto.json")

    def test_michaelis_menten(self):
        suite = self.run_suite("michaelis_menten.json")
        self.assertEqual(suite.details["hypotheses"]["passed"], True)


class TestStability(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.grid = TimeGrid(1.0, 20)
        self.mu0 = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.0]], None), ([[1.0]], None)])
        self.nu0 = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.5]], None), ([[2.0]], None)])

    def test_zero_field_is_tight(self):
        field = zero_field()
        curve_mu, _ = flow_picard(field, self.mu0, self.grid)
        curve_nu, _ = flow_picard(field, self.nu0, self.grid)
        reports = stability_envelope(curve_mu, curve_nu, field)
        self.assertEqual(len(reports), len(self.grid))
        for report in reports:
            self.assertTrue(report.passed)
            self.assertAlmostEqual(report.lhs, 0.75)
            self.assertAlmostEqual(report.rhs, 0.75)

    def test_mean_field_envelope(self):
        field = linear_field(0.0, 0.5)
        curve_mu, _ = flow_picard(field, self.mu0, self.grid)
        curve_nu, _ = flow_picard(field, self.nu0, self.grid)
        self.assertTrue(all(r.passed for r in stability_envelope(curve_mu, curve_nu, field)))

    def test_grid_mismatch(self):
        field = zero_field()
        curve_mu, _ = flow_picard(field, self.mu0, self.grid)
        curve_nu, _ = flow_picard(field, self.nu0, TimeGrid(1.0, 10))
        with self.assertRaises(ValidationError):
            stability_envelope(curve_mu, curve_nu, field)

    def test_support_outside_ball(self):
        fast = label_drift_field([0.0, 1.0], [50.0])
        slow = zero_field()
        curve_mu, _ = flow_picard(fast, self.mu0, self.grid)
        curve_nu, _ = flow_picard(slow, self.nu0, self.grid)
        with self.assertRaises(PreconditionError):
            stability_envelope(curve_mu, curve_nu, slow)


class TestRates(unittest.TestCase):

    def test_power_law_slopes(self):
        xs = np.array([8.0, 64.0, 512.0, 4096.0])
        fit = fit_power_law(xs, 3.0 * xs ** (-1.0 / 3.0))
        self.assertAlmostEqual(fit.slope, -1.0 / 3.0)
        self.assertAlmostEqual(fit.intercept, np.log(3.0))
        self.assertAlmostEqual(fit.residual, 0.0)
        self.assertEqual(len(fit.points), 4)
        self.assertAlmostEqual(fit_power_law(xs, xs ** -0.5).slope, -0.5)

    def test_power_law_errors(self):
        with self.assertRaises(FitError):
            fit_power_law([4.0, 4.0, 4.0], [1.0, 2.0, 3.0])
        with self.assertRaises(FitError):
            fit_power_law([1.0, 2.0], [1.0, 0.0])

    def test_records(self):
        with self.assertRaises(ValidationError):
            ConvergenceRecord(N=10, n=2, m=4, seed=0, sup_t_error=0.1)
        with self.assertRaises(ValidationError):
            ConvergenceRecord(N=8, n=2, m=4, seed=0, sup_t_error=-0.1)
        record = ConvergenceRecord(N=8, n=2, m=4, seed=1, sup_t_error=0.1, runtime_seconds=2.0)
        self.assertNotIn("runtime_seconds", record.to_dict(with_runtime=False))
        self.assertEqual(record.to_dict()["runtime_seconds"], 2.0)

    def test_fit_rate_on_seed_means(self):
        records = []
        for n in (2, 4, 8, 16):
            N = n ** 3
            for seed, factor in enumerate((0.9, 1.1)):
                records.append(ConvergenceRecord(N, n, n * n, seed, factor * N ** (-1.0 / 3.0)))
        summary = mean_errors(records)
        self.assertEqual(list(summary), [8, 64, 512, 4096])
        self.assertAlmostEqual(summary[8][0], 0.5)
        self.assertAlmostEqual(summary[8][1], 0.05)
        self.assertAlmostEqual(fit_rate(records).slope, -1.0 / 3.0)
        with self.assertRaises(FitError):
            fit_rate(records[:6])

    def test_calibration(self):
        calibration = calibrate_c_d(1, ms=(100, 1000), seeds=5, seed=1)
        self.assertGreater(calibration.C_d, 0.0)
        self.assertEqual([m for m, _ in calibration.gaps], [100, 1000])
        self.assertEqual(calibration.radius, 1.0)
        again = calibrate_c_d(1, ms=(100, 1000), seeds=5, seed=1)
        self.assertEqual(calibration.C_d, again.C_d)

    def test_sampling_rate(self):
        pi = LabelMarginal.uniform()
        mu0 = step_measure(pi, [0.0, 0.5, 1.0], [([[0.0], [1.0]], None), ([[2.0], [3.0], [5.0]], None)])
        seeds = 20 if SLOW else 5
        rate = sampling_rate_experiment(mu0, equipartition(pi, 2), ms=(16, 256, 4096), seeds=seeds)
        self.assertEqual(len(rate.gaps), 3)
        self.assertLess(rate.fit.slope, 0.0)

    def test_conditional_expectation(self):
        pi = LabelMarginal.uniform()
        mu0 = step_measure(pi, [0.0, 0.3, 1.0], [([[0.0]], None), ([[1.0]], None)])
        steps = conditional_expectation_sweep(mu0, (2, 4))
        assert_allclose([s.distance for s in steps], [0.24, 0.08], atol=1e-12)
        assert_allclose([s.bound for s in steps], [0.5, 0.25])

    def test_field_variation(self):
        pi = LabelMarginal.uniform()
        graphon = build_field({"type": "graphon", "interaction": {"type": "other_state"},
                               "kernel": {"type": "step", "breaks": [0, 0.5, 1], "values": [[1, 0], [0, 1]]}})
        self.assertAlmostEqual(graphon_field_variation(graphon, pi, 3.0), 6.0)
        drift = label_drift_field([0.0, 0.5, 1.0], [1.0, -1.0])
        self.assertAlmostEqual(graphon_field_variation(drift, pi, 3.0), 2.0)
        self.assertEqual(graphon_field_variation(zero_field(), pi, 3.0), 0.0)
        with self.assertRaises(ValidationError):
            graphon_field_variation(build_field({"type": "mm"}), pi, 3.0)


class TestSuites(unittest.TestCase):

    def test_metric_suite(self):
        suite = metric_suite(configs=4, ordering_pairs=4, duality_pairs=3, seed=5)
        self.assertTrue(suite.passed, [r.to_dict() for r in suite.reports if not r.passed])
        self.assertEqual(len(suite.reports), 4 * 2 + 4 + 3)

    def test_counterexample_suite(self):
        suite = counterexample_suite(steps=200 if SLOW else 50)
        self.assertTrue(suite.passed, [r.to_dict() for r in suite.reports if not r.passed])

    def test_scheme_suite(self):
        config = load_config(CONFIGS / "kuramoto.json")
        suite = scheme_suite(config.build_field(), config.build_initial(), config.T, q=config.quadrature)
        self.assertTrue(suite.passed, [r.to_dict() for r in suite.reports if not r.passed])
        gaps = suite.details["gaps"]
        self.assertEqual(len(gaps), 3)
        for previous, current in zip(gaps[:-1], gaps[1:]):
            self.assertGreaterEqual(current / previous, 0.4)
            self.assertLessEqual(current / previous, 0.6)
        names = [r.name for r in suite.reports]
        self.assertEqual(names.count("scheme_gap_ratio"), 2)
        self.assertEqual(names.count("scheme_gap_ratio_floor"), 2)
        self.assertEqual(names.count("picard_contraction"), 3)

    def test_scheme_suite_rejects_fast_collapse(self):
        config = load_config(CONFIGS / "kuramoto.json")
        with self.assertLogs("analysis.bounds", level="WARNING"):
            suite = scheme_suite(config.build_field(), config.build_initial(), config.T, levels=2,
                                 min_ratio=0.55, q=config.quadrature)
        self.assertFalse(suite.passed)
        failed = [r.name for r in suite.reports if not r.passed]
        self.assertEqual(failed, ["scheme_gap_ratio_floor"])

    def test_approximation_suite(self):
        mu0 = step_measure(LabelMarginal.uniform(), [0.0, 0.3, 1.0], [([[0.0]], None), ([[1.0]], None)])
        suite = approximation_suite(mu0, (2, 4, 8, 16, 32))
        self.assertTrue(suite.passed)
        self.assertEqual(len(suite.details["steps"]), 5)


if __name__ == "__main__":
    unittest.main()
