"""
Tests des systèmes de particules, des schémas de référence et des courbes de mesures.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from discretize.partition import equipartition, refine
from discretize.sampling import sample_initial
from dynamics.barycentric import barycentric_curve
from dynamics.curves import curve_distance, empirical_curve
from dynamics.euler import delayed_euler_curve
from dynamics.particles import check_state, integrate, solve_auxiliary, solve_particles
from dynamics.picard import flow_picard
from dynamics.time_grid import TimeGrid
from fields.label_drift_field import label_drift_field, zero_field
from fields.linear_field import linear_field
from measures.builtins import step_measure
from measures.marginal import LabelMarginal
from utils.exceptions import BlowUpError, NoConvergenceError, ValidationError


class TestTimeGrid(unittest.TestCase):

    def test_nodes(self):
        grid = TimeGrid(2.0, 4)
        self.assertEqual(grid.dt, 0.5)
        self.assertEqual(len(grid), 5)
        assert_allclose(grid.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])
        self.assertEqual(grid.refine(3).steps, 12)

    def test_invalid_grid(self):
        for T, steps in ((0.0, 10), (-1.0, 10), (float("inf"), 10), (1.0, 0), (1.0, 2.5)):
            with self.assertRaises(ValidationError):
                TimeGrid(T, steps)


class TestParticleSystems(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.coarse = equipartition(self.pi, 2)
        self.fine = refine(self.coarse, 3)
        self.mu0 = step_measure(self.pi, [0.0, 0.5, 1.0],
                                [([[0.5], [1.5]], None), ([[-1.0], [2.0]], [0.5, 0.5])])
        self.sample = sample_initial(self.mu0, self.coarse, 3, seed=0)
        self.grid = TimeGrid(1.0, 50)

    def test_zero_field_keeps_particles(self):
        traj = solve_particles(zero_field(), self.fine, self.coarse, self.sample, self.grid)
        self.assertEqual(traj.states.shape, (51, 6, 1))
        for s in range(len(self.grid)):
            assert_allclose(traj.states[s], self.sample.points)

    def test_linear_barycentre(self):
        field = linear_field(-1.0, 0.5)
        traj = solve_particles(field, self.fine, self.coarse, self.sample, self.grid)
        start = traj.barycentres()[0]
        assert_allclose(traj.barycentres()[-1], start * np.exp(-0.5), rtol=1e-8)

        exact = barycentric_curve(field, self.mu0, self.grid).global_barycentre()
        assert_allclose(exact[-1], exact[0] * np.exp(-0.5), rtol=1e-10)
        assert_allclose(exact[0], [0.75])

    def test_label_drift_matches_flow(self):
        mu0 = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.0]], None), ([[0.0]], None)])
        field = label_drift_field([0.0, 0.5, 1.0], [1.0, -1.0])
        sample = sample_initial(mu0, self.coarse, 3, seed=2)
        traj = solve_particles(field, self.fine, self.coarse, sample, self.grid)
        assert_allclose(traj.states[-1, :, 0], [1.0, 1.0, 1.0, -1.0, -1.0, -1.0], atol=1e-12)

        auxiliary = solve_auxiliary(field, self.coarse, sample, self.grid)
        assert_allclose(auxiliary.states, traj.states, atol=1e-12)

        curve, table = flow_picard(field, mu0, self.grid)
        self.assertEqual(table.iterations, 1)
        sup, values = curve_distance(empirical_curve(traj), curve)
        self.assertEqual(len(values), len(self.grid))
        self.assertLess(sup, 1e-10)

    def test_frame_layout(self):
        traj = solve_particles(zero_field(), self.fine, self.coarse, self.sample, self.grid)
        frame = traj.to_frame()
        self.assertEqual(list(frame.columns), ["t", "particle_id", "cell_k", "x_0"])
        self.assertEqual(len(frame), 51 * 6)

    def test_particle_count_mismatch(self):
        with self.assertRaises(ValidationError):
            solve_particles(zero_field(), self.fine, self.coarse, np.zeros((4, 1)), self.grid)


class TestReferenceSchemes(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.mu0 = step_measure(self.pi, [0.0, 0.5, 1.0], [([[1.0]], None), ([[2.0], [3.0]], None)])
        self.grid = TimeGrid(1.0, 100)

    def test_picard_converges_on_linear_field(self):
        field = linear_field(0.0, 0.5)
        curve, table = flow_picard(field, self.mu0, self.grid)
        self.assertGreater(table.iterations, 1)
        self.assertLess(table.residuals[-1], 1e-8)
        self.assertTrue(np.all(table.contraction_ratios() < 1.0))
        start = curve.barycentres()[0]
        assert_allclose(start, [1.75])
        assert_allclose(curve.barycentres()[-1], start * np.exp(0.5), rtol=1e-3)

    def test_picard_iteration_budget(self):
        with self.assertRaises(NoConvergenceError):
            flow_picard(linear_field(0.0, 0.5), self.mu0, self.grid, max_iter=1)

    def test_delayed_euler(self):
        field = label_drift_field([0.0, 0.5, 1.0], [1.0, -1.0])
        curve = delayed_euler_curve(field, self.mu0, self.grid, 5)
        assert_allclose(curve[-1].points[:, 0], [2.0, 1.0, 2.0], atol=1e-12)
        self.assertEqual(curve.meta["n_delay"], 5)
        with self.assertRaises(ValidationError):
            delayed_euler_curve(field, self.mu0, TimeGrid(1.0, 10), 3)

    def test_curve_distance_errors(self):
        field = zero_field()
        a = delayed_euler_curve(field, self.mu0, self.grid, 1)
        b = delayed_euler_curve(field, self.mu0, TimeGrid(1.0, 50), 1)
        with self.assertRaises(ValidationError):
            curve_distance(a, b)
        with self.assertRaises(ValidationError):
            curve_distance(a, a, metric="hausdorff")
        self.assertAlmostEqual(curve_distance(a, a, metric="classical_w1")[0], 0.0, places=12)


class TestBlowUp(unittest.TestCase):

    def test_threshold(self):
        with self.assertRaises(BlowUpError) as context:
            check_state(np.array([1.0, 2.0e3]), 7, 1.0e3)
        self.assertEqual(context.exception.step, 7)
        with self.assertRaises(BlowUpError):
            check_state(np.array([np.nan]), 1, 1.0e3)
        check_state(np.array([999.0]), 1, 1.0e3)

    def test_integrate_detects_growth(self):
        with self.assertRaises(BlowUpError):
            integrate(lambda t, x: 10.0 * x, np.ones((2, 1)), TimeGrid(2.0, 20), "euler", threshold=100.0)
        with self.assertRaises(ValidationError):
            integrate(lambda t, x: x, np.ones((2, 1)), TimeGrid(1.0, 2), "leapfrog")


if __name__ == "__main__":
    unittest.main()
