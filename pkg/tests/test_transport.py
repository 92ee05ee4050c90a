"""
Tests des distances de Wasserstein exactes, fibrées et classiques, et de la dualité.
"""

import itertools
import os
import unittest

import numpy as np
from numpy.testing import assert_allclose

from fields.hypotheses import random_measure
from measures.builtins import drift_counterexample, label_swap_pair, step_measure
from measures.fibred_measure import DiscreteMeasure, FibredMeasure, graph_measure
from measures.marginal import Cell, LabelMarginal
from transport.fibred import (
    cdf_dual_potentials, certify_lipschitz, classical_plan, classical_w_product, fibred_plans,
    fibred_w, kr_dual_value, sorted_refinement
)
from transport.wasserstein import w_1d, w_circle_1d, w_discrete
from utils.exceptions import (
    BudgetError, IncomparableMarginalsError, InvalidPotentialError, ValidationError
)
from utils.solver_utils import retry_on_solver_warning

SLOW = os.environ.get("FIBRED_SLOW_TESTS") == "1"


def brute_force(x: np.ndarray, y: np.ndarray, p: int) -> float:
    """Minimum sur les permutations pour deux mesures uniformes de même taille."""
    costs = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=2) ** p
    best = min(costs[np.arange(len(x)), list(perm)].mean() for perm in itertools.permutations(range(len(y))))
    return float(best) ** (1.0 / p)


def same_measure(mu: FibredMeasure, nu: FibredMeasure) -> bool:
    """Mêmes cellules, mêmes masses, mêmes supports et mêmes poids après fusion."""
    return (mu.cells == nu.cells and mu.points.shape == nu.points.shape
            and np.allclose(mu.weights, nu.weights, atol=1e-12)
            and np.allclose(mu.points, nu.points, atol=1e-12)
            and np.allclose(mu.point_weights, nu.point_weights, atol=1e-12))


def split_points(mu: FibredMeasure) -> FibredMeasure:
    """La même mesure dont chaque point est donné deux fois avec la moitié de son poids."""
    return FibredMeasure.from_arrays(
        mu.marginal, mu.cells, mu.weights, np.vstack([mu.points, mu.points]),
        np.concatenate([mu.cell_index, mu.cell_index]),
        np.concatenate([mu.point_weights, mu.point_weights]) / 2.0
    )


class TestExactSolvers(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(12)
        self.instances = 200 if SLOW else 40

    def test_network_simplex_matches_permutations(self):
        for _ in range(self.instances):
            k = int(self.rng.integers(1, 7))
            d = int(self.rng.integers(1, 4))
            x, y = self.rng.normal(size=(2, k, d))
            for p in (1, 2):
                result = w_discrete(DiscreteMeasure.build(x), DiscreteMeasure.build(y), p)
                self.assertAlmostEqual(result.distance, brute_force(x, y, p), delta=1e-9)
                self.assertLessEqual(result.primal_feasibility_residual, 1e-9)

    def test_quantile_formula_matches_network_simplex(self):
        for _ in range(self.instances):
            ka, kb = self.rng.integers(1, 65, size=2)
            wa, wb = self.rng.random(ka) + 0.05, self.rng.random(kb) + 0.05
            mu = DiscreteMeasure.build(self.rng.normal(size=(ka, 1)), wa / wa.sum())
            nu = DiscreteMeasure.build(self.rng.normal(size=(kb, 1)), wb / wb.sum())
            for p in (1, 2):
                self.assertAlmostEqual(w_1d(mu, nu, p), w_discrete(mu, nu, p).distance, delta=1e-9)

    def test_plan_marginals(self):
        mu = DiscreteMeasure.build([[0.0], [1.0], [3.0]], [0.2, 0.3, 0.5])
        nu = DiscreteMeasure.build([[0.5], [2.0]], [0.6, 0.4])
        plan = w_discrete(mu, nu, 1).plan.toarray()
        assert_allclose(plan.sum(axis=1), mu.weights, atol=1e-12)
        assert_allclose(plan.sum(axis=0), nu.weights, atol=1e-12)

    def test_support_budget(self):
        big = DiscreteMeasure.build(self.rng.normal(size=(513, 1)))
        small = DiscreteMeasure.build([[0.0]])
        with self.assertRaises(BudgetError):
            w_discrete(big, small)

    def test_unsupported_order(self):
        rho = DiscreteMeasure.build([[0.0]])
        with self.assertRaises(ValidationError):
            w_1d(rho, rho, 3)

    def test_circle_distance(self):
        a = DiscreteMeasure.build([[0.1]])
        b = DiscreteMeasure.build([[2.0 * np.pi - 0.1]])
        self.assertAlmostEqual(w_circle_1d(a, b), 0.2, places=12)
        self.assertAlmostEqual(w_circle_1d(a, DiscreteMeasure.build([[0.1 + 4.0 * np.pi]])), 0.0, places=12)

    def test_circle_never_exceeds_line(self):
        for _ in range(20):
            mu = DiscreteMeasure.build(self.rng.uniform(0.0, 2.0 * np.pi, size=(5, 1)))
            nu = DiscreteMeasure.build(self.rng.uniform(0.0, 2.0 * np.pi, size=(4, 1)))
            self.assertLessEqual(w_circle_1d(mu, nu), w_1d(mu, nu) + 1e-12)


class TestSolverRetry(unittest.TestCase):

    def test_retry_multiplies_iteration_cap(self):
        caps = []

        def solver(cap):
            caps.append(cap)
            return "plan", ("numItermax reached before optimality" if len(caps) < 2 else None)

        self.assertEqual(retry_on_solver_warning(solver, max_retries=3, num_iter_max=10, backoff_factor=10.0), "plan")
        self.assertEqual(caps, [10, 100])

    def test_retry_exhausted(self):
        with self.assertRaises(BudgetError):
            retry_on_solver_warning(lambda cap: (None, "numItermax reached"), max_retries=2, num_iter_max=10)

    def test_infeasible_problem(self):
        with self.assertRaises(ValidationError):
            retry_on_solver_warning(lambda cap: (None, "Problem infeasible"), num_iter_max=10)


class TestFibredDistance(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.pi = LabelMarginal.uniform()

    def test_label_swap_golden_values(self):
        for j in range(20):
            d = 1 + j % 2
            omega1, omega2 = np.sort(self.rng.uniform(0.0, 1.0, size=2))
            x1, x2 = self.rng.normal(size=(2, d))
            mu1, mu2 = label_swap_pair(float(omega1), float(omega2), x1, x2)
            gap = float(np.linalg.norm(x1 - x2))
            self.assertAlmostEqual(fibred_w(mu1, mu2, 1), gap, delta=1e-10)
            self.assertAlmostEqual(classical_w_product(mu1, mu2, 1), min(omega2 - omega1, gap), delta=1e-10)

    def test_counterexample_golden_values(self):
        eps = 0.3
        for t in (0.0, 0.5, 1.0):
            mu, nu = drift_counterexample(eps, t)
            self.assertAlmostEqual(fibred_w(mu, nu, 1), 1.0, delta=1e-10)
            self.assertAlmostEqual(classical_w_product(mu, nu, 1), min(1.0, np.hypot(eps, t)), delta=1e-10)

    def test_metric_axioms(self):
        for _ in range(10):
            mu, nu, rho = (random_measure(self.pi, 2, self.rng, cells=int(self.rng.integers(1, 5)))
                           for _ in range(3))
            for p in (1, 2):
                self.assertAlmostEqual(fibred_w(mu, mu, p), 0.0, places=12)
                self.assertAlmostEqual(fibred_w(mu, nu, p), fibred_w(nu, mu, p), places=12)
                self.assertLessEqual(fibred_w(mu, rho, p), fibred_w(mu, nu, p) + fibred_w(nu, rho, p) + 1e-10)

    def test_classical_metric_axioms(self):
        # cellules communes: les relevés en label ne dépendent pas du partenaire
        atoms = LabelMarginal.atomic([0.1, 0.4, 0.8], [0.2, 0.5, 0.3])
        for marginal in (atoms, self.pi):
            for _ in range(5):
                mu, nu, rho = (random_measure(marginal, 2, self.rng, cells=3) for _ in range(3))
                for p in (1, 2):
                    self.assertAlmostEqual(classical_w_product(mu, mu, p), 0.0, places=9)
                    self.assertAlmostEqual(classical_w_product(mu, nu, p), classical_w_product(nu, mu, p),
                                           places=9)
                    self.assertLessEqual(classical_w_product(mu, rho, p),
                                         classical_w_product(mu, nu, p) + classical_w_product(nu, rho, p) + 1e-9)

    def test_identity_of_indiscernibles(self):
        for marginal in (LabelMarginal.atomic([0.2, 0.6], [0.5, 0.5]), self.pi):
            mu, nu = (random_measure(marginal, 1, self.rng, cells=2) for _ in range(2))
            twin = split_points(mu)
            self.assertTrue(same_measure(mu, twin))
            for a, b in ((mu, twin), (mu, nu), (twin, nu)):
                for distance in (fibred_w, classical_w_product):
                    self.assertEqual(distance(a, b, 1) < 1e-10, same_measure(a, b), distance.__name__)

    def test_classical_moves_labels_inside_cells(self):
        mu = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.0]], None), ([[0.1]], None)])
        nu = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.1]], None), ([[0.0]], None)])
        self.assertAlmostEqual(fibred_w(mu, nu, 1), 0.1, delta=1e-12)
        self.assertAlmostEqual(classical_w_product(mu, nu, 1, label_nodes=1), 0.1, delta=1e-10)
        self.assertAlmostEqual(classical_w_product(mu, nu, 1), 0.09531, delta=1e-4)
        self.assertAlmostEqual(classical_w_product(mu, nu, 1, label_nodes=32), 0.09502, delta=1e-4)
        self.assertLess(classical_w_product(mu, nu, 1), fibred_w(mu, nu, 1) - 1e-3)
        with self.assertRaises(ValidationError):
            classical_w_product(mu, nu, 1, label_nodes=0)

    def test_classical_below_fibred(self):
        pairs = 500 if SLOW else 50
        for _ in range(pairs):
            d = int(self.rng.integers(1, 3))
            mu = random_measure(self.pi, d, self.rng, cells=int(self.rng.integers(2, 6)))
            nu = random_measure(self.pi, d, self.rng, cells=int(self.rng.integers(2, 6)))
            self.assertLessEqual(classical_w_product(mu, nu, 1), fibred_w(mu, nu, 1) + 1e-9)

    def test_first_order_below_second_order(self):
        mu = random_measure(self.pi, 1, self.rng)
        nu = random_measure(self.pi, 1, self.rng)
        self.assertLessEqual(fibred_w(mu, nu, 1), fibred_w(mu, nu, 2) + 1e-12)

    def test_incomparable_marginals(self):
        mu = graph_measure(self.pi, [Cell(0.0, 1.0)], [0.0])
        nu = graph_measure(LabelMarginal.power(2.0), [Cell(0.0, 1.0)], [0.0])
        with self.assertRaises(IncomparableMarginalsError):
            fibred_w(mu, nu)

    def test_dimension_mismatch(self):
        mu = graph_measure(self.pi, [Cell(0.0, 1.0)], [[0.0]])
        nu = graph_measure(self.pi, [Cell(0.0, 1.0)], [[0.0, 1.0]])
        with self.assertRaises(ValidationError):
            fibred_w(mu, nu)

    def test_fibred_plans(self):
        mu1, mu2 = label_swap_pair(0.2, 0.7, [0.0], [2.0])
        plans = fibred_plans(mu1, mu2, 1)
        self.assertEqual(len(plans), 2)
        self.assertEqual(plans[0]["cell"], [0.2, 0.2])
        for plan in plans:
            self.assertAlmostEqual(plan["plan"]["distance"], 2.0)
            self.assertAlmostEqual(sum(m for _, _, m in plan["plan"]["plan"]), 1.0)

    def test_classical_plan_lifts_labels(self):
        mu1, mu2 = label_swap_pair(0.2, 0.7, [0.0], [2.0])
        result, lifted_mu, lifted_nu = classical_plan(mu1, mu2, 1)
        assert_allclose(np.sort(lifted_mu.points[:, 0]), [0.2, 0.7])
        self.assertAlmostEqual(result.distance, 0.5)
        self.assertEqual(lifted_nu.points.shape[1], 2)


class TestDuality(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(8)
        self.pi = LabelMarginal.uniform()

    def test_cdf_potentials_attain_primal(self):
        for _ in range(50 if SLOW else 15):
            mu = random_measure(self.pi, 1, self.rng, cells=int(self.rng.integers(1, 5)))
            nu = random_measure(self.pi, 1, self.rng, cells=int(self.rng.integers(1, 5)))
            dual = kr_dual_value(mu, nu, cdf_dual_potentials(mu, nu))
            self.assertAlmostEqual(dual, fibred_w(mu, nu, 1), delta=1e-8)

    def test_certified_potentials_are_lower_bounds(self):
        for _ in range(100 if SLOW else 20):
            mu = random_measure(self.pi, 2, self.rng, cells=3)
            nu = random_measure(self.pi, 2, self.rng, cells=2)
            potentials = []
            for _ in sorted_refinement(mu, nu):
                slope = self.rng.uniform(-1.0, 1.0)
                centre = self.rng.normal(size=2)
                potentials.append(lambda x, s=slope, c=centre: s * np.linalg.norm(x - c, axis=1))
            self.assertLessEqual(kr_dual_value(mu, nu, potentials), fibred_w(mu, nu, 1) + 1e-9)

    def test_non_lipschitz_potential(self):
        with self.assertRaises(InvalidPotentialError):
            certify_lipschitz(np.array([[0.0], [1.0]]), np.array([0.0, 2.0]))
        mu = graph_measure(self.pi, [Cell(0.0, 1.0)], [0.0])
        nu = graph_measure(self.pi, [Cell(0.0, 1.0)], [1.0])
        with self.assertRaises(InvalidPotentialError):
            kr_dual_value(mu, nu, [lambda x: 2.0 * x[:, 0]])

    def test_potential_count(self):
        mu = graph_measure(self.pi, [Cell(0.0, 0.5), Cell(0.5, 1.0)], [0.0, 1.0])
        with self.assertRaises(ValidationError):
            kr_dual_value(mu, mu, [lambda x: x[:, 0]])


if __name__ == "__main__":
    unittest.main()
