"""
Tests des partitions, quadratures, tirages initiaux et variations en label.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from discretize.averaging import average_field
from discretize.partition import Partition, equipartition, label_partition, refine
from discretize.quadrature import break_cells, label_quadrature
from discretize.sampling import averaged_fibre, sample_initial
from discretize.variation import measure_variation, split_measure, total_variation
from fields.label_drift_field import label_drift_field
from measures.builtins import step_measure
from measures.marginal import Cell, LabelMarginal
from transport.fibred import fibred_w
from utils.exceptions import DegenerateCellError, NonatomicRequiredError, ValidationError


class TestPartitions(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.atomic = LabelMarginal.atomic([0.2, 0.7], [0.5, 0.5])
        self.mixed = LabelMarginal.mixed([1.0], [0.2], 0.8, (0.0, 0.8))

    def test_equipartition_masses(self):
        for N in (1, 3, 8):
            part = equipartition(self.pi, N)
            self.assertEqual(len(part), N)
            assert_allclose(part.masses, np.full(N, 1.0 / N), atol=1e-12)
        part = equipartition(LabelMarginal.power(2.0), 4)
        assert_allclose(part.boundaries, np.sqrt(np.arange(5) / 4.0), atol=1e-12)
        assert_allclose(part.masses, np.full(4, 0.25), atol=1e-12)

    def test_equipartition_errors(self):
        with self.assertRaises(NonatomicRequiredError):
            equipartition(self.atomic, 2)
        with self.assertRaises(ValidationError):
            equipartition(self.pi, 0)

    def test_label_partition_separates_atoms(self):
        part = label_partition(self.mixed, 4)
        self.assertEqual(len(part), 5)
        self.assertEqual(part.cells[-1], Cell.atom(1.0))
        assert_allclose(part.masses, np.full(5, 0.2), atol=1e-12)
        self.assertEqual(part.locate(1.0), 4)
        self.assertEqual(part.locate(0.5), 2)

    def test_refine_and_coarsen(self):
        coarse = equipartition(self.pi, 2)
        fine = refine(coarse, 3)
        self.assertEqual(len(fine), 6)
        self.assertEqual(list(fine.children(1)), [3, 4, 5])
        assert_array_equal(fine.parent_index(), [0, 0, 0, 1, 1, 1])
        self.assertEqual(fine.cells[3].a, 0.5)
        assert_allclose(fine.masses, np.full(6, 1.0 / 6.0), atol=1e-12)
        self.assertEqual(fine.coarsen(3).cells, coarse.cells)
        self.assertEqual(len(fine.coarsen(2)), 3)
        with self.assertRaises(ValidationError):
            fine.coarsen(4)
        with self.assertRaises(ValidationError):
            coarse.children(0)

    def test_refine_splits_atoms(self):
        fine = refine(label_partition(self.atomic, 1), 2)
        self.assertEqual(len(fine), 4)
        self.assertEqual(fine.cells[0], Cell.atom(0.2))
        self.assertEqual(fine.cells[1], Cell.atom(0.2))
        assert_allclose(fine.masses, np.full(4, 0.25))

    def test_degenerate_partition(self):
        with self.assertRaises(DegenerateCellError):
            Partition(self.pi, [Cell(0.0, 1.0), Cell(1.0, 1.0)], [1.0, 0.0])


class TestQuadrature(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()

    def test_quantile_nodes(self):
        quad = label_quadrature(equipartition(self.pi, 2).cells, self.pi, 4)
        assert_allclose(quad.nodes[:4], [0.0625, 0.1875, 0.3125, 0.4375])
        assert_allclose(quad.weights, np.full(8, 0.25))
        assert_array_equal(quad.owner, [0, 0, 0, 0, 1, 1, 1, 1])
        assert_allclose(quad.cell_masses, [0.5, 0.5])
        assert_allclose(quad.average(quad.nodes), [0.25, 0.75])

    def test_atoms_receive_their_own_node(self):
        mixed = LabelMarginal.mixed([1.0], [0.2], 0.8, (0.0, 0.8))
        quad = label_quadrature([Cell(0.0, 0.8), Cell.atom(1.0)], mixed, 2)
        assert_allclose(quad.nodes, [0.2, 0.6, 1.0])
        assert_allclose(quad.weights, [0.5, 0.5, 1.0])
        assert_allclose(quad.cell_masses, [0.8, 0.2])

    def test_breaks_make_step_means_exact(self):
        quad = label_quadrature([Cell(0.0, 0.5)], self.pi, 1, breaks=[0.0, 0.3, 1.0])
        assert_allclose(quad.nodes, [0.15, 0.4])
        assert_allclose(quad.weights, [0.6, 0.4])
        self.assertGreater(break_cells([0.0, 0.5, 1.0])[-1].b, 1.0)

    def test_empty_cell(self):
        mixed = LabelMarginal.mixed([1.0], [0.2], 0.8, (0.0, 0.8))
        with self.assertRaises(DegenerateCellError):
            label_quadrature([Cell(0.85, 0.95)], mixed, 2)

    def test_average_field(self):
        field = label_drift_field([0.0, 0.3, 1.0], [1.0, 2.0])
        family = average_field(field, equipartition(self.pi, 2))
        mu = step_measure(self.pi, [0.0, 1.0], [([[0.0]], None)])
        self.assertTrue(family.exact)
        self.assertEqual(len(family), 2)
        assert_allclose(family(0, 0.0, mu, [0.0]), [1.4])
        assert_allclose(family(1, 0.0, mu, [0.0]), [2.0])
        assert_allclose(family.velocities(0.0, mu, [0, 1, 1], np.zeros((3, 1))), [[1.4], [2.0], [2.0]])


class TestSampling(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.mu0 = step_measure(self.pi, [0.0, 0.5, 1.0],
                                [([[0.0], [0.1]], None), ([[1.0], [1.1]], [0.25, 0.75])])

    def test_averaged_fibre(self):
        points, weights = averaged_fibre(self.mu0, equipartition(self.pi, 1), 0)
        assert_allclose(points[:, 0], [0.0, 0.1, 1.0, 1.1])
        assert_allclose(weights, [0.25, 0.25, 0.125, 0.375])
        points, weights = averaged_fibre(self.mu0, equipartition(self.pi, 4), 1)
        assert_allclose(points[:, 0], [0.0, 0.1])
        assert_allclose(weights, [0.5, 0.5])

    def test_sample_is_deterministic(self):
        coarse = equipartition(self.pi, 4)
        first = sample_initial(self.mu0, coarse, 5, seed=7)
        second = sample_initial(self.mu0, coarse, 5, seed=7)
        self.assertEqual(len(first), 20)
        assert_array_equal(first.points, second.points)
        assert_array_equal(first.cell_of, np.repeat(np.arange(4), 5))

    def test_sample_stays_in_fibre(self):
        sample = sample_initial(self.mu0, equipartition(self.pi, 4), 25, seed=1)
        left = sample.points[sample.cell_of < 2, 0]
        right = sample.points[sample.cell_of >= 2, 0]
        self.assertTrue(np.all(np.isin(left, [0.0, 0.1])))
        self.assertTrue(np.all(np.isin(right, [1.0, 1.1])))

    def test_invalid_particle_count(self):
        with self.assertRaises(ValidationError):
            sample_initial(self.mu0, equipartition(self.pi, 2), 0)


class TestVariation(unittest.TestCase):

    def setUp(self):
        self.pi = LabelMarginal.uniform()
        self.mu = step_measure(self.pi, [0.0, 0.5, 1.0], [([[0.0]], None), ([[1.0]], None)])

    def test_measure_variation(self):
        self.assertAlmostEqual(measure_variation(self.mu), 1.0)

    def test_total_variation_of_identity(self):
        value = total_variation(lambda w: np.array([w]), equipartition(self.pi, 4))
        self.assertAlmostEqual(value, 0.75)

    def test_split_measure(self):
        split = split_measure(self.mu, equipartition(self.pi, 4))
        self.assertEqual(len(split), 4)
        self.assertAlmostEqual(fibred_w(split, self.mu, 1), 0.0, places=12)
        self.assertAlmostEqual(measure_variation(split), 1.0)


if __name__ == "__main__":
    unittest.main()
