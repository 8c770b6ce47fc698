import math
import unittest

import numpy as np

from compatpie.errors import ComputationError, InvalidSpecError
from compatpie.logistic import fit_grouped
from compatpie.table import EXAMPLE_TABLE


class TestFitGrouped(unittest.TestCase):
    design = [[1.0, 1.0], [1.0, 0.0]]

    def test_two_groups_reproduce_log_odds_ratio(self):
        a, b, c, d = EXAMPLE_TABLE
        fit = fit_grouped(self.design, [a, c], [a + b, c + d])

        self.assertTrue(fit.converged)
        self.assertAlmostEqual(math.log(c / d), fit.coefficients[0], places=8)
        self.assertAlmostEqual(math.log(a * d / (b * c)), fit.coefficients[1], places=8)
        self.assertAlmostEqual(
            math.sqrt(1 / a + 1 / b + 1 / c + 1 / d), fit.se(1), places=8
        )

    def test_offset_shifts_coefficient(self):
        a, b, c, d = EXAMPLE_TABLE
        plain = fit_grouped(self.design, [a, c], [a + b, c + d])
        shifted = fit_grouped(self.design, [a, c], [a + b, c + d], offset=[0.5, 0.0])

        self.assertAlmostEqual(plain.coefficients[1] - 0.5, shifted.coefficients[1], places=8)

    def test_fractional_counts(self):
        fit = fit_grouped([[1.0]], [2.5], [10.0])

        self.assertAlmostEqual(math.log(2.5 / 7.5), fit.coefficients[0], places=8)

    def test_log_likelihood_at_maximum(self):
        fit = fit_grouped([[1.0]], [3.0], [12.0])
        p = 0.25

        self.assertAlmostEqual(3 * math.log(p) + 9 * math.log(1 - p), fit.log_likelihood, places=8)

    def test_separated_data(self):
        with self.assertRaisesRegex(ComputationError, "separated"):
            fit_grouped(self.design, [10.0, 3.0], [10.0, 20.0])

    def test_invalid_input(self):
        with self.assertRaises(InvalidSpecError):
            fit_grouped(self.design, [1.0], [2.0, 3.0])
        with self.assertRaises(InvalidSpecError):
            fit_grouped(self.design, [5.0, 1.0], [2.0, 3.0])

    def test_covariance_is_symmetric(self):
        fit = fit_grouped(self.design, [4.0, 7.0], [20.0, 25.0])

        np.testing.assert_allclose(fit.covariance, fit.covariance.T)

    def test_stops_on_score_norm(self):
        a, b, c, d = EXAMPLE_TABLE
        cases, trials, offset = [a, c, 232.5], [a + b, c + d, 1e6], [0.0, 0.0, -0.3]
        design = [[1.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]]
        fit = fit_grouped(design, cases, trials, offset)
        x = np.array(design)
        eta = x @ fit.coefficients + np.array(offset)
        score = x.T @ (np.array(cases) - np.array(trials) / (1 + np.exp(-eta)))

        self.assertLess(fit.score_norm, 1e-10)
        self.assertLess(float(np.linalg.norm(score)), 1e-9)

    def test_start_at_maximum(self):
        fit = fit_grouped([[1.0]], [5.0], [10.0])

        self.assertEqual(0, fit.iterations)
        self.assertEqual(0.0, fit.coefficients[0])
