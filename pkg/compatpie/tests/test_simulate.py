import io
import json
import math
import os
import tempfile
import unittest

import numpy as np
from parameterized import parameterized

from compatpie.errors import InvalidSpecError, UnsupportedFormatError
from compatpie.interval import TestMethod
from compatpie.montecarlo import Scenario, SimReport
from compatpie.simulate import (
    ReportFormat,
    coverage_sim,
    format_reports,
    load_scenarios,
    sample_log_or,
    significance_filter_sim,
    sparse_bias_sim,
    write_reports,
)

EXAMPLE_SCENARIO = Scenario(120, 480, 0.033, 2.636, "example")


class TestCoverage(unittest.TestCase):
    def test_exact_is_conservative(self):
        report = coverage_sim(EXAMPLE_SCENARIO, n_sims=1000, seed=1)

        self.assertEqual("coverage-exact", report.method)
        self.assertGreater(report.estimate, 0.93)
        self.assertEqual(0.0, report.extras["undefined_fraction"])

    def test_wald_misses_in_sparse_data(self):
        sc = Scenario(50, 50, 0.02, 4.0)
        exact = coverage_sim(sc, TestMethod.EXACT, n_sims=1000, seed=2)
        wald = coverage_sim(sc, TestMethod.WALD, n_sims=1000, seed=2)

        self.assertGreater(wald.extras["undefined_fraction"], 0.2)
        self.assertLess(wald.extras["coverage_undefined_as_miss"], exact.estimate)
        self.assertLess(wald.extras["n_defined"], 1000)

    def test_reproducible(self):
        first = coverage_sim(EXAMPLE_SCENARIO, TestMethod.WALD, n_sims=200, seed=9)

        again = coverage_sim(EXAMPLE_SCENARIO, TestMethod.WALD, n_sims=200, seed=9)

        self.assertEqual(first, again)

    def test_pearson_is_not_simulated(self):
        with self.assertRaises(InvalidSpecError):
            coverage_sim(EXAMPLE_SCENARIO, TestMethod.PEARSON, n_sims=10)

    @parameterized.expand([(0.0,), (1.0,)])
    def test_invalid_alpha(self, alpha: float):
        with self.assertRaises(InvalidSpecError):
            coverage_sim(EXAMPLE_SCENARIO, alpha=alpha, n_sims=10)


class TestSparseBias(unittest.TestCase):
    @parameterized.expand(
        [
            ((1, 2, 3, 4), math.log(4 / 6)),
            ((2, 0, 3, 4), math.inf),
            ((0, 2, 3, 4), -math.inf),
        ]
    )
    def test_sample_log_or(self, cells, expected: float):
        self.assertEqual(expected, sample_log_or(cells))

    def test_undefined_sample_log_or(self):
        self.assertTrue(math.isnan(sample_log_or((0, 0, 3, 4))))

    def test_sparse_estimates_overshoot(self):
        report = sparse_bias_sim(Scenario(40, 40, 0.05, 3.0), n_sims=4000, seed=4)

        self.assertGreater(report.extras["beyond_truth_fraction"], 0.5)
        self.assertGreater(report.extras["median_error_all"], 0.0)
        self.assertGreater(report.extras["nonfinite_fraction"], 0.0)

    def test_null_median_is_unbiased(self):
        report = sparse_bias_sim(Scenario(40, 40, 0.05, 1.0), n_sims=2000, seed=4)

        self.assertEqual(0.0, report.extras["median_error_finite"])
        self.assertTrue(math.isnan(report.extras["beyond_truth_fraction"]))

    def test_large_samples_are_unbiased(self):
        report = sparse_bias_sim(Scenario(5000, 5000, 0.2, 3.0), n_sims=500, seed=4)

        self.assertLess(abs(report.estimate), 0.02)
        self.assertEqual(0.0, report.extras["nonfinite_fraction"])
        self.assertEqual(500.0, report.extras["n_finite"])


class TestSignificanceFilter(unittest.TestCase):
    def test_filter_inflates(self):
        report = significance_filter_sim(Scenario(100, 100, 0.1, 1.5), n_sims=2000, seed=6)

        self.assertEqual("filter-wald", report.method)
        self.assertGreater(report.extras["inflation_ratio"], 1.5)
        self.assertLess(report.extras["pass_fraction"], 0.5)
        self.assertGreater(report.estimate, report.extras["overall_mean_abs"])

    def test_alpha_one_keeps_everything(self):
        report = significance_filter_sim(
            Scenario(100, 100, 0.1, 1.5), alpha=1.0, n_sims=300, seed=6
        )

        self.assertAlmostEqual(report.extras["overall_mean_abs"], report.estimate, places=12)

    def test_exact_filter(self):
        report = significance_filter_sim(
            Scenario(100, 100, 0.1, 1.5), n_sims=300, seed=6, test=TestMethod.EXACT
        )

        self.assertEqual("filter-exact", report.method)
        self.assertGreater(report.extras["inflation_ratio"], 1.0)


class TestScenarioFiles(unittest.TestCase):
    def test_load(self):
        text = json.dumps(
            [
                {"n_exposed": 120, "n_unexposed": 480, "baseline_risk": 0.033, "or_pop": 2.636},
                {"n_exposed": 50, "n_unexposed": 50, "baseline_risk": 0.02, "or_pop": 4.0,
                 "label": "sparse"},
            ]
        )
        scenarios = load_scenarios(io.StringIO(text))

        self.assertEqual(2, len(scenarios))
        self.assertEqual("sparse", scenarios[1].label)

    @parameterized.expand([("{}",), ("not json",), ('[{"n_exposed": 1}]',)])
    def test_invalid(self, text: str):
        with self.assertRaises(InvalidSpecError):
            load_scenarios(io.StringIO(text))

    def test_missing_file(self):
        with self.assertRaises(InvalidSpecError):
            load_scenarios("/nonexistent/scenarios.json")


class TestReportFormats(unittest.TestCase):
    reports = [
        SimReport(EXAMPLE_SCENARIO, "coverage-exact", 100, 1, 0.97, 0.017, {"alpha": 0.05}),
        SimReport(None, "independent", 0, 0, 0.401, 0.0, {"k": 10.0}),
    ]

    def test_csv(self):
        lines = format_reports(self.reports, "csv").split("\n")

        self.assertEqual(
            "label,n_exposed,n_unexposed,baseline_risk,or_pop,method,n_sims,seed,"
            "estimate,mc_error,alpha,k",
            lines[0],
        )
        self.assertEqual(
            "example,120,480,0.033,2.636,coverage-exact,100,1,0.97,0.017,0.05,", lines[1]
        )
        self.assertEqual(",,,,,independent,0,0,0.401,0,,10", lines[2])

    def test_jsonl(self):
        lines = format_reports(self.reports, "json").splitlines()

        self.assertEqual(2, len(lines))
        self.assertEqual(self.reports[0], SimReport.from_dict(json.loads(lines[0])))

    def test_write(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "reports.jsonl")
            write_reports(self.reports, path, ReportFormat.JSONL)
            with open(path) as f:
                self.assertEqual(2, len(f.readlines()))

    def test_unsupported(self):
        with self.assertRaises(UnsupportedFormatError):
            format_reports(self.reports, "xml")


class TestMonteCarloError(unittest.TestCase):
    def test_exact_coverage_at_full_size(self):
        report = coverage_sim(EXAMPLE_SCENARIO, n_sims=10_000, seed=1)

        self.assertGreaterEqual(report.estimate, 0.95 - 3 * report.mc_error)
        self.assertEqual(10_000, report.n_sims)

    def test_rate_error_matches_spread_over_seeds(self):
        reports = [
            coverage_sim(EXAMPLE_SCENARIO, TestMethod.WALD, n_sims=400, seed=s) for s in range(30)
        ]
        spread = float(np.std([r.estimate for r in reports], ddof=1))
        reported = float(np.mean([r.mc_error for r in reports]))

        self.assertGreaterEqual(spread / reported, 0.5)
        self.assertLessEqual(spread / reported, 2.0)

    def test_mean_error_matches_spread_over_seeds(self):
        sc = Scenario(200, 200, 0.2, 2.0)
        reports = [sparse_bias_sim(sc, n_sims=300, seed=s) for s in range(30)]
        spread = float(np.std([r.estimate for r in reports], ddof=1))
        reported = float(np.mean([r.mc_error for r in reports]))

        self.assertGreaterEqual(spread / reported, 0.5)
        self.assertLessEqual(spread / reported, 2.0)


class TestSparseBiasSigns(unittest.TestCase):
    def test_finite_mean_and_overall_median_disagree(self):
        # dropping the infinite estimates drops the largest overshoots
        report = sparse_bias_sim(Scenario(40, 40, 0.05, 3.0), n_sims=10_000, seed=3)

        self.assertLess(report.estimate, 0.0)
        self.assertLess(report.extras["median_error_finite"], 0.0)
        self.assertGreater(report.extras["median_error_all"], 0.0)
        self.assertGreater(report.extras["beyond_truth_fraction"], 0.5)
        self.assertGreater(report.extras["nonfinite_fraction"], 0.0)


class TestFilterAtHighPower(unittest.TestCase):
    def test_no_inflation_when_every_replicate_passes(self):
        report = significance_filter_sim(Scenario(5000, 5000, 0.2, 2.0), n_sims=500, seed=6)

        self.assertEqual(1.0, report.extras["pass_fraction"])
        self.assertAlmostEqual(1.0, report.extras["inflation_ratio"], delta=0.05)
