import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.analysis import SweepReport, deletion_effect, fit_depth_trend, fit_power_law, load_report, summarize
from src.analysis.mixing import polyfit, r_squared


class TestSweepReport(unittest.TestCase):
    def test_columns_start_with_the_variable(self):
        report = SweepReport(name="demo", variable="k")
        report.add(rmse=1.5, k=1)
        report.add(k=2, rmse=2.25, note="x")
        self.assertEqual(report.columns(), ["k", "rmse", "note"])
        self.assertEqual(report.column("note"), [None, "x"])

    def test_tsv(self):
        report = SweepReport(name="demo", variable="k", meta={"seed": 1})
        report.add(k=1, rmse=0.123456789, tokens=[1, 2])
        lines = report.to_tsv().splitlines()
        self.assertEqual(lines[0], '# demo {"seed": 1}')
        self.assertEqual(lines[1], "k\trmse\ttokens")
        self.assertEqual(lines[2], "1\t0.123457\t1,2")

    def test_missing_values_print_as_nan(self):
        report = SweepReport(name="demo", variable="k")
        report.add(k=1, ratio=None)
        self.assertEqual(report.to_tsv().splitlines()[2], "1\tnan")

    def test_save_and_load(self):
        report = SweepReport(name="demo", variable="k", meta={"alpha": -0.5})
        report.add(k=np.int64(4), rmse=np.float64(1.25))
        with tempfile.TemporaryDirectory() as tmp:
            json_path, tsv_path = report.save(tmp)
            self.assertEqual(json_path, Path(tmp) / "demo.json")
            self.assertTrue(tsv_path.exists())
            loaded = load_report(json_path)
        self.assertEqual(loaded.name, "demo")
        self.assertEqual(loaded.meta, {"alpha": -0.5})
        self.assertEqual(loaded.column("rmse"), [1.25])


class TestDeletionEffect(unittest.TestCase):
    def test_clean_deletion(self):
        effect = deletion_effect(np.array([1, 2, 3, 4, 5]), np.array([1, 2, 4, 5]), 2)
        self.assertEqual(effect.changed, 0)
        self.assertEqual(effect.half_width, 0.0)
        # the naive positional comparison sees the shift after the deleted atom
        self.assertEqual(effect.raw_changed, 3)

    def test_window_straddles_the_deleted_atom(self):
        effect = deletion_effect(np.array([1, 2, 3, 4, 5]), np.array([1, 9, 4, 7]), 2)
        self.assertEqual(effect.changed, 2)
        self.assertEqual(effect.half_width, 2.0)

    def test_length_check(self):
        with self.assertRaises(ValueError):
            deletion_effect(np.array([1, 2, 3]), np.array([1, 2, 3]), 0)


class TestFits(unittest.TestCase):
    def test_r_squared(self):
        y = np.array([1.0, 2.0, 3.0])
        self.assertEqual(r_squared(y, y), 1.0)
        self.assertEqual(r_squared(np.ones(3), np.ones(3)), 1.0)
        self.assertAlmostEqual(r_squared(y, np.full(3, 2.0)), 0.0)

    def test_linear_and_quadratic_depth_trend(self):
        depths = [2, 4, 6, 8]
        radii = [0.5 * d * d + 1.0 for d in depths]
        trend = fit_depth_trend(depths, radii)
        self.assertLess(trend.linear.r2, 1.0)
        np.testing.assert_allclose(trend.quadratic.coefficients, [0.5, 0.0, 1.0], atol=1e-9)
        self.assertAlmostEqual(trend.quadratic.r2, 1.0)

    def test_two_depths_fit_a_line_only(self):
        trend = fit_depth_trend([2, 4], [1.0, 3.0])
        self.assertIsNone(trend.quadratic)
        np.testing.assert_allclose(trend.linear.coefficients, [1.0, -1.0])
        with self.assertRaises(ValueError):
            fit_depth_trend([2], [1.0])

    def test_polyfit_degree(self):
        self.assertEqual(len(polyfit([0, 1, 2], [1, 3, 5], 1).coefficients), 2)

    def test_power_law(self):
        sizes = np.array([256.0, 1024.0, 4096.0, 16384.0])
        fit = fit_power_law(sizes, 3.0 * sizes ** -0.25)
        self.assertAlmostEqual(fit.alpha, -0.25)
        self.assertAlmostEqual(fit.beta, np.log(3.0))
        self.assertAlmostEqual(fit.r2, 1.0)


class TestSummary(unittest.TestCase):
    def test_confidence_interval(self):
        summary = summarize([1.0, 2.0, 3.0])
        self.assertAlmostEqual(summary.mean, 2.0)
        self.assertAlmostEqual(summary.std, 1.0)
        self.assertAlmostEqual(summary.ci95, 1.959963984540054 / np.sqrt(3))
        self.assertEqual(summary.n, 3)

    def test_interval_halves_when_structures_quadruple(self):
        few = summarize([-1.0, 1.0])
        a = np.sqrt(1.75)
        many = summarize([-a] * 4 + [a] * 4)
        self.assertAlmostEqual(many.std, few.std)
        self.assertAlmostEqual(many.ci95 / few.ci95, 0.5)

        rng = np.random.default_rng(0)
        sampled = [summarize(rng.normal(loc=2.0, scale=0.7, size=n)).ci95 for n in (1000, 4000)]
        self.assertAlmostEqual(sampled[1] / sampled[0], 0.5, delta=0.05)

    def test_missing_values_are_dropped(self):
        summary = summarize([None, float("nan"), 4.0])
        self.assertEqual(summary.n, 1)
        self.assertEqual(summary.std, 0.0)
        self.assertEqual(summarize([None]).n, 0)


if __name__ == "__main__":
    unittest.main()
