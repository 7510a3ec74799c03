import os
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.analysis import (
    StudyData,
    ablation_harness,
    binned_means,
    center_distance_profile,
    codebook_scaling_study,
    compare_structures,
    compression_study,
    domain_breakdown,
    evaluate,
    mixing_radius,
    rotation_sweep,
    run_experiment,
    tokens_at_angle,
)
from src.data import synth_molecule, synth_polymer
from src.errors import ConfigError
from src.geometry import PointCloud
from src.model import TokenizerConfig, TokenizerModel
from src.quantizer import FsqSpec
from src.tensor import precision
from src.training.config import TrainConfig


def tiny_config(**overrides) -> TokenizerConfig:
    base = dict(n_encoder_layers=1, n_decoder_layers=1, d_model=8, fsq=FsqSpec((4, 4, 4)), d_state=4, conv_width=3)
    base.update(overrides)
    return TokenizerConfig(**base)


def walk(n, seed=0) -> PointCloud:
    rng = np.random.default_rng(seed)
    return PointCloud(np.cumsum(rng.normal(scale=1.5, size=(n, 3)), axis=0), name=f"walk{seed}")


class TestMixingRadius(unittest.TestCase):
    def test_zeroed_mixers_have_no_reach(self):
        with precision(np.float64):
            model = TokenizerModel(tiny_config(n_encoder_layers=2))
            model.zero_mixers()
            result = mixing_radius(model, [walk(20), walk(15, seed=1)], n_deletions=4, margin=3)
        self.assertEqual(result.mean, 0.0)
        self.assertEqual(len(result.report), 8)
        self.assertEqual(set(result.report.column("changed")), {0})
        self.assertGreaterEqual(result.raw_mean, 1.0)

    def test_deletions_avoid_the_ends(self):
        model = TokenizerModel(tiny_config())
        result = mixing_radius(model, [walk(30)], n_deletions=10, margin=5, seed=2)
        indices = result.report.column("index")
        self.assertEqual(indices, sorted(indices))
        self.assertTrue(all(5 <= i < 25 for i in indices))
        self.assertTrue(all(h >= 0 for h in result.report.column("half_width")))

    def test_requires_per_atom_tokens(self):
        with self.assertRaises(ConfigError):
            mixing_radius(TokenizerModel(tiny_config(compression_k=2)), [walk(10)])
        with self.assertRaises(ValueError):
            mixing_radius(TokenizerModel(tiny_config()), [walk(2)])


class TestRotationSweep(unittest.TestCase):
    def test_records_per_angle(self):
        model = TokenizerModel(tiny_config())
        report = rotation_sweep(model, walk(12), axis="x", n_angles=4)
        np.testing.assert_allclose(report.column("angle"), [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
        self.assertEqual(report.column("changed_vs_start")[0], 0)
        self.assertTrue(all(len(t) == 12 for t in report.column("tokens")))
        self.assertGreaterEqual(report.meta["rmse_spread"], 0.0)

    def test_zero_angle_matches_plain_tokenization(self):
        model = TokenizerModel(tiny_config())
        pc = walk(10)
        np.testing.assert_array_equal(tokens_at_angle(model, pc, "y", 0.0).ids, model.tokenize(pc).ids)

    def test_bad_arguments(self):
        model = TokenizerModel(tiny_config())
        with self.assertRaises(ValueError):
            rotation_sweep(model, walk(5), axis="w")
        with self.assertRaises(ValueError):
            rotation_sweep(model, walk(5), n_angles=0)


class TestCenterDistance(unittest.TestCase):
    def test_profile_and_bins(self):
        model = TokenizerModel(tiny_config())
        profile = center_distance_profile(model, [walk(10), walk(14, seed=1)], n_points=15, seed=0)
        self.assertEqual(len(profile), 15)
        self.assertTrue(all(d >= 0 for d in profile.column("distance")))
        binned = binned_means(profile, n_bins=4)
        self.assertEqual(sum(binned.column("count")), 15)
        centers = binned.column("bin_center")
        self.assertEqual(centers, sorted(centers))

    def test_fewer_atoms_than_requested(self):
        profile = center_distance_profile(TokenizerModel(tiny_config()), [walk(6)], n_points=100)
        self.assertEqual(len(profile), 6)


class TestEvaluation(unittest.TestCase):
    def test_identical_structures(self):
        pc = synth_polymer(np.random.default_rng(0), n_residues=8, atoms_per_residue=3)
        record = compare_structures(pc, pc)
        self.assertAlmostEqual(record["rmse"], 0.0, places=6)
        self.assertAlmostEqual(record["rmse_bb"], 0.0, places=6)
        self.assertAlmostEqual(record["tm"], 1.0, places=6)

    def test_tm_omitted_without_anchors(self):
        pc = walk(8)
        self.assertIsNone(compare_structures(pc, pc)["tm"])

    def test_evaluate_aggregates(self):
        model = TokenizerModel(tiny_config())
        rng = np.random.default_rng(1)
        structures = [synth_polymer(rng, 5, 3), synth_polymer(rng, 4, 2), walk(7)]
        result = evaluate(model, structures)
        self.assertEqual(len(result.per_structure), 3)
        self.assertEqual(result.aggregate["rmse"]["n"], 3)
        self.assertEqual(result.aggregate["tm"]["n"], 2)
        self.assertTrue(0.0 < result.aggregate["codebook_usage"] <= 1.0)
        self.assertEqual(result.per_structure.column("n_tokens"), [15, 8, 7])
        with self.assertRaises(ValueError):
            evaluate(model, [])

    def test_domain_breakdown(self):
        rng = np.random.default_rng(2)
        structures = [synth_polymer(rng, 4, 2), synth_molecule(rng, 9), synth_molecule(rng, 10)]
        breakdown = domain_breakdown(TokenizerModel(tiny_config()), structures)
        self.assertEqual(breakdown.column("kind"), ["molecule", "synthetic"])
        self.assertEqual(breakdown.column("count"), [2, 1])


class TestStudies(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.train = TrainConfig(lr_start=1e-2, total_steps=2, batch_size=2, seed=0)
        self.data = StudyData(train=[walk(8, s) for s in range(3)], test=[walk(6, 10), walk(9, 11)])

    def tearDown(self):
        self.tmp.cleanup()

    def test_run_experiment(self):
        outcome = run_experiment(tiny_config(), self.train, self.data, self.root / "run")
        self.assertIsNotNone(outcome.model)
        self.assertTrue(np.isfinite(outcome.rmse))
        self.assertTrue((self.root / "run" / "metrics.jsonl").exists())

    def test_empty_training_pool_raises(self):
        data = StudyData(train=[walk(2)], test=self.data.test)
        with self.assertRaises(ValueError):
            run_experiment(tiny_config(), TrainConfig(total_steps=1, max_seq_len=1), data, self.root / "empty")

    def test_compression_ratios(self):
        report = compression_study(tiny_config(), self.train, self.data, self.root, k_values=(1, 2))
        self.assertEqual(report.column("k"), [1, 2])
        self.assertEqual(report.column("ratio")[0], 1.0)
        self.assertTrue(np.isfinite(report.column("ratio")[1]))

    def test_codebook_scaling_fit(self):
        report, fit = codebook_scaling_study(tiny_config(), self.train, self.data, self.root, dims=(2, 3), levels=4)
        self.assertEqual(report.column("codebook_size"), [16, 64])
        self.assertIsNotNone(fit)
        self.assertAlmostEqual(fit.r2, 1.0)
        self.assertEqual(report.meta["alpha"], fit.alpha)

    @unittest.skipUnless(os.environ.get("ATOMTOK_SLOW_TESTS"), "set ATOMTOK_SLOW_TESTS=1 to train every ablation rung")
    def test_full_ablation_ladder(self):
        report = ablation_harness(tiny_config(), self.train, self.data, self.root, seeds=(0, 1))
        self.assertEqual(len(report), 5)

    def test_single_rung(self):
        report = ablation_harness(tiny_config(), self.train, self.data, self.root, seeds=(0,), rungs=["small"])
        self.assertEqual(report.column("rung"), ["small"])
        self.assertEqual(report.column("runs"), [1])


if __name__ == "__main__":
    unittest.main()
