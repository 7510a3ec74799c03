import os
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.baselines import (
    VoxelGrid,
    kmeans_codebook,
    load_codebook,
    monte_carlo_constant,
    save_codebook,
    uniform_voxel_error,
    voxel_count,
    voxel_count_curve,
    voxel_rms,
    voxel_rmsd,
)
from src.baselines.kmeans import VoronoiCodebook, assign
from src.errors import CheckpointError, ShapeError

SAMPLES = 200_000


class TestVoxelModel(unittest.TestCase):
    def test_monte_carlo_constant(self):
        self.assertAlmostEqual(monte_carlo_constant(SAMPLES), 0.4803, delta=0.003)

    @unittest.skipUnless(os.environ.get("ATOMTOK_SLOW_TESTS"), "set ATOMTOK_SLOW_TESTS=1 for the full-size estimate")
    def test_full_size_estimate(self):
        self.assertAlmostEqual(monte_carlo_constant(), 0.4803, delta=5e-4)

    def test_error_scales_with_voxel(self):
        self.assertAlmostEqual(voxel_rmsd(2.0, SAMPLES), 2.0 * monte_carlo_constant(SAMPLES))
        self.assertEqual(voxel_rms(3.0), 1.5)
        with self.assertRaises(ValueError):
            voxel_rmsd(0.0, SAMPLES)

    def test_counts(self):
        self.assertEqual(voxel_count(100.0, 1.0), 110592)
        self.assertEqual(voxel_count(120.0, 1.0), 191103)
        self.assertEqual(voxel_count(10.0, 0.48), 1000)
        with self.assertRaises(ValueError):
            voxel_count(100.0, 0.0)

    def test_count_curve(self):
        curve = voxel_count_curve(sides=(10.0, 20.0), rmsd_values=(1.0,))
        self.assertEqual([row["side"] for row in curve], [10.0, 20.0])
        self.assertEqual(curve[1]["voxel_count"], voxel_count(20.0, 1.0))


class TestVoxelGrid(unittest.TestCase):
    def test_geometry(self):
        grid = VoxelGrid(side=10.0, voxel=1.0)
        self.assertEqual(grid.per_axis, 10)
        self.assertEqual(grid.count, 1000)
        self.assertEqual(VoxelGrid(side=10.5, voxel=1.0).per_axis, 11)
        with self.assertRaises(ValueError):
            VoxelGrid(side=0.5, voxel=1.0)

    def test_ids_and_centres(self):
        grid = VoxelGrid(side=4.0, voxel=1.0)
        points = np.array([[-1.9, -1.9, -1.9], [1.2, -0.3, 0.7], [1.99, 1.99, 1.99]])
        ids = grid.encode(points)
        np.testing.assert_array_equal(ids, [0, 3 + 4 * 1 + 16 * 2, 63])
        np.testing.assert_allclose(grid.decode(ids), [[-1.5, -1.5, -1.5], [1.5, -0.5, 0.5], [1.5, 1.5, 1.5]])

    def test_outside_points_are_clamped(self):
        grid = VoxelGrid(side=4.0, voxel=1.0)
        ids = grid.encode(np.array([[50.0, 0.1, 0.1], [-50.0, 0.1, 0.1]]))
        np.testing.assert_allclose(grid.decode(ids)[:, 0], [1.5, -1.5])

    def test_uniform_error_matches_model(self):
        grid = VoxelGrid(side=20.0, voxel=2.0)
        error = uniform_voxel_error(grid, n_points=SAMPLES, seed=1)
        self.assertAlmostEqual(error.mean_distance, 2.0 * 0.4803, delta=0.01)
        self.assertAlmostEqual(error.rms, 1.0, delta=0.01)


class TestKMeans(unittest.TestCase):
    def test_separated_clusters(self):
        rng = np.random.default_rng(0)
        centres = np.array([[0.0, 0.0, 0.0], [20.0, 0.0, 0.0], [0.0, 20.0, 0.0]])
        points = np.vstack([c + rng.normal(scale=0.3, size=(100, 3)) for c in centres])
        codebook = kmeans_codebook(points, k=3, iters=20, seed=0)
        found = codebook.centroids[np.argsort(codebook.centroids[:, 0] + 2 * codebook.centroids[:, 1])]
        np.testing.assert_allclose(found, centres, atol=0.15)
        self.assertLess(codebook.rmse(points), 0.7)

    def test_memorizes_when_k_equals_points(self):
        points = np.random.default_rng(1).normal(size=(16, 3))
        codebook = kmeans_codebook(points, k=16, iters=5, seed=2)
        self.assertAlmostEqual(codebook.rmse(points), 0.0, places=10)

    def test_objective_never_increases(self):
        points = np.random.default_rng(2).uniform(-10, 10, size=(2000, 3))
        codebook = kmeans_codebook(points, k=32, iters=15, seed=3)
        history = np.asarray(codebook.history)
        self.assertTrue(np.all(np.diff(history) <= 1e-12))

    def test_too_few_points(self):
        with self.assertRaises(ValueError):
            kmeans_codebook(np.zeros((3, 3)), k=4)

    def test_assign_in_chunks(self):
        rng = np.random.default_rng(4)
        points, centroids = rng.normal(size=(50, 3)), rng.normal(size=(5, 3))
        ids, sq = assign(points, centroids, chunk=7)
        brute = np.linalg.norm(points[:, None] - centroids[None], axis=2)
        np.testing.assert_array_equal(ids, brute.argmin(axis=1))
        np.testing.assert_allclose(sq, brute.min(axis=1) ** 2)

    def test_codebook_round_trip(self):
        codebook = kmeans_codebook(np.random.default_rng(5).normal(size=(40, 3)), k=4, iters=3)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "codebook.ckpt"
            save_codebook(path, codebook)
            np.testing.assert_array_equal(load_codebook(path).centroids, codebook.centroids)
            (Path(tmp) / "other.ckpt").write_bytes(b"XXXX")
            with self.assertRaises(CheckpointError):
                load_codebook(Path(tmp) / "other.ckpt")

    def test_encode_decode(self):
        codebook = VoronoiCodebook(np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]))
        ids = codebook.encode(np.array([[1.0, 0.0, 0.0], [9.0, 1.0, 0.0]]))
        np.testing.assert_array_equal(ids, [0, 1])
        np.testing.assert_array_equal(codebook.decode(ids)[1], [10.0, 0.0, 0.0])
        with self.assertRaises(ShapeError):
            VoronoiCodebook(np.zeros((0, 3)))


if __name__ == "__main__":
    unittest.main()
