import itertools
import tempfile
import unittest
from pathlib import Path

import numpy as np

from src.errors import CodebookError, ParseError, SpecMismatchError
from src.quantizer import (
    FsqSpec,
    TokenSequence,
    bound,
    code_to_id,
    codebook_usage,
    codes_to_ids,
    codes_to_latent,
    id_to_code,
    ids_to_codes,
    quantize,
    read_tokens,
    tokens_to_latent,
    write_tokens,
)
from src.tensor import Tensor, parameter, precision
from src.tensor import ops


class TestFsqSpec(unittest.TestCase):
    def test_default_codebook(self):
        spec = FsqSpec()
        self.assertEqual(spec.dims, 6)
        self.assertEqual(spec.codebook_size, 4096)

    def test_mixed_levels(self):
        spec = FsqSpec((8, 5, 5, 5))
        self.assertEqual(spec.codebook_size, 1000)
        np.testing.assert_array_equal(spec.basis, [1, 8, 40, 200])

    def test_invalid_levels(self):
        with self.assertRaises(CodebookError):
            FsqSpec((4, 1))
        with self.assertRaises(CodebookError):
            FsqSpec(())


class TestIdBijection(unittest.TestCase):
    def test_every_tuple_maps_to_a_distinct_id(self):
        spec = FsqSpec((3, 2, 4))
        tuples = list(itertools.product(*(range(level) for level in spec.levels)))
        ids = [code_to_id(t, spec) for t in tuples]
        self.assertEqual(sorted(ids), list(range(spec.codebook_size)))
        for token_id, t in zip(ids, tuples):
            self.assertEqual(id_to_code(token_id, spec), t)

    def test_first_dimension_varies_fastest(self):
        spec = FsqSpec((4, 4))
        self.assertEqual(code_to_id((1, 0), spec), 1)
        self.assertEqual(code_to_id((0, 1), spec), 4)
        self.assertEqual(code_to_id((3, 3), spec), 15)

    def test_out_of_range(self):
        spec = FsqSpec((4, 4))
        with self.assertRaises(CodebookError):
            codes_to_ids(np.array([[4, 0]]), spec)
        with self.assertRaises(CodebookError):
            ids_to_codes(np.array([16]), spec)
        with self.assertRaises(CodebookError):
            TokenSequence(ids=[0, 99], spec=spec)


class TestQuantization(unittest.TestCase):
    def test_bound_range(self):
        spec = FsqSpec((4, 5, 8))
        with precision(np.float64):
            z = Tensor(np.array([[-50.0, 0.0, 50.0], [0.3, -0.2, 1.0]]))
            bounded = bound(z, spec).data
        np.testing.assert_allclose(bounded[0], [0.0, 2.0, 7.0], atol=1e-12)
        self.assertTrue(np.all(bounded >= 0.0))
        self.assertTrue(np.all(bounded <= np.asarray(spec.levels) - 1))

    def test_ties_round_to_even(self):
        spec = FsqSpec((4, 4))
        with precision(np.float64):
            z_q, tokens = quantize(Tensor(np.array([[0.5, 1.5], [2.5, 3.0]])), spec)
        np.testing.assert_array_equal(z_q.data, [[0.0, 2.0], [2.0, 3.0]])
        np.testing.assert_array_equal(tokens.ids, [0 + 2 * 4, 2 + 3 * 4])

    def test_straight_through_gradient(self):
        spec = FsqSpec((4, 4))
        with precision(np.float64):
            z = parameter(np.array([[0.1, -0.4], [0.7, 0.2]]))
            z_q, _ = quantize(bound(z, spec), spec)
            ops.sum(z_q).backward()
        expected = 1.5 * (1.0 - np.tanh(z.data) ** 2)
        np.testing.assert_allclose(z.grad, expected, rtol=1e-12)

    def test_latent_scale(self):
        spec = FsqSpec((4, 5))
        with precision(np.float64):
            latent = codes_to_latent(Tensor(np.array([[0.0, 0.0], [3.0, 4.0], [1.5, 2.0]])), spec).data
        np.testing.assert_allclose(latent, [[-1.0, -1.0], [1.0, 1.0], [0.0, 0.0]])

    def test_tokens_to_latent_round_trip(self):
        spec = FsqSpec((4, 5))
        with precision(np.float64):
            z_q, tokens = quantize(Tensor(np.array([[1.0, 3.0], [3.0, 0.0]])), spec)
            np.testing.assert_allclose(tokens_to_latent(tokens, spec).data, codes_to_latent(z_q, spec).data)
            with self.assertRaises(SpecMismatchError):
                tokens_to_latent(tokens, FsqSpec((5, 4)))

    def test_width_mismatch(self):
        with self.assertRaises(CodebookError):
            bound(Tensor(np.zeros((3, 2))), FsqSpec((4, 4, 4)))


class TestTokenSequence(unittest.TestCase):
    def test_hamming(self):
        spec = FsqSpec((4, 4))
        a = TokenSequence(ids=[1, 2, 3], spec=spec)
        b = TokenSequence(ids=[1, 5, 4], spec=spec)
        self.assertEqual(a.hamming(b), 2)
        self.assertEqual(a.n_atoms, 3)
        with self.assertRaises(CodebookError):
            a.hamming(TokenSequence(ids=[1], spec=spec))

    def test_codebook_usage(self):
        spec = FsqSpec((2, 2))
        stream = [TokenSequence(ids=[0, 1, 1], spec=spec), np.array([1, 2])]
        self.assertAlmostEqual(codebook_usage(stream, spec.codebook_size), 0.75)
        with self.assertRaises(ValueError):
            codebook_usage([], 4)


class TestTokenFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.records = [
            TokenSequence(ids=[0, 4095, 17], spec=FsqSpec(), n_atoms=3),
            TokenSequence(ids=[5, 6], spec=FsqSpec((8, 5, 5, 5)), n_atoms=7, compression=4),
        ]

    def tearDown(self):
        self.tmp.cleanup()

    def assertRecordsEqual(self, loaded):
        self.assertEqual(len(loaded), len(self.records))
        for got, want in zip(loaded, self.records):
            np.testing.assert_array_equal(got.ids, want.ids)
            self.assertEqual(got.spec, want.spec)
            self.assertEqual(got.n_atoms, want.n_atoms)
            self.assertEqual(got.compression, want.compression)

    def test_binary_file(self):
        path = self.root / "a.tok"
        write_tokens(path, self.records)
        self.assertEqual(path.read_bytes()[:4], b"ATOK")
        self.assertRecordsEqual(read_tokens(path))

    def test_text_file(self):
        path = self.root / "a.tok.txt"
        write_tokens(path, self.records)
        self.assertTrue(path.read_text().startswith("record levels=4,4,4,4,4,4 length=3 atoms=3 k=1"))
        self.assertRecordsEqual(read_tokens(path))

    def test_oversized_codebook_needs_text(self):
        record = TokenSequence(ids=[70000], spec=FsqSpec((300, 300)))
        with self.assertRaises(CodebookError):
            write_tokens(self.root / "big.tok", [record])
        write_tokens(self.root / "big.txt", [record])
        self.assertEqual(read_tokens(self.root / "big.txt")[0].ids[0], 70000)

    def test_malformed_files(self):
        bad = self.root / "bad.tok"
        bad.write_bytes(b"NOPE")
        with self.assertRaises(ParseError):
            read_tokens(bad)
        text = self.root / "bad.txt"
        text.write_text("record levels=4,4 length=3 atoms=3 k=1\n1 2\n")
        with self.assertRaises(ParseError):
            read_tokens(text)

    def test_truncated_binary_file(self):
        path = self.root / "a.tok"
        write_tokens(path, self.records)
        blob = path.read_bytes()
        cut = self.root / "cut.tok"
        for size in range(4, len(blob)):
            cut.write_bytes(blob[:size])
            with self.assertRaises(ParseError, msg=f"{size} bytes") as ctx:
                read_tokens(cut)
            self.assertIn("truncated", str(ctx.exception))

    def test_trailing_bytes_are_rejected(self):
        path = self.root / "a.tok"
        write_tokens(path, self.records)
        path.write_bytes(path.read_bytes() + b"\x00")
        with self.assertRaises(ParseError):
            read_tokens(path)


if __name__ == "__main__":
    unittest.main()
