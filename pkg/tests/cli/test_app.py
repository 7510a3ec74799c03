import asyncio
import io
import json
import tempfile
import unittest
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np

from src.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, run
from src.config import Settings
from src.data import load_structure, synth_polymer, write_structure
from src.quantizer import read_tokens
from src.utils.logger import logger

TINY_MODEL = ["--enc-layers", "1", "--dec-layers", "1", "--d-model", "8", "--d-state", "4", "--levels", "4", "4", "4"]


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)
        self.settings = Settings(output_root=str(self.root / "runs"), record_runs=False)
        self.log = io.StringIO()
        logger.set_stream(self.log)

    def tearDown(self):
        logger.set_stream(None)
        self.tmp.cleanup()

    def invoke(self, *argv: str):
        out = io.StringIO()
        with redirect_stdout(out):
            code = asyncio.run(run(list(argv), self.settings))
        return code, out.getvalue()


class TestExitCodes(CliTestCase):
    def test_help(self):
        code, _ = self.invoke("--help")
        self.assertEqual(code, EXIT_OK)

    def test_usage_errors(self):
        self.assertEqual(self.invoke()[0], EXIT_USAGE)
        self.assertEqual(self.invoke("train", "--no-such-flag")[0], EXIT_USAGE)
        self.assertEqual(self.invoke("train", "--k", "3")[0], EXIT_USAGE)
        self.assertEqual(self.invoke("baseline", "voxel", "--config", str(self.root / "missing.toml"))[0], EXIT_USAGE)

    def test_missing_inputs(self):
        code, _ = self.invoke("train", "--output", str(self.root / "t"))
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("data.manifest", self.log.getvalue())
        code, _ = self.invoke("eval", "--checkpoint", str(self.root / "none.ckpt"), "--manifest", str(self.root / "m.json"))
        self.assertEqual(code, EXIT_USAGE)

    def test_corrupt_checkpoint_is_a_runtime_failure(self):
        bad = self.root / "bad.ckpt"
        bad.write_bytes(b"not a checkpoint")
        pdb = write_structure(synth_polymer(np.random.default_rng(0), 3, 2), self.root / "x.pdb")
        code, _ = self.invoke("tokenize", "--checkpoint", str(bad), "--output", str(self.root / "o"), str(pdb))
        self.assertEqual(code, EXIT_FAILURE)


class TestBaselineCommand(CliTestCase):
    def test_voxel_count(self):
        out_dir = self.root / "voxel"
        code, out = self.invoke(
            "baseline", "voxel", "--A", "100", "--rmsd", "1", "--samples", "200000", "--points", "1000",
            "--output", str(out_dir),
        )
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(out.splitlines()[0], "110592")
        meta = json.loads((out_dir / "voxel.json").read_text())["meta"]
        self.assertEqual(meta["voxel_count"], 110592)
        self.assertTrue((out_dir / "config.json").exists())


class TestPipeline(CliTestCase):
    def test_synth_train_tokenize_decode_eval(self):
        data = self.root / "data"
        code, out = self.invoke(
            "synth", "--n", "10", "--residues", "3", "5", "--atoms-per-residue", "2", "3", "--seed", "1",
            "--output", str(data),
        )
        self.assertEqual(code, EXIT_OK)
        manifest = data / "manifest.json"
        self.assertEqual(out.strip(), str(manifest))

        train_dir = self.root / "train"
        code, _ = self.invoke(
            "train", *TINY_MODEL, "--steps", "2", "--batch-size", "2", "--checkpoint-every", "1",
            "--validate-every", "1", "--manifest", str(manifest), "--output", str(train_dir),
        )
        self.assertEqual(code, EXIT_OK)
        checkpoint = train_dir / "checkpoints" / "final.ckpt"
        self.assertTrue(checkpoint.exists())
        self.assertEqual(len((train_dir / "metrics.jsonl").read_text().splitlines()), 2)

        pc = synth_polymer(np.random.default_rng(5), 4, 3)
        source = write_structure(pc, self.root / "input.pdb")
        code, _ = self.invoke("tokenize", "--checkpoint", str(checkpoint), "--output", str(self.root / "tok"), str(source))
        self.assertEqual(code, EXIT_OK)
        (tokens,) = read_tokens(self.root / "tok" / "input.tok")
        self.assertEqual(len(tokens), 12)

        code, _ = self.invoke("decode", "--checkpoint", str(checkpoint), "--output", str(self.root / "dec"), str(self.root / "tok" / "input.tok"))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(load_structure(self.root / "dec" / "input.pdb").n_atoms, 12)

        eval_dir = self.root / "eval"
        code, out = self.invoke("eval", "--checkpoint", str(checkpoint), "--manifest", str(manifest), "--split", "train", "--output", str(eval_dir))
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(json.loads(out)["rmse"]["n"], 8)

        code, out = self.invoke("plot-data", str(eval_dir / "eval.json"))
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(out.startswith("# eval "))
        self.assertTrue((eval_dir / "eval.tsv").exists())

    def test_decode_rejects_other_codebooks(self):
        data = self.root / "data"
        self.invoke("synth", "--n", "4", "--residues", "3", "3", "--atoms-per-residue", "2", "2", "--output", str(data))
        checkpoints = {}
        for name, levels in (("a", ["4", "4", "4"]), ("b", ["5", "5", "5"])):
            argv = [*TINY_MODEL[:-3], *levels, "--steps", "1", "--batch-size", "1", "--manifest", str(data / "manifest.json")]
            code, _ = self.invoke("train", *argv, "--output", str(self.root / name))
            self.assertEqual(code, EXIT_OK)
            checkpoints[name] = self.root / name / "checkpoints" / "final.ckpt"
        source = write_structure(synth_polymer(np.random.default_rng(0), 3, 2), self.root / "s.pdb")
        self.invoke("tokenize", "--checkpoint", str(checkpoints["a"]), "--output", str(self.root / "tok"), str(source))
        code, _ = self.invoke("decode", "--checkpoint", str(checkpoints["b"]), "--output", str(self.root / "dec"), str(self.root / "tok" / "s.tok"))
        self.assertEqual(code, EXIT_FAILURE)


if __name__ == "__main__":
    unittest.main()
