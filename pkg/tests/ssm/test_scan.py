import os
import time
import unittest

import numpy as np

from src.errors import NonFiniteStateError, SelectiveModeError, ShapeError
from src.ssm import (
    PARALLEL,
    SEQUENTIAL,
    ScanInputs,
    causal_convolve,
    lti_kernel,
    run_scan,
    scan_parallel,
    scan_sequential,
    selective_scan,
)
from src.ssm.scan import discretize
from src.tensor import Tensor, finite_difference_check, no_grad, parameter, precision
from src.tensor import ops


def random_inputs(rng, length=12, channels=3, n_state=4) -> ScanInputs:
    return ScanInputs(
        u=rng.normal(size=(length, channels)),
        delta=rng.uniform(0.05, 0.5, size=(length, channels)),
        A=-rng.uniform(0.5, 3.0, size=(channels, n_state)),
        B=rng.normal(size=(length, n_state)),
        C=rng.normal(size=(length, n_state)),
    )


def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    return float(np.max(np.abs(actual - expected)) / np.max(np.abs(expected)))


class TestRecurrenceKernels(unittest.TestCase):
    def test_parallel_matches_sequential(self):
        rng = np.random.default_rng(3)
        for length in (1, 2, 5, 16, 37):
            a = rng.uniform(0.0, 1.0, size=(length, 3, 2))
            b = rng.normal(size=(length, 3, 2))
            h0 = rng.normal(size=(3, 2))
            np.testing.assert_allclose(scan_parallel(a, b), scan_sequential(a, b), rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(scan_parallel(a, b, h0), scan_sequential(a, b, h0), rtol=1e-10, atol=1e-12)

    def test_long_selective_scans_agree_in_both_precisions(self):
        n_instances = 100 if os.environ.get("ATOMTOK_SLOW_TESTS") else 3
        rng = np.random.default_rng(11)
        for dtype, tolerance in ((np.float32, 1e-5), (np.float64, 1e-10)):
            worst = 0.0
            for _ in range(n_instances):
                inputs = random_inputs(rng, length=4096, channels=32, n_state=16)
                u, delta, A, B = (np.asarray(x, dtype=dtype) for x in (inputs.u, inputs.delta, inputs.A, inputs.B))
                a_bar, bx = discretize(u, delta, A, B)
                self.assertEqual(a_bar.dtype, dtype)
                worst = max(worst, relative_error(scan_parallel(a_bar, bx), scan_sequential(a_bar, bx)))
            self.assertLessEqual(worst, tolerance, np.dtype(dtype).name)

    def test_parallel_work_grows_log_linearly(self):
        rng = np.random.default_rng(2)
        timings = {}
        for length in (4096, 16384):
            a = rng.uniform(0.5, 1.0, size=(length, 8, 4))
            b = rng.normal(size=(length, 8, 4))
            runs = []
            for _ in range(5):
                start = time.perf_counter()
                scan_parallel(a, b)
                runs.append(time.perf_counter() - start)
            timings[length] = min(runs)
        self.assertLess(timings[16384] / timings[4096], 8.0)

    def test_scalar_recurrence_by_hand(self):
        a = np.array([0.5, 0.5, 0.5])
        b = np.array([1.0, 1.0, 1.0])
        np.testing.assert_allclose(scan_sequential(a, b), [1.0, 1.5, 1.75])
        np.testing.assert_allclose(scan_parallel(a, b), [1.0, 1.5, 1.75])

    def test_overflow_reports_step(self):
        a = np.full(4, 1e200)
        b = np.full(4, 1e200)
        with self.assertRaises(NonFiniteStateError) as ctx:
            scan_sequential(a, b)
        self.assertEqual(ctx.exception.step, 1)
        with self.assertRaises(NonFiniteStateError):
            scan_parallel(a, b)

    def test_modes_agree_on_full_scan(self):
        inputs = random_inputs(np.random.default_rng(0))
        np.testing.assert_allclose(run_scan(inputs, PARALLEL), run_scan(inputs, SEQUENTIAL), rtol=1e-10, atol=1e-12)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            run_scan(random_inputs(np.random.default_rng(0)), "diagonal")


class TestTimeInvariantEquivalence(unittest.TestCase):
    def test_convolution_matches_recurrence(self):
        rng = np.random.default_rng(11)
        length, channels, n_state = 20, 3, 5
        u = rng.normal(size=(length, channels))
        delta = rng.uniform(0.05, 0.5, size=channels)
        A = -rng.uniform(0.5, 2.0, size=(channels, n_state))
        inputs = ScanInputs.time_invariant(u, delta, A, rng.normal(size=n_state), rng.normal(size=n_state))
        self.assertTrue(inputs.is_time_invariant())
        via_conv = causal_convolve(inputs.lti_kernel(), u)
        np.testing.assert_allclose(via_conv, run_scan(inputs), rtol=1e-9, atol=1e-12)

    def test_scalar_kernel(self):
        kernel = lti_kernel(0.5, 2.0, 3.0, 4)
        np.testing.assert_allclose(kernel, [6.0, 3.0, 1.5, 0.75])

    def test_selective_inputs_have_no_kernel(self):
        inputs = random_inputs(np.random.default_rng(1))
        self.assertFalse(inputs.is_time_invariant())
        with self.assertRaises(SelectiveModeError):
            inputs.lti_kernel()

    def test_short_kernel(self):
        with self.assertRaises(ShapeError):
            causal_convolve(np.ones(2), np.ones(5))

    def test_shape_validation(self):
        rng = np.random.default_rng(0)
        with self.assertRaises(ShapeError):
            ScanInputs(rng.normal(size=(4, 2)), np.ones((4, 3)), -np.ones((2, 3)), np.ones((4, 3)), np.ones((4, 3)))


class TestSelectiveScanOp(unittest.TestCase):
    def _gradcheck(self, mode):
        rng = np.random.default_rng(5)
        ref = random_inputs(rng, length=7, channels=2, n_state=3)
        with precision(np.float64):
            params = [parameter(arr) for arr in (ref.u, ref.delta, ref.A, ref.B, ref.C)]
            weights = Tensor(rng.normal(size=ref.u.shape))
            err = finite_difference_check(
                lambda: ops.sum(ops.mul(selective_scan(*params, mode=mode), weights)), params, eps=1e-5
            )
        self.assertLess(err, 1e-4)

    def test_gradients_parallel(self):
        self._gradcheck(PARALLEL)

    def test_gradients_sequential(self):
        self._gradcheck(SEQUENTIAL)

    def test_value_matches_array_scan(self):
        inputs = random_inputs(np.random.default_rng(2))
        with precision(np.float64):
            out = selective_scan(*(Tensor(arr) for arr in (inputs.u, inputs.delta, inputs.A, inputs.B, inputs.C)))
        np.testing.assert_allclose(out.data, run_scan(inputs), rtol=1e-10)

    def test_chunked_streaming_matches_full(self):
        inputs = random_inputs(np.random.default_rng(9), length=50)
        tensors = [Tensor(arr) for arr in (inputs.u, inputs.delta, inputs.A, inputs.B, inputs.C)]
        with no_grad():
            chunked = selective_scan(*tensors, chunk_size=8)
        np.testing.assert_allclose(chunked.data, run_scan(inputs), rtol=1e-9, atol=1e-12)


if __name__ == "__main__":
    unittest.main()
