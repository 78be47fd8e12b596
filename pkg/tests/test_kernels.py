import numpy as np
import pytest

from faircluster import _kernels
from faircluster._kernels import (NUMBA_ENABLED, _local_search_loops,
                                  _local_search_numpy, assignment_dual,
                                  kuhn_threshold_match)


def test_flag_reflects_environment():
    import os
    flag = os.environ.get("FAIRCLUSTER_NUMBA", "").strip().lower()
    if flag in ("0", "false", "off", "no"):
        assert not NUMBA_ENABLED


class TestLocalSearchPaths:
    def _inputs(self, rng, m, k):
        # integer coordinates: both paths accumulate exactly representable sums
        pts = rng.integers(0, 50, size=(m, 1)).astype(float)
        D = np.abs(pts - pts.T)
        w = rng.integers(1, 4, size=m).astype(float)
        init = np.sort(rng.choice(m, size=k, replace=False)).astype(np.int64)
        return np.ascontiguousarray(D), w, init

    def test_loop_and_numpy_agree(self):
        rng = np.random.default_rng(50)
        for _ in range(25):
            m = int(rng.integers(3, 12))
            k = int(rng.integers(1, min(4, m) + 1))
            D, w, init = self._inputs(rng, m, k)
            a = _local_search_loops(D, w, init.copy(), 1e-9)
            b = _local_search_numpy(D, w, init.copy(), 1e-9)
            assert np.array_equal(np.sort(a), np.sort(b))
            cost_a = float(w @ D[:, a].min(axis=1))
            cost_b = float(w @ D[:, b].min(axis=1))
            assert cost_a == cost_b

    def test_both_paths_reach_local_optimum(self):
        rng = np.random.default_rng(51)
        for impl in (_local_search_loops, _local_search_numpy):
            D, w, init = self._inputs(rng, 10, 3)
            centers = impl(D, w, init.copy(), 1e-9)
            base = float(w @ D[:, centers].min(axis=1))
            for slot in range(3):
                for cand in range(10):
                    if cand in centers:
                        continue
                    trial = centers.copy()
                    trial[slot] = cand
                    assert float(w @ D[:, trial].min(axis=1)) >= base * (1 - 1e-9)


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba disabled")
class TestJitParity:
    def test_kuhn_matches_source(self):
        rng = np.random.default_rng(52)
        for _ in range(20):
            nl = int(rng.integers(1, 7))
            nr = int(rng.integers(1, 7))
            w = rng.uniform(0, 1, size=(nl, nr))
            tau = float(np.median(w))
            jit_l, jit_r = kuhn_threshold_match(w, tau)
            py_l, py_r = kuhn_threshold_match.py_func(w, tau)
            assert np.array_equal(jit_l, py_l)
            assert np.array_equal(jit_r, py_r)

    def test_assignment_matches_source(self):
        rng = np.random.default_rng(53)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            w = rng.uniform(0, 1, size=(n, n))
            jit_out = assignment_dual(w)
            py_out = assignment_dual.py_func(w)
            assert np.array_equal(jit_out[0], py_out[0])
            assert np.allclose(jit_out[1], py_out[1])
            assert np.allclose(jit_out[2], py_out[2])

    def test_local_search_jit_matches_loops(self):
        rng = np.random.default_rng(54)
        for _ in range(10):
            m = int(rng.integers(3, 10))
            k = int(rng.integers(1, min(3, m) + 1))
            pts = rng.integers(0, 30, size=(m, 1)).astype(float)
            D = np.ascontiguousarray(np.abs(pts - pts.T))
            w = rng.integers(1, 4, size=m).astype(float)
            init = np.sort(rng.choice(m, size=k, replace=False)).astype(np.int64)
            jit_centers = _kernels.local_search_core(D, w, init.copy(), 1e-9)
            py_centers = _local_search_loops(D, w, init.copy(), 1e-9)
            assert np.array_equal(jit_centers, py_centers)
