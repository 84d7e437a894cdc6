"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on representative inputs with both backends and
prints per-call timings plus the speedup. Also checks that the two
backends agree on every output before timing anything.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from periocular.kernels import py_backend

try:
    from periocular.kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lbp(repeats, rng):
    roi = rng.uniform(0, 255, (96, 224))
    np.testing.assert_array_equal(py_backend.lbp_codes(roi),
                                  _native.lbp_codes(roi))
    return (timeit(lambda: py_backend.lbp_codes(roi), repeats),
            timeit(lambda: _native.lbp_codes(roi), repeats))


def bench_glcm(repeats, rng):
    q = rng.integers(0, 8, size=(32, 32))
    offsets = ((0, 1), (-1, 1), (-1, 0), (-1, -1))

    def run(impl):
        for dr, dc in offsets:
            impl.glcm_counts(q, 8, dr, dc)

    for dr, dc in offsets:
        np.testing.assert_array_equal(py_backend.glcm_counts(q, 8, dr, dc),
                                      _native.glcm_counts(q, 8, dr, dc))
    return (timeit(lambda: run(py_backend), repeats),
            timeit(lambda: run(_native), repeats))


def bench_svm_epoch(repeats, rng):
    n, d = 600, 2520
    X = np.ascontiguousarray(rng.normal(size=(n, d)))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    q_diag = np.einsum("ij,ij->i", X, X) + 1.0
    order = rng.permutation(n).astype(np.int64)

    def run(impl):
        alpha = np.zeros(n)
        w = np.zeros(d)
        return impl.svm_cd_epoch(X, y, alpha, w, 0.0, 1.0, q_diag, order)

    a1, w1 = np.zeros(n), np.zeros(d)
    a2, w2 = np.zeros(n), np.zeros(d)
    b1 = py_backend.svm_cd_epoch(X, y, a1, w1, 0.0, 1.0, q_diag, order)
    b2 = _native.svm_cd_epoch(X, y, a2, w2, 0.0, 1.0, q_diag, order)
    np.testing.assert_allclose(w1, w2, atol=1e-12)
    np.testing.assert_allclose(a1, a2, atol=1e-12)
    assert abs(b1 - b2) <= 1e-12
    return (timeit(lambda: run(py_backend), repeats),
            timeit(lambda: run(_native), repeats))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="repetitions per kernel; best time is reported")
    args = parser.parse_args()

    if _native is None:
        raise SystemExit("compiled backend not available; build the package "
                         "first (pip install -e . --no-build-isolation)")

    rng = np.random.default_rng(0)
    benches = [
        ("lbp_codes (96x224 ROI)", bench_lbp),
        ("glcm_counts (32x32 block, 4 offsets)", bench_glcm),
        ("svm_cd_epoch (600x2520)", bench_svm_epoch),
    ]
    print(f"{'kernel':<40} {'python':>10} {'native':>10} {'speedup':>8}")
    for name, fn in benches:
        t_py, t_nat = fn(args.repeats, rng)
        print(f"{name:<40} {t_py * 1e3:>8.3f}ms {t_nat * 1e3:>8.3f}ms "
              f"{t_py / t_nat:>7.1f}x")


if __name__ == "__main__":
    main()
