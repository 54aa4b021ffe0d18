"""Compare the numba kernels in tentlab._accel with their numpy fallbacks.

    python benchmarks/bench_kernels.py
"""
import time

import numpy as np

from tentlab import _accel
from tentlab.dyadic import DyadicSystem, LineFixture


def _time(fn, *args, repeat=3):
    fn(*args)  # warm up (and compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _inputs(n, r=2.0):
    fix = LineFixture(n, 32.0)
    sysd = DyadicSystem(fix, 2.0)
    labels, inv, coef = [], [], []
    for k, m, _ in sysd.levels:
        for sh in (False, True):
            labels.append(sysd.labels(k, sh))
            inv.append(1.0 / m)
            coef.append(4.0 ** (k * r))
    tail = 2.0 / n * 4.0 ** (sysd.global_level * r) / (1 - 4.0 ** (-r))
    return fix.column(1.0), np.array(labels, dtype=np.int64), np.array(inv), np.array(coef), tail, sysd


def main():
    if not _accel.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy path is timed")
    print(f"{'kernel':<16}{'N':>6}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for n in (768, 1536, 3072):
        col, labels, inv, coef, tail, sysd = _inputs(n)
        tn, rn = _time(_accel.pair_ratio_max_numpy, col, labels, inv, coef, tail)
        if _accel.HAVE_NUMBA:
            tb, rb = _time(_accel.pair_ratio_max, col, labels, inv, coef, tail)
            assert abs(rn[0] - rb[0]) <= 1e-12 * rn[0]
            print(f"{'pair_ratio_max':<16}{n:>6}{tn:>12.4f}{tb:>12.4f}{tn / tb:>10.1f}")
        else:
            print(f"{'pair_ratio_max':<16}{n:>6}{tn:>12.4f}{'-':>12}{'-':>10}")
        f = np.random.default_rng(0).exponential(size=n)
        lab = labels[0]
        tn, a = _time(_accel.label_means_numpy, f, lab, int(lab.max()) + 1, repeat=50)
        if _accel.HAVE_NUMBA:
            tb, b = _time(_accel.label_means, f, lab, int(lab.max()) + 1, repeat=50)
            assert np.allclose(a, b, rtol=1e-14, atol=0)
            print(f"{'label_means':<16}{n:>6}{tn:>12.6f}{tb:>12.6f}{tn / tb:>10.1f}")


if __name__ == "__main__":
    main()
