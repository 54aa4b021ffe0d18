"""Hot loops for the dyadic appendix, compiled with numba when available.

Set TENTLAB_DISABLE_NUMBA=1 to force the pure numpy versions. Both versions
return identical results; the benchmark in benchmarks/ compares their speed.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("TENTLAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False


# --------------------------------------------------------------------------
# numpy reference versions
# --------------------------------------------------------------------------
def label_means_numpy(f, labels, n_atoms):
    """Replace each entry of f by the mean of f over its atom (uniform weights)."""
    sums = np.bincount(labels, weights=f, minlength=n_atoms)
    counts = np.bincount(labels, minlength=n_atoms)
    return (sums / counts)[labels]


def pair_ratio_max_numpy(kcol, labels, inv_sizes, coef, tail):
    """max over (x, y) of K(x, y) / M(x, y) for a circulant K.

    K(x, y) = kcol[(x - y) mod N];
    M(x, y) = tail + sum_l coef[l] * inv_sizes[l] * [labels[l, x] == labels[l, y]].
    Returns (ratio, x, y).
    """
    n = kcol.size
    idx = np.arange(n)
    best, bx, by = -1.0, 0, 0
    block = max(1, 2 ** 22 // max(n, 1))
    for x0 in range(0, n, block):
        xs = idx[x0:x0 + block]
        k = kcol[(xs[:, None] - idx[None, :]) % n]
        m = np.full(k.shape, tail)
        for lev in range(labels.shape[0]):
            same = labels[lev, xs][:, None] == labels[lev][None, :]
            m += coef[lev] * inv_sizes[lev] * same
        r = k / m
        j = int(np.argmax(r))
        if r.flat[j] > best:
            best = float(r.flat[j])
            bx, by = int(xs[j // n]), int(j % n)
    return best, bx, by


# --------------------------------------------------------------------------
# compiled versions
# --------------------------------------------------------------------------
if HAVE_NUMBA:
    @njit(cache=True)
    def _label_means_nb(f, labels, n_atoms):
        sums = np.zeros(n_atoms)
        counts = np.zeros(n_atoms)
        for i in range(f.size):
            sums[labels[i]] += f[i]
            counts[labels[i]] += 1.0
        out = np.empty(f.size)
        for i in range(f.size):
            out[i] = sums[labels[i]] / counts[labels[i]]
        return out

    @njit(cache=True)
    def _pair_ratio_max_nb(kcol, labels, inv_sizes, coef, tail):
        n = kcol.size
        nl = labels.shape[0]
        best, bx, by = -1.0, 0, 0
        for x in range(n):
            for y in range(n):
                m = tail
                for lev in range(nl):
                    if labels[lev, x] == labels[lev, y]:
                        m += coef[lev] * inv_sizes[lev]
                d = x - y
                if d < 0:
                    d += n
                r = kcol[d] / m
                if r > best:
                    best, bx, by = r, x, y
        return best, bx, by


def label_means(f, labels, n_atoms):
    f = np.ascontiguousarray(f, dtype=float)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if HAVE_NUMBA:
        return _label_means_nb(f, labels, int(n_atoms))
    return label_means_numpy(f, labels, int(n_atoms))


def pair_ratio_max(kcol, labels, inv_sizes, coef, tail):
    kcol = np.ascontiguousarray(kcol, dtype=float)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    inv_sizes = np.ascontiguousarray(inv_sizes, dtype=float)
    coef = np.ascontiguousarray(coef, dtype=float)
    if HAVE_NUMBA:
        r, x, y = _pair_ratio_max_nb(kcol, labels, inv_sizes, coef, float(tail))
        return float(r), int(x), int(y)
    return pair_ratio_max_numpy(kcol, labels, inv_sizes, coef, float(tail))
