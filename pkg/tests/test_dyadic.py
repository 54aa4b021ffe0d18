import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentlab import _accel, dyadic
from tentlab.tent import lhalf_commutative

FIX = dyadic.LineFixture(768, 32.0)
SYS = dyadic.DyadicSystem(FIX, FIX.phi(1.0))


def test_kernel_bound_continuum_value():
    # heat, r = 2: sup_u (1 + u^3) exp(-u^2) / sqrt(pi) is attained at u = 0
    fix = dyadic.LineFixture(1024, 48.0)
    for t in (0.5, 1.0, 4.0):
        assert dyadic.kernel_bound_value(fix, t, 2.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-6)
    with pytest.raises(ValueError):
        dyadic.kernel_bound_value(fix, 1.0, 1.0)


def test_cauchy_fails_kernel_bound():
    fix = dyadic.LineFixture(1024, 48.0, "cauchy")
    assert not dyadic.check_kernel_bound(fix, 1e-2).passed


def test_snapping_is_exact():
    assert SYS.snap_error == 0.0
    assert SYS.m0 == 48


@pytest.mark.parametrize("k", [0, -1])
@pytest.mark.parametrize("shifted", [False, True])
def test_conditional_expectations(k, shifted):
    rng = np.random.default_rng(1)
    f = rng.exponential(size=FIX.n)
    e = SYS.expectation(k, f, shifted)
    assert np.allclose(SYS.expectation(k, e, shifted), e, atol=1e-12)
    assert e.mean() == pytest.approx(f.mean(), rel=1e-12)
    assert e.min() >= 0


@pytest.mark.parametrize("k", [0, -1])
def test_atom_meets_at_most_two_shifted(k):
    plain, shifted = SYS.labels(k, False), SYS.labels(k, True)
    for j in np.unique(plain):
        assert np.unique(shifted[plain == j]).size <= 2


def test_exact_factors():
    rng = np.random.default_rng(0)
    a2 = dyadic.check_parent_domination(FIX, SYS, rng)
    a3 = dyadic.check_shifted_domination(FIX, SYS, rng)
    assert a2.passed and a2.ratio == pytest.approx(4.0)
    assert a3.passed and a3.ratio == pytest.approx(3.0)


def test_domination_monotone_in_r():
    cs = [dyadic.domination_constant(FIX, 1.0, r)["c"] for r in (1.5, 2.0, 3.0)]
    assert cs == sorted(cs)


def test_single_point_constant_is_one():
    fix = dyadic.LineFixture(1, 1.0)
    v, _ = lhalf_commutative(fix.kernel_access(1.0), np.random.default_rng(0), 2)
    assert v == pytest.approx(1.0)


def test_bad_tiling_rejected():
    with pytest.raises(ValueError):
        dyadic.DyadicSystem(dyadic.LineFixture(1000, 32.0), 2.0)


@given(seed=st.integers(0, 2**31), n=st.sampled_from([12, 48, 96]))
def test_compiled_and_numpy_kernels_agree(seed, n):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=n)
    labels = np.arange(n) // 4
    assert np.allclose(_accel.label_means(f, labels, n // 4), _accel.label_means_numpy(f, labels, n // 4))
    kcol = rng.random(n)
    lab2 = np.stack([np.arange(n) // 4, ((np.arange(n) - 1) % n) // 4])
    args = (kcol, lab2, np.array([0.25, 0.25]), np.array([1.0, 0.5]), 0.1)
    a = _accel.pair_ratio_max(*args)
    b = _accel.pair_ratio_max_numpy(*args)
    assert a[0] == pytest.approx(b[0], rel=1e-12)


def test_fft_apply_matches_dense_and_densities_agree():
    fix = dyadic.LineFixture(96, 8.0)
    f = np.random.default_rng(2).random(96)
    for t in (0.05, 1.0, 30.0):
        assert np.allclose(fix.apply(t, f), fix.dense(t) @ f, atol=1e-12)
    # image sum (sd < L/4) and Fourier series describe the same periodic heat kernel
    t = (8.0 / 4) ** 2 / 2 * 0.99
    x = np.arange(96) * fix.h
    four = (1 + 2 * sum(np.exp(-t * (2 * np.pi * k / 8.0) ** 2) * np.cos(2 * np.pi * k * x / 8.0)
                        for k in range(1, 200))) / 8.0
    assert np.allclose(fix.density(t), four, atol=1e-12)
