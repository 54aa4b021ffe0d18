import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentlab.algebra import AlgebraContext, ShapeMismatch

CONTEXTS = [AlgebraContext.commutative([0.25, 0.25, 0.5]), AlgebraContext.matrix(3)]
seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("ctx", CONTEXTS, ids=["comm", "matrix"])
@given(seed=seeds)
def test_trace_is_tracial(ctx, seed):
    rng = np.random.default_rng(seed)
    x, y = ctx.random_element(rng), ctx.random_element(rng)
    a, b = ctx.trace(ctx.mul(x, y)), ctx.trace(ctx.mul(y, x))
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("ctx", CONTEXTS, ids=["comm", "matrix"])
@given(seed=seeds)
def test_lp_norms_ordered(ctx, seed):
    rng = np.random.default_rng(seed)
    x = ctx.random_element(rng)
    vals = [ctx.lp_norm(x, p) for p in (0.5, 1, 2, np.inf)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("ctx", CONTEXTS, ids=["comm", "matrix"])
@given(seed=seeds)
def test_modulus_positive_and_l2(ctx, seed):
    rng = np.random.default_rng(seed)
    x = ctx.random_element(rng)
    assert ctx.min_witness(ctx.modulus(x)) >= -1e-12
    direct = np.sum(np.abs(x) ** 2 * (ctx.weights if ctx.is_commutative else 1.0 / ctx.size))
    assert ctx.lp_norm(x, 2) ** 2 == pytest.approx(direct, rel=1e-12)
    assert np.real(ctx.trace(ctx.abs2(x))) == pytest.approx(direct, rel=1e-12)


def test_sqrt_pos_squares_back():
    ctx = AlgebraContext.matrix(4)
    p = ctx.random_positive(np.random.default_rng(0))
    r = ctx.sqrt_pos(p)
    assert np.allclose(r @ r, p, atol=1e-12)


def test_half_quasi_norm_is_not_rooted():
    ctx = AlgebraContext.commutative([0.5, 0.5])
    x = np.array([4.0, 0.0], dtype=complex)
    # (tau |x|^(1/2))^2 = (0.5 * 2)^2
    assert ctx.lp_norm(x, 0.5) == pytest.approx(1.0)


def test_shape_mismatch_and_bad_weights():
    with pytest.raises(ShapeMismatch):
        AlgebraContext.matrix(2).trace(np.ones(3))
    with pytest.raises(ValueError):
        AlgebraContext.commutative([1.0, -1.0])
    with pytest.raises(ValueError):
        AlgebraContext.matrix(2).is_positive(np.array([[0, 1], [0, 0]], dtype=complex))
