import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentlab import tent
from tentlab.semigroup import find_min_alpha, fixture
from tentlab.tent import TentElement, TimeGrid

GRID = TimeGrid.geometric()
# max over a of (1/2)[(1 + a) + sqrt(1 - a^2)], attained at a = 1/sqrt(2)
TP_HALF_ROOT = (1 + math.sqrt(2)) / 2
TP_LHALF = TP_HALF_ROOT ** 2  # 1.4571067811865475


def test_grid_weights_integrate():
    g = TimeGrid.geometric(1e-4, 1e4, 400)
    assert g.moment(0) == pytest.approx(math.log(1e8))
    # int_0^inf exp(-y) y dy = 1 and int_0^inf exp(-y) dy = 1
    assert np.sum(np.exp(-g.nodes) * g.weights_lin) == pytest.approx(1.0, rel=1e-3)
    assert np.sum(np.exp(-g.nodes) * g.weights_flat) == pytest.approx(1.0, rel=1e-3)


def test_grid_doubling_keeps_edges():
    g = TimeGrid.geometric(1e-2, 1e2, 10)
    d = g.doubled()
    assert d.size == 20
    assert np.allclose(d.edges[::2], g.edges)
    with pytest.raises(ValueError):
        TimeGrid.geometric(1.0, 0.5, 10)


def test_tent_shape_checked():
    ctx = fixture("TP").context
    with pytest.raises(ValueError):
        TentElement(GRID, ctx, np.zeros((3, 2)))


@given(seed=st.integers(0, 2**31))
def test_weighted_cauchy_schwarz_property(seed):
    gen = fixture("SM_2")
    rng = np.random.default_rng(seed)
    ctx = gen.context
    a, b = tent.random_tent_pair(ctx, GRID, rng)
    S = np.stack([ctx.random_positive(rng) for _ in range(GRID.size)])
    assert tent.weighted_cauchy_schwarz(gen, a, b, S).passed


@pytest.mark.parametrize("name", ["TP", "CYC_8", "SM_2"])
def test_duality_bound_with_proof_constant(name):
    gen = fixture(name)
    rng = np.random.default_rng(3)
    for d in ("decreasing", "increasing"):
        a = find_min_alpha(gen, d).minimal_alpha
        if a is not None:
            assert tent.check_duality_bound(gen, GRID, a, rng, n_pairs=100).passed


def test_duality_constant_values():
    assert tent.duality_constant(0.0) == 4.0
    assert tent.duality_constant(1.0) == pytest.approx(4 * 2 ** 1.5)


@pytest.mark.parametrize("direction", ["decreasing", "increasing"])
def test_truncation_orders(gen, rng, direction):
    a = find_min_alpha(gen, direction).minimal_alpha
    if a is None:
        pytest.skip("not quasi-monotone in this direction")
    for _ in range(3):
        f = tent.random_tent(gen.context, GRID, rng)
        reps = tent.check_truncation_lemma(gen, f, direction, a)
        assert all(r.passed for r in reps), reps


def test_lhalf_tp_point_mass_value():
    rep = tent.lhalf_test(fixture("TP"), np.geomspace(1e-2, 1e2, 16), np.random.default_rng(0), restarts=2)
    assert rep.lhs == pytest.approx(TP_LHALF, abs=1e-3)


def test_necessity_display_fails_on_tp():
    # point masses reduce the display to (1/2)[(1+a) + sqrt(1-a^2)], a = exp(-2y), which exceeds 1
    rep = tent.check_necessity_display(fixture("TP"), GRID, np.random.default_rng(0), n_samples=5)
    assert not rep.passed
    assert 1.2 < rep.ratio <= TP_HALF_ROOT + 1e-9


def test_norms_homogeneous(gen, rng):
    f = tent.random_tent(gen.context, GRID, rng)
    for norm in (tent.t1_norm, tent.tinf_norm):
        assert norm(gen, f.scaled(3.0)) == pytest.approx(3 * norm(gen, f), rel=1e-10)


def test_tinf_duality_and_smoothed_t1(gen, rng):
    assert tent.check_tinf_by_duality(gen, rng, n_samples=10).passed
    assert tent.check_smoothed_t1(gen, GRID, rng, n_samples=20).passed
