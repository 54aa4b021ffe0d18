
import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentlab import hardy_bmo as hb
from tentlab.semigroup import find_min_alpha, fixture
from tentlab.tent import TimeGrid

GRID = TimeGrid.geometric()
PHI = np.array([1.0, -1.0], dtype=complex)


def test_tp_closed_forms():
    # BMO: sup_y (1 - exp(-sqrt2 y)) = 1;  H1: (int 2 exp(-2 sqrt2 y) y dy)^(1/2) = 1/2
    gen = fixture("TP")
    assert hb.bmo_norm(gen, PHI, GRID) == pytest.approx(1.0, rel=5e-3)
    assert hb.bmo_heat_variant(gen, PHI, GRID) == pytest.approx(1.0, rel=5e-3)
    assert hb.h1_norm(gen, PHI, GRID) == pytest.approx(0.5, rel=5e-3)
    assert hb.h1_norm(gen, PHI, GRID.doubled()) == pytest.approx(0.5, rel=1e-3)


def test_norms_kill_constants_and_scale(gen, rng):
    ctx = gen.context
    one = ctx.identity()
    assert hb.bmo_norm(gen, one, GRID) == pytest.approx(0.0, abs=1e-12)
    assert hb.h1_norm(gen, one, GRID) == pytest.approx(0.0, abs=1e-12)
    x = hb.random_centered(gen, rng)
    assert hb.bmo_norm(gen, 2.5 * x, GRID) == pytest.approx(2.5 * hb.bmo_norm(gen, x, GRID), rel=1e-10)
    assert hb.h1_norm(gen, -2 * x, GRID) == pytest.approx(2 * hb.h1_norm(gen, x, GRID), rel=1e-10)


def test_gamma_forms(gen, rng):
    assert hb.check_gamma_positive(gen, rng).passed
    assert hb.check_gamma_tilde_identity(gen, rng).passed
    assert hb.check_gamma_tilde_domination(gen, rng, GRID, n_samples=10).passed


@given(seed=st.integers(0, 2**31), s=st.floats(0.05, 5.0))
def test_gamma_tilde_identity_property(seed, s):
    gen = fixture("SM_2")
    ctx = gen.context
    rng = np.random.default_rng(seed)
    x, y = ctx.random_element(rng), ctx.random_element(rng)
    lhs = 2 * hb.gamma_tilde_flow(gen, x, y, s)
    rhs = hb.ltilde_product_flow(gen, x, y, s)
    assert np.max(np.abs(lhs - rhs)) <= 1e-8 * max(1.0, np.max(np.abs(rhs)))


def test_carleson_and_equivalences(gen, rng):
    assert hb.check_carleson(gen, rng, GRID, n_samples=10).passed
    assert hb.check_bmo_heat_variant(gen, rng, GRID, n_samples=10).passed


def test_atom_supremum_tp():
    rep = hb.check_bmo_atoms(fixture("TP"), np.random.default_rng(0), GRID, n_samples=2)
    assert rep.passed and 0.25 <= rep.ratio <= 4


def test_derivative_constant():
    assert hb.derivative_constant(0.0) == 3.0
    assert hb.derivative_constant(1.0) == pytest.approx(3 * (3 + 2))


def test_derivative_bounds(gen):
    ys = GRID.nodes[(GRID.nodes >= 1e-2) & (GRID.nodes <= 1e2)]
    for d in ("decreasing", "increasing"):
        rep = find_min_alpha(gen, d, extra_times=ys)
        if rep.minimal_alpha is not None:
            assert hb.check_derivative_bounds(gen, d, rep.minimal_alpha, ys).passed


def test_duality_tp_ratio_is_two():
    thm, cor = hb.check_duality(fixture("TP"), np.random.default_rng(0), GRID, n_pairs=20)
    assert thm.passed and cor.passed
    assert thm.ratio == pytest.approx(2.0, rel=1e-3)


def test_atom_estimates_tp():
    gen = fixture("TP")
    rng = np.random.default_rng(0)
    c = hb.empirical_c_alpha(gen, rng, GRID)
    assert 1.0 <= c < 1.2
    reps = hb.check_atom_h1(gen, rng, 0.08, GRID)
    assert [r.check_id for r in reps] == ["lemma-3.9", "lemma-3.11", "thm-3.13-atom-h1"]
    assert all(r.passed for r in reps)
