import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentlab import general as gn
from tentlab.semigroup import fixture
from tentlab.tent import TimeGrid

GRID = TimeGrid.geometric()
PHI = np.array([1.0, -1.0], dtype=complex)


def test_tp_norms_closed_form():
    # |d/ds T_s phi|^2 = 4 exp(-4s) and int 4 exp(-4s) s ds = 1/4
    gen = fixture("TP")
    for grid, tol in ((GRID, 5e-3), (GRID.doubled(), 1e-3)):
        nrm = gn.general_norms(gen, PHI, grid)
        for k in ("HS", "HG", "BMOC"):
            assert nrm[k] == pytest.approx(0.5, rel=tol), k


@pytest.mark.parametrize("s", [0.01, 0.3, 2.0])
def test_tp_truncated_square_functions(s):
    # S_s^2 = int_s^inf 4 exp(-4y - 2s) y dy,  G_s^2 = int_s^inf 4 exp(-8y) y dy
    gen = fixture("TP")
    s2 = math.exp(-6 * s) * (4 * s + 1) / 4
    g2 = math.exp(-8 * s) * (8 * s + 1) / 16
    assert np.allclose(gn.truncated_s_square(gen, PHI, s), s2, rtol=1e-9)
    assert np.allclose(gn.truncated_g_square(gen, PHI, s), g2, rtol=1e-9)
    # strictly smaller, not equal
    assert g2 < s2


def test_norms_vanish_on_constants(gen):
    nrm = gn.general_norms(gen, gen.context.identity(), GRID)
    assert all(v == pytest.approx(0.0, abs=1e-12) for v in nrm.values())


@given(seed=st.integers(0, 2**31), c=st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_norms_homogeneous(seed, c):
    gen = fixture("CYC_8")
    f = gen.context.random_element(np.random.default_rng(seed))
    a = gn.general_norms(gen, f, GRID)
    b = gn.general_norms(gen, c * f, GRID)
    for k in a:
        assert b[k] == pytest.approx(abs(c) * a[k], rel=1e-9)


def test_exact_factor_checks(gen, rng):
    assert gn.check_hg_le_2hs(gen, rng, GRID, n_samples=20).passed
    assert gn.check_derivative_pairing(gen, rng, GRID, n_samples=20).passed


def test_order_relations(gen, rng):
    assert gn.check_truncated_order(gen, rng, n_samples=2, ss=np.geomspace(1e-2, 10, 5)).passed


def test_duality_and_equivalence(gen, rng):
    assert gn.check_hs_bmoc_duality(gen, rng, GRID, n_pairs=40).passed
    assert gn.check_hs_hg_equivalence(gen, rng, GRID, n_samples=30).passed


def test_tp_doubling_below_two():
    dbl = gn.doubling_constant(fixture("TP"))
    assert dbl["T2s<=cTs"] <= 2.0
