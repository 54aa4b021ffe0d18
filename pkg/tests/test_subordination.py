import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from tentlab import subordination as sub
from tentlab.semigroup import fixture


def _quad_oracle(lam, y):
    """1/(2 sqrt(pi)) int_0^inf y exp(-y^2/4u) u^(-3/2) exp(-lam u) du by adaptive quadrature."""
    f = lambda u: y * math.exp(-y * y / (4 * u) - lam * u) * u ** -1.5
    v = quad(f, 0, y * y, limit=200)[0] + quad(f, y * y, np.inf, limit=200)[0]
    return v / (2 * math.sqrt(math.pi))


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("y", [0.1, 1.0, 5.0])
def test_scalar_identity_against_adaptive_quadrature(lam, y):
    ours = sub.subordination_values(np.array([lam]), y)[0] / (2 * math.sqrt(math.pi))
    assert ours == pytest.approx(_quad_oracle(lam, y), abs=1e-8)
    assert ours == pytest.approx(math.exp(-y * math.sqrt(lam)), abs=1e-8)


def test_tp_poisson_closed_form():
    gen = fixture("TP")
    for y in (0.1, 1.0, 4.0):
        k = gen.kernels(sub.poisson_values(gen, y))
        e = math.exp(-math.sqrt(2) * y)
        assert np.allclose(k, 0.5 * np.array([[1 + e, 1 - e], [1 - e, 1 + e]]), atol=1e-14)


def test_routes_and_pde(gen, rng):
    assert sub.check_route_agreement(gen).passed
    assert sub.check_poisson_semigroup_law(gen).passed
    for y in (0.1, 1.0, 3.0):
        assert sub.check_poisson_pde(gen, y, gen.context.random_element(rng)).passed


def test_py_over_y(gen, rng):
    f = gen.context.random_positive(rng)
    assert sub.check_py_over_y_decreasing(gen, np.geomspace(1e-2, 1e2, 40), f).passed


def test_heat_domination_floor(gen):
    assert sub.heat_domination_constant(gen, np.geomspace(1e-2, 1e2, 30)) >= 0.1


@given(c=st.floats(1.0, 4.0), alpha=st.floats(0.0, 3.0))
def test_admissible_k_meets_mass_budget(c, alpha):
    k = sub.admissible_k(c, alpha)
    assert 0 < k <= 4.0
    assert c * c * 2 ** alpha * sub.lower_mass(k) <= 1 / 16 * (1 + 1e-9)


@given(s=st.floats(0.05, 3.0), t=st.floats(0.05, 3.0))
def test_split_pieces_reconstruct(s, t):
    gen = fixture("CYC_8")
    a = sub.kernel_split(gen, s, t, "Pa").values
    b = sub.kernel_split(gen, s, t, "Pb").values
    assert np.allclose(a + b, 2 * math.sqrt(math.pi) * np.exp(-s * np.sqrt(gen.freqs)), atol=1e-8)


def test_bad_arguments():
    gen = fixture("TP")
    with pytest.raises(ValueError):
        sub.poisson_values(gen, -1.0)
    with pytest.raises(ValueError):
        sub.poisson_values(gen, 1.0, route="fft")
    with pytest.raises(ValueError):
        sub.kernel_split(gen, 1.0, None, "Pc")
