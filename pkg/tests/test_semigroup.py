import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tentlab.semigroup import (Generator, check_derivative_consistency, check_kadison_schwarz,
                               check_semigroup_axioms, find_min_alpha, fixture, order_constant)

# root of e^u (u - 1) = 1, minus one (brentq, frozen)
TP_HEAT_ALPHA = 0.2784645427610737

times = st.floats(1e-3, 20.0)


def test_tp_closed_form():
    gen = fixture("TP")
    for t in (0.01, 0.5, 3.0):
        k = gen.kernels(gen.heat_values(np.array([t])))[0]
        d, o = 0.5 * (1 + math.exp(-2 * t)), 0.5 * (1 - math.exp(-2 * t))
        assert np.allclose(k, [[d, o], [o, d]], atol=1e-14)


@pytest.mark.parametrize("name", ["TP", "CYC_8", "TORUS_16", "SM_2", "SM_4"])
@given(s=times, t=times, seed=st.integers(0, 2**31))
def test_semigroup_law_property(name, s, t, seed):
    gen = fixture(name)
    x = gen.context.random_element(np.random.default_rng(seed))
    a = gen.apply(s, gen.apply(t, x))
    b = gen.apply(s + t, x)
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(x)))


def test_axiom_suite(gen, rng):
    reps = check_semigroup_axioms(gen, rng)
    assert [r.check_id for r in reps] == ["semigroup-law", "symmetry", "unital", "positivity", "continuity",
                                          "kadison-schwarz"]
    assert all(r.passed for r in reps), [r for r in reps if not r.passed]


def test_kadison_schwarz_and_derivatives(gen, rng):
    assert check_kadison_schwarz(gen, rng).passed
    assert check_derivative_consistency(gen, rng).passed


def test_min_alpha_tp():
    gen = fixture("TP")
    assert find_min_alpha(gen, "increasing").minimal_alpha == pytest.approx(TP_HEAT_ALPHA, abs=1e-3)
    assert find_min_alpha(gen.subordinate(), "decreasing").minimal_alpha == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("name", ["TP", "CYC_8", "SM_2"])
def test_min_alpha_stable_under_density(name):
    gen = fixture(name)
    for d in ("decreasing", "increasing"):
        a = find_min_alpha(gen, d).minimal_alpha
        b = find_min_alpha(gen, d, density=640).minimal_alpha
        assert (a is None) == (b is None)
        if a is not None:
            assert abs(a - b) <= 1e-3


def test_identity_is_monotone_with_alpha_zero():
    gen = fixture("ID_3")
    assert find_min_alpha(gen, "decreasing").minimal_alpha == pytest.approx(0.0, abs=1e-4)


def test_order_constant_on_tp_doubling():
    gen = fixture("TP")
    c = max(order_constant(gen.evaluate(2 * s), gen.evaluate(s)) for s in np.geomspace(1e-2, 1e2, 41))
    assert c <= 2.0


def test_fixture_names():
    assert fixture("cyc_8").name == "CYC_8"
    for bad in ("TP_3", "CYC", "FOO_2"):
        with pytest.raises(KeyError):
            fixture(bad)


def test_non_markov_generator_rejected():
    with pytest.raises(ValueError):
        Generator.markov([[-1.0, 2.0], [1.0, -1.0]], [0.5, 0.5])
