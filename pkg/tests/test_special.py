import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from mtlab.special import (EULER_GAMMA, SpecialFunctionTable, cosine_integral, scaled_exp1, sici,
                           sine_integral)


def test_euler_gamma_constant():
    assert EULER_GAMMA == pytest.approx(np.euler_gamma, abs=1e-16)


def test_si_at_zero_and_known_values():
    assert sine_integral(0.0) == 0.0
    assert sine_integral(np.pi / 2) == pytest.approx(1.3707621, abs=1e-7)
    assert cosine_integral(1.0) == pytest.approx(0.3374039, abs=1e-7)


@pytest.mark.parametrize("x", [1e-6, 0.3, 1.0, 3.99, 4.0, 4.01, 10.0, 39.9, 40.0, 40.1, 120.0, 1e4])
def test_sici_against_scipy(x):
    si, ci = sp.sici(x)
    assert sine_integral(x) == pytest.approx(si, abs=1e-13)
    assert cosine_integral(x) == pytest.approx(ci, abs=1e-13)


@pytest.mark.parametrize("x", [4.0, 40.0])
def test_branches_agree_at_switch_points(x):
    table = SpecialFunctionTable()
    on_each = {b: sici(np.array([x]), table, branch=b) for b in ("series", "cf", "asymptotic")}
    if x == 4.0:
        pair = ("series", "cf")
    else:
        pair = ("cf", "asymptotic")
    a, b = on_each[pair[0]], on_each[pair[1]]
    assert abs(a[0][0] - b[0][0]) < 1e-12
    assert abs(a[1][0] - b[1][0]) < 1e-12


def test_ci_rejects_nonpositive():
    with pytest.raises(ValueError):
        cosine_integral(0.0)
    with pytest.raises(ValueError):
        cosine_integral(-1.0)


def test_table_validation():
    with pytest.raises(ValueError):
        SpecialFunctionTable(series_max=50.0, asymptotic_min=40.0)
    with pytest.raises(ValueError):
        SpecialFunctionTable(series_terms=0)


def test_unknown_branch_rejected():
    with pytest.raises(ValueError):
        sici(np.array([1.0]), branch="nope")


@given(st.floats(min_value=1e-3, max_value=200.0))
@settings(max_examples=60, deadline=None)
def test_si_odd(x):
    assert sine_integral(-x) == -sine_integral(x)


@given(st.floats(min_value=1e-3, max_value=50.0))
@settings(max_examples=60, deadline=None)
def test_ci_identity_with_cos_integral(x):
    # Ci(x) - log x - gamma = int_0^x (cos t - 1)/t dt
    from scipy.integrate import quad
    ref = quad(lambda t: (np.cos(t) - 1) / t if t > 0 else 0.0, 0, x, limit=400)[0]
    assert cosine_integral(x) - np.log(x) - EULER_GAMMA == pytest.approx(ref, abs=1e-9)


def test_scaled_exp1_matches_scipy():
    w = np.array([0.1 + 0.2j, 1.5j, 3 + 4j, 0.5, 20j, 100 + 1j])
    ref = np.exp(w) * sp.exp1(w)
    np.testing.assert_allclose(scaled_exp1(w), ref, rtol=1e-12)


def test_scaled_exp1_domain():
    with pytest.raises(ValueError):
        scaled_exp1(-1.0 + 0j)
    with pytest.raises(ValueError):
        scaled_exp1(0j)
