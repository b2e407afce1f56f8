import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special as sp

from mtlab.fraccore import build_grid, sample, spectral_frac_laplacian
from mtlab.greens import (LINE_REGULAR_AT_ZERO, S0, GreenSingularity, apply_green_interval,
                          apply_green_line, evaluate_interval, green_interval, green_line,
                          green_line_fourier_oracle, line_regular_part, probe_table,
                          regular_part_interval, s0, tilde_green_interval,
                          tilde_green_interval_grad_sq, tilde_green_line,
                          tilde_green_line_expansion, tilde_green_line_grad_sq)


def line_closed_form_scipy(x):
    si, ci = sp.sici(abs(x))
    return 0.5 * np.sin(abs(x)) - (np.sin(abs(x)) * si + np.cos(abs(x)) * ci) / np.pi


# --- interval kernel ------------------------------------------------------------

def test_interval_zero_outside():
    assert green_interval(0.0, 1.5) == 0.0
    assert green_interval(0.3, -2.0) == 0.0


def test_interval_value_at_half():
    ref = np.log((1 + np.sqrt(0.75)) / 0.5) / np.pi
    assert green_interval(0.0, 0.5) == pytest.approx(ref, rel=1e-14)
    assert green_interval(0.0, 0.5) == pytest.approx(0.4192007, abs=1e-7)


def test_interval_singularity():
    with pytest.raises(GreenSingularity):
        green_interval(0.3, 0.3)
    with pytest.raises(ValueError):
        green_interval(1.0, 0.2)


def test_s0_value():
    assert s0() == S0 == pytest.approx(np.log(2) / np.pi, rel=1e-15)
    assert s0() == pytest.approx(0.2206356, abs=1e-7)
    assert regular_part_interval(0.0, 0.0) == pytest.approx(S0, rel=1e-15)


def test_regular_part_lipschitz_at_center():
    ys = np.geomspace(1e-6, 1e-2, 30)
    d = np.abs(regular_part_interval(0.0, ys) - S0)
    assert np.all(d <= ys)
    slope = np.polyfit(ys, regular_part_interval(0.0, ys), 1)[0]
    assert abs(slope) < 1e-2


def test_regular_part_matches_definition():
    x, y = 0.2, -0.55
    assert regular_part_interval(x, y) == pytest.approx(
        green_interval(x, y) + np.log(abs(x - y)) / np.pi, rel=1e-13)
    ev = evaluate_interval(x, y)
    assert ev.in_domain and ev.value == pytest.approx(green_interval(x, y))


def test_interval_s0_limit():
    y = 1e-6
    assert abs(green_interval(0.0, y) + np.log(y) / np.pi - S0) < 1e-6


@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
@settings(max_examples=100, deadline=None)
def test_interval_symmetric_nonnegative(x, y):
    if abs(x - y) < 1e-9:
        return
    a, b = green_interval(x, y), green_interval(y, x)
    assert a >= 0
    assert a == pytest.approx(b, rel=1e-12, abs=1e-14)


def test_interval_extension_trace_and_gradient():
    xs = np.array([-0.7, -0.2, 0.4, 0.9])
    assert np.allclose(tilde_green_interval(xs, 1e-12), green_interval(0.0, xs), atol=1e-9)
    x, y, d = 0.3, 0.4, 1e-6
    gx = (tilde_green_interval(x + d, y) - tilde_green_interval(x - d, y)) / (2 * d)
    gy = (tilde_green_interval(x, y + d) - tilde_green_interval(x, y - d)) / (2 * d)
    assert tilde_green_interval_grad_sq(x, y) == pytest.approx(gx * gx + gy * gy, rel=1e-7)


# --- line kernel ----------------------------------------------------------------

def test_line_at_half_pi():
    ref = 0.5 - sp.sici(np.pi / 2)[0] / np.pi
    assert green_line(np.pi / 2) == pytest.approx(ref, abs=1e-14)
    assert green_line(np.pi / 2) == pytest.approx(0.0636728, abs=1e-7)


def test_line_near_zero():
    x = 0.01
    lead = -np.log(x) / np.pi - np.euler_gamma / np.pi
    assert green_line(x) == pytest.approx(1.2821, abs=0.02)
    assert abs(green_line(x) - lead) < 0.02


@pytest.mark.parametrize("x", [0.05, 0.7, 3.0, 4.0, 9.0, 25.0, 39.99, 40.0, 80.0])
def test_line_matches_scipy_closed_form(x):
    assert green_line(x) == pytest.approx(line_closed_form_scipy(x), abs=1e-12)


def test_line_decay():
    xs = np.linspace(20, 30, 501)
    assert np.max(xs**2 * np.abs(green_line(xs))) < 10
    # G(x) ~ 1/(pi x^2)
    assert green_line(1e3) * 1e6 * np.pi == pytest.approx(1.0, rel=1e-5)


def test_line_singular_and_even():
    with pytest.raises(GreenSingularity):
        green_line(0.0)
    xs = np.linspace(0.1, 50, 200)
    assert np.array_equal(green_line(xs), green_line(-xs))
    assert np.all(green_line(np.linspace(1e-4, 0.999, 300)) > 0)


def test_line_regular_part_continuous():
    assert line_regular_part(0.0) == LINE_REGULAR_AT_ZERO
    assert line_regular_part(1e-8) == pytest.approx(LINE_REGULAR_AT_ZERO, abs=1e-7)


def test_fourier_oracle():
    xs = np.linspace(0.1, 20.0, 40)
    oracle = np.array([green_line_fourier_oracle(x) for x in xs])
    assert np.max(np.abs(oracle - green_line(xs))) < 1e-6
    assert green_line_fourier_oracle(-2.3) == green_line_fourier_oracle(2.3)
    assert green_line_fourier_oracle(np.pi / 2) == pytest.approx(0.0636728, abs=1e-7)
    with pytest.raises((ValueError, GreenSingularity)):
        green_line_fourier_oracle(0.0)


def test_line_log_fit():
    xs = np.geomspace(1e-4, 1e-2, 60)
    slope, icpt = np.polyfit(np.log(1 / xs), green_line(xs), 1)
    assert abs(slope - 1 / np.pi) < 1e-3
    assert abs(icpt + np.euler_gamma / np.pi) < 1e-2


def test_line_extension():
    xs = np.array([-3.0, 0.5, 2.0])
    assert np.allclose(tilde_green_line(xs, 1e-10), green_line(xs), atol=1e-8)
    x, y, d = 0.8, 0.3, 1e-6
    gx = (tilde_green_line(x + d, y) - tilde_green_line(x - d, y)) / (2 * d)
    gy = (tilde_green_line(x, y + d) - tilde_green_line(x, y - d)) / (2 * d)
    assert tilde_green_line_grad_sq(x, y) == pytest.approx(gx * gx + gy * gy, rel=1e-6)


def test_expansion_on_axis_and_symmetry():
    y = 0.03
    ref = -np.log(y) / np.pi - np.euler_gamma / np.pi - y * np.log(y) / np.pi
    assert tilde_green_line_expansion(0.0, y) == pytest.approx(ref, rel=1e-14)
    assert tilde_green_line_expansion(-0.2, 0.1) == tilde_green_line_expansion(0.2, 0.1)
    with pytest.raises(GreenSingularity):
        tilde_green_line_expansion(0.0, 0.0)


def test_expansion_remainder_vanishes_at_origin():
    rs = [0.1, 0.03, 0.01, 0.003]
    rem = [abs(tilde_green_line_expansion(r, r) - tilde_green_line(r, r)) for r in rs]
    assert rem[2] < 0.05
    assert all(b < a for a, b in zip(rem, rem[1:]))


# --- convolution operators ------------------------------------------------------

def test_apply_green_line_identity():
    g = build_grid(200.0, 16001)
    f = sample(g, lambda x: 2 / (1 + x * x) ** 2, even=True)
    u = apply_green_line(f)
    w = np.abs(g.x) <= 10
    assert np.max(np.abs(u.values - 1 / (1 + g.x**2))[w]) < 1e-3
    assert not np.any(apply_green_line(sample(g, lambda x: 0 * x)).values)


def test_apply_green_line_round_trip():
    g = build_grid(60.0, 8001)
    f = sample(g, lambda x: np.exp(-x * x) * (1 + 0.3 * x), even=False)
    u = apply_green_line(f)
    back = spectral_frac_laplacian(u, 0.5, leak_threshold=np.inf).values + u.values
    w = np.abs(g.x) <= 10
    assert np.max(np.abs(back - f.values)[w]) < 1e-3 * np.max(np.abs(f.values))


def test_apply_green_interval():
    g = build_grid(1.0, 2049)
    assert not np.any(apply_green_interval(sample(g, lambda x: 0 * x)).values)
    with pytest.raises(ValueError):
        apply_green_interval(sample(build_grid(2.0, 11), lambda x: x))


def test_apply_green_interval_delta_limit():
    g = build_grid(1.0, 8193)
    errs = []
    far = (np.abs(g.x) > 0.3) & (np.abs(g.x) < 1)
    for w in (0.1, 0.05, 0.025):
        bump = lambda x: np.clip(1 - (x / w) ** 2, 0, None) ** 2 * 15 / (16 * w)
        u = apply_green_interval(sample(g, bump, even=True))
        errs.append(np.max(np.abs(u.values[far] - green_interval(0.0, g.x[far]))))
    assert errs[-1] < 1e-3
    assert errs[0] > errs[1] > errs[2]


def test_probe_table():
    rows = probe_table("interval", [0.0], [-0.5, 0.0, 0.5, 1.5])
    assert len(rows) == 3
    assert rows[-1][2] == 0.0 and np.isnan(rows[-1][3])
    rows = probe_table("line", [0.0, 1.0], [0.5])
    assert rows[1][2] == pytest.approx(float(green_line(-0.5)))
    with pytest.raises(ValueError):
        probe_table("disk", [0.0], [0.5])
