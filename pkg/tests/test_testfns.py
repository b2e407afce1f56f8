import numpy as np
import pytest

from mtlab.fraccore import build_grid, gagliardo_seminorm_sq
from mtlab.greens import S0
from mtlab.testfns import (CSV_COLUMNS, INTERVAL_THRESHOLD, LINE_THRESHOLD, extension_profile,
                           interval_test_family, line_test_family, moser_sharpness_family,
                           test_family)


@pytest.fixture(scope="module")
def interval_1e4():
    return interval_test_family(1e-4)


@pytest.fixture(scope="module")
def line_reports():
    return [line_test_family(e) for e in (1e-3, 1e-4, 1e-5)]


def test_thresholds():
    assert INTERVAL_THRESHOLD == pytest.approx(12.56637, abs=5e-6)
    assert LINE_THRESHOLD == pytest.approx(3.52775, abs=5e-6)


def test_interval_beats_threshold(interval_1e4):
    r = interval_1e4
    assert r.converged and r.feasible
    assert r.constraint_norm_sq <= 1 + 1e-8
    assert r.functional_value > 4 * np.pi
    assert r.margin == pytest.approx(r.functional_value - 4 * np.pi)


def test_interval_bookkeeping(interval_1e4):
    r = interval_1e4
    # B = pi c^2 + log eps - pi S0 + O(L eps)
    assert abs(r.B - (np.pi * r.c**2 + np.log(r.eps) - np.pi * S0)) < 5 * r.L * r.eps
    assert r.core_contribution > r.core_lower_bound > 0


def test_line_beats_threshold(line_reports):
    r = line_reports[1]
    assert r.converged and r.feasible
    assert r.functional_value > LINE_THRESHOLD
    assert r.l2_sq > 0


def test_line_bookkeeping(line_reports):
    for r in line_reports:
        assert abs(r.B - (np.pi * r.c**2 + np.log(r.eps) + np.euler_gamma)) < 5 * r.L * r.eps


def test_line_tail_bounded_below(line_reports):
    nus = [r.tail_contribution for r in line_reports]
    # nu grows as L eps shrinks, so the largest L eps gives the lower bound
    assert nus[0] > 0
    assert nus[0] < nus[1] < nus[2]
    # margin behaves like nu / c^2: c^2 * margin stays of order nu
    scaled = [r.margin * r.c**2 for r in line_reports]
    assert all(s > 0 for s in scaled)


def test_preconditions():
    with pytest.raises(ValueError):
        interval_test_family(0.1)
    with pytest.raises(ValueError):
        line_test_family(-1e-4)
    with pytest.raises(KeyError):
        test_family("disk", 1e-4)


def test_scaling_structure():
    xs = np.array([0.0, 1e-5, 3e-4, 0.02, 0.4, 0.95, 1.5])
    ys = np.array([0.0, 1e-4, 0.0, 0.1, 0.3, 0.0, 0.2])
    for name in ("interval", "line"):
        a = extension_profile(name, 1e-4, 2.0, xs, ys)
        b = extension_profile(name, 1e-4, 3.0, xs, ys)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_trace_shape():
    # the trace seminorm is bounded by the extension energy (= 1 after scaling);
    # the grid must resolve the core of width eps
    r = interval_test_family(1e-3)
    u = r.trace(build_grid(1.0, 16385))
    assert u.is_even and u.is_decreasing and u.support == 1.0
    assert 0.99 < gagliardo_seminorm_sq(u, "zero") <= 1.0


def test_row_columns(interval_1e4):
    row = interval_1e4.row()
    assert len(row) == len(CSV_COLUMNS)
    assert row[0] == 1e-4 and row[-1] == interval_1e4.margin


def test_sharpness_degenerate():
    u, v = moser_sharpness_family(1.05 * np.pi, 1)
    assert v == 0.0 and not np.any(u.values)
    with pytest.raises(ValueError):
        moser_sharpness_family(1.05 * np.pi, 0)


def test_sharpness_normalization():
    # the sampled profile reproduces the analytic unit seminorm
    u, _ = moser_sharpness_family(1.05 * np.pi, 16, build_grid(1.0, 8193))
    assert gagliardo_seminorm_sq(u, "zero") == pytest.approx(1.0, rel=2e-2)


def test_sharpness_trends():
    sup = [moser_sharpness_family(1.05 * np.pi, 2**k)[1] for k in (6, 9, 12)]
    crit = [moser_sharpness_family(np.pi, 2**k)[1] for k in (6, 9, 12)]
    assert sup[0] < sup[1] < sup[2]
    assert all(c < s for c, s in zip(crit, sup))
    assert max(crit) < 1.5 * 16.0
