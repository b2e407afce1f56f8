import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtlab.extremals import (DEFAULT_INTERVAL_GRID, FixedPointDivergence, MaximizerOptions,
                             alpha_star_bracket, default_grid, fixed_point_line, maximize,
                             rearrange_decreasing, seed_profile, subcritical_sweep,
                             write_sweep_csv)
from mtlab.fraccore import GridFunction, build_grid, gagliardo_seminorm_sq, sample
from mtlab.functionals import (INTERVAL, LINE, ELState, constraint_norm_sq, el_residual,
                               mt_energy, vanishing_gap)

COARSE_I = build_grid(1.0, 1025)
COARSE_L = build_grid(50.0, 4097)


@pytest.fixture(scope="module")
def interval_half():
    return maximize(0.5, INTERVAL, grid=COARSE_I)


@pytest.fixture(scope="module")
def line_results():
    alphas = [0.3 * np.pi, 0.9 * np.pi, 0.95 * np.pi]
    return alphas, subcritical_sweep(alphas, LINE, grid=COARSE_L)


# --- rearrangement ------------------------------------------------------------

def test_rearrange_fixed_point():
    u = sample(COARSE_I, lambda x: np.clip(1 - x * x, 0, None), even=True, decreasing=True)
    assert np.array_equal(rearrange_decreasing(u).values, u.values)


def test_rearrange_rejects_negative():
    with pytest.raises(ValueError):
        rearrange_decreasing(sample(COARSE_I, lambda x: x))


@given(st.lists(st.floats(0, 5), min_size=81, max_size=81))
@settings(max_examples=60, deadline=None)
def test_rearrange_preserves_square_sum(vals):
    g = build_grid(1.0, 81)
    v = np.array(vals)
    r = rearrange_decreasing(GridFunction(g, v))
    assert np.sum(r.values**2) == pytest.approx(np.sum(v**2), rel=1e-12, abs=1e-300)
    assert r.is_even and r.is_decreasing
    assert r.values[g.center] == v.max()


@given(st.lists(st.floats(0, 5), min_size=40, max_size=40), st.floats(0, 1))
@settings(max_examples=60, deadline=None)
def test_rearrange_even_input_keeps_values(half, excess):
    g = build_grid(1.0, 81)
    h = np.array(half)
    v = np.concatenate([h, [h.max() + excess], h[::-1]])
    r = rearrange_decreasing(GridFunction(g, v))
    assert np.array_equal(np.sort(r.values), np.sort(v))


@given(st.lists(st.floats(0, 5), min_size=81, max_size=81))
@settings(max_examples=60, deadline=None)
def test_rearrange_lowers_seminorm(vals):
    g = build_grid(1.0, 81)
    u = GridFunction(g, vals)
    r = rearrange_decreasing(u)
    assert gagliardo_seminorm_sq(r, "zero") <= gagliardo_seminorm_sq(u, "zero") * (1 + 1e-12) + 1e-12


# --- options ------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(backtrack=1.0), dict(max_iter=0), dict(tol=1.5),
                                dict(tol=1e-3, stall_tol=1e-4), dict(step=-1.0),
                                dict(multistart=-1), dict(rearrange_every=0)])
def test_options_validated(kw):
    with pytest.raises(ValueError):
        MaximizerOptions(**kw)


def test_default_grids():
    assert default_grid(INTERVAL) == build_grid(*DEFAULT_INTERVAL_GRID)
    s = seed_profile(COARSE_I, INTERVAL)
    assert np.all(s[np.abs(COARSE_I.x) >= 1] == 0)


def test_alpha_range():
    with pytest.raises(ValueError):
        maximize(3.2, INTERVAL, grid=COARSE_I)
    with pytest.raises(ValueError):
        subcritical_sweep([1.0, 0.5], INTERVAL, grid=COARSE_I)


# --- maximizer ----------------------------------------------------------------

def test_interval_half(interval_half):
    r = interval_half
    assert r.converged and r.el_residual < 1e-4
    seed = seed_profile(COARSE_I, INTERVAL)
    su = GridFunction(COARSE_I, seed / np.sqrt(constraint_norm_sq(GridFunction(COARSE_I, seed), INTERVAL)))
    assert r.value >= mt_energy(su, 0.5, INTERVAL)
    assert abs(constraint_norm_sq(r.u, INTERVAL) - 1) < 1e-8
    assert r.u.is_even and r.u.is_decreasing and np.all(r.u.values >= 0)
    assert r.mu == np.max(r.u.values)
    assert 1 / r.lam >= r.value / r.alpha
    assert r.sphere_deviation < 1e-8
    hist = np.array(r.values_history)
    assert np.all(np.diff(hist) >= -1e-12 * hist[1:])


def test_interval_sweep_monotone():
    res = subcritical_sweep([0.5, 1.5, 2.5], INTERVAL, grid=COARSE_I)
    vals = [r.value for r in res]
    assert vals == sorted(vals)
    for r in res:
        assert 1 / r.lam >= r.value / r.alpha


def test_line_maximizers(line_results):
    alphas, res = line_results
    assert all(r is not None and r.converged for r in res)
    vals = [r.value for r in res]
    assert vals == sorted(vals)
    for r in res:
        assert abs(constraint_norm_sq(r.u, LINE) - 1) < 1e-8
        assert 1 / r.lam >= r.value / r.alpha
    r = res[2]
    assert vanishing_gap(r.u, r.alpha) > 0 and r.el_residual < 1e-4


def test_alpha_star_bracket(line_results):
    alphas, res = line_results
    lo, hi = alpha_star_bracket(res)
    assert hi is not None and hi <= 0.95 * np.pi
    if lo is not None:
        assert lo < hi


def test_residual_sensitivity(interval_half):
    r = interval_half
    st_ = r.state()
    base = el_residual(st_, INTERVAL)
    bump = np.clip(1 - (COARSE_I.x / 0.3) ** 2, 0, None) ** 2
    pert = ELState(GridFunction(COARSE_I, r.u.values + 0.01 * bump), r.alpha, r.lam)
    assert el_residual(pert, INTERVAL) > base


def test_maximize_deterministic():
    a = maximize(1.0, INTERVAL, grid=COARSE_I)
    b = maximize(1.0, INTERVAL, grid=COARSE_I)
    assert np.array_equal(a.u.values, b.u.values) and a.value == b.value


def test_multistart_not_worse():
    one = maximize(1.0, INTERVAL, grid=COARSE_I)
    many = maximize(1.0, INTERVAL, MaximizerOptions(multistart=2, random_seed=3), grid=COARSE_I)
    assert many.value >= one.value


# --- fixed point --------------------------------------------------------------

def test_fixed_point_contracts_to_zero():
    init = sample(COARSE_L, lambda x: 0.1 * np.exp(-x * x), even=True, decreasing=True)
    st_ = fixed_point_line(0.1, 1.0, init, damping=1.0, tol=1e-6)
    assert st_.residual_norm < 1e-6
    assert np.max(np.abs(st_.u.values)) < 1e-6


def test_fixed_point_contract():
    init = sample(COARSE_L, lambda x: 0.1 * np.exp(-x * x), even=True, decreasing=True)
    st_ = fixed_point_line(0.1, 1.0, init, tol=1e-6)
    assert st_.residual_norm < 1e-5


def test_fixed_point_reproduces_maximizer(line_results):
    for r in line_results[1]:
        st_ = fixed_point_line(r.lam, r.alpha, r.u)
        d = np.sqrt(COARSE_L.h * np.sum((st_.u.values - r.u.values) ** 2))
        assert d < 1e-3
        assert st_.residual_norm < 1e-5
        assert st_.u.values[COARSE_L.center] == np.max(st_.u.values)


def test_fixed_point_divergence_and_validation():
    init = sample(COARSE_L, lambda x: np.exp(-x * x), even=True, decreasing=True)
    with pytest.raises(FixedPointDivergence):
        fixed_point_line(50.0, 3.0, init)
    with pytest.raises(ValueError):
        fixed_point_line(0.1, 1.0, sample(COARSE_L, lambda x: x))
    with pytest.raises(ValueError):
        fixed_point_line(0.1, 1.0, init, damping=0.0)
    with pytest.raises(ValueError):
        fixed_point_line(0.1, 1.0, init, inverse="lu")


def test_sweep_csv(tmp_path, interval_half):
    write_sweep_csv([interval_half, None], [0.5, 0.6], tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "alpha,value,lambda,mu,residual,converged,iters"
    assert lines[2].startswith("0.59999999999999998,nan")
