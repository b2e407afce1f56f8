"""Green's functions of the half-Laplacian on I = (-1, 1) and of (-Delta)^{1/2} + Id on R.

Interval:  G_x(y) = (1/pi) log((1 - xy + sqrt((1-x^2)(1-y^2))) / |x - y|), zero off I.
Line:      G(x) = sin|x|/2 - (sin|x| Si|x| + cos|x| Ci|x|)/pi = (1/pi) Re e^{-i|x|} E1(-i|x|).
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .fraccore import Grid1D, GridFunction, SymToeplitz, symmetrize
from .special import (DEFAULT_TABLE, EULER_GAMMA, _aux_fg, scaled_exp1, sici,
                      SpecialFunctionTable)

S0 = np.log(2.0) / np.pi
LINE_REGULAR_AT_ZERO = -EULER_GAMMA / np.pi


class GreenSingularity(ValueError):
    """Raised when a Green's function is evaluated on its singularity."""


@dataclass(frozen=True)
class GreenEvaluation:
    location: float
    probe: float
    value: float
    regular_part: float
    in_domain: bool


# ---------------------------------------------------------------------------
# interval


def green_interval(x, y):
    """G_x(y) for x in (-1, 1); zero for |y| >= 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) >= 1):
        raise ValueError("singularity location must lie in (-1, 1)")
    if np.any(x == y):
        raise GreenSingularity("green_interval evaluated at y == x")
    inside = np.abs(y) < 1
    yi = np.where(inside, y, 0.0)
    xb, yb = np.broadcast_arrays(x, yi)
    num = 1 - xb * yb + np.sqrt((1 - xb * xb) * (1 - yb * yb))
    with np.errstate(divide="ignore"):
        val = np.log(num / np.abs(xb - yb)) / np.pi
    out = np.where(inside, val, 0.0)
    return out[()] if out.ndim == 0 else out


def regular_part_interval(x, y):
    """S(x, y) = G_x(y) + (1/pi) log|x - y| on I x I, continuous across y = x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) > 1) or np.any(np.abs(y) > 1):
        raise ValueError("regular part is defined on the closed interval only")
    out = np.log(1 - x * y + np.sqrt((1 - x * x) * (1 - y * y))) / np.pi
    return out[()] if np.ndim(out) == 0 else out


def s0() -> float:
    """Regular part at the center, S(0, 0) = log 2 / pi."""
    return S0


def evaluate_interval(x: float, y: float) -> GreenEvaluation:
    inside = abs(y) < 1
    val = float(green_interval(x, y))
    reg = float(regular_part_interval(x, y)) if abs(y) <= 1 else np.nan
    return GreenEvaluation(x, y, val, reg, inside)


def tilde_green_interval(x, y):
    """Harmonic extension of G_0 to the upper half plane: (1/pi) Re log((1 + sqrt(1 - z^2)) / z)."""
    z = np.asarray(x, dtype=complex) + 1j * np.asarray(y, dtype=float)
    if np.any(z == 0):
        raise GreenSingularity("extension evaluated at the origin")
    out = np.log((1 + np.sqrt(1 - z * z)) / z).real / np.pi
    return out[()] if out.ndim == 0 else out


def tilde_green_interval_grad_sq(x, y):
    """|grad G~|^2 = 1 / (pi^2 |z|^2 |1 - z^2|) for the interval extension."""
    z = np.asarray(x, dtype=complex) + 1j * np.asarray(y, dtype=float)
    return 1.0 / (np.pi**2 * np.abs(z) ** 2 * np.abs(1 - z * z))


# ---------------------------------------------------------------------------
# line


def green_line(x, table: SpecialFunctionTable = DEFAULT_TABLE):
    """G(x) for x != 0, even in x.

    Near zero the Si/Ci closed form is evaluated directly; further out the
    same quantity is written as g(x)/pi with g the auxiliary function of the
    sine/cosine integrals, which avoids the cancellation of O(1) terms
    against an O(1/x^2) result.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise GreenSingularity("green_line evaluated at 0")
    ax = np.abs(x)
    out = np.empty_like(ax)
    near = ax <= table.series_max
    asym = ax >= table.asymptotic_min
    mid = ~(near | asym)
    if near.any():
        a = ax[near]
        si, ci = sici(a, table)
        out[near] = 0.5 * np.sin(a) - (np.sin(a) * si + np.cos(a) * ci) / np.pi
    if mid.any():
        out[mid] = scaled_exp1(1j * ax[mid]).real / np.pi
    if asym.any():
        _, g = _aux_fg(ax[asym], table.asymptotic_terms)
        out[asym] = g / np.pi
    return out[()] if out.ndim == 0 else out


def line_regular_part(t):
    """R(t) = G(t) + (1/pi) log|t|, with R(0) = -gamma/pi."""
    t = np.asarray(t, dtype=float)
    nz = t != 0
    out = np.full(t.shape, LINE_REGULAR_AT_ZERO)
    out[nz] = green_line(t[nz]) + np.log(np.abs(t[nz])) / np.pi
    return out[()] if out.ndim == 0 else out


def green_line_fourier_oracle(x, cutoff: float = 200.0, tail_terms: int = 12) -> float:
    """(1/pi) int_0^inf cos(x xi) / (1 + xi) dxi by oscillatory quadrature.

    The cosine-weighted rule covers [0, cutoff]; the remainder is summed from
    the integration-by-parts series of int_X^inf e^{i x xi} / (1 + xi) dxi.
    """
    x = abs(float(x))
    if x == 0:
        raise GreenSingularity("oracle evaluated at 0")
    with warnings.catch_warnings():
        # the rule reports roundoff once it reaches ~1e-14; that is the goal
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head = integrate.quad(lambda s: 1.0 / (1.0 + s), 0.0, cutoff, weight="cos", wvar=x,
                              limit=2000, epsabs=1e-14, epsrel=1e-13)[0]
    # int_X^inf e^{ix s} (1+s)^{-1} ds = -e^{ixX} sum_k k! / ((ix)^{k+1} (1+X)^{k+1})
    acc = 0.0 + 0.0j
    fact = 1.0
    for k in range(tail_terms):
        if k:
            fact *= k
        acc += fact / ((1j * x) ** (k + 1) * (1.0 + cutoff) ** (k + 1))
    tail = (-np.exp(1j * x * cutoff) * acc).real
    return (head + tail) / np.pi


def tilde_green_line(x, y):
    """Harmonic extension of G to the upper half plane: (1/pi) Re e^w E1(w), w = y - ix."""
    w = np.asarray(y, dtype=float) - 1j * np.asarray(x, dtype=float)
    out = scaled_exp1(w).real / np.pi
    return out[()] if np.ndim(out) == 0 else out


def tilde_green_line_grad_sq(x, y):
    """|grad G~|^2 = |e^w E1(w) - 1/w|^2 / pi^2 for the line extension."""
    w = np.asarray(y, dtype=float) - 1j * np.asarray(x, dtype=float)
    return np.abs(scaled_exp1(w) - 1.0 / w) ** 2 / np.pi**2


def tilde_green_line_expansion(x, y):
    """Four explicit terms of G~ near the origin (the C^1 remainder is dropped)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x == 0) & (y == 0)):
        raise GreenSingularity("expansion evaluated at the origin")
    r2 = x * x + y * y
    with np.errstate(divide="ignore", invalid="ignore"):
        atan = np.where(x == 0, 0.0, np.arctan2(x, y))
    out = (-np.log(r2) / (2 * np.pi) - EULER_GAMMA / np.pi + x * atan / np.pi
           - y * np.log(r2) / (2 * np.pi))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# product-integration weights for log|t| against hat functions


def _f1(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t == 0, 0.0, t * np.log(np.abs(t)) - t)


def _f2(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(t == 0, 0.0, 0.5 * t * t * np.log(np.abs(t)) - 0.25 * t * t)


def half_hat_log(k):
    """A(k) = int_0^1 log|k + s| (1 - s) ds."""
    k = np.asarray(k, dtype=float)
    big = np.abs(k) > 50
    kb = np.where(big, 0.0, k)
    exact = (1 + kb) * (_f1(kb + 1) - _f1(kb)) - (_f2(kb + 1) - _f2(kb))
    kk = np.where(big, k, 1.0)
    series = 0.5 * np.log(np.abs(kk))
    for n in range(1, 9):
        series = series + (-1) ** (n + 1) / (n * kk**n * (n + 1) * (n + 2))
    return np.where(big, series, exact)


def hat_log(k):
    """phi(k) = int_{-1}^{1} log|k + s| (1 - |s|) ds."""
    k = np.asarray(k, dtype=float)
    return half_hat_log(k) + half_hat_log(-k)


def _line_kernel(grid: Grid1D) -> np.ndarray:
    h = grid.h
    k = np.arange(grid.N, dtype=float)
    c = -(h / np.pi) * (np.log(h) + hat_log(k))
    c[1:] += h * line_regular_part(k[1:] * h)
    # product rule for the |t|/2 kink of the regular part at the diagonal
    c[0] += h * LINE_REGULAR_AT_ZERO + h * h / 6
    return c


_LINE_CACHE: dict = {}


def apply_green_line(f: GridFunction) -> GridFunction:
    """u = G * f, the solution of (-Delta)^{1/2} u + u = f, f taken as 0 off the grid.

    The logarithmic part of G is integrated exactly against the piecewise
    linear interpolant of f; the bounded remainder uses the trapezoid rule
    with the |t|/2 kink at the diagonal integrated exactly.
    """
    grid = f.grid
    op = _LINE_CACHE.get(grid)
    if op is None:
        op = SymToeplitz(_line_kernel(grid))
        _LINE_CACHE[grid] = op
    out = op(f.values)
    if f.is_even:
        out = symmetrize(out)
    return GridFunction(grid, out, is_even=f.is_even)


def apply_green_interval(f: GridFunction) -> GridFunction:
    """u(x) = int_I G_x(y) f(y) dy on a grid of half width 1 (values of f off I ignored)."""
    grid = f.grid
    if abs(grid.T - 1.0) > 1e-12:
        raise ValueError("apply_green_interval expects the interval grid (T = 1)")
    h, x, N = grid.h, grid.x, grid.N
    v = f.values.copy()
    k = np.arange(N, dtype=float)
    logop = SymToeplitz(-(h / np.pi) * (np.log(h) + hat_log(k)))
    u = logop(v)
    # the end hats reach outside I; remove their outer halves
    i = np.arange(N, dtype=float)
    u -= v[-1] * (-(h / np.pi)) * (0.5 * np.log(h) + half_hat_log(-(i - (N - 1))))
    u -= v[0] * (-(h / np.pi)) * (0.5 * np.log(h) + half_hat_log(i))
    w = grid.trapezoid_weights()
    wf = w * v
    sq = np.sqrt(np.clip(1 - x * x, 0, None))
    for start in range(0, N, 512):
        xi = x[start:start + 512, None]
        S = np.log(np.maximum(1 - xi * x[None, :] + sq[start:start + 512, None] * sq[None, :],
                              1e-300)) / np.pi
        u[start:start + 512] += S @ wf
    u[0] = u[-1] = 0.0
    if f.is_even:
        u = symmetrize(u)
    return GridFunction(grid, u, is_even=f.is_even, support=1.0)


# ---------------------------------------------------------------------------
# probe tables


def probe_table(which: str, xs, ys):
    """Rows (x, y, G, S) for the interval kernel G_x(y) or the line kernel G(y - x)."""
    rows = []
    for x in np.atleast_1d(xs):
        for y in np.atleast_1d(ys):
            if x == y:
                continue
            if which == "interval":
                g = float(green_interval(x, y))
                s = float(regular_part_interval(x, y)) if abs(y) <= 1 else np.nan
            elif which == "line":
                g = float(green_line(y - x))
                s = float(line_regular_part(y - x))
            else:
                raise ValueError(f"unknown Green's function {which!r}")
            rows.append((float(x), float(y), g, s))
    return rows
