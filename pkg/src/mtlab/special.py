"""Sine and cosine integrals and the scaled exponential integral e^w E1(w).

Three branches cover the positive axis for Si/Ci: a Maclaurin series near
zero, a continued fraction for E1(ix) in the middle range, and the
sin/cos-over-power asymptotic expansion for large arguments.
"""
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286061
EULER_GAMMA_STR = "0.57721566490153286061"

_TINY = 1e-300


@dataclass(frozen=True)
class SpecialFunctionTable:
    """Branch thresholds for Si/Ci.

    ``series_max``: Maclaurin series used for |x| <= series_max.
    ``asymptotic_min``: asymptotic expansion used for |x| >= asymptotic_min.
    In between, a continued fraction for E1(ix) is used.
    """

    series_max: float = 4.0
    asymptotic_min: float = 40.0
    series_terms: int = 40
    asymptotic_terms: int = 16

    def __post_init__(self):
        if not (0 < self.series_max <= self.asymptotic_min):
            raise ValueError("need 0 < series_max <= asymptotic_min")
        if self.series_terms < 1 or self.asymptotic_terms < 1:
            raise ValueError("term caps must be positive")


DEFAULT_TABLE = SpecialFunctionTable()


def _sici_series(x, nterms):
    x = np.asarray(x, dtype=float)
    x2 = x * x
    si = np.zeros_like(x)
    cs = np.zeros_like(x)
    term = x.copy()  # x^(2k+1)/(2k+1)!
    for k in range(nterms):
        si = si + term / (2 * k + 1)
        term = -term * x2 / ((2 * k + 2) * (2 * k + 3))
    term = -x2 / 2.0  # (-1)^k x^(2k)/(2k)! for k = 1
    for k in range(1, nterms):
        cs = cs + term / (2 * k)
        term = -term * x2 / ((2 * k + 1) * (2 * k + 2))
    with np.errstate(divide="ignore"):
        ci = EULER_GAMMA + np.log(np.abs(x)) + cs
    return si, ci


def _scaled_e1_cf(w, maxiter=2000, tol=1e-16):
    """e^w E1(w) by modified Lentz evaluation of the even continued fraction."""
    w = np.asarray(w, dtype=complex)
    b = w + 1.0
    c = np.full_like(w, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, maxiter):
        a = -float(i * i)
        b = b + 2.0
        d = a * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        d = 1.0 / d
        c = b + a / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < tol):
            break
    return h


def _sici_cf(x):
    """Si and Ci for x > 0 from E1(ix) = -Ci(x) + i (Si(x) - pi/2)."""
    x = np.asarray(x, dtype=float)
    h = _scaled_e1_cf(1j * x) * np.exp(-1j * x)
    return np.pi / 2 + h.imag, -h.real


def _aux_fg(x, nterms):
    x = np.asarray(x, dtype=float)
    inv2 = 1.0 / (x * x)
    f = np.zeros_like(x)
    g = np.zeros_like(x)
    tf = 1.0 / x  # (2k)!/x^(2k+1)
    tg = inv2  # (2k+1)!/x^(2k+2)
    for k in range(nterms):
        sign = -1.0 if k % 2 else 1.0
        f = f + sign * tf
        g = g + sign * tg
        tf = tf * (2 * k + 1) * (2 * k + 2) * inv2
        tg = tg * (2 * k + 2) * (2 * k + 3) * inv2
    return f, g


def _sici_asymptotic(x, nterms):
    x = np.asarray(x, dtype=float)
    f, g = _aux_fg(x, nterms)
    s, c = np.sin(x), np.cos(x)
    return np.pi / 2 - f * c - g * s, f * s - g * c


def sici(x, table: SpecialFunctionTable = DEFAULT_TABLE, branch=None):
    """Return (Si(x), Ci(|x|)) elementwise. Ci is NaN at x == 0.

    ``branch`` forces one method ("series", "cf", "asymptotic") for testing.
    """
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    si = np.empty_like(ax)
    ci = np.empty_like(ax)
    if branch is None:
        m_ser = ax <= table.series_max
        m_asy = ax >= table.asymptotic_min
        m_cf = ~(m_ser | m_asy)
    else:
        m_ser = np.full(ax.shape, branch == "series")
        m_cf = np.full(ax.shape, branch == "cf")
        m_asy = np.full(ax.shape, branch == "asymptotic")
        if not (m_ser.any() or m_cf.any() or m_asy.any()) and ax.size:
            raise ValueError(f"unknown branch {branch!r}")
    if m_ser.any():
        si[m_ser], ci[m_ser] = _sici_series(ax[m_ser], table.series_terms)
    if m_cf.any():
        si[m_cf], ci[m_cf] = _sici_cf(ax[m_cf])
    if m_asy.any():
        si[m_asy], ci[m_asy] = _sici_asymptotic(ax[m_asy], table.asymptotic_terms)
    ci = np.where(ax == 0, np.nan, ci)
    return np.sign(x) * si, ci


def sine_integral(x, table: SpecialFunctionTable = DEFAULT_TABLE):
    """Si(x) = int_0^x sin(t)/t dt, odd in x."""
    si, _ = sici(x, table)
    return si[()] if np.ndim(si) == 0 else si


def cosine_integral(x, table: SpecialFunctionTable = DEFAULT_TABLE):
    """Ci(x) = -int_x^inf cos(t)/t dt for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("cosine_integral requires x > 0")
    _, ci = sici(x, table)
    return ci[()] if np.ndim(ci) == 0 else ci


def scaled_exp1(w, series_radius=2.0):
    """e^w E1(w) for complex w with Re w >= 0, w != 0 (principal branch)."""
    w = np.asarray(w, dtype=complex)
    if np.any(w.real < 0):
        raise ValueError("scaled_exp1 is implemented for Re w >= 0")
    if np.any(w == 0):
        raise ValueError("E1 is singular at 0")
    out = np.empty_like(w)
    small = np.abs(w) < series_radius
    if small.any():
        ws = w[small]
        acc = np.zeros_like(ws)
        term = np.ones_like(ws)
        for k in range(1, 60):
            term = -term * ws / k
            acc = acc + term / k
        out[small] = np.exp(ws) * (-EULER_GAMMA - np.log(ws) - acc)
    if (~small).any():
        out[~small] = _scaled_e1_cf(w[~small])
    return out[()] if out.ndim == 0 else out
