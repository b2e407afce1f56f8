"""Grids, grid functions and half-Laplacian primitives on the line.

Fourier convention used throughout: u_hat(xi) = int u(x) e^{-i x xi} dx, so
||u||_{L^2}^2 = (1/2pi) int |u_hat|^2 and the seminorm of order 1/2 is
(1/2pi) int |xi| |u_hat|^2.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate, signal

# ---------------------------------------------------------------------------
# grids and grid functions


@dataclass(frozen=True)
class Grid1D:
    """Symmetric uniform grid x_i = -T + i h, i = 0..N-1, with N odd."""

    T: float
    N: int

    def __post_init__(self):
        if not (self.T > 0 and np.isfinite(self.T)):
            raise ValueError(f"half width must be positive, got {self.T}")
        if int(self.N) != self.N or self.N < 3 or self.N % 2 == 0:
            raise ValueError(f"point count must be an odd integer >= 3, got {self.N}")

    @property
    def h(self) -> float:
        return 2.0 * self.T / (self.N - 1)

    @property
    def center(self) -> int:
        return (self.N - 1) // 2

    @cached_property
    def x(self) -> np.ndarray:
        # built from the center outward so that x[c + k] == -x[c - k] exactly
        k = np.arange(-self.center, self.center + 1)
        x = k * self.h
        x[0], x[-1] = -self.T, self.T
        x.setflags(write=False)
        return x

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.N, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w


def build_grid(T: float, N: int) -> Grid1D:
    return Grid1D(float(T), int(N))


@dataclass
class GridFunction:
    """Real samples on a Grid1D plus shape metadata.

    ``support`` is a half width a; values must vanish for |x| > a.
    ``trusted`` marks nodes whose values are reliable (operators set it).
    """

    grid: Grid1D
    values: np.ndarray
    is_even: bool = False
    is_decreasing: bool = False
    support: Optional[float] = None
    trusted: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} values, got shape {v.shape}")
        self.values = v
        if self.is_even and not np.array_equal(v, v[::-1]):
            raise ValueError("values flagged even are not symmetric")
        if self.is_decreasing:
            c = self.grid.center
            right, left = v[c:], v[: c + 1][::-1]
            if np.any(np.diff(right) > 0) or np.any(np.diff(left) > 0):
                raise ValueError("values flagged decreasing increase in |x|")
        if self.support is not None:
            a = float(self.support)
            if a <= 0:
                raise ValueError("support half width must be positive")
            outside = np.abs(self.grid.x) > a * (1 + 1e-12)
            if np.any(v[outside] != 0):
                raise ValueError("nonzero values outside the declared support")
        if self.trusted is not None:
            self.trusted = np.asarray(self.trusted, dtype=bool)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def with_values(self, values, **flags) -> "GridFunction":
        kw = dict(is_even=False, is_decreasing=False, support=None)
        kw.update(flags)
        return GridFunction(self.grid, values, **kw)

    def trusted_mask(self) -> np.ndarray:
        if self.trusted is None:
            return np.ones(self.grid.N, dtype=bool)
        return self.trusted


def symmetrize(values: np.ndarray) -> np.ndarray:
    """Exactly even copy of ``values`` (a + b == b + a in floating point)."""
    v = np.asarray(values, dtype=float)
    return 0.5 * (v + v[::-1])


def sample(grid: Grid1D, f: Callable, even: bool = False, decreasing: bool = False,
           support: Optional[float] = None) -> GridFunction:
    """Sample ``f`` on the grid; ``even`` symmetrizes, ``support`` zeroes the exterior."""
    x = grid.x
    v = np.asarray(f(x), dtype=float) * np.ones_like(x)
    if support is not None:
        v = np.where(np.abs(x) > support, 0.0, v)
    if even:
        v = symmetrize(v)
    return GridFunction(grid, v, is_even=even, is_decreasing=decreasing, support=support)


def untrusted_near_edges(grid: Grid1D, width: float = 2.0) -> np.ndarray:
    """True where |x| <= T - width*h (nodes far enough from the truncation)."""
    return np.abs(grid.x) <= grid.T - width * grid.h * (1 - 1e-9)


# ---------------------------------------------------------------------------
# tail models for |x| > T


TAIL_KINDS = ("zero", "constant", "log", "power")


@dataclass(frozen=True)
class TailModel:
    """Model of u beyond the grid, one set of parameters per side.

    zero: u = 0; constant: u = c; log: u = a + b log|y|; power: u = c / y^2.
    Parameters are (right, left) tuples.
    """

    kind: str = "zero"
    right: tuple = ()
    left: tuple = ()

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValueError(f"unknown tail model {self.kind!r}")

    def _eval(self, p, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "constant":
            return np.full_like(r, p[0])
        if self.kind == "log":
            return p[0] + p[1] * np.log(r)
        return p[0] / r**2

    def value(self, y):
        """Model value at points y with |y| > T."""
        y = np.asarray(y, dtype=float)
        return np.where(y > 0, self._eval(self.right or (0, 0), np.abs(y)),
                        self._eval(self.left or (0, 0), np.abs(y)))

    def _side_integral(self, p, x, tc):
        """int_{tc}^inf f(y) / (y - x)^2 dy for the model f with parameters p."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        k0 = 1.0 / (tc - x)
        if self.kind == "constant":
            return p[0] * k0
        t = x / tc
        small = np.abs(t) < 1e-3
        ts = np.where(small, 0.5, t)
        if self.kind == "log":
            # -(1/x) log(1 - x/tc)
            g = np.where(small, (1 + t / 2 + t * t / 3 + t**3 / 4) / tc,
                         -np.log1p(-ts) / (ts * tc))
            return p[0] * k0 + p[1] * (np.log(tc) * k0 + g)
        # power: int dy / (y^2 (y - x)^2)
        xs = ts * tc
        exact = 1 / (xs**2 * tc) + 1 / (xs**2 * (tc - xs)) + 2 * np.log1p(-ts) / xs**3
        n = np.arange(2, 12)
        series = (t[..., None] ** (n - 2) * (n - 1) / (n + 1)).sum(-1) / tc**3
        return p[0] * np.where(small, series, exact)

    def exterior_integral(self, x, tc):
        """int_{|y| > tc} f(y) / (y - x)^2 dy, both sides."""
        if self.kind == "zero":
            return np.zeros_like(np.asarray(x, dtype=float))
        r = self._side_integral(self.right, x, tc)
        l = self._side_integral(self.left, -np.asarray(x), tc)
        return r + l


def fit_tail(u: GridFunction, kind: str = "zero") -> TailModel:
    """Fit a tail model to the outermost decade of nodes on each side."""
    if kind == "zero":
        return TailModel("zero")
    x, v = u.grid.x, u.values
    if kind == "constant":
        return TailModel("constant", (v[-1],), (v[0],))
    T = u.grid.T
    params = []
    for side in (x > 0, x < 0):
        sel = side & (np.abs(x) >= T / 10)
        r, f = np.abs(x[sel]), v[sel]
        if kind == "log":
            A = np.stack([np.ones_like(r), np.log(r)], axis=1)
            coef, *_ = np.linalg.lstsq(A, f, rcond=None)
            params.append(tuple(coef))
        elif kind == "power":
            params.append((float(np.sum(f / r**2) / np.sum(r**-4.0)),))
        else:
            raise ValueError(f"unknown tail model {kind!r}")
    return TailModel(kind, params[0], params[1])


def _as_tail(u: GridFunction, tail) -> TailModel:
    if isinstance(tail, TailModel):
        return tail
    return fit_tail(u, tail)


# ---------------------------------------------------------------------------
# symmetric Toeplitz products


def _toeplitz_kernel(N: int) -> np.ndarray:
    k = np.arange(N, dtype=float)
    ker = np.zeros(N)
    ker[1:] = 1.0 / k[1:] ** 2
    return ker


class SymToeplitz:
    """Matrix-vector products with the symmetric Toeplitz matrix T_ij = c[|i-j|]."""

    def __init__(self, first_col: np.ndarray):
        c = np.asarray(first_col, dtype=float)
        self.n = c.size
        circ = np.concatenate([c, [0.0], c[:0:-1]])
        self.m = circ.size
        self._fc = np.fft.rfft(circ)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.fft.irfft(np.fft.rfft(v, self.m, axis=-1) * self._fc, self.m, axis=-1)
        return out[..., : self.n]


_TOEPLITZ_CACHE: dict = {}


def inverse_square_toeplitz(N: int) -> SymToeplitz:
    """Products with the matrix 1/(i-j)^2 (zero diagonal), cached by size."""
    op = _TOEPLITZ_CACHE.get(N)
    if op is None:
        op = SymToeplitz(_toeplitz_kernel(N))
        _TOEPLITZ_CACHE[N] = op
    return op


# ---------------------------------------------------------------------------
# half-Laplacian: spectral route


def _spectral_symbol(grid: Grid1D, power: float) -> np.ndarray:
    M = grid.N - 1
    xi = np.pi * np.arange(M // 2 + 1) / grid.T
    return xi**power


def _image_sum(x, T):
    """sum_{k != 0} 1 / (x + 2kT)^2 for |x| <= T."""
    a = np.pi / (2 * T)
    x = np.asarray(x, dtype=float)
    small = np.abs(a * x) < 1e-3
    xs = np.where(small, 1.0, x)
    exact = (a / np.sin(a * xs)) ** 2 - 1 / xs**2
    z = (a * x) ** 2
    series = a * a * (1 / 3 + z / 15 + 2 * z * z / 189)
    return np.where(small, series, exact)


def spectral_frac_laplacian(u: GridFunction, s: float = 0.5,
                            leak_threshold: float = 1e-6,
                            image_correction: bool = True) -> GridFunction:
    """Multiply the periodized discrete transform by |xi|^{2s}, xi_m = pi m / T.

    For s = 1/2 the periodic images contribute -(mass/pi)/(x + 2kT)^2 each at
    leading order; ``image_correction`` removes that term.
    """
    if not (0 < s < 1):
        raise ValueError("s must lie in (0, 1)")
    v = u.values
    scale = max(np.max(np.abs(v)), 1e-300)
    leak = max(abs(v[0]), abs(v[-1])) / scale
    if leak > leak_threshold:
        warnings.warn(f"boundary tail {leak:.2e} exceeds {leak_threshold:.0e}; "
                      "periodization error is not controlled", RuntimeWarning, stacklevel=2)
    per = v[:-1]
    out = np.fft.irfft(np.fft.rfft(per) * _spectral_symbol(u.grid, 2 * s), per.size)
    out = np.append(out, out[0])
    if image_correction and s == 0.5:
        mass = float(np.dot(u.grid.trapezoid_weights(), v))
        out = out + mass / np.pi * _image_sum(u.grid.x, u.grid.T)
    if u.is_even:
        out = symmetrize(out)
    gf = GridFunction(u.grid, out, is_even=u.is_even)
    gf.meta["tail_leakage"] = leak
    return gf


# ---------------------------------------------------------------------------
# half-Laplacian: principal-value route


def pv_half_laplacian(u: GridFunction, tail="zero") -> GridFunction:
    """(1/pi) P.V. int (u(x) - u(y)) / (x - y)^2 dy at every node.

    Nodes carry cells of width h, so the grid covers [-T - h/2, T + h/2];
    beyond that the tail model supplies u. The singular cell is handled by
    the limit of the difference quotient, -u''(x)/2, via a second difference.
    """
    grid = u.grid
    h, x, v = grid.h, grid.x, u.values
    model = _as_tail(u, tail)
    tc = grid.T + 0.5 * h
    op = inverse_square_toeplitz(grid.N)
    ones_sum = _row_sums(grid.N)
    conv = (v * ones_sum - op(v)) / h
    ghost_r = model.value(np.array([grid.T + h]))[0]
    ghost_l = model.value(np.array([-grid.T - h]))[0]
    padded = np.concatenate([[ghost_l], v, [ghost_r]])
    d2 = padded[2:] - 2 * v + padded[:-2]
    tau = 1.0 / (tc - x) + 1.0 / (tc + x)
    tail_term = v * tau - model.exterior_integral(x, tc)
    out = (conv - 0.5 * d2 / h + tail_term) / np.pi
    if u.is_even:
        out = symmetrize(out)
    gf = GridFunction(grid, out, is_even=u.is_even,
                      trusted=untrusted_near_edges(grid, 2.0))
    gf.meta["tail_model"] = model.kind
    return gf


_ROWSUM_CACHE: dict = {}


def _row_sums(N: int) -> np.ndarray:
    r = _ROWSUM_CACHE.get(N)
    if r is None:
        r = inverse_square_toeplitz(N)(np.ones(N))
        _ROWSUM_CACHE[N] = r
    return r


def pv_matrix(grid: Grid1D, index: Optional[np.ndarray] = None) -> np.ndarray:
    """Dense matrix of pv_half_laplacian with zero tail, restricted to ``index``."""
    idx = np.arange(grid.N) if index is None else np.asarray(index)
    h, x = grid.h, grid.x
    tc = grid.T + 0.5 * h
    d = idx[:, None] - idx[None, :]
    with np.errstate(divide="ignore"):
        A = -1.0 / (h * d.astype(float) ** 2)
    np.fill_diagonal(A, 0.0)
    xi = x[idx]
    diag = _row_sums(grid.N)[idx] / h + 1.0 / h + 1.0 / (tc - xi) + 1.0 / (tc + xi)
    A[np.arange(idx.size), np.arange(idx.size)] = diag
    adj = np.abs(d) == 1
    A[adj] += -0.5 / h
    return A / np.pi


# ---------------------------------------------------------------------------
# half-plane extension


@dataclass(frozen=True)
class HalfPlaneGrid:
    x_grid: Grid1D
    y_nodes: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y_nodes, dtype=float)
        if y.ndim != 1 or y.size < 1:
            raise ValueError("need at least one y level")
        if y[0] <= 0 or np.any(np.diff(y) <= 0):
            raise ValueError("y levels must be positive and strictly increasing")
        object.__setattr__(self, "y_nodes", y)


def graded_half_plane(grid: Grid1D, y_max: float, y_min: Optional[float] = None,
                      ratio: float = 1.15) -> HalfPlaneGrid:
    """Geometric levels y_j = y_min ratio^j up to y_max (default y_min = h/4)."""
    y0 = grid.h / 4 if y_min is None else y_min
    n = int(np.ceil(np.log(y_max / y0) / np.log(ratio))) + 1
    return HalfPlaneGrid(grid, y0 * ratio ** np.arange(max(n, 1)))


@dataclass
class ExtensionField:
    """Values on a HalfPlaneGrid, indexed [level j, node i]; ``trace`` is the y = 0 row."""

    domain: HalfPlaneGrid
    values: np.ndarray
    trace: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        shape = (self.domain.y_nodes.size, self.domain.x_grid.N)
        if v.shape != shape:
            raise ValueError(f"expected shape {shape}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("extension values must be finite")
        self.values = v
        if self.trace is not None:
            self.trace = np.asarray(self.trace, dtype=float)


# Lagrange quintic on a cell [0, 1] through nodes -2..3: rows are nodes,
# columns the coefficients of s^0..s^5.
_STENCIL = np.arange(-2, 4)


def _lagrange_coefficients(nodes):
    rows = []
    for j, xj in enumerate(nodes):
        others = np.delete(nodes, j)
        poly = np.poly(others) / np.prod(xj - others)
        rows.append(poly[::-1])
    return np.array(rows)


_LAGRANGE = _lagrange_coefficients(_STENCIL.astype(float))
_DEG = _STENCIL.size - 1
_GL_T, _GL_W = np.polynomial.legendre.leggauss(12)


def _cell_moments(c, eta):
    """m_p(c) = int_0^1 s^p K(c + s) ds for p = 0..5, K the Poisson kernel at eta.

    Cells touching the target use the exact recurrence for
    I_p = int s^p / (eta^2 + (c + s)^2) ds; the rest use Gauss-Legendre.
    """
    c = np.asarray(c, dtype=float)
    near = (c >= -2) & (c <= 1) & (eta <= 2.0)
    m = np.empty((_DEG + 1, c.size))
    if near.any():
        a = c[near]
        e2 = eta * eta
        I = [(np.arctan((a + 1) / eta) - np.arctan(a / eta)) / eta]
        I.append(0.5 * np.log((e2 + (a + 1) ** 2) / (e2 + a * a)) - a * I[0])
        for p in range(2, _DEG + 1):
            I.append(1.0 / (p - 1) - 2 * a * I[p - 1] - (a * a + e2) * I[p - 2])
        m[:, near] = eta * np.array(I) / np.pi
    far = ~near
    if far.any():
        s = 0.5 * (_GL_T + 1)
        w = 0.5 * _GL_W
        t = c[far, None] + s[None, :]
        K = eta / (np.pi * (eta * eta + t * t))
        for p in range(_DEG + 1):
            m[p, far] = (K * s**p * w).sum(axis=1)
    return m


def poisson_weights(eta: float, K: int) -> np.ndarray:
    """Weights W[k], k = -K..K, with F(x_i, y) ~ sum_k W[k] u[i + k], eta = y/h.

    Product integration of the Poisson kernel against the piecewise quintic
    interpolant of the samples.
    """
    cells = np.arange(-K - 3, K + 3)
    mom = _cell_moments(cells, eta)
    contrib = _LAGRANGE @ mom  # [stencil node, cell]
    pad = 6
    W = np.zeros(2 * K + 1 + 2 * pad)
    for j, off in enumerate(_STENCIL):
        idx = cells + off + K + pad
        ok = (idx >= 0) & (idx < W.size)
        np.add.at(W, idx[ok], contrib[j][ok])
    return W[pad:-pad]


def poisson_extend(u: GridFunction, dom: HalfPlaneGrid, tail="zero",
                   pad_factor: float = 1.0, renormalize: bool = True) -> ExtensionField:
    """Poisson integral (1/pi) int y u(s) / (y^2 + (x - s)^2) ds at every grid point.

    The samples are extended by the tail model onto ``pad_factor * N`` ghost
    nodes per side; beyond those the tail model is integrated in closed form.
    With ``renormalize`` the result is divided by the same quadrature applied
    to u = 1, which makes constants extend exactly.
    """
    grid = u.grid
    if dom.x_grid != grid:
        raise ValueError("extension domain must share the function's grid")
    model = _as_tail(u, tail)
    h, N, x = grid.h, grid.N, grid.x
    P = int(pad_factor * (N - 1))
    k_ghost = np.arange(1, P + 1)
    xr = grid.T + k_ghost * h
    ext_u = np.concatenate([model.value(-xr[::-1]), u.values, model.value(xr)])
    ext_1 = np.ones_like(ext_u)
    tc = grid.T + (P + 0.5) * h
    K = N - 1 + P
    tail_u = model.exterior_integral(x, tc)
    tail_1 = 1.0 / (tc - x) + 1.0 / (tc + x)
    out = np.empty((dom.y_nodes.size, N))
    for j, y in enumerate(dom.y_nodes):
        W = poisson_weights(y / h, K)
        Fu = _valid_conv(ext_u, W, N, P)
        Fu = Fu + y / np.pi * tail_u
        if renormalize:
            F1 = _valid_conv(ext_1, W, N, P) + y / np.pi * tail_1
            Fu = Fu / F1
        out[j] = Fu
    if u.is_even:
        out = 0.5 * (out + out[:, ::-1])
    return ExtensionField(dom, out, trace=u.values.copy())


def _valid_conv(ext, W, N, P):
    full = signal.fftconvolve(ext, W, mode="full")
    K = (W.size - 1) // 2
    # output i (grid node) sits at ext index i + P; full index = ext index + K
    start = P + K
    return full[start:start + N]


def extension_normal_derivative(F: ExtensionField, levels: int = 3,
                                tail="zero") -> GridFunction:
    """-dF/dy at y = 0 from the lowest ``levels`` rows.

    With a stored trace u the expansion F = u - y D - (y^2/2) u'' + c y^3
    (harmonicity gives the y^2 term) is fitted for D and c by least squares.
    Without a trace a polynomial in y is fitted through the rows.
    """
    if F.domain.y_nodes.size < 3 or levels < 3:
        raise ValueError("need at least three y levels")
    grid = F.domain.x_grid
    y = F.domain.y_nodes[:levels]
    rows = F.values[:levels]
    if F.trace is None:
        A = np.vander(y, levels, increasing=True)
        coef = np.linalg.solve(A, rows)
        D = -coef[1]
    else:
        u = GridFunction(grid, F.trace)
        model = _as_tail(u, tail)
        h = grid.h
        g = model.value(np.array([-grid.T - 2 * h, -grid.T - h, grid.T + h, grid.T + 2 * h]))
        p = np.concatenate([g[:2], F.trace, g[2:]])
        d2 = (-p[4:] + 16 * p[3:-1] - 30 * p[2:-2] + 16 * p[1:-3] - p[:-4]) / (12 * h * h)
        r = (rows - F.trace[None, :] + 0.5 * y[:, None] ** 2 * d2[None, :]) / y[:, None]
        A = np.stack([-np.ones_like(y), y**2], axis=1)
        coef, *_ = np.linalg.lstsq(A, r, rcond=None)
        D = coef[0]
    return GridFunction(grid, D, trusted=untrusted_near_edges(grid, 2.0))


def dirichlet_energy(F: ExtensionField) -> float:
    """int |grad F|^2 over the sampled strip by bilinear-cell differences.

    When the field carries its trace, the strip [0, y_0] is included.
    """
    x = F.domain.x_grid.x
    y = F.domain.y_nodes
    V = F.values
    if F.trace is not None:
        y = np.concatenate([[0.0], y])
        V = np.vstack([F.trace, V])
    if V.shape[0] < 2 or V.shape[1] < 2:
        raise ValueError("need at least two levels in each direction")
    dx = np.diff(x)[None, :]
    dy = np.diff(y)[:, None]
    gx = np.diff(V, axis=1) / dx  # on horizontal edges
    gy = np.diff(V, axis=0) / dy  # on vertical edges
    ex = 0.5 * (gx[:-1] ** 2 + gx[1:] ** 2)
    ey = 0.5 * (gy[:, :-1] ** 2 + gy[:, 1:] ** 2)
    return float(np.sum((ex + ey) * dx * dy))


# ---------------------------------------------------------------------------
# norms


def _exterior_mode(u: GridFunction, exterior):
    if exterior == "auto":
        return "zero" if u.support is not None else "none"
    if exterior not in ("zero", "none"):
        raise ValueError("exterior must be 'zero', 'none' or 'auto'")
    return exterior


def gagliardo_seminorm_sq(u: GridFunction, exterior="auto", block: int = 512) -> float:
    """(1/2pi) double integral of (u(x) - u(y))^2 / (x - y)^2 on the grid.

    The diagonal cells use the average of the squared one-sided slopes.
    ``exterior="zero"`` treats u as vanishing beyond the grid cells and adds
    the grid-exterior interaction; ``"none"`` restricts to the grid square;
    ``"auto"`` picks "zero" for functions with declared support.
    The pairwise sum is evaluated directly, in row blocks.
    """
    mode = _exterior_mode(u, exterior)
    grid = u.grid
    h, v, N = grid.h, u.values, grid.N
    total = 0.0
    idx = np.arange(N)
    for start in range(0, N, block):
        i = idx[start:start + block]
        d = (i[:, None] - idx[None, :]).astype(float)
        with np.errstate(divide="ignore"):
            k = 1.0 / (d * d)
        k[d == 0] = 0.0
        diff = v[i, None] - v[None, :]
        total += float(np.sum(diff * diff * k))
    dv = np.diff(v)
    if mode == "zero":
        sl = np.concatenate([[v[0]], dv])
        sr = np.concatenate([dv, [-v[-1]]])
        # the jumps to the zero exterior also belong to the ghost cells beyond the ends,
        # so they count fully (matches summation by parts of pv_half_laplacian)
        diag = 0.5 * np.sum(sl**2 + sr**2) + 0.5 * (v[0] ** 2 + v[-1] ** 2)
        tc = grid.T + 0.5 * h
        x = grid.x
        tau = 1.0 / (tc - x) + 1.0 / (tc + x)
        total += diag + 2 * h * float(np.sum(v * v * tau))
    else:
        sl = np.concatenate([[dv[0]], dv])
        sr = np.concatenate([dv, [dv[-1]]])
        total += 0.5 * np.sum(sl**2 + sr**2)
    return total / (2 * np.pi)


def spectral_seminorm_sq(u: GridFunction) -> float:
    """(1/2pi) sum |xi| |u_hat|^2 dxi on the periodized lattice.

    The periodic images lower the energy by about (mass^2/pi) sum_k 1/(2kT)^2;
    that monopole term is added back.
    """
    lap = spectral_frac_laplacian(u, 0.5, leak_threshold=np.inf, image_correction=False)
    per = float(u.grid.h * np.dot(u.values[:-1], lap.values[:-1]))
    mass = float(np.dot(u.grid.trapezoid_weights(), u.values))
    return per + mass * mass * np.pi / (12 * u.grid.T ** 2)


def l2_norm_sq(u: GridFunction) -> float:
    return float(np.dot(u.grid.trapezoid_weights(), u.values**2))


def full_h_norm_sq(u: GridFunction, exterior="auto") -> float:
    return gagliardo_seminorm_sq(u, exterior) + l2_norm_sq(u)


def ls_norm(u: GridFunction, s: float, tail="zero") -> float:
    """int |u| / (1 + |x|^{1+2s}) dx: trapezoid on the grid plus the tail model."""
    if s <= 0:
        raise ValueError("s must be positive")
    x = u.grid.x
    wgt = 1.0 / (1.0 + np.abs(x) ** (1 + 2 * s))
    inner = float(np.dot(u.grid.trapezoid_weights(), np.abs(u.values) * wgt))
    model = _as_tail(u, tail)
    if model.kind == "zero":
        return inner
    T = u.grid.T
    f = lambda r, side: abs(float(model.value(np.array([side * r]))[0])) / (1 + r ** (1 + 2 * s))
    out = inner
    for side in (1.0, -1.0):
        out += integrate.quad(f, T, np.inf, args=(side,), limit=200)[0]
    return out


def decay_bound_excess(u: GridFunction) -> float:
    """max over x != 0 of u(x)^2 - ||u||^2 / (2|x|); nonpositive for even decreasing u."""
    x = u.grid.x
    nz = x != 0
    return float(np.max(u.values[nz] ** 2 - l2_norm_sq(u) / (2 * np.abs(x[nz]))))


# ---------------------------------------------------------------------------
# serialization


def write_csv(u: GridFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for xi, vi in zip(u.grid.x, u.values):
            w.writerow([f"{xi:.17g}", f"{vi:.17g}"])


def read_csv(path) -> GridFunction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, v = data[:, 0], data[:, 1]
    grid = build_grid(-x[0], x.size)
    return GridFunction(grid, v)


def write_extension_csv(F: ExtensionField, path) -> None:
    x = F.domain.x_grid.x
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for j, y in enumerate(F.domain.y_nodes):
            for i, xi in enumerate(x):
                w.writerow([f"{xi:.17g}", f"{y:.17g}", f"{F.values[j, i]:.17g}"])


def read_extension_csv(path) -> ExtensionField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    grid = build_grid(-xs[0], xs.size)
    vals = data[:, 2].reshape(ys.size, xs.size)
    return ExtensionField(HalfPlaneGrid(grid, ys), vals)
