"""Constrained maximizers of the Moser-Trudinger functional and subcritical sweeps.

The ascent uses the gradient of the functional taken in the inner product
of the constraint itself, <u, v>_M = u . M v with M the discrete form of
(-Delta)^{1/2} (+ Id on the line). A full step in that metric is the
normalized map u -> M^{-1}(alpha u e^{alpha u^2}); shorter steps are taken
when the functional would decrease.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.fft import dct, idct
from scipy.sparse.linalg import LinearOperator, cg

from .fraccore import (Grid1D, GridFunction, build_grid, pv_half_laplacian, pv_matrix,
                       symmetrize)
from .functionals import (LINE, ELState, ProblemDomain, el_residual, mt_energy, vanishing_gap)
from .greens import apply_green_line

DEFAULT_INTERVAL_GRID = (1.0, 4097)
DEFAULT_LINE_GRID = (50.0, 8193)


@dataclass(frozen=True)
class MaximizerOptions:
    step: Optional[float] = None  # initial step; None starts from the full step
    backtrack: float = 0.5
    max_iter: int = 4000
    tol: float = 1e-6  # target Euler-Lagrange residual
    stall_tol: float = 1e-4  # accepted residual once no ascent step exists
    rearrange_every: int = 10
    seed: str = "bubble"
    seed_width: float = 1.0
    multistart: int = 0
    random_seed: int = 0

    def __post_init__(self):
        if not (0 < self.backtrack < 1):
            raise ValueError("backtracking factor must lie in (0, 1)")
        if self.max_iter < 1 or self.rearrange_every < 1 or self.seed_width <= 0:
            raise ValueError("iteration counts and seed width must be positive")
        if not (0 < self.tol < 1) or self.stall_tol < self.tol:
            raise ValueError("tolerances must lie in (0, 1) with stall_tol >= tol")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.multistart < 0:
            raise ValueError("multistart count must be nonnegative")


@dataclass
class ExtremalResult:
    u: GridFunction
    alpha: float
    value: float
    lam: float
    el_residual: float
    converged: bool
    iterations: int
    domain: ProblemDomain
    values_history: list = field(default_factory=list)
    sphere_deviation: float = 0.0  # max |norm^2 - 1| over accepted iterates

    @property
    def mu(self) -> float:
        return float(self.u.values[self.u.grid.center])

    def state(self) -> ELState:
        return ELState(self.u, self.alpha, self.lam, self.el_residual)


# ---------------------------------------------------------------------------
# rearrangement


def rearrange_decreasing(u: GridFunction) -> GridFunction:
    """Symmetric decreasing rearrangement on the same grid.

    The largest value goes to the center and the sorted rest outward, one
    pair of nodes per rank pair. A pair receives the root mean square of its
    two values, which keeps the output exactly even and sum(v^2) unchanged;
    when the pairs coincide (even input with its maximum at the center) the
    multiset of values is preserved exactly.
    """
    v = np.asarray(u.values)
    if np.any(v < 0):
        raise ValueError("rearrangement expects a nonnegative function")
    s = np.sort(v, kind="stable")[::-1]
    c = u.grid.center
    out = np.empty_like(v)
    out[c] = s[0]
    a, b = s[1::2], s[2::2]
    pairs = np.where(a == b, a, np.hypot(a, b) * np.sqrt(0.5))
    out[c + 1:] = pairs
    out[:c] = pairs[::-1]
    support = u.support
    if support is not None:
        nz = np.nonzero(out)[0]
        if nz.size and np.max(np.abs(u.grid.x[nz])) > support:
            support = None
    return GridFunction(u.grid, out, is_even=True, is_decreasing=True, support=support)


# ---------------------------------------------------------------------------
# discrete constraint operators


class _IntervalOperator:
    """M = h P on the interior nodes of the interval grid (u = 0 at +-1)."""

    _cache: dict = {}

    def __init__(self, grid: Grid1D):
        if abs(grid.T - 1.0) > 1e-12:
            raise ValueError("interval problems use a grid of half width 1")
        self.grid = grid
        self.idx = np.arange(1, grid.N - 1)
        self.w = np.full(self.idx.size, grid.h)
        key = grid
        if key not in self._cache:
            A = grid.h * pv_matrix(grid, self.idx)
            self._cache.clear()
            self._cache[key] = sla.cho_factor(A, overwrite_a=True)
        self.factor = self._cache[key]

    def embed(self, v):
        full = np.zeros(self.grid.N)
        full[self.idx] = v
        return full

    def matvec(self, v):
        return self.grid.h * pv_half_laplacian(GridFunction(self.grid, self.embed(v))).values[self.idx]

    def solve(self, r, x0=None):
        return sla.cho_solve(self.factor, r)


class _LineOperator:
    """M = h P + diag(trapezoid weights) on the whole grid, solved by PCG."""

    def __init__(self, grid: Grid1D):
        self.grid = grid
        self.idx = np.arange(grid.N)
        self.w = grid.trapezoid_weights()
        xi = np.pi * np.arange(grid.N) / (2 * grid.T)
        self._sym = grid.h * (1 + xi)
        n = grid.N
        self._A = LinearOperator((n, n), matvec=self.matvec, dtype=float)
        self._P = LinearOperator((n, n), matvec=self._precondition, dtype=float)

    def embed(self, v):
        return np.asarray(v, dtype=float)

    def matvec(self, v):
        v = np.ravel(v)
        return self.grid.h * pv_half_laplacian(GridFunction(self.grid, v)).values + self.w * v

    def _precondition(self, r):
        return idct(dct(np.ravel(r), 1, norm="ortho") / self._sym, 1, norm="ortho")

    def solve(self, r, x0=None):
        x, info = cg(self._A, r, x0=x0, M=self._P, rtol=1e-13, atol=0.0, maxiter=2000)
        if info < 0:
            raise RuntimeError("conjugate gradient breakdown")
        return x


def _operator(grid: Grid1D, dom: ProblemDomain):
    return _IntervalOperator(grid) if dom.is_interval else _LineOperator(grid)


def default_grid(dom: ProblemDomain) -> Grid1D:
    return build_grid(*(DEFAULT_INTERVAL_GRID if dom.is_interval else DEFAULT_LINE_GRID))


def seed_profile(grid: Grid1D, dom: ProblemDomain, width: float = 1.0) -> np.ndarray:
    """Bubble-shaped seed (1 + (x/width)^2)^{-1/2}, lowered to vanish at +-1 on the interval."""
    x = grid.x
    v = 1.0 / np.sqrt(1.0 + (x / width) ** 2)
    if dom.is_interval:
        v = np.clip(v - 1.0 / np.sqrt(1.0 + 1.0 / width**2), 0.0, None)
        v[np.abs(x) >= 1.0] = 0.0
    return symmetrize(v)


# ---------------------------------------------------------------------------
# maximization


def _ascent(alpha, dom, grid, op, u, opts: MaximizerOptions):
    w = op.w
    E = lambda v: float(np.dot(w, np.expm1(alpha * v * v)))

    def normalize(v):
        q = float(np.dot(v, op.matvec(v)))
        return v / np.sqrt(q)

    def residual_of(v):
        full = GridFunction(grid, op.embed(v))
        lam = float(np.dot(v, op.matvec(v))) / float(np.dot(w, v * v * np.exp(alpha * v * v)))
        return lam, el_residual(ELState(full, alpha, lam), dom)

    u = normalize(u)
    history = [E(u)]
    sphere_dev = abs(float(np.dot(u, op.matvec(u))) - 1.0)
    step = opts.step
    d_prev = None
    converged = stalled = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        lam, res = residual_of(u)
        if res < opts.tol:
            converged = True
            it -= 1
            break
        g = alpha * w * u * np.exp(alpha * u * u)
        d = op.solve(g, x0=d_prev)
        d_prev = d
        gu = float(np.dot(g, u))
        dt = d - gu * u
        full_step = 1.0 / gu
        s = full_step if step is None else min(step, full_step)
        E0 = history[-1]
        while True:
            cand = normalize(np.abs(u + s * dt))
            Ec = E(cand)
            if Ec >= E0 or s < 1e-14 * full_step:
                break
            s *= opts.backtrack
        if Ec < E0:
            # no ascent step left above rounding: a discrete critical point
            stalled = True
            break
        u = cand
        if it % opts.rearrange_every == 0:
            r = rearrange_decreasing(GridFunction(grid, op.embed(u))).values[op.idx]
            r = normalize(r)
            if E(r) >= Ec:
                u, Ec = r, E(r)
        u = 0.5 * (u + u[::-1])
        sphere_dev = max(sphere_dev, abs(float(np.dot(u, op.matvec(u))) - 1.0))
        history.append(Ec)
        step = min(s / opts.backtrack, full_step)
    lam, res = residual_of(u)
    conv = converged or res < opts.tol or (stalled and res < opts.stall_tol)
    return u, lam, res, conv, it, history, sphere_dev


def _finish(alpha, dom, grid, op, u, lam, res, conv, it, history, dev) -> ExtremalResult:
    full = GridFunction(grid, op.embed(u))
    r = rearrange_decreasing(full)
    if not np.array_equal(r.values, full.values):
        # keep the flagged shape; the change is at rounding level for converged runs
        q = float(np.dot(r.values[op.idx], op.matvec(r.values[op.idx])))
        vals = r.values / np.sqrt(q)
        support = 1.0 if dom.is_interval else None
        r = GridFunction(grid, vals, is_even=True, is_decreasing=True, support=support)
        lam = float(np.dot(vals[op.idx], op.matvec(vals[op.idx]))) / float(
            np.dot(op.w, vals[op.idx] ** 2 * np.exp(alpha * vals[op.idx] ** 2)))
        res = el_residual(ELState(r, alpha, lam), dom)
    elif dom.is_interval:
        r = GridFunction(grid, r.values, is_even=True, is_decreasing=True, support=1.0)
    value = mt_energy(r, alpha, dom)
    return ExtremalResult(r, alpha, value, lam, res, bool(conv), it,
                          dom, history, dev)


def maximize(alpha: float, dom: ProblemDomain, opts: MaximizerOptions = MaximizerOptions(),
             grid: Optional[Grid1D] = None, init: Optional[GridFunction] = None) -> ExtremalResult:
    """Projected ascent of int (e^{alpha u^2} - 1) on the unit constraint sphere.

    Deterministic for fixed options. With ``multistart`` > 0, further seeds
    of random width are tried and the best value is returned.
    """
    if not (0 < alpha <= np.pi):
        raise ValueError("alpha must lie in (0, pi]")
    grid = default_grid(dom) if grid is None else grid
    op = _operator(grid, dom)
    seeds = []
    if init is not None:
        seeds.append(np.abs(init.values))
    else:
        seeds.append(seed_profile(grid, dom, opts.seed_width))
    rng = np.random.default_rng(opts.random_seed)
    for _ in range(opts.multistart):
        seeds.append(seed_profile(grid, dom, opts.seed_width * float(np.exp(rng.normal(0, 1)))))
    best = None
    for s in seeds:
        out = _ascent(alpha, dom, grid, op, s[op.idx].copy(), opts)
        res = _finish(alpha, dom, grid, op, *out)
        if best is None or res.value > best.value:
            best = res
    return best


# ---------------------------------------------------------------------------
# fixed-point solver


class FixedPointDivergence(RuntimeError):
    pass


def fixed_point_line(lam: float, alpha: float, init: GridFunction, damping: float = 0.5,
                     tol: float = 1e-6, max_iter: int = 500,
                     inverse: str = "discrete") -> ELState:
    """Damped iteration u <- (1 - t) u + t G(lambda u e^{alpha u^2}) on the line.

    ``inverse="discrete"`` applies the exact inverse of the discrete operator
    used by ``el_residual`` (so fixed points have zero residual);
    ``"quadrature"`` applies the product-integration convolution with G.
    Stops when the L^2 size of the update drops below ``tol``.
    """
    if not (init.is_even and init.is_decreasing) or np.any(init.values < 0):
        raise ValueError("initial guess must be even, decreasing and nonnegative")
    if not (0 < damping <= 1):
        raise ValueError("damping must lie in (0, 1]")
    grid = init.grid
    h = grid.h
    if inverse == "discrete":
        op = _LineOperator(grid)
        w = op.w
        apply_inv = lambda f: op.solve(w * f)
    elif inverse == "quadrature":
        apply_inv = lambda f: apply_green_line(GridFunction(grid, f)).values
    else:
        raise ValueError(f"unknown inverse {inverse!r}")
    u = init.values.copy()
    n0 = np.sqrt(h * np.sum(u * u)) + 1e-300
    for it in range(max_iter):
        new = apply_inv(lam * u * np.exp(alpha * u * u))
        nxt = symmetrize((1 - damping) * u + damping * new)
        step = np.sqrt(h * np.sum((nxt - u) ** 2))
        u = nxt
        nrm = np.sqrt(h * np.sum(u * u))
        if not np.isfinite(nrm) or nrm > 2 * n0:
            raise FixedPointDivergence(f"norm grew from {n0:.3e} to {nrm:.3e} at iteration {it}")
        if step < tol:
            break
    gf = GridFunction(grid, u, is_even=True)
    st = ELState(gf, alpha, lam)
    st.residual_norm = el_residual(st, LINE)
    st.u.meta["iterations"] = it + 1
    return st


# ---------------------------------------------------------------------------
# sweeps


def subcritical_sweep(alphas: Sequence[float], dom: ProblemDomain,
                      opts: MaximizerOptions = MaximizerOptions(),
                      grid: Optional[Grid1D] = None) -> list:
    """Maximize for increasing alphas, warm-starting each run from the previous one.

    A failing alpha is recorded as None and the sweep continues from the last
    successful result.
    """
    alphas = list(alphas)
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be increasing")
    if alphas and alphas[-1] > np.pi:
        raise ValueError("alphas must not exceed pi")
    grid = default_grid(dom) if grid is None else grid
    out, prev = [], None
    for a in alphas:
        try:
            res = maximize(a, dom, opts, grid, init=prev.u if prev is not None else None)
        except (RuntimeError, ValueError, FloatingPointError):
            out.append(None)
            continue
        out.append(res)
        prev = res
    return out


def alpha_star_bracket(results: Sequence[ExtremalResult]):
    """(largest alpha with gap <= 0, smallest alpha with gap > 0) over line results."""
    lo, hi = None, None
    for r in results:
        if r is None:
            continue
        if vanishing_gap(r.u, r.alpha) > 0:
            hi = r.alpha if hi is None else min(hi, r.alpha)
        else:
            lo = r.alpha if lo is None else max(lo, r.alpha)
    return lo, hi


SWEEP_COLUMNS = ["alpha", "value", "lambda", "mu", "residual", "converged", "iters"]


def sweep_rows(results: Sequence[Optional[ExtremalResult]], alphas: Sequence[float]):
    rows = []
    for a, r in zip(alphas, results):
        if r is None:
            rows.append([a, np.nan, np.nan, np.nan, np.nan, False, 0])
        else:
            rows.append([r.alpha, r.value, r.lam, r.mu, r.el_residual, r.converged, r.iterations])
    return rows


def write_sweep_csv(results, alphas, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in sweep_rows(results, alphas):
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
