"""Blow-up diagnostics: scales, rescaled profiles, concentration and Green limits.

Along a family of extremals u_k with mu_k = max u_k, the concentration scale
r_k is fixed by alpha lambda r mu^2 e^{alpha mu^2} = 1 and the rescaled
profile eta_k(x) = 2 alpha mu (u(r x) - mu) is compared with the Liouville
bubble -log(1 + x^2).

Real maximizers on the interval stay bounded, so the blow-up code paths are
also exercised on ``SyntheticBlowup``: a normalized bubble glued to G_0 on the
interval whose scale r ~ e^{-pi mu^2} is far below any grid spacing.  Its
integrals are done in the variable log|x| against the exact profile.
"""
import json
from dataclasses import asdict, dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .fraccore import (Grid1D, GridFunction, build_grid,
                       ls_norm, pv_half_laplacian, symmetrize)
from .functionals import INTERVAL, ProblemDomain, constraint_norm_sq
from .greens import (LINE_REGULAR_AT_ZERO, S0, green_interval, green_line,
                     regular_part_interval)

LS_EXPONENTS = (0.25, 0.5)


# ---------------------------------------------------------------------------
# scales


@dataclass(frozen=True)
class BlowupScales:
    mu: float
    r: float
    lam: float
    alpha: float

    def __post_init__(self):
        if not (self.mu > 0 and self.r > 0 and self.lam > 0 and self.alpha > 0):
            raise ValueError("blow-up scales must all be positive")

    def identity_defect(self) -> float:
        """|alpha lambda r mu^2 e^{alpha mu^2} - 1|, evaluated in logs."""
        s = (np.log(self.alpha) + np.log(self.lam) + np.log(self.r) + 2 * np.log(self.mu)
             + self.alpha * self.mu**2)
        return float(abs(np.expm1(s)))


def _log_r(mu: float, lam: float, alpha: float) -> float:
    return -(np.log(alpha) + np.log(lam) + 2 * np.log(mu) + alpha * mu * mu)


def blowup_scales(u, lam: float, alpha: float) -> BlowupScales:
    """mu = max u and r = 1 / (alpha lambda mu^2 e^{alpha mu^2})."""
    mu = float(u.mu if isinstance(u, SyntheticBlowup) else np.max(u.values))
    if not mu > 0:
        raise ValueError("blow-up scales need max u > 0")
    if not lam > 0:
        raise ValueError("multiplier must be positive")
    return BlowupScales(mu, float(np.exp(_log_r(mu, lam, alpha))), float(lam), float(alpha))


def one_over_lambda_mu2(u, lam: float) -> float:
    mu = float(u.mu if isinstance(u, SyntheticBlowup) else np.max(u.values))
    if not (mu > 0 and lam > 0):
        raise ValueError("need lambda > 0 and max u > 0")
    return 1.0 / (lam * mu * mu)


# ---------------------------------------------------------------------------
# bubble


def bubble(x):
    """eta_inf(x) = -log(1 + x^2)."""
    return -np.log1p(np.asarray(x, dtype=float) ** 2)


def bubble_grid_function(grid: Grid1D) -> GridFunction:
    return GridFunction(grid, symmetrize(bubble(grid.x)), is_even=True, is_decreasing=True)


def bubble_mass(grid: Grid1D) -> float:
    """int e^{eta_inf}: trapezoid on the grid plus the c/x^2 tail fitted at the ends."""
    e = np.exp(bubble(grid.x))
    inner = float(np.dot(grid.trapezoid_weights(), e))
    c = e[-1] * grid.T**2
    return inner + 2 * c / grid.T


def liouville_residual(grid: Optional[Grid1D] = None, window: float = 10.0) -> float:
    """sup over trusted nodes with |x| <= window of |(-Delta)^{1/2} eta - 2 e^eta|.

    eta_inf ~ -2 log|x| at infinity, so the exterior uses the a + b log|y| tail.
    """
    grid = grid or build_grid(400.0, 16385)
    eta = bubble_grid_function(grid)
    lap = pv_half_laplacian(eta, tail="log")
    err = np.abs(lap.values - 2 * np.exp(eta.values))
    sel = lap.trusted_mask() & (np.abs(grid.x) <= window)
    return float(np.max(err[sel]))


# ---------------------------------------------------------------------------
# synthetic blowing-up family on the interval


def _mu_hat_sq(mu: float) -> float:
    kappa = S0
    disc = mu**4 - 4 * mu * mu * kappa
    if disc < 0:
        raise ValueError("synthetic family needs mu^2 >= 4 log2/pi")
    return 0.5 * (mu * mu + np.sqrt(disc))


@dataclass
class SyntheticBlowup:
    """u(x) = (S(0,x) - log(x^2 + r0^2)/(2 pi)) / n on I, zero outside.

    Near 0 this is mu + eta_inf(x/r0)/(2 pi mu) up to the normalization n;
    away from 0 it is (G_0(x) - log(1 + r0^2/x^2)/(2 pi)) / n.  With
    r0 = 2 e^{-pi mu_hat^2} the value at 0 is mu_hat^2 / n, and the seminorm
    (exterior zero) of the numerator is exactly mu_hat^2 - log2/pi, so
    n^2 = mu_hat^2 - log2/pi puts u on the unit sphere.  mu_hat is chosen
    so that u(0) = mu.
    """

    mu: float
    alpha: float = np.pi
    mu_hat_sq: float = 0.0
    log_r0: float = 0.0
    norm: float = 1.0
    lam: float = 0.0

    @classmethod
    def build(cls, mu: float) -> "SyntheticBlowup":
        m2 = _mu_hat_sq(mu)
        n = np.sqrt(m2 - S0)
        out = cls(mu=float(mu), mu_hat_sq=m2, log_r0=np.log(2.0) - np.pi * m2, norm=n)
        # lambda from the constraint: lambda int u^2 e^{pi u^2} = ||u||^2 = 1
        out.lam = 1.0 / out.integrate(lambda x, u: u * u * np.exp(np.pi * u * u))
        return out

    @property
    def r0(self) -> float:
        return float(np.exp(self.log_r0))

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        inside = x < 1
        xi = np.where(inside, x, 0.0)
        # log(x^2 + r0^2) = 2 log r0 + log1p((x/r0)^2), stable at both scales
        big = xi > self.r0
        xs = np.where(big, xi, 1.0)
        lg = np.where(big, 2 * np.log(xs) + np.log1p((self.r0 / xs) ** 2),
                      2 * self.log_r0 + np.log1p((np.where(big, 0.0, xi) / self.r0) ** 2))
        v = (regular_part_interval(0.0, xi) - lg / (2 * np.pi)) / self.norm
        return np.where(inside, np.maximum(v, 0.0), 0.0)

    def exponent(self, x):
        """log of lambda e^{alpha u^2}, finite at every scale."""
        u = self(x)
        return np.log(self.lam) + self.alpha * u * u

    def integrate(self, f: Callable, a: float = 0.0, b: float = 1.0) -> float:
        """int_{a < |x| < b} f(x, u(x)) dx over both sides, in the variable log|x|."""
        if b <= a:
            return 0.0
        lo = np.log(a) if a > 0 else self.log_r0 - 40.0
        hi = np.log(b)
        g = lambda t: float(f(np.exp(t), self(np.exp(t)))) * np.exp(t)
        knots = np.unique(np.clip([lo, self.log_r0 - 5, self.log_r0, self.log_r0 + 5,
                                   self.log_r0 + 20, 0.5 * self.log_r0, -3.0, -0.05, hi], lo, hi))
        total = 0.0
        for p, q in zip(knots[:-1], knots[1:]):
            total += integrate.quad(g, p, q, limit=400, epsabs=0, epsrel=1e-12)[0]
        return 2 * total

    def sample(self, grid: Grid1D) -> GridFunction:
        v = self(grid.x)
        v[grid.center] = self.mu
        support = 1.0 if grid.T >= 1 else None
        return GridFunction(grid, symmetrize(v), is_even=True, is_decreasing=True, support=support)

    def core_grid(self, radius: float = 12.0, N: int = 4097) -> Grid1D:
        """Uniform grid over |x| <= radius * r where r is the scale from the identity."""
        return build_grid(radius * blowup_scales(self, self.lam, self.alpha).r, N)


def synthetic_family(mus: Sequence[float] = (4.0, 6.0, 8.0)):
    return [SyntheticBlowup.build(m) for m in mus]


# ---------------------------------------------------------------------------
# rescaled profile


def eta_rescale(u: GridFunction, scales: BlowupScales, target: Grid1D) -> GridFunction:
    """eta(x) = 2 alpha mu (u(r x) - mu) by shape-preserving cubic interpolation."""
    src = u.grid
    if scales.r * target.T > src.T * (1 + 1e-12):
        raise ValueError("rescaled target reaches past the source grid")
    interp = PchipInterpolator(src.x, u.values)
    v = 2 * scales.alpha * scales.mu * (interp(scales.r * target.x) - scales.mu)
    v = symmetrize(v) if u.is_even else v
    v[target.center] = 0.0 if target.x[target.center] == 0 else v[target.center]
    return GridFunction(target, v, is_even=u.is_even, is_decreasing=u.is_decreasing)


def eta_error(eta: GridFunction, R: float = 5.0) -> float:
    sel = np.abs(eta.grid.x) <= R
    return float(np.max(np.abs(eta.values[sel] - bubble(eta.grid.x[sel]))))


def eta_full(u: GridFunction, scales: BlowupScales) -> GridFunction:
    """eta on the whole rescaled source grid (no interpolation)."""
    g = build_grid(u.grid.T / scales.r, u.grid.N)
    v = 2 * scales.alpha * scales.mu * (u.values - scales.mu)
    return GridFunction(g, v, is_even=u.is_even, is_decreasing=u.is_decreasing)


def eta_ls_norms(u, scales: BlowupScales, exponents=LS_EXPONENTS) -> Dict[float, float]:
    """L_s norms of eta_k; past the grid u is taken constant (its last value)."""
    if isinstance(u, SyntheticBlowup):
        out = {}
        for s in exponents:
            f = lambda t, s=s: (abs(2 * u.alpha * u.mu * (float(u(scales.r * np.exp(t))) - u.mu))
                                / (1 + np.exp((1 + 2 * s) * t)) * np.exp(t))
            hi = -np.log(scales.r)
            val = sum(integrate.quad(f, p, q, limit=400)[0]
                      for p, q in [(-40.0, 0.0), (0.0, 5.0), (5.0, hi)])
            val += 2 * u.alpha * u.mu**2 * np.exp(-2 * s * hi) / (2 * s)
            out[s] = 2 * val
        return out
    eta = eta_full(u, scales)
    return {s: ls_norm(eta, s, tail="constant") for s in exponents}


# ---------------------------------------------------------------------------
# concentration, Green limit, energy split


def concentration_test(u, lam: float, alpha: float, phi) -> float:
    """int lambda mu u e^{alpha u^2} phi dx - phi(0).

    ``u`` is a GridFunction (trapezoid rule, ``phi`` a GridFunction on the
    same grid or a callable) or a SyntheticBlowup (``phi`` callable).
    """
    if isinstance(u, SyntheticBlowup):
        mu = u.mu
        f = lambda x, v: mu * v * np.exp(np.log(lam) + alpha * v * v) * float(phi(x))
        return u.integrate(f) - float(phi(0.0))
    mu = float(np.max(u.values))
    x = u.grid.x
    p = phi.values if isinstance(phi, GridFunction) else np.asarray(phi(x), dtype=float) * np.ones_like(x)
    dens = mu * u.values * np.exp(np.log(lam) + alpha * u.values**2)
    return float(np.dot(u.grid.trapezoid_weights(), dens * p)) - float(p[u.grid.center])


def unit_bump(width: float = 0.5) -> Callable:
    """Smooth bump with value 1 at 0, supported in (-width, width)."""

    def phi(x):
        t = np.asarray(x, dtype=float) / width
        inside = np.abs(t) < 1
        ts = np.where(inside, t, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - ts * ts)), 0.0)

    return phi


def _green(dom: ProblemDomain, x):
    return green_interval(0.0, x) if dom.is_interval else green_line(x)


def green_convergence_parts(u, scales: BlowupScales, dom: ProblemDomain, sigma: float):
    """(sup_{|x| >= sigma} |mu u - G|, ||mu u - G||_{L^2} or 0 on the interval)."""
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    mu = scales.mu
    if isinstance(u, SyntheticBlowup):
        xs = np.linspace(sigma, 1.0, 2001)[:-1]
        d = np.abs(mu * u(xs) - green_interval(0.0, xs))
        return float(np.max(d)), 0.0
    x = u.grid.x
    far = np.abs(x) >= sigma * (1 - 1e-12)
    if dom.is_interval:
        far &= np.abs(x) < 1
    diff = mu * u.values[far] - _green(dom, x[far])
    sup = float(np.max(np.abs(diff)))
    if dom.is_interval:
        return sup, 0.0
    # L^2 on the line: midpoint cells away from 0, the center cell against
    # the logarithmic singularity G ~ -log|x|/pi - gamma/pi in closed form
    h = u.grid.h
    nz = x != 0
    d = mu * u.values[nz] - green_line(x[nz])
    l2 = h * float(np.sum(d * d))
    A = mu * u.values[u.grid.center] - LINE_REGULAR_AT_ZERO
    dl = h / 2
    ld = np.log(dl)
    center = 2 * (A * A * dl + 2 * A / np.pi * (dl * ld - dl) + dl * (ld * ld - 2 * ld + 2) / np.pi**2)
    return sup, float(np.sqrt(l2 + center))


def green_convergence_error(u, scales: BlowupScales, dom: ProblemDomain, sigma: float = 0.2) -> float:
    sup, l2 = green_convergence_parts(u, scales, dom, sigma)
    return sup + l2


def split_target(R: float) -> float:
    """(1/pi) int_{-R}^{R} e^{eta_inf} = (2/pi) arctan R."""
    return 2 / np.pi * np.arctan(R)


def energy_split(u, scales: BlowupScales, dom: ProblemDomain, R: float = 10.0):
    """Moments int_{-Rr}^{Rr} lambda mu^i u^{2-i} e^{alpha u^2}, i = 0, 1, 2."""
    lam, mu, a, r = scales.lam, scales.mu, scales.alpha, scales.r
    if isinstance(u, SyntheticBlowup):
        out = []
        for i in range(3):
            f = lambda x, v, i=i: mu**i * v ** (2 - i) * np.exp(np.log(lam) + a * v * v)
            out.append(u.integrate(f, 0.0, R * r))
        return tuple(out)
    src = u.grid
    if R * r > src.T * (1 + 1e-12):
        raise ValueError("R r exceeds the grid")
    # resample the window finely: R r may span only a few source cells
    n = 4001
    xs = np.linspace(-R * r, R * r, n)
    v = PchipInterpolator(src.x, u.values)(xs)
    w = np.full(n, xs[1] - xs[0])
    w[0] = w[-1] = 0.5 * w[0]
    base = np.exp(np.log(lam) + a * v * v)
    return tuple(float(np.dot(w, mu**i * v ** (2 - i) * base)) for i in range(3))


# ---------------------------------------------------------------------------
# reports


@dataclass
class BlowupReport:
    scales: BlowupScales
    eta_error: float
    mass_error: Dict[str, float]
    green_error: float
    ls_norms: Dict[float, float]
    Lambda_estimate: float
    eta_radius: float = 5.0
    moments: tuple = ()
    one_over_lambda_mu2: float = float("nan")
    value: float = float("nan")

    def __post_init__(self):
        errs = [self.eta_error, self.green_error, *self.mass_error.values()]
        if any(not (e >= 0) for e in errs):
            raise ValueError("error fields must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ls_norms"] = {str(k): v for k, v in self.ls_norms.items()}
        d["moments"] = list(self.moments)
        return d


def running_limsup(values: Sequence[float]) -> np.ndarray:
    """Estimate of limsup after each entry: max over the trailing half of the sequence."""
    v = np.asarray(values, dtype=float)
    return np.array([np.max(v[k // 2: k + 1]) for k in range(v.size)])


def default_probes(dom: ProblemDomain) -> Dict[str, Callable]:
    far = lambda x: unit_bump(0.3)(np.abs(x) - 0.6)
    return {"one": lambda x: np.ones_like(np.asarray(x, dtype=float)),
            "bump": unit_bump(0.5), "off_center": far}


def blowup_report(u, lam: float, alpha: float, dom: ProblemDomain = INTERVAL,
                  norm_sq: Optional[float] = None, history: Sequence[float] = (),
                  R: float = 5.0, sigma: float = 0.2, split_radius: float = 10.0,
                  probes: Optional[Dict[str, Callable]] = None,
                  eta_points: int = 2001, value: float = float("nan")) -> BlowupReport:
    """All diagnostics for one member of a family.

    ``history`` holds ||u_j||_H^2 of the earlier members; ``norm_sq`` that of
    this one (computed when omitted).  When R r exceeds the source grid the
    eta window shrinks to the largest admissible radius (recorded).
    """
    sc = blowup_scales(u, lam, alpha)
    probes = probes or default_probes(dom)
    if isinstance(u, SyntheticBlowup):
        src = u.sample(u.core_grid(radius=1.2 * R))
        n2 = 1.0 if norm_sq is None else norm_sq
    else:
        src = u
        if norm_sq is None:
            n2 = constraint_norm_sq(u, dom)
        else:
            n2 = norm_sq
    R_eff = min(R, src.grid.T / sc.r)
    target = build_grid(R_eff, eta_points)
    err = eta_error(eta_rescale(src, sc, target), R_eff)
    mass = {k: abs(concentration_test(u, lam, alpha, p)) for k, p in probes.items()}
    green = green_convergence_error(u, sc, dom, sigma)
    try:
        moments = energy_split(u, sc, dom, split_radius)
    except ValueError:
        moments = ()
    lam_hist = running_limsup(list(history) + [n2])[-1]
    return BlowupReport(scales=sc, eta_error=err, mass_error=mass, green_error=green,
                        ls_norms=eta_ls_norms(u, sc), Lambda_estimate=float(lam_hist),
                        eta_radius=R_eff, moments=moments,
                        one_over_lambda_mu2=one_over_lambda_mu2(u, lam), value=value)


def sweep_reports(results, dom: ProblemDomain, **kw):
    """Reports for a sequence of ExtremalResult, carrying the norm history along."""
    out, hist = [], []
    for res in results:
        if res is None:
            out.append(None)
            continue
        n2 = constraint_norm_sq(res.u, dom)
        out.append(blowup_report(res.u, res.lam, res.alpha, dom, norm_sq=n2,
                                 history=hist, value=res.value, **kw))
        hist.append(n2)
    return out


REPORT_COLUMNS = ["alpha", "mu", "r", "lambda", "eta_error", "mass_error_one", "green_error",
                  "ls_quarter", "ls_half", "Lambda", "one_over_lambda_mu2", "value"]


def report_row(rep: BlowupReport):
    s = rep.scales
    return [s.alpha, s.mu, s.r, s.lam, rep.eta_error, rep.mass_error.get("one", np.nan),
            rep.green_error, rep.ls_norms.get(0.25, np.nan), rep.ls_norms.get(0.5, np.nan),
            rep.Lambda_estimate, rep.one_over_lambda_mu2, rep.value]


def reports_json(reports) -> str:
    return json.dumps([r.to_dict() if r else None for r in reports], indent=2, default=float)
