"""Moser-Trudinger functionals, constraint norms, multipliers and residuals."""
import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .fraccore import (GridFunction, gagliardo_seminorm_sq, l2_norm_sq,
                       pv_half_laplacian, symmetrize)

OVERFLOW_EXPONENT = 700.0


class DomainKind(enum.Enum):
    INTERVAL = "interval"
    LINE = "line"


class Constraint(enum.Enum):
    SEMINORM_ONE = "seminorm"
    FULL_NORM_ONE = "full"


@dataclass(frozen=True)
class ProblemDomain:
    kind: DomainKind
    constraint: Constraint

    def __post_init__(self):
        pair = {DomainKind.INTERVAL: Constraint.SEMINORM_ONE,
                DomainKind.LINE: Constraint.FULL_NORM_ONE}
        if pair[self.kind] != self.constraint:
            raise ValueError(f"{self.kind.value} problems use the {pair[self.kind].value} constraint")

    @property
    def is_interval(self) -> bool:
        return self.kind is DomainKind.INTERVAL


INTERVAL = ProblemDomain(DomainKind.INTERVAL, Constraint.SEMINORM_ONE)
LINE = ProblemDomain(DomainKind.LINE, Constraint.FULL_NORM_ONE)


def domain_from_name(name: str) -> ProblemDomain:
    if name == "interval":
        return INTERVAL
    if name == "line":
        return LINE
    raise ValueError(f"unknown domain {name!r}")


@dataclass
class ELState:
    u: GridFunction
    alpha: float
    lam: float
    residual_norm: float = np.nan

    def __post_init__(self):
        if not (0 < self.alpha <= np.pi):
            raise ValueError("alpha must lie in (0, pi]")
        if not self.lam > 0:
            raise ValueError("multiplier must be positive")
        if self.residual_norm < 0:
            raise ValueError("residual norm is nonnegative")


def _domain_weights(u: GridFunction, dom: ProblemDomain) -> np.ndarray:
    w = u.grid.trapezoid_weights()
    if dom.is_interval:
        w = np.where(np.abs(u.grid.x) <= 1.0 + 1e-12, w, 0.0)
    return w


def _check_interval_support(u: GridFunction, dom: ProblemDomain):
    if dom.is_interval and np.any(u.values[np.abs(u.grid.x) > 1.0 + 1e-12] != 0):
        raise ValueError("interval problems need u = 0 outside [-1, 1]")


def log_mt_energy(u: GridFunction, alpha: float, dom: ProblemDomain) -> float:
    """log of the functional, accumulated in log-sum form."""
    _check_interval_support(u, dom)
    w = _domain_weights(u, dom)
    a = alpha * u.values**2
    pos = (w > 0) & (a > 0)
    if not pos.any():
        return -np.inf
    # e^a - 1 = e^a (1 - e^-a)
    terms = a[pos] + np.log(w[pos]) + np.log(-np.expm1(-a[pos]))
    return float(logsumexp(terms))


def mt_energy(u: GridFunction, alpha: float, dom: ProblemDomain) -> float:
    """int (e^{alpha u^2} - 1) dx by the trapezoid rule (interval: over I only).

    Above alpha u^2 = 700 the sum is accumulated in log form and a
    RuntimeWarning flags the near blow-up; the result may be inf.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    _check_interval_support(u, dom)
    a = alpha * u.values**2
    if a.max(initial=0.0) > OVERFLOW_EXPONENT:
        warnings.warn("alpha u^2 exceeds 700: near blow-up, using log-sum accumulation",
                      RuntimeWarning, stacklevel=2)
        with np.errstate(over="ignore"):
            return float(np.exp(log_mt_energy(u, alpha, dom)))
    return float(np.dot(_domain_weights(u, dom), np.expm1(a)))


def constraint_norm_sq(u: GridFunction, dom: ProblemDomain) -> float:
    """Seminorm squared (interval, exterior zero) or full norm squared (line)."""
    if dom.is_interval:
        _check_interval_support(u, dom)
        return gagliardo_seminorm_sq(u, exterior="zero")
    return gagliardo_seminorm_sq(u, exterior="zero") + l2_norm_sq(u)


def weighted_moment(u: GridFunction, alpha: float, dom: ProblemDomain) -> float:
    """int u^2 e^{alpha u^2} dx over the domain."""
    return float(np.dot(_domain_weights(u, dom), u.values**2 * np.exp(alpha * u.values**2)))


def lagrange_lambda(u: GridFunction, alpha: float, dom: ProblemDomain,
                    norm_sq: float = None) -> float:
    """lambda = (constraint norm^2) / int u^2 e^{alpha u^2}."""
    if not np.any(u.values):
        raise ValueError("multiplier undefined for u = 0")
    n2 = constraint_norm_sq(u, dom) if norm_sq is None else norm_sq
    return n2 / weighted_moment(u, alpha, dom)


def el_operator(u: GridFunction, dom: ProblemDomain) -> np.ndarray:
    """(-Delta)^{1/2} u, plus u on the line, with the zero tail model."""
    lap = pv_half_laplacian(u, "zero").values
    if not dom.is_interval:
        lap = lap + u.values
    return lap


def el_residual_vector(state: ELState, dom: ProblemDomain):
    u = state.u
    r = el_operator(u, dom) - state.lam * u.values * np.exp(state.alpha * u.values**2)
    x, h, T = u.grid.x, u.grid.h, u.grid.T
    if dom.is_interval:
        mask = np.abs(x) < 1.0 - 0.5 * h
    else:
        mask = np.abs(x) <= T - 2 * h * (1 - 1e-9)
    return r, mask


def el_residual(state: ELState, dom: ProblemDomain) -> float:
    """Discrete L^2 norm of (-Delta)^{1/2}u [+ u] - lambda u e^{alpha u^2}.

    Taken over the open interval (interval problems) or over the nodes at
    least 2h from the truncation (line problems).
    """
    r, mask = el_residual_vector(state, dom)
    return float(np.sqrt(state.u.grid.h * np.sum(r[mask] ** 2)))


def truncate_A(u: GridFunction, A: float) -> GridFunction:
    """min(u, mu/A) with mu = max u."""
    if A <= 1:
        raise ValueError("truncation level A must exceed 1")
    mu = float(np.max(u.values))
    out = np.minimum(u.values, mu / A)
    if u.is_even:
        out = symmetrize(out)
    return GridFunction(u.grid, out, is_even=u.is_even, is_decreasing=u.is_decreasing,
                        support=u.support)


def vanishing_gap(u: GridFunction, alpha: float) -> float:
    """E_alpha(u) - alpha ||u||_{L^2}^2 on the line; positive means non-vanishing."""
    a = alpha * u.values**2
    w = u.grid.trapezoid_weights()
    # expm1(a) - a computed without cancellation for small a
    small = a < 1e-3
    d = np.where(small, a * a / 2 + a**3 / 6 + a**4 / 24, np.expm1(np.where(small, 0, a)) - a)
    return float(np.dot(w, d))
