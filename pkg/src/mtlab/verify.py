"""Self-checks of the operators and kernels against closed forms.

Each function returns a plain dict of numbers so the command line can dump
it to JSON and the tests can compare it with tolerances.
"""
import numpy as np

from .blowup import bubble_mass, liouville_residual
from .fraccore import (build_grid, extension_normal_derivative, graded_half_plane,
                       poisson_extend, pv_half_laplacian, sample, spectral_frac_laplacian)
from .greens import (S0, apply_green_interval, green_interval, green_line,
                     green_line_fourier_oracle)

# test functions with known half-Laplacians
OPERATOR_CASES = {
    "gaussian": dict(f=lambda x: np.exp(-x * x), T=50.0, N=8193, tail="zero"),
    "lorentzian": dict(f=lambda x: 1.0 / (1.0 + x * x), T=400.0, N=16385, tail="power",
                       exact=lambda x: (1 - x * x) / (1 + x * x) ** 2),
}


def operator_routes(name: str, window: float = None):
    """The three discrete half-Laplacians of one test function and a comparison mask."""
    case = OPERATOR_CASES[name]
    g = build_grid(case["T"], case["N"])
    u = sample(g, case["f"], even=True)
    pv = pv_half_laplacian(u, case["tail"])
    sp = spectral_frac_laplacian(u, 0.5)
    F = poisson_extend(u, graded_half_plane(g, 2.0), tail=case["tail"])
    ext = extension_normal_derivative(F, tail=case["tail"])
    mask = pv.trusted_mask() & ext.trusted_mask()
    if window is not None:
        mask &= np.abs(g.x) <= window
    return g, {"pv": pv.values, "spectral": sp.values, "extension": ext.values}, mask


def operator_crosscheck(name: str, window: float = None) -> dict:
    g, routes, mask = operator_routes(name, window)
    out = {}
    keys = list(routes)
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            out[f"{a}_vs_{b}"] = float(np.max(np.abs(routes[a] - routes[b])[mask]))
    exact = OPERATOR_CASES[name].get("exact")
    if exact is not None:
        ref = exact(g.x)
        for k, v in routes.items():
            out[f"{k}_vs_exact"] = float(np.max(np.abs(v - ref)[mask]))
    out["max_disagreement"] = max(v for k, v in out.items() if "_vs_" in k and "exact" not in k)
    return out


# ---------------------------------------------------------------------------


GREEN_PROBES = {
    "cubic_bump": lambda x: np.clip(1 - x * x, 0, None) ** 3,
    "odd_bump": lambda x: x * np.clip(1 - x * x, 0, None) ** 3,
    "shifted_bump": lambda x: np.clip(1 - x * x, 0, None) ** 4 * np.exp(0.5 * x),
}


def green_reproduction(N: int = 4097) -> dict:
    """sup |int_I G_x (-Delta)^{1/2} phi - phi| for each probe."""
    g = build_grid(1.0, N)
    out = {}
    for name, phi in GREEN_PROBES.items():
        u = sample(g, phi)
        f = pv_half_laplacian(u, "zero")
        back = apply_green_interval(f)
        out[name] = float(np.max(np.abs(back.values - u.values)))
    return out


def interval_s0_error(y: float = 1e-6) -> float:
    return float(abs(green_interval(0.0, y) + np.log(y) / np.pi - S0))


def line_oracle_error(xs=None) -> float:
    xs = np.linspace(0.1, 20.0, 80) if xs is None else np.asarray(xs, dtype=float)
    closed = green_line(xs)
    oracle = np.array([green_line_fourier_oracle(x) for x in xs])
    return float(np.max(np.abs(closed - oracle)))


def line_log_fit(lo: float = 1e-4, hi: float = 1e-2, n: int = 60):
    """Least-squares fit G(x) ~ slope * log(1/x) + intercept on [lo, hi]."""
    xs = np.geomspace(lo, hi, n)
    slope, intercept = np.polyfit(np.log(1 / xs), green_line(xs), 1)
    return float(slope), float(intercept)


def line_far_field(lo: float = 20.0, hi: float = 30.0, n: int = 2001) -> float:
    xs = np.linspace(lo, hi, n)
    return float(np.max(xs * xs * np.abs(green_line(xs))))


def greens_summary() -> dict:
    slope, intercept = line_log_fit()
    out = {"s0_limit_error": interval_s0_error(),
           "line_oracle_error": line_oracle_error(),
           "line_log_slope": slope, "line_log_intercept": intercept,
           "line_far_field_x2G": line_far_field()}
    out.update({f"reproduction_{k}": v for k, v in green_reproduction().items()})
    return out


def bubble_summary() -> dict:
    return {"liouville_residual": liouville_residual(build_grid(400.0, 16385), window=10.0),
            "mass_error": abs(bubble_mass(build_grid(1000.0, 40001)) - np.pi)}
