"""Curvature and injectivity/harmonic-radius lower bounds for warped products.

The constants multiplying the bounds (``C0`` for the injectivity bound,
``c`` for the harmonic radius, ``C`` for the r0 function) exist but are not
quantified; they are configuration knobs that every report prints.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .errors import BoundNotApplicable
from .functions import SampledFunction
from .profile import Profile, evaluate, local_boundedness_constant

WINDOW = 2.0


@dataclass(frozen=True)
class Constants:
    """Opaque constants in force (all default to 1)."""

    C0: float = 1.0
    c: float = 1.0
    C1: float = 1.0
    C: float = 1.0
    iota_factor: float = 0.25

    def header(self) -> str:
        return " ".join(f"{k}={v:g}" for k, v in asdict(self).items())


@dataclass(frozen=True)
class CurvatureSample:
    s: float
    K_rad: float
    K_sph: float | None
    ric_minus: float


@dataclass(frozen=True)
class GeometryBounds:
    s: float
    kappa: float
    inj_lb: float
    r0: float
    harm_lb: float
    constants: Constants


def _curvatures(n: int, r, rd, rdd):
    k_rad = -rdd / r
    k_sph = (1.0 - rd * rd) / (r * r)
    # Ricci eigenvalues: radial -(n-1) r''/r, spherical -r''/r + (n-2)(1 - r'^2)/r^2
    ric_rad = (n - 1) * k_rad
    ric_sph = k_rad + (n - 2) * k_sph
    return k_rad, k_sph, np.minimum(ric_rad, ric_sph)


def curvature(profile: Profile, s: float) -> CurvatureSample:
    r, rd, rdd = evaluate(profile, s)
    k_rad, k_sph, ric = _curvatures(profile.n, r, rd, rdd)
    return CurvatureSample(float(s), float(k_rad), float(k_sph) if profile.n >= 3 else None,
                           float(ric))


def ricci_minus(profile: Profile, s) -> np.ndarray:
    r, rd, rdd = evaluate(profile, np.asarray(s, dtype=float))
    return _curvatures(profile.n, r, rd, rdd)[2]


def _window(profile: Profile, s0: float, half: float, step: float) -> np.ndarray:
    lo, hi = profile.domain
    a, b = max(s0 - half, lo), min(s0 + half, hi)
    count = max(int(math.ceil((b - a) / step)) + 1, 2)
    return np.linspace(a, b, count)


def kappa_integrand(profile: Profile, t) -> np.ndarray:
    """Pointwise max{|r''|/r, (1 + r'^2)/r^2 (n >= 3 only), 1}."""
    r, rd, rdd = evaluate(profile, np.asarray(t, dtype=float))
    vals = np.maximum(np.abs(rdd) / r, 1.0)
    if profile.n >= 3:
        vals = np.maximum(vals, (1.0 + rd * rd) / (r * r))
    return vals


def kappa(profile: Profile, s0: float, step: float = 1e-3) -> float:
    """max over |t - s0| <= 2 of the curvature scale, floored at 1."""
    return float(np.max(kappa_integrand(profile, _window(profile, s0, WINDOW, step))))


def kappa_samples(profile: Profile, grid, step: float = 1e-3) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    lo, hi = profile.domain
    a, b = max(grid[0] - WINDOW, lo), min(grid[-1] + WINDOW, hi)
    fine = np.linspace(a, b, max(int(math.ceil((b - a) / step)) + 1, 2))
    h = fine[1] - fine[0]
    vals = kappa_integrand(profile, fine)
    k = int(math.floor(WINDOW / h))
    sliding = maximum_filter1d(vals, size=2 * k + 1, mode="nearest")
    out = sliding[np.clip(np.rint((grid - a) / h).astype(int), 0, fine.size - 1)]
    # window endpoints are not always fine-grid nodes; include them explicitly
    ends = np.concatenate([np.clip(grid - WINDOW, lo, hi), np.clip(grid + WINDOW, lo, hi)])
    ev = kappa_integrand(profile, ends).reshape(2, -1)
    return np.maximum(out, ev.max(axis=0))


def check_local_boundedness(profile: Profile, s: float, half_window: float = WINDOW) -> float:
    """Boundedness constant of r restricted to a neighbourhood of s."""
    span = _window(profile, s, 2 * half_window, min(profile.step, 0.01))
    local = profile.with_grid(span)
    return local_boundedness_constant(local, half_window)


def inj_lower_bound(profile: Profile, s: float, constants: Constants = Constants()) -> float:
    """C0 * min{kappa(s)^(-1/2), r(s)}."""
    if not math.isfinite(check_local_boundedness(profile, s)):
        raise BoundNotApplicable(f"r is not locally bounded near s={s:g}")
    r = evaluate(profile, s)[0]
    return constants.C0 * min(kappa(profile, s) ** -0.5, r)


def inj_lower_bound_samples(profile: Profile, grid, constants: Constants = Constants()) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    r = evaluate(profile, grid)[0]
    return constants.C0 * np.minimum(kappa_samples(profile, grid) ** -0.5, r)


def homogenized_inf(f: SampledFunction, x: float, delta: float) -> float:
    """Infimum of f over [x - delta, x + delta] clipped to the sample range.

    Balls of radius delta in a warped product project into s-intervals of
    half-width delta, so this is never larger than the infimum over the ball.
    """
    lo, hi = f.domain
    a, b = max(x - delta, lo), min(x + delta, hi)
    inside = f.values[(f.grid >= a) & (f.grid <= b)]
    ends = f(np.array([a, b]))
    return float(min(inside.min(), ends.min()) if inside.size else ends.min())


def iota_of(f: SampledFunction, x: float, tol: float = 1e-10) -> float:
    """sup over delta of min{delta, homogenized_inf(f, x, delta)} for f >= 0.

    The objective is the smaller of an increasing and a non-increasing
    function of delta, so the sup sits at their crossing; found by bisection.
    """
    fx = float(f(x))
    if fx <= 0:
        return 0.0
    lo, hi = 0.0, fx
    while hi - lo > tol * max(fx, 1e-300):
        mid = 0.5 * (lo + hi)
        if mid - homogenized_inf(f, x, mid) < 0:
            lo = mid
        else:
            hi = mid
    return min(lo, homogenized_inf(f, x, lo))


def iota(profile: Profile, x: float, constants: Constants = Constants(), samples: int = 401) -> float:
    """Homogenized injectivity radius built from the pointwise lower bound."""
    reach = inj_lower_bound(profile, x, constants)
    lo, hi = profile.domain
    grid = np.linspace(max(x - reach, lo), min(x + reach, hi), samples)
    f = SampledFunction(grid, inj_lower_bound_samples(profile, grid, constants))
    return iota_of(f, x)


def r0_samples(profile: Profile, grid, constants: Constants = Constants()) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    r = evaluate(profile, grid)[0]
    val = constants.C * np.minimum(r, kappa_samples(profile, grid) ** -0.5)
    return np.clip(val, np.finfo(float).tiny, 1.0)


def r0_function(profile: Profile, constants: Constants = Constants(), grid=None) -> SampledFunction:
    """clamp(C * min{r, kappa^(-1/2)}, (0, 1]) sampled on ``grid`` (default: profile grid)."""
    grid = profile.grid if grid is None else np.asarray(grid, dtype=float)
    return SampledFunction(grid, r0_samples(profile, grid, constants))


def bounds(profile: Profile, s: float, constants: Constants = Constants()) -> GeometryBounds:
    k = kappa(profile, s)
    r = evaluate(profile, s)[0]
    r0 = min(max(constants.C * min(r, k ** -0.5), np.finfo(float).tiny), 1.0)
    return GeometryBounds(float(s), k, constants.C0 * min(k ** -0.5, r), r0,
                          constants.c * r0, constants)


@dataclass(frozen=True)
class LowerBoundCheck:
    holds: bool
    worst_iota_ratio: float
    worst_ricci_margin: float
    s_checked: np.ndarray


def lower_bounds_hold(profile: Profile, r0: SampledFunction, check_grid,
                      constants: Constants = Constants()) -> LowerBoundCheck:
    """Check iota >= iota_factor * r0 and inf_{ball r0} Ric^- >= -1/r0^2 on ``check_grid``.

    ``iota_factor`` absorbs the smaller constant that homogenization of the
    injectivity bound is allowed to introduce.
    """
    grid = np.asarray(check_grid, dtype=float)
    worst_ratio, worst_margin = np.inf, np.inf
    for x in grid:
        rx = float(r0(x))
        try:
            ratio = iota(profile, x, constants) / rx
        except BoundNotApplicable:
            ratio = 0.0
        window = _window(profile, x, rx, min(rx / 50, 0.01))
        ric = float(np.min(ricci_minus(profile, window)))
        margin = ric * rx * rx + 1.0
        worst_ratio = min(worst_ratio, ratio)
        worst_margin = min(worst_margin, margin)
    holds = worst_ratio >= constants.iota_factor and worst_margin >= 0
    return LowerBoundCheck(bool(holds), float(worst_ratio), float(worst_margin), grid)


def geometry_table(profile: Profile, grid, constants: Constants = Constants()) -> dict[str, np.ndarray]:
    """Columns s, K_rad, K_sph, ric_minus, kappa, inj_lb, r0, harm_lb."""
    grid = np.asarray(grid, dtype=float)
    r, rd, rdd = evaluate(profile, grid)
    k_rad, k_sph, ric = _curvatures(profile.n, r, rd, rdd)
    kap = kappa_samples(profile, grid)
    r0 = np.clip(constants.C * np.minimum(r, kap ** -0.5), np.finfo(float).tiny, 1.0)
    return {
        "s": grid,
        "K_rad": k_rad,
        "K_sph": k_sph if profile.n >= 3 else np.full_like(grid, np.nan),
        "ric_minus": ric,
        "kappa": kap,
        "inj_lb": constants.C0 * np.minimum(kap ** -0.5, r),
        "r0": r0,
        "harm_lb": constants.c * r0,
    }
