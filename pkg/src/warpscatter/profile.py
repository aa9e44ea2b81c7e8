"""Warp profiles r(s) of warped products ds^2 + r(s)^2 g_sphere.

A :class:`Profile` is an immutable bundle of a dimension ``n``, an evaluation
rule for (r, r', r'') and cached samples on a grid.  Power-law profiles are
evaluated analytically outside (-1, 1) and by a quintic Hermite blend inside,
so they are exactly C^2 at s = +-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import ProfileError, RangeError
from .functions import RadialFunction

DEFAULT_STEP = 0.01
DEFAULT_L = 200.0

Triple = tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class PowerLawSpec:
    """r = tau_minus |s|^beta_minus for s <= -1 and tau_plus s^beta_plus for s >= 1."""

    beta_minus: float
    tau_minus: float
    beta_plus: float
    tau_plus: float
    smoothing: str = "quintic_hermite"

    def __post_init__(self):
        if self.tau_minus <= 0 or self.tau_plus <= 0:
            raise ProfileError("tau_minus and tau_plus must be positive")
        if self.smoothing != "quintic_hermite":
            raise ProfileError(f"unknown smoothing {self.smoothing!r}")

    def mirrored(self) -> "PowerLawSpec":
        return PowerLawSpec(self.beta_plus, self.tau_plus, self.beta_minus, self.tau_minus,
                            self.smoothing)


@dataclass(frozen=True)
class TailSpec:
    """Exact power-law end: r = tau * |s - origin|^beta beyond ``start`` on ``side``."""

    side: str
    start: float
    tau: float
    beta: float
    origin: float = 0.0

    def contains(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return s >= self.start if self.side == "right" else s <= self.start

    def distance(self, s) -> np.ndarray:
        """|s - origin| measured into the end."""
        s = np.asarray(s, dtype=float)
        return s - self.origin if self.side == "right" else self.origin - s


@dataclass(frozen=True, eq=False)
class Profile:
    n: int
    grid: np.ndarray
    r: np.ndarray
    rdot: np.ndarray
    rddot: np.ndarray
    kind: str
    domain: tuple[float, float]
    fn: Callable[[np.ndarray], Triple] = field(repr=False)
    tails: tuple[TailSpec | None, TailSpec | None] = (None, None)
    spec: PowerLawSpec | None = None
    description: str = ""

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def left_tail(self) -> TailSpec | None:
        return self.tails[0]

    @property
    def right_tail(self) -> TailSpec | None:
        return self.tails[1]

    def with_grid(self, grid) -> "Profile":
        g = np.asarray(grid, dtype=float)
        r, rd, rdd = evaluate(self, g)
        return replace(self, grid=g, r=r, rdot=rd, rddot=rdd)

    def __call__(self, s):
        return evaluate(self, s)[0]


def _make(n: int, fn, kind: str, domain, grid, tails=(None, None), spec=None,
          description: str = "") -> Profile:
    if int(n) != n or n < 2:
        raise ProfileError("dimension n must be an integer >= 2")
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
        raise ProfileError("grid must be strictly increasing with at least 2 points")
    r, rd, rdd = (np.asarray(a, dtype=float) for a in fn(g))
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise ProfileError(f"profile {description or kind} is not positive on its grid")
    return Profile(int(n), g, r, rd, rdd, kind, (float(domain[0]), float(domain[1])), fn,
                   tuple(tails), spec, description)


def uniform_grid(L: float = DEFAULT_L, step: float = DEFAULT_STEP, lo: float | None = None) -> np.ndarray:
    lo = -L if lo is None else lo
    count = int(round((L - lo) / step)) + 1
    return np.linspace(lo, L, count)


def evaluate(profile: Profile, s) -> Triple:
    """Return (r, r', r'') at s (scalar or array)."""
    arr = np.asarray(s, dtype=float)
    lo, hi = profile.domain
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    if np.any(arr < lo - tol) or np.any(arr > hi + tol):
        raise RangeError(f"s outside profile domain [{lo}, {hi}]")
    r, rd, rdd = profile.fn(arr)
    if arr.ndim == 0:
        return float(r), float(rd), float(rdd)
    return np.asarray(r), np.asarray(rd), np.asarray(rdd)


# -- power-law families ------------------------------------------------------

def _end_values(tau: float, beta: float, x: np.ndarray) -> Triple:
    """tau x^beta and its first two x-derivatives, x > 0."""
    return (tau * x**beta, tau * beta * x ** (beta - 1), tau * beta * (beta - 1) * x ** (beta - 2))


def quintic_blend(spec: PowerLawSpec) -> Polynomial:
    """Unique quintic matching (r, r', r'') of both power-law ends at s = -1, 1."""
    lm = _end_values(spec.tau_minus, spec.beta_minus, np.array(1.0))
    rp = _end_values(spec.tau_plus, spec.beta_plus, np.array(1.0))
    # left end in s: r(-1) = lm0, r'(-1) = -lm1, r''(-1) = lm2
    targets = np.array([lm[0], -lm[1], lm[2], rp[0], rp[1], rp[2]], dtype=float)
    rows = []
    for x in (-1.0, 1.0):
        rows.append([x**k for k in range(6)])
        rows.append([k * x ** (k - 1) if k >= 1 else 0.0 for k in range(6)])
        rows.append([k * (k - 1) * x ** (k - 2) if k >= 2 else 0.0 for k in range(6)])
    system = np.array([rows[0], rows[1], rows[2], rows[3], rows[4], rows[5]])
    return Polynomial(np.linalg.solve(system, targets))


def _power_law_fn(spec: PowerLawSpec):
    p = quintic_blend(spec)
    dp, ddp = p.deriv(1), p.deriv(2)

    def fn(s):
        s = np.asarray(s, dtype=float)
        left, right = s <= -1.0, s >= 1.0
        mid = ~(left | right)
        xl = np.where(left, -s, 1.0)
        xr = np.where(right, s, 1.0)
        l0, l1, l2 = _end_values(spec.tau_minus, spec.beta_minus, xl)
        r0, r1, r2 = _end_values(spec.tau_plus, spec.beta_plus, xr)
        sm = np.where(mid, s, 0.0)
        r = np.where(left, l0, np.where(right, r0, p(sm)))
        rd = np.where(left, -l1, np.where(right, r1, dp(sm)))
        rdd = np.where(left, l2, np.where(right, r2, ddp(sm)))
        return r, rd, rdd

    return fn, p


def build_power_law(spec: PowerLawSpec, grid_step: float = DEFAULT_STEP, n: int = 2,
                    L: float = DEFAULT_L) -> Profile:
    """Two-ended power-law profile glued C^2 across (-1, 1)."""
    if grid_step <= 0:
        raise ProfileError("grid_step must be positive")
    fn, blend = _power_law_fn(spec)
    fine = np.linspace(-1.0, 1.0, 4001)
    if np.min(blend(fine)) <= 0:
        raise ProfileError(f"quintic blend of {spec} is not positive on (-1, 1)")
    tails = (TailSpec("left", -1.0, spec.tau_minus, spec.beta_minus),
             TailSpec("right", 1.0, spec.tau_plus, spec.beta_plus))
    desc = (f"power_law(beta-={spec.beta_minus:g}, tau-={spec.tau_minus:g}, "
            f"beta+={spec.beta_plus:g}, tau+={spec.tau_plus:g}; blend=quintic_hermite)")
    return _make(n, fn, "power_law", (-np.inf, np.inf), uniform_grid(L, grid_step),
                 tails=tails, spec=spec, description=desc)


def gluing_jump(spec: PowerLawSpec) -> float:
    """Largest relative jump of (r, r', r'') between blend and ends at s = -1, 1."""
    p = quintic_blend(spec)
    blend = [np.array([p(x), p.deriv(1)(x), p.deriv(2)(x)]) for x in (-1.0, 1.0)]
    l0, l1, l2 = _end_values(spec.tau_minus, spec.beta_minus, np.array(1.0))
    ends = [np.array([l0, -l1, l2]),
            np.array(_end_values(spec.tau_plus, spec.beta_plus, np.array(1.0)))]
    return max(float(np.max(np.abs(b - e) / np.maximum(np.abs(e), 1.0)))
               for b, e in zip(blend, ends))


def cylinder(tau: float, n: int = 2, L: float = DEFAULT_L, grid_step: float = DEFAULT_STEP) -> Profile:
    return build_power_law(PowerLawSpec(0.0, tau, 0.0, tau), grid_step, n, L)


def horn_euclidean(tau: float = 1.0, beta: float = -1.0, n: int = 2, L: float = DEFAULT_L,
                   grid_step: float = DEFAULT_STEP) -> Profile:
    """Euclidean left end r = |s| and horn right end r = tau s^beta (beta < 0)."""
    return build_power_law(PowerLawSpec(1.0, 1.0, beta, tau), grid_step, n, L)


# -- analytic and sampled profiles -------------------------------------------

def from_functions(n: int, r, rdot, rddot, domain: tuple[float, float],
                   grid_step: float = DEFAULT_STEP, description: str = "analytic") -> Profile:
    """Profile from closed-form callables on a (possibly open-ended) domain."""
    lo, hi = domain
    glo = lo if np.isfinite(lo) else -DEFAULT_L
    ghi = hi if np.isfinite(hi) else DEFAULT_L
    count = max(int(round((ghi - glo) / grid_step)) + 1, 3)

    def fn(s):
        s = np.asarray(s, dtype=float)
        return r(s), rdot(s), rddot(s)

    return _make(n, fn, "analytic", domain, np.linspace(glo, ghi, count), description=description)


def from_samples(n: int, s, r, rdot=None, rddot=None, description: str = "sampled") -> Profile:
    """Profile from samples of r; derivatives come from the spline unless given."""
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    if s.shape != r.shape or s.ndim != 1:
        raise ProfileError("s and r must be 1D arrays of equal length")
    if np.any(np.diff(s) <= 0):
        raise ProfileError("sample points must be strictly increasing")
    if np.any(r <= 0):
        raise ProfileError("sampled r must be positive")
    if rdot is None:
        spline = CubicSpline(s, r, bc_type="not-a-knot")

        def fn(x):
            return spline(x), spline(x, 1), spline(x, 2)
    else:
        splines = [CubicSpline(s, np.asarray(a, dtype=float)) for a in (r, rdot)]
        if rddot is None:
            hermite = CubicHermiteSpline(s, r, np.asarray(rdot, dtype=float))

            def fn(x):
                return hermite(x), hermite(x, 1), hermite(x, 2)
        else:
            splines.append(CubicSpline(s, np.asarray(rddot, dtype=float)))

            def fn(x):
                return tuple(sp(x) for sp in splines)

    return _make(n, fn, "sampled", (s[0], s[-1]), s, description=description)


def read_profile_csv(path, n: int) -> Profile:
    """Two-column CSV (s, r) with optional header row."""
    data = np.genfromtxt(path, delimiter=",", comments="#", dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ProfileError(f"{path}: expected at least two columns (s, r)")
    data = data[np.all(np.isfinite(data[:, :2]), axis=1)]
    return from_samples(n, data[:, 0], data[:, 1], description=f"sampled({path})")


# -- deformations -------------------------------------------------------------

def _shrink_tails(tails, support):
    if support is None:
        return (None, None)
    a, b = support
    left, right = tails
    if left is not None:
        left = replace(left, start=min(left.start, a))
    if right is not None:
        right = replace(right, start=max(right.start, b))
    return (left, right)


def warp_perturbed(profile: Profile, phi: RadialFunction, eps: float) -> Profile:
    """r_eps = r * (1 + eps * phi)."""
    e = float(eps)
    base = profile.fn

    def fn(s):
        r, rd, rdd = base(s)
        f, f1, f2 = phi.value(s), phi.d1(s), phi.d2(s)
        return (r * (1 + e * f), rd * (1 + e * f) + e * f1 * r,
                rdd * (1 + e * f) + 2 * e * f1 * rd + e * f2 * r)

    desc = f"{profile.description} * (1 + {e:g}*{phi.label})"
    return _make(profile.n, fn, profile.kind if e == 0 else "analytic", profile.domain,
                 profile.grid, tails=_shrink_tails(profile.tails, phi.support) if e else profile.tails,
                 spec=profile.spec if e == 0 else None, description=desc)


def conformal_rewrite(profile: Profile, mu: RadialFunction, table_points: int = 4001) -> Profile:
    """Warped form of e^{2 mu(s)} (ds^2 + r^2 g_sphere).

    Returns the profile r~(t) = e^{mu} r in the new arc length t with
    dt = e^{mu} ds, anchored so that t = s left of the support of mu.  Only
    compactly supported mu are accepted; the right end is shifted by the
    total length change.
    """
    if mu.support is None:
        raise ProfileError("conformal rewrite needs a compactly supported mu")
    a, b = mu.support
    if b <= a:
        return replace(profile, kind="conformal_of", description=f"conformal_of({profile.description})")
    s_tab = np.linspace(a, b, table_points)
    xg, wg = np.polynomial.legendre.leggauss(8)
    h = np.diff(s_tab)
    mids = 0.5 * (s_tab[:-1] + s_tab[1:])
    nodes = mids[:, None] + 0.5 * h[:, None] * xg[None, :]
    seg = 0.5 * h * np.sum(wg[None, :] * np.exp(mu.value(nodes)), axis=1)
    t_tab = a + np.concatenate([[0.0], np.cumsum(seg)])
    t_of_s = CubicHermiteSpline(s_tab, t_tab, np.exp(mu.value(s_tab)))
    shift = float(t_tab[-1] - b)
    t_b = float(t_tab[-1])
    base = profile.fn

    def s_of_t(t):
        t = np.asarray(t, dtype=float)
        s = np.where(t <= a, t, np.where(t >= t_b, t - shift, np.interp(t, t_tab, s_tab)))
        inside = (t > a) & (t < t_b)
        if np.any(inside):
            si, ti = s[inside], t[inside]
            for _ in range(6):
                si = si - (t_of_s(si) - ti) / np.exp(mu.value(si))
                si = np.clip(si, a, b)
            s = s.copy()
            s[inside] = si
        return s

    def fn(t):
        s = s_of_t(t)
        r, rd, rdd = base(s)
        m0, m1, m2 = mu.value(s), mu.d1(s), mu.d2(s)
        em = np.exp(m0)
        return em * r, m1 * r + rd, (m2 * r + m1 * rd + rdd) / em

    left, right = profile.tails
    if left is not None:
        left = replace(left, start=min(left.start, a))
    if right is not None:
        right = replace(right, start=max(right.start, b) + shift, origin=right.origin + shift)
    lo, hi = profile.domain
    grid = profile.grid
    new_grid = np.linspace(grid[0], grid[-1] + shift, grid.size)
    return _make(profile.n, fn, "conformal_of", (lo, hi + shift if np.isfinite(hi) else hi),
                 new_grid, tails=(left, right), description=f"conformal_of({profile.description}; {mu.label})")


# -- local boundedness -------------------------------------------------------

def local_boundedness_constant(profile: Profile, half_window: float = 2.0,
                               m_cap: float = 1e6) -> float:
    """Smallest m >= 1 with r(s0)/m <= r(s) <= m r(s0) for |s - s0| <= half_window.

    Evaluated over the sampled grid with windows clipped to the grid range.
    Values above ``m_cap`` (or non-finite ones) are reported as +inf: samples
    cannot distinguish such growth from an unbounded ratio.
    """
    s, r = profile.grid, profile.r
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        return float("inf")
    steps = np.diff(s)
    if np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        k = int(round(half_window / steps[0]))
        size = 2 * k + 1
        rmax = maximum_filter1d(r, size=size, mode="nearest")
        rmin = minimum_filter1d(r, size=size, mode="nearest")
    else:
        lo = np.searchsorted(s, s - half_window - 1e-12, side="left")
        hi = np.searchsorted(s, s + half_window + 1e-12, side="right")
        rmax = np.array([r[i:j].max() for i, j in zip(lo, hi)])
        rmin = np.array([r[i:j].min() for i, j in zip(lo, hi)])
    with np.errstate(over="ignore", divide="ignore"):
        m = float(np.max(np.maximum(rmax / r, r / rmin)))
    if not np.isfinite(m) or m > m_cap:
        return float("inf")
    return max(m, 1.0)
