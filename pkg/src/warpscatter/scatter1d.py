"""Stationary scattering for -u'' + V u = k^2 u on the line.

The right Jost solution f+ ~ e^{iks} is started at the right matching point
and integrated leftwards; projecting it on the left Jost pair gives the
transmission and left reflection amplitudes.  The mirrored run gives the right
reflection amplitude.

Boundary data at a matching point comes from the exact tail where one is
known: plane waves for a vanishing tail, Riccati-Hankel functions for a pure
inverse-square tail A x^{-2}, and a first-order WKB phase for other power
tails, started far enough out and integrated back to the matching point.
Only a potential without a known tail is truncated at +-L, and then it has
to be negligible there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp, trapezoid
from scipy.interpolate import CubicSpline
from scipy.special import h1vp, hankel1

from .channels import Channel, TailTerms, classify
from .errors import ChannelClosedError, SpectrumLeakError, TruncationError

DEFAULT_L = 200.0
RTOL = 1e-10
ATOL = 1e-12
NEAR_THRESHOLD_K = 1e-3


class NearThresholdWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential on the line with optional exact tails.

    ``fn`` must be accurate on [left_match, right_match]; beyond those points
    the tails (``None`` meaning "unknown, truncate") take over.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    left_match: float
    right_match: float
    tails: tuple[TailTerms | None, TailTerms | None] = (None, None)
    breakpoints: tuple[float, ...] = ()
    label: str = "V"

    def __call__(self, s) -> np.ndarray:
        return self.fn(np.asarray(s, dtype=float))

    @property
    def domain_L(self) -> float:
        return max(abs(self.left_match), abs(self.right_match))


def _zero_tail(side: str, at: float) -> TailTerms:
    return TailTerms(side, at, at, ())


def zero_potential(L: float = 1.0) -> Potential:
    return Potential(lambda s: np.zeros_like(s), -L, L, (_zero_tail("left", -L), _zero_tail("right", L)),
                     label="zero")


def square_barrier(height: float, width: float, left: float = 0.0) -> Potential:
    a, b = float(left), float(left) + float(width)

    def fn(s):
        return np.where((s >= a) & (s <= b), float(height), 0.0)

    return Potential(fn, a, b, (_zero_tail("left", a), _zero_tail("right", b)), (a, b),
                     f"barrier(V0={height:g}, a={width:g})")


def compact_potential(fn, support: tuple[float, float], label: str = "V") -> Potential:
    """A potential vanishing identically outside ``support``."""
    a, b = support
    return Potential(fn, a, b, (_zero_tail("left", a), _zero_tail("right", b)), label=label)


def sampled_potential(grid, values, label: str = "sampled") -> Potential:
    """Spline potential on a grid; truncated at the grid ends."""
    g = np.asarray(grid, dtype=float)
    spline = CubicSpline(g, np.asarray(values, dtype=float))
    return Potential(lambda s: spline(s), float(g[0]), float(g[-1]), label=label)


def channel_potential(channel: Channel, L: float | None = None, margin: float = 1.0) -> Potential:
    """Potential of a channel, matched on its exact ends.

    With exact power-law ends the matching points sit ``margin`` beyond the
    tail starts unless an explicit truncation radius ``L`` is requested.
    """
    left, right = channel.tails()
    lo_dom, hi_dom = channel.profile.domain
    default = DEFAULT_L if L is None else L
    a = -default if left is None or L is not None else left.start - margin
    b = default if right is None or L is not None else right.start + margin
    a, b = max(a, lo_dom), min(b, hi_dom)
    label = f"w_eff(m={channel.m}; {channel.profile.description})"
    return Potential(channel, a, b, (left, right), label=label)


# -- boundary data ---------------------------------------------------------------

def _ricatti_hankel(nu: float, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sqrt(pi z / 2) H1_nu(z) and its z-derivative."""
    h = hankel1(nu, z)
    hp = h1vp(nu, z)
    c = math.sqrt(math.pi / 2.0)
    return c * np.sqrt(z) * h, c * (0.5 / np.sqrt(z) * h + np.sqrt(z) * hp)


def outgoing(tail: TailTerms | None, side: str, at: float, k) -> tuple[np.ndarray, np.ndarray]:
    """(f, df/ds) at ``at`` for the solution outgoing on ``side``, for each k.

    Normalized so that f ~ e^{iks} (right) or e^{-iks} (left) as |s| -> inf.
    """
    k = np.asarray(k, dtype=float)
    sgn = 1.0 if side == "right" else -1.0
    if tail is None or not tail.terms:
        f = np.exp(1j * sgn * k * at)
        return f, 1j * sgn * k * f
    x = float(tail.distance(at))
    A = tail.inverse_square
    if A is not None:
        nu = math.sqrt(A + 0.25)
        g, gp = _ricatti_hankel(nu, k * x)
        phase = np.exp(1j * (nu * math.pi / 2 + math.pi / 4)) * np.exp(1j * sgn * k * tail.origin)
        # x increases outward on both sides, so d/ds = sgn d/dx
        return phase * g, phase * sgn * k * gp
    # other power tails: first-order WKB far out, carried inwards by the ODE
    far = _wkb_start(tail, x, float(np.min(k)))
    s_far = tail.origin + far if side == "right" else tail.origin - far
    f, df = _wkb(tail, side, s_far, k)
    if s_far == at:
        return f, df
    pot = Potential(tail, min(at, s_far), max(at, s_far), label="tail")
    return _integrate(pot, k, s_far, at, f, df)


WKB_TOL = 1e-10
WKB_REACH = 400.0


def _wkb_start(tail: TailTerms, x: float, k_min: float) -> float:
    """Distance into the end where the first-order WKB error estimate is below WKB_TOL.

    The estimate (|V|^2 x + |V'|) / k^3 is pushed below the tolerance by moving
    outwards, but never more than WKB_REACH beyond the matching point.
    """
    def err(y):
        size = sum(abs(c) * y ** (-p) for c, p in tail.terms)
        slope = sum(abs(c) * p * y ** (-p - 1) for c, p in tail.terms)
        return (size * size * y + slope) / k_min**3

    far = x
    while err(far) > WKB_TOL and far < x + WKB_REACH:
        far = min(far * 1.25 + 1.0, x + WKB_REACH)
    return far


def _wkb(tail: TailTerms, side: str, at: float, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First-order WKB phase for sum c x^{-p}, p > 1."""
    sgn = 1.0 if side == "right" else -1.0
    x = float(tail.distance(at))
    V = float(tail(at))
    if np.any(k * k <= V):
        raise TruncationError(f"k={k.min():g} below the tail potential {V:g} at s={at:g}; "
                              f"use a larger L")
    p_loc = np.sqrt(k * k - V)
    phase = sum(c * x ** (1.0 - p) / (2.0 * k * (p - 1.0)) for c, p in tail.terms)
    f = np.sqrt(k / p_loc) * np.exp(1j * sgn * k * at + 1j * phase)
    return f, 1j * sgn * p_loc * f


def _integrate(V: Potential, k: np.ndarray, s_from: float, s_to: float,
               u0: np.ndarray, du0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integrate (u, u') for all k at once, restarting at breakpoints.

    The k values share one adaptive step sequence, so the potential is
    evaluated once per stage for the whole grid.
    """
    lo, hi = sorted((s_from, s_to))
    stops = sorted((b for b in V.breakpoints if lo < b < hi), reverse=s_to < s_from)
    nodes = [s_from] + stops + [s_to]
    k2 = k * k
    K = k.size

    def rhs(s, y):
        u, du = y[:K], y[K:]
        return np.concatenate([du, (float(V.fn(np.asarray(s))) - k2) * u])

    y = np.concatenate([u0, du0]).astype(complex)
    for a, b in zip(nodes[:-1], nodes[1:]):
        if a == b:
            continue
        span = abs(b - a)
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=RTOL, atol=ATOL,
                        max_step=max(span / 8.0, 1e-6),
                        first_step=min(0.1 / max(float(k.max()), 1.0), span / 4))
        if not sol.success:
            raise RuntimeError(f"ODE integration failed: {sol.message}")
        y = sol.y[:, -1]
    return y[:K], y[K:]


def _wronskian(f, df, g, dg):
    return f * dg - df * g


def _check_truncation(V: Potential, k: np.ndarray) -> None:
    kmin = float(np.min(k))
    for tail, at in zip(V.tails, (V.left_match, V.right_match)):
        if tail is None:
            val = abs(float(V.fn(np.asarray(at))))
            if val >= 1e-8 * kmin * kmin:
                raise TruncationError(
                    f"|V({at:g})| = {val:.3g} is not below 1e-8 k^2 = {1e-8 * kmin * kmin:.3g}; "
                    f"try L >= {2 * abs(at):g}")


@dataclass(frozen=True)
class StationarySolution:
    t: complex
    r_left: complex
    r_right: complex
    t_right: complex

    @property
    def defect(self) -> float:
        return abs(1.0 - abs(self.t) ** 2 - abs(self.r_left) ** 2)


def _amplitudes(V: Potential, k: np.ndarray):
    if np.any(k <= 0):
        raise ValueError("k must be positive")
    if np.any(k < NEAR_THRESHOLD_K):
        warnings.warn(f"k={k.min():g} is near threshold; amplitudes are unreliable",
                      NearThresholdWarning)
    _check_truncation(V, k)
    left_t, right_t = V.tails
    a_pt, b_pt = V.left_match, V.right_match
    fp, dfp = outgoing(right_t, "right", b_pt, k)
    fm, dfm = outgoing(left_t, "left", a_pt, k)
    gm, dgm = np.conj(fm), np.conj(dfm)
    gp, dgp = np.conj(fp), np.conj(dfp)
    # right Jost solution carried to the left: u = a g- + b f-
    u, du = _integrate(V, k, b_pt, a_pt, fp, dfp)
    w_left = _wronskian(gm, dgm, fm, dfm)
    a = _wronskian(u, du, fm, dfm) / w_left
    b = _wronskian(gm, dgm, u, du) / w_left
    # left Jost solution carried to the right: v = a2 g+ + b2 f+
    v, dv = _integrate(V, k, a_pt, b_pt, fm, dfm)
    w_right = _wronskian(fp, dfp, gp, dgp)
    a2 = _wronskian(fp, dfp, v, dv) / w_right
    b2 = _wronskian(v, dv, gp, dgp) / w_right
    return 1.0 / a, b / a, b2 / a2, 1.0 / a2


def solve_stationary(V: Potential, k: float) -> StationarySolution:
    """Transmission and reflection amplitudes at wavenumber k > 0."""
    t, rl, rr, tr = _amplitudes(V, np.array([float(k)]))
    return StationarySolution(complex(t[0]), complex(rl[0]), complex(rr[0]), complex(tr[0]))


# -- S-matrix over a k grid ------------------------------------------------------

@dataclass
class ScatteringData:
    k_grid: np.ndarray
    t: np.ndarray
    r_left: np.ndarray
    r_right: np.ndarray
    domain_L: float
    t_right: np.ndarray = field(default=None, repr=False)
    label: str = ""

    @property
    def transmission(self) -> np.ndarray:
        return np.abs(self.t) ** 2

    @property
    def defect(self) -> np.ndarray:
        return np.abs(1.0 - np.abs(self.t) ** 2 - np.abs(self.r_left) ** 2)

    @property
    def max_defect(self) -> float:
        return float(np.max(self.defect)) if self.k_grid.size else 0.0

    @property
    def reciprocity_defect(self) -> float:
        return float(np.max(np.abs(np.abs(self.t) - np.abs(self.t_right))))


def scatter(V: Potential, k_grid, chunk: int = 256) -> ScatteringData:
    ks = np.asarray(k_grid, dtype=float).ravel()
    parts = [_amplitudes(V, ks[i:i + chunk]) for i in range(0, ks.size, chunk)]
    t, rl, rr, tr = (np.concatenate([p[j] for p in parts]) if parts else np.zeros(0, complex)
                     for j in range(4))
    return ScatteringData(ks, t, rl, rr, V.domain_L, tr, V.label)


def s_matrix(channel: Channel, k_grid, L: float | None = None) -> ScatteringData:
    """Per-k amplitudes of a channel that is short range on both ends."""
    for side in ("left", "right"):
        c = classify(channel, side)
        if not c.short_range:
            raise ChannelClosedError(
                f"channel m={channel.m} is closed/unsupported on the {side} end "
                f"({c.verdict}, decay exponent {c.alpha:.3g}); no scattering data")
    return scatter(channel_potential(channel, L), k_grid)


def k_grid_spec(k_min: float, k_max: float, count: int, spacing: str = "linear") -> np.ndarray:
    if not 0 < k_min <= k_max or count < 1:
        raise ValueError("need 0 < k_min <= k_max and count >= 1")
    if spacing == "log":
        return np.geomspace(k_min, k_max, count)
    if spacing == "linear":
        return np.linspace(k_min, k_max, count)
    raise ValueError(f"unknown k spacing {spacing!r}")


# -- openness ------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeSpec:
    """Test-state envelope phi_0 given through its Fourier transform.

    ``kind="bump"`` is the compactly supported exp(-c/(1-u^2)), u = q/halfwidth,
    c = ``sharpness``; larger c gives smaller high derivatives near the
    support edges.  ``kind="gaussian"`` is exp(-q^2/(2 halfwidth^2)) (not
    compactly supported; treated as supported on +-6 halfwidths).
    ``center`` is the position of phi_0 in s.
    """

    center: float = 0.0
    halfwidth: float = 1.0
    kind: str = "bump"
    sharpness: float = 1.0

    def __post_init__(self):
        if self.halfwidth <= 0 or self.sharpness <= 0:
            raise ValueError("envelope halfwidth and sharpness must be positive")
        if self.kind not in ("bump", "gaussian"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")

    @property
    def support(self) -> float:
        return self.halfwidth if self.kind == "bump" else 6.0 * self.halfwidth

    def spectrum(self, q) -> np.ndarray:
        """phi_0-hat(q) without the center phase (real, non-negative)."""
        q = np.asarray(q, dtype=float)
        u = q / self.halfwidth
        if self.kind == "gaussian":
            return np.exp(-0.5 * u * u)
        inside = np.abs(u) < 1.0
        one_m = np.where(inside, 1.0 - u * u, 1.0)
        return np.where(inside, np.exp(-self.sharpness / one_m), 0.0)


@dataclass(frozen=True)
class OpennessVerdict:
    indicator: float
    open: bool
    v_used: float
    threshold: float

    @property
    def wording(self) -> str:
        if self.open:
            return "open (witnessed by transmitted test state)"
        return "not witnessed open at this velocity (no closedness claim)"


def spectral_nodes(v: float, envelope: EnvelopeSpec, count: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [v - support, v + support]."""
    x, w = np.polynomial.legendre.leggauss(count)
    half = envelope.support
    return v + half * x, half * w


def weighted_transmission(k, t_sq, v: float, envelope: EnvelopeSpec, weights=None) -> float:
    k = np.asarray(k, dtype=float)
    dens = envelope.spectrum(k - v) ** 2
    if weights is None:
        total = trapezoid(dens, k)
        return float(trapezoid(np.asarray(t_sq) * dens, k) / total)
    return float(np.sum(weights * np.asarray(t_sq) * dens) / np.sum(weights * dens))


def openness(data: ScatteringData, v: float, envelope: EnvelopeSpec, threshold: float = 0.5,
             samples: int = 2001) -> OpennessVerdict:
    """Spectrally weighted |t|^2 of the test state e^{ivs} phi_0.

    |t(k)|^2 is interpolated from ``data``; the shifted spectrum has to lie
    inside the k grid.
    """
    lo, hi = v - envelope.support, v + envelope.support
    ks = data.k_grid
    if ks.size < 2 or lo < ks[0] - 1e-12 or hi > ks[-1] + 1e-12:
        raise SpectrumLeakError(
            f"test spectrum [{lo:g}, {hi:g}] leaks outside the k grid [{ks[0]:g}, {ks[-1]:g}]; "
            f"widen the grid")
    fine = np.linspace(max(lo, ks[0]), min(hi, ks[-1]), samples)
    t_sq = CubicSpline(ks, data.transmission)(fine) if ks.size >= 4 else np.interp(fine, ks, data.transmission)
    ind = min(max(weighted_transmission(fine, t_sq, v, envelope), 0.0), 1.0)
    return OpennessVerdict(ind, ind > threshold, float(v), threshold)


def openness_of(V: Potential, v: float, envelope: EnvelopeSpec, threshold: float = 0.5,
                nodes: int = 48) -> OpennessVerdict:
    """Indicator with |t|^2 computed directly at Gauss-Legendre k nodes."""
    k, w = spectral_nodes(v, envelope, nodes)
    if k[0] <= 0:
        raise SpectrumLeakError(f"test spectrum reaches k <= 0 at v={v:g}; increase v")
    data = scatter(V, k)
    ind = min(max(weighted_transmission(k, data.transmission, v, envelope, w), 0.0), 1.0)
    return OpennessVerdict(ind, ind > threshold, float(v), threshold)


def inverse_velocity_fit(vs, indicators) -> tuple[float, bool]:
    """C = max v (1 - I(v)) and whether I(v) >= 1 - C/v with v (1 - I) non-increasing.

    The second flag checks that the deficit decays at least like 1/v across
    the sampled velocities (allowing a 1e-9 noise floor).
    """
    vs = np.asarray(vs, dtype=float)
    deficit = np.maximum(1.0 - np.asarray(indicators, dtype=float), 0.0)
    scaled = vs * deficit
    C = float(scaled.max())
    decays = bool(np.all(np.diff(scaled) <= 1e-9 + 1e-6 * scaled[:-1]))
    return C, decays and bool(np.all(np.asarray(indicators) >= 1.0 - C / vs - 1e-12))
