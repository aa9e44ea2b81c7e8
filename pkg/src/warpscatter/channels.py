"""Angular-momentum channels of the Laplacian on a warped product.

After the unitary change u = r^{(n-1)/2} f, the Laplacian restricted to the
spherical harmonics of degree m becomes -d^2/ds^2 + w(s) + lambda_m / r(s)^2
on the line, with w built from q = r'/r.  On exact power-law ends every term
of the channel potential is a power of the distance into the end, which is
what the tail classification and the scattering boundary conditions use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .functions import SampledFunction
from .profile import Profile, TailSpec, evaluate

INCONCLUSIVE_BAND = 0.05


def base_potential_values(n: int, r, rd, rdd) -> np.ndarray:
    """w = ((n-1)/2) q' + ((n-1)/2)^2 q^2 with q = r'/r."""
    h = 0.5 * (n - 1)
    q = rd / r
    qdot = rdd / r - q * q
    return h * qdot + h * h * q * q


def base_potential(profile: Profile, grid=None) -> SampledFunction:
    g = profile.grid if grid is None else np.asarray(grid, dtype=float)
    r, rd, rdd = evaluate(profile, g)
    return SampledFunction(g, base_potential_values(profile.n, r, rd, rdd))


def sphere_eigenvalue(m: int, n: int) -> int:
    """lambda_m = m (m + n - 2), eigenvalue of the Laplacian on S^{n-1}."""
    return m * (m + n - 2)


def multiplicity(m: int, n: int) -> int:
    """Dimension of the degree-m spherical harmonics on S^{n-1}."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if m == 0:
        return 1
    num = math.comb(m + n - 2, m) * (2 * m + n - 2)
    return num // (m + n - 2)


@dataclass(frozen=True)
class TailTerms:
    """Channel potential on an exact end: sum_j c_j x^{-p_j}, x = distance into the end."""

    side: str
    start: float
    origin: float
    terms: tuple[tuple[float, float], ...]

    @property
    def decay_exponent(self) -> float:
        """Slowest decay exponent (inf for an identically zero tail)."""
        return min((p for c, p in self.terms), default=math.inf)

    @property
    def inverse_square(self) -> float | None:
        """Coefficient A if the tail is exactly A x^{-2} (including A = 0)."""
        if all(p == 2.0 for _, p in self.terms):
            return float(sum(c for c, _ in self.terms))
        return None

    def distance(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return s - self.origin if self.side == "right" else self.origin - s

    def __call__(self, s) -> np.ndarray:
        x = self.distance(s)
        out = np.zeros_like(x)
        for c, p in self.terms:
            out = out + c * x ** (-p)
        return out


def tail_terms(tail: TailSpec, n: int, lam: float) -> TailTerms:
    """Exact potential terms on a power-law end r = tau x^beta."""
    xc = 0.5 * (n - 1) * tail.beta
    terms = []
    if xc * (xc - 1.0) != 0.0:
        terms.append((xc * (xc - 1.0), 2.0))
    if lam != 0.0:
        terms.append((lam / tail.tau**2, 2.0 * tail.beta))
    merged: dict[float, float] = {}
    for c, p in terms:
        merged[p] = merged.get(p, 0.0) + c
    clean = tuple((c, p) for p, c in sorted(merged.items()) if c != 0.0)
    return TailTerms(tail.side, tail.start, tail.origin, clean)


@dataclass(frozen=True, eq=False)
class Channel:
    m: int
    lam: float
    multiplicity: int
    profile: Profile = field(repr=False)
    w_eff: SampledFunction = field(repr=False)

    @property
    def n(self) -> int:
        return self.profile.n

    def __call__(self, s) -> np.ndarray:
        """w_eff evaluated from the profile formulas (not interpolated)."""
        r, rd, rdd = evaluate(self.profile, s)
        return base_potential_values(self.n, r, rd, rdd) + self.lam / (r * r)

    def tails(self) -> tuple[TailTerms | None, TailTerms | None]:
        return tuple(None if t is None else tail_terms(t, self.n, self.lam)
                     for t in self.profile.tails)


def make_channel(profile: Profile, m: int, grid=None) -> Channel:
    if int(m) != m or m < 0:
        raise ValueError("m must be an integer >= 0")
    m = int(m)
    lam = sphere_eigenvalue(m, profile.n)
    w = base_potential(profile, grid)
    r = evaluate(profile, w.grid)[0]
    return Channel(m, float(lam), multiplicity(m, profile.n), profile,
                   SampledFunction(w.grid, w.values + lam / (r * r)))


@dataclass(frozen=True)
class ChannelClassification:
    side: str
    alpha: float
    short_range: bool
    deift_killip: bool
    discrete_heuristic: bool
    method: str
    inconclusive: bool = False

    @property
    def verdict(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "short_range" if self.short_range else "not_short_range"


def _fit_decay(channel: Channel, side: str) -> tuple[float, bool]:
    """Log-log slope of |w_eff| over the last decade of the grid on ``side``."""
    g = channel.w_eff.grid
    edge = g[-1] if side == "right" else -g[0]
    if edge <= 1.0:
        return math.nan, False
    x = np.geomspace(max(edge / 10.0, 1.0), edge, 200)
    s = x if side == "right" else -x
    vals = np.abs(channel(s))
    pos = vals > 0
    if not pos.any():
        return math.inf, True
    if pos.sum() < 10:
        return math.nan, False
    slope = float(np.polyfit(np.log(x[pos]), np.log(vals[pos]), 1)[0])
    return -slope, True


def _shrinks(channel: Channel, side: str, tail: TailSpec | None) -> bool:
    if tail is not None:
        return tail.beta < 0
    g = channel.profile.grid
    x = np.geomspace(max(abs(g[-1] if side == "right" else g[0]) / 10.0, 1.0),
                     abs(g[-1] if side == "right" else g[0]), 50)
    r = evaluate(channel.profile, x if side == "right" else -x)[0]
    return bool(np.all(np.diff(r) < 0) and r[-1] < 0.5 * r[0])


def classify(channel: Channel, side: str) -> ChannelClassification:
    """Short-range / Deift-Killip / discreteness verdict for one end.

    Exact power-law ends are classified from the exponents of the channel
    potential; other profiles from a log-log fit over the last grid decade,
    with fits within +-0.05 of the short-range threshold reported as
    inconclusive.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    tail = channel.profile.tails[0 if side == "left" else 1]
    discrete = channel.m >= 1 and _shrinks(channel, side, tail)
    if tail is not None:
        alpha = tail_terms(tail, channel.n, channel.lam).decay_exponent
        return ChannelClassification(side, alpha, alpha > 1.0, alpha > 0.5, discrete, "analytic")
    alpha, ok = _fit_decay(channel, side)
    if not ok:
        return ChannelClassification(side, alpha, False, False, discrete, "fit", True)
    inconclusive = abs(alpha - 1.0) <= INCONCLUSIVE_BAND
    short = alpha > 1.0 and not inconclusive
    return ChannelClassification(side, alpha, short, alpha > 0.5 + INCONCLUSIVE_BAND or short,
                                 discrete, "fit", inconclusive)


def is_two_sided_short_range(channel: Channel) -> bool:
    return all(classify(channel, side).short_range for side in ("left", "right"))


CHANNEL_COLUMNS = ("m", "lambda", "multiplicity", "side", "alpha_fit", "short_range",
                   "deift_killip", "discrete")


def channel_table(profile: Profile, m_max: int) -> list[tuple]:
    rows = []
    for m in range(m_max + 1):
        ch = make_channel(profile, m)
        for side in ("left", "right"):
            c = classify(ch, side)
            rows.append((m, ch.lam, ch.multiplicity, side, c.alpha,
                         c.verdict if c.inconclusive else c.short_range,
                         c.deift_killip, c.discrete_heuristic))
    return rows
