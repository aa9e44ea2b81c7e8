"""Smooth radial functions of the arc-length coordinate s.

Used for conformal factors mu(s) and for warp deformations.  Each function
carries its first two derivatives because curvature and the channel
potential need C^2 data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialFunction:
    """f(s) together with f'(s), f''(s).

    ``support`` is a closed interval outside of which f vanishes identically
    (``None`` when f has unbounded support).
    """

    value: ArrayFn
    d1: ArrayFn
    d2: ArrayFn
    support: tuple[float, float] | None = None
    label: str = "f"

    def __call__(self, s):
        return self.value(np.asarray(s, dtype=float))

    def scaled(self, factor: float) -> "RadialFunction":
        f = float(factor)
        return RadialFunction(
            value=lambda s: f * self.value(s),
            d1=lambda s: f * self.d1(s),
            d2=lambda s: f * self.d2(s),
            support=self.support,
            label=f"{f:g}*{self.label}",
        )

    def sup_norm(self, grid: np.ndarray) -> float:
        return float(np.max(np.abs(self.value(np.asarray(grid, dtype=float)))))


def zero_function() -> RadialFunction:
    z = lambda s: np.zeros_like(np.asarray(s, dtype=float))  # noqa: E731
    return RadialFunction(z, z, z, support=(0.0, 0.0), label="0")


def smooth_bump(center: float = 0.0, half_width: float = 1.0, amplitude: float = 1.0) -> RadialFunction:
    """C-infinity bump ``amplitude * exp(1 - 1/(1-u^2))`` with u = (s-center)/half_width.

    Peak value is ``amplitude`` at ``center``; support is [center-hw, center+hw].
    """
    c, w, a = float(center), float(half_width), float(amplitude)
    if w <= 0:
        raise ValueError("half_width must be positive")

    def parts(s):
        s = np.asarray(s, dtype=float)
        u = (s - c) / w
        inside = np.abs(u) < 1.0
        one_m = np.where(inside, 1.0 - u * u, 1.0)
        g = np.where(inside, np.exp(1.0 - 1.0 / one_m), 0.0)
        hp = -2.0 * u / one_m**2
        hpp = -2.0 / one_m**2 - 8.0 * u * u / one_m**3
        return g, hp, hpp, inside

    def value(s):
        g, _, _, _ = parts(s)
        return a * g

    def d1(s):
        g, hp, _, inside = parts(s)
        return np.where(inside, a * g * hp / w, 0.0)

    def d2(s):
        g, hp, hpp, inside = parts(s)
        return np.where(inside, a * g * (hp * hp + hpp) / w**2, 0.0)

    return RadialFunction(value, d1, d2, support=(c - w, c + w),
                          label=f"bump(c={c:g},w={w:g},a={a:g})")


def power_tail(amplitude: float, exponent: float, scale: float = 1.0) -> RadialFunction:
    """``amplitude * (1 + (s/scale)^2)^(-exponent/2)``: smooth, decays like |s|^-exponent."""
    a, p, L = float(amplitude), float(exponent), float(scale)

    def value(s):
        s = np.asarray(s, dtype=float)
        return a * (1.0 + (s / L) ** 2) ** (-p / 2)

    def d1(s):
        s = np.asarray(s, dtype=float)
        q = 1.0 + (s / L) ** 2
        return -a * p * s / L**2 * q ** (-p / 2 - 1)

    def d2(s):
        s = np.asarray(s, dtype=float)
        q = 1.0 + (s / L) ** 2
        return -a * p / L**2 * (q ** (-p / 2 - 1) - (p + 2) * s * s / L**2 * q ** (-p / 2 - 2))

    return RadialFunction(value, d1, d2, support=None, label=f"tail(a={a:g},p={p:g})")


def from_samples(s: np.ndarray, f: np.ndarray, label: str = "sampled") -> RadialFunction:
    """Cubic-spline interpolant of samples; zero outside the sample range."""
    s = np.asarray(s, dtype=float)
    spline = CubicSpline(s, np.asarray(f, dtype=float), bc_type="natural")
    lo, hi = float(s[0]), float(s[-1])

    def wrap(nu):
        def fn(x):
            x = np.asarray(x, dtype=float)
            inside = (x >= lo) & (x <= hi)
            return np.where(inside, spline(np.clip(x, lo, hi), nu), 0.0)
        return fn

    return RadialFunction(wrap(0), wrap(1), wrap(2), support=(lo, hi), label=label)


@dataclass(frozen=True)
class SampledFunction:
    """A real function known only through samples on a strictly increasing grid.

    Values between samples are linearly interpolated, which keeps window
    infima conservative: the infimum over an interval is attained at a
    sample or at an interpolated endpoint.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape:
            raise ValueError("grid and values must be 1D arrays of equal length")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def of(cls, fn: Callable[[np.ndarray], np.ndarray], grid) -> "SampledFunction":
        g = np.asarray(grid, dtype=float)
        return cls(g, np.asarray(fn(g), dtype=float))

    def __call__(self, x):
        return np.interp(x, self.grid, self.values)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])
