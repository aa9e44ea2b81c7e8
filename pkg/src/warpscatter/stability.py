"""Perturbation families, the admissibility gate and S-data continuity.

A family g_eps deforms a warped g0 by a fixed radial function phi, either in
the warp (r -> r (1 + eps phi)) or conformally (g -> e^{2 eps phi} g).  For
each eps the gate of the metric ball is evaluated first; scattering data is
only computed for admissible members.  Closeness of the channel amplitudes on
a k grid and the openness indicator are the numerical stand-ins for strong
convergence of the scattering operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import is_two_sided_short_range, make_channel
from .functions import RadialFunction, SampledFunction
from .geometry import Constants, r0_function
from .metric_space import (DEFAULT_CHECK_GRID, Admissibility, MetricField, admissibility, conformal,
                           dtilde_1, dtilde_inf, warped)
from .profile import Profile, warp_perturbed
from .scatter1d import EnvelopeSpec, channel_potential, openness_of, scatter

DEVIATION_NOISE = 1e-4


@dataclass(frozen=True, eq=False)
class PerturbationFamily:
    base: Profile
    phi: RadialFunction
    mode: str = "warp"
    eps_grid: tuple[float, ...] = (1e-1, 1e-2, 1e-3)

    def __post_init__(self):
        if self.mode not in ("warp", "conformal"):
            raise ValueError(f"unknown deformation mode {self.mode!r}")
        eps = tuple(float(e) for e in self.eps_grid)
        if any(e < 0 for e in eps):
            raise ValueError("eps values must be non-negative")
        object.__setattr__(self, "eps_grid", tuple(sorted(eps, reverse=True)))

    @property
    def g0(self) -> MetricField:
        return warped(self.base)

    def member(self, eps: float) -> MetricField:
        if eps == 0:
            return self.g0
        if self.mode == "warp":
            return warped(warp_perturbed(self.base, self.phi, eps), f"warp eps={eps:g}")
        return conformal(self.base, self.phi.scaled(eps), f"conformal eps={eps:g}")

    def profile(self, eps: float) -> Profile:
        """The member written as a warped product (for channel reduction)."""
        return self.member(eps).as_warped_profile()


@dataclass
class BudgetRow:
    eps: float
    d_inf: float
    d1: float
    quadrature_error: float
    admissible: bool
    reasons: list[str] = field(default_factory=list)


def budget(family: PerturbationFamily, r0: SampledFunction, gamma: float,
           ball_eps: float = math.inf, constants: Constants = Constants(),
           check_grid=None) -> list[BudgetRow]:
    """(dtilde_inf, d1, admissible) for every eps, plus eps = 0.

    The d1 column is the raw stability budget; its multiplying constant is not
    estimated.  ``ball_eps`` is the d1 radius of the metric ball.
    """
    rows = []
    g0 = family.g0
    for eps in tuple(family.eps_grid) + ((0.0,) if 0.0 not in family.eps_grid else ()):
        g = family.member(eps)
        if eps == 0:
            rows.append(BudgetRow(0.0, 0.0, 0.0, 0.0, True))
            continue
        report = dtilde_1(g0, g, r0)
        report.d_inf = max(report.d_inf, dtilde_inf(g0, g, r0.grid))
        adm: Admissibility = admissibility(g0, g, gamma, ball_eps, r0, constants,
                                           DEFAULT_CHECK_GRID if check_grid is None else check_grid,
                                           report)
        rows.append(BudgetRow(eps, report.d_inf, report.d1, report.quadrature_error,
                              adm.admissible, adm.reasons))
    return rows


def bisect_gamma_threshold(family: PerturbationFamily, gamma: float, lo: float = 0.0,
                           hi: float = 1.0, tol: float = 1e-8) -> float:
    """Largest eps in [lo, hi] with dtilde_inf(g0, g_eps) <= gamma (monotone families)."""
    grid = family.base.grid
    sup = family.phi.support
    if sup is not None:
        grid = np.linspace(sup[0], sup[1], 4001)

    def d_inf(e):
        return dtilde_inf(family.g0, family.member(e), grid)

    if d_inf(hi) <= gamma:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if d_inf(mid) <= gamma:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class StabilityRow:
    eps: float
    d_inf: float
    d1: float
    admissible: bool
    deviation: dict[int, float] = field(default_factory=dict)
    indicator: dict[int, float] = field(default_factory=dict)
    reasons: list[str] = field(default_factory=list)


@dataclass
class StabilityReport:
    rows: list[StabilityRow]
    channels: tuple[int, ...]
    open_at_zero: dict[int, bool]
    unsupported: tuple[int, ...]
    trend: bool
    eps0: float | None
    gamma: float
    ball_eps: float
    v: float
    threshold: float
    constants: Constants

    def summary_lines(self) -> list[str]:
        lines = [
            f"constants: {self.constants.header()}",
            f"gamma={self.gamma:g} ball_eps={self.ball_eps:g} v={self.v:g} "
            f"openness_threshold={self.threshold:g}",
            "r0 = clamp(C * min(r, kappa^-1/2), (0, 1]) of g0",
            "budget column: raw dtilde_1 (trace-norm constant not estimated)",
            "proxy: per-channel max_k |t_eps - t_0| and openness indicators; "
            "weaker than strong convergence of the scattering operator",
        ]
        for m, ok in self.open_at_zero.items():
            if m in self.unsupported:
                lines.append(f"channel m={m}: not short range on both ends at eps=0 (no scattering data)")
                continue
            lines.append(f"channel m={m}: open at eps=0: {ok}" + ("" if ok else " (excluded)"))
        lines.append(f"trend verdict: {self.trend}")
        lines.append("empirical eps0: " + ("none" if self.eps0 is None else f"{self.eps0:g}")
                     + " (witness, not a certified constant)")
        return lines


def _columns(channels):
    cols = ["eps", "d_inf", "d1", "admissible"]
    for m in channels:
        cols += [f"dev_m{m}", f"indicator_m{m}"]
    return cols


def report_table(report: StabilityReport) -> tuple[list[str], list[list]]:
    rows = []
    for row in report.rows:
        vals = [row.eps, row.d_inf, row.d1, row.admissible]
        for m in report.channels:
            vals += [row.deviation.get(m, math.nan), row.indicator.get(m, math.nan)]
        rows.append(vals)
    return _columns(report.channels), rows


def _channel_data(profile: Profile, m: int, k_grid, v, envelope):
    ch = make_channel(profile, m, grid=np.linspace(-2.0, 2.0, 5))
    pot = channel_potential(ch)
    return scatter(pot, k_grid).t, openness_of(pot, v, envelope).indicator


def s_matrix_continuity(family: PerturbationFamily, channels, k_grid, v: float, gamma: float,
                        ball_eps: float = math.inf, envelope: EnvelopeSpec | None = None,
                        threshold: float = 0.5, constants: Constants = Constants(),
                        r0: SampledFunction | None = None, check_grid=None) -> StabilityReport:
    """Gate every eps, then compare channel amplitudes with eps = 0.

    Inadmissible members get no scattering columns, and neither do channels
    that are not short range on both ends of g0.  The trend verdict needs
    the deviations to decrease towards eps = 0 (within 1e-4) and every
    channel open at eps = 0 to stay open at each admissible eps.
    """
    envelope = envelope or EnvelopeSpec()
    channels = tuple(int(m) for m in channels)
    if r0 is None:
        r0 = r0_function(family.base, constants)
    gate = {row.eps: row for row in budget(family, r0, gamma, ball_eps, constants, check_grid)}
    unsupported = tuple(m for m in channels
                        if not is_two_sided_short_range(make_channel(family.base, m, np.zeros(1))))
    channels_sd = tuple(m for m in channels if m not in unsupported)
    base_t, base_ind = {}, {}
    for m in channels_sd:
        base_t[m], base_ind[m] = _channel_data(family.base, m, k_grid, v, envelope)
    open0 = {m: (m in channels_sd) and bool(base_ind[m] > threshold) for m in channels}
    rows = []
    for eps in sorted(gate, reverse=True):
        g = gate[eps]
        row = StabilityRow(eps, g.d_inf, g.d1, g.admissible, reasons=list(g.reasons))
        if g.admissible:
            prof = family.base if eps == 0 else family.profile(eps)
            for m in channels_sd:
                if eps == 0:
                    t, ind = base_t[m], base_ind[m]
                else:
                    t, ind = _channel_data(prof, m, k_grid, v, envelope)
                row.deviation[m] = float(np.max(np.abs(t - base_t[m])))
                row.indicator[m] = float(ind)
        rows.append(row)
    trend = _trend(rows, channels_sd, open0, threshold)
    eps0 = _eps0(rows, channels_sd, open0, threshold)
    return StabilityReport(rows, channels, open0, unsupported, trend, eps0, gamma, ball_eps, v,
                           threshold, constants)


def _trend(rows, channels, open0, threshold) -> bool:
    adm = [r for r in rows if r.admissible]
    for m in channels:
        devs = [r.deviation[m] for r in adm]
        if any(b > a + DEVIATION_NOISE for a, b in zip(devs[:-1], devs[1:])):
            return False
        if open0[m] and any(r.indicator[m] <= threshold for r in adm):
            return False
    return bool(adm)


def _eps0(rows, channels, open0, threshold) -> float | None:
    """Largest eps that is admissible with every smaller grid eps admissible and open."""
    best = None
    for row in sorted(rows, key=lambda r: r.eps):
        ok = row.admissible and all(row.indicator.get(m, 0.0) > threshold
                                    for m in channels if open0[m])
        if not ok:
            break
        best = row.eps
    return best
