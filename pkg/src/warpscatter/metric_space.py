"""Pointwise and integrated distances between Riemannian metrics.

For two positive definite forms g1, g2 the relative distortion A solves
g2(x, y) = g1(A x, y).  Its eigenvalues alpha_k drive everything here:

* d = max_k |ln alpha_k|                (a true distance)
* dtilde = 2 sinh(n d / 4)              (quasi-distance)
* rho = (prod alpha_k)^(-1/2)           (volume density)

Radial fields on R x S^{n-1} (warped and radially conformal metrics) are
handled in closed form on the cotangent side, which reduces the integrated
quasi-distance to a one-dimensional integral in s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .functions import RadialFunction, SampledFunction
from .geometry import Constants, LowerBoundCheck, lower_bounds_hold
from .profile import Profile, conformal_rewrite, evaluate
from .quadrature import adaptive_simpson, power_tail


@dataclass(frozen=True)
class PointwiseDistortion:
    A: np.ndarray
    alphas: np.ndarray


def _check_spd(g: np.ndarray, name: str) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim < 2 or g.shape[-1] != g.shape[-2]:
        raise DomainError(f"{name} must be a square matrix")
    if not np.allclose(g, np.swapaxes(g, -1, -2), rtol=1e-12, atol=1e-14):
        raise DomainError(f"{name} is not symmetric")
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"{name} is not positive definite") from exc


def distortion_eigenvalues(g1, g2) -> np.ndarray:
    """Eigenvalues of A with g2 = g1(A., .), batched over leading axes, ascending.

    Computed from the symmetric whitened matrix L^-1 G2 L^-T with G1 = L L^T.
    """
    L = _check_spd(g1, "g1")
    _check_spd(g2, "g2")
    g2 = np.asarray(g2, dtype=float)
    X = np.linalg.solve(L, g2)
    M = np.linalg.solve(L, np.swapaxes(X, -1, -2))
    M = 0.5 * (M + np.swapaxes(M, -1, -2))
    return np.linalg.eigvalsh(M)


def relative_distortion(g1, g2) -> PointwiseDistortion:
    g1 = np.asarray(g1, dtype=float)
    alphas = distortion_eigenvalues(g1, g2)
    A = np.linalg.solve(g1, np.asarray(g2, dtype=float))
    return PointwiseDistortion(A, alphas)


def d_from_alphas(alphas) -> np.ndarray:
    return np.max(np.abs(np.log(np.asarray(alphas, dtype=float))), axis=-1)


def dtilde_from_d(d, n: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 2.0 * np.sinh(n * np.asarray(d, dtype=float) / 4.0)


def pointwise_d(dist: PointwiseDistortion) -> float:
    return float(d_from_alphas(dist.alphas))


def pointwise_dtilde(dist: PointwiseDistortion, n: int | None = None) -> float:
    n = dist.alphas.shape[-1] if n is None else n
    return float(dtilde_from_d(pointwise_d(dist), n))


def density_rho(dist: PointwiseDistortion) -> float:
    return float(np.exp(-0.5 * np.sum(np.log(dist.alphas))))


def weak_triangle_factor(a, b):
    """mu(a, b) = a sqrt((b/2)^2 + 1) + b sqrt((a/2)^2 + 1)."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return a * np.sqrt((b / 2) ** 2 + 1) + b * np.sqrt((a / 2) ** 2 + 1)


def sphere_area(n: int) -> float:
    """Volume of the unit sphere S^{n-1}."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


# -- metric fields -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricField:
    """g = e^{2 mu(s)} (ds^2 + r(s)^2 g_sphere) on R x S^{n-1}.

    ``mu = None`` is the plain warped product of ``profile``.
    """

    profile: Profile
    mu: RadialFunction | None = None
    label: str = ""

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def kind(self) -> str:
        return "warped" if self.mu is None else "warped_conformal"

    def log_factors(self, s) -> tuple[np.ndarray, np.ndarray]:
        """(ln r(s), mu(s)) at coordinate s."""
        s = np.asarray(s, dtype=float)
        r = evaluate(self.profile, s)[0]
        mu = np.zeros_like(s) if self.mu is None else self.mu.value(s)
        return np.log(r), mu

    def as_warped_profile(self) -> Profile:
        """The same Riemannian manifold written as a warped product."""
        return self.profile if self.mu is None else conformal_rewrite(self.profile, self.mu)


def warped(profile: Profile, label: str = "") -> MetricField:
    return MetricField(profile, None, label or profile.description)


def conformal(base: Profile, mu: RadialFunction, label: str = "") -> MetricField:
    return MetricField(base, mu, label or f"e^(2 {mu.label}) g0")


def warped_conformal(profile: Profile, mu: RadialFunction, label: str = "") -> MetricField:
    return MetricField(profile, mu, label)


@dataclass(frozen=True, eq=False)
class PointwiseMetric:
    """General metric given only as an SPD-matrix callback x -> (N, n, n)."""

    fn: Callable[[np.ndarray], np.ndarray]
    n: int
    label: str = "pointwise"


def radial_log_alphas(g1: MetricField, g2: MetricField, s) -> tuple[np.ndarray, np.ndarray]:
    """ln of the cotangent distortion eigenvalues (radial, spherical) of g2 w.r.t. g1."""
    lr1, mu1 = g1.log_factors(s)
    lr2, mu2 = g2.log_factors(s)
    la_rad = -2.0 * (mu2 - mu1)
    la_sph = la_rad + 2.0 * (lr1 - lr2)
    return la_rad, la_sph


def radial_pointwise(g1: MetricField, g2: MetricField, s) -> tuple[np.ndarray, np.ndarray]:
    """(dtilde, rho) of g2 relative to g1 along s."""
    if g1.n != g2.n:
        raise DomainError("metric fields have different dimensions")
    n = g1.n
    la_rad, la_sph = radial_log_alphas(g1, g2, s)
    d = np.maximum(np.abs(la_rad), np.abs(la_sph))
    rho = np.exp(-0.5 * (la_rad + (n - 1) * la_sph))
    return dtilde_from_d(d, n), rho


def radial_alphas(g1: MetricField, g2: MetricField, s) -> np.ndarray:
    """Full eigenvalue list (N, n): radial eigenvalue then n-1 spherical copies."""
    la_rad, la_sph = radial_log_alphas(g1, g2, np.atleast_1d(s))
    n = g1.n
    return np.exp(np.column_stack([la_rad] + [la_sph] * (n - 1)))


@dataclass
class DistanceReport:
    d_inf: float
    d1: float
    rho_range: tuple[float, float]
    quadrature_error: float
    estimate: bool = False
    diagnostics: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [
            f"d_inf = {self.d_inf:.12g}",
            f"d1 = {self.d1:.12g}",
            f"rho_min = {self.rho_range[0]:.12g}",
            f"rho_max = {self.rho_range[1]:.12g}",
            f"quadrature_error = {self.quadrature_error:.3g}",
            f"estimate = {str(self.estimate).lower()}",
        ]
        out += [f"note = {d}" for d in self.diagnostics]
        return out


def dtilde_inf(g0, g, sample_grid) -> float:
    """sup of dtilde over the sample grid (+inf on overflow)."""
    grid = np.asarray(sample_grid, dtype=float)
    if isinstance(g0, PointwiseMetric) or isinstance(g, PointwiseMetric):
        alphas = distortion_eigenvalues(_pointwise_matrices(g0, grid), _pointwise_matrices(g, grid))
        vals = dtilde_from_d(d_from_alphas(alphas), alphas.shape[-1])
    else:
        vals = radial_pointwise(g0, g, grid)[0]
    return float(np.max(vals))


def _pointwise_matrices(g, x) -> np.ndarray:
    if isinstance(g, PointwiseMetric):
        return np.asarray(g.fn(x), dtype=float)
    raise DomainError("cannot mix radial fields and pointwise callbacks here")


def dtilde_1_integrand(g1: MetricField, g2: MetricField, r0: Callable) -> Callable:
    n = g1.n
    omega = sphere_area(n)

    def f(s):
        dt, rho = radial_pointwise(g1, g2, s)
        lr1, mu1 = g1.log_factors(s)
        vol = omega * np.exp(n * mu1 + (n - 1) * lr1)
        w = np.asarray(r0(s), dtype=float) ** (-(n + 2))
        return dt * w * (1.0 + rho) * vol

    return f


def dtilde_1(g1: MetricField, g2: MetricField, r0: SampledFunction, rtol: float = 1e-10,
             initial_step: float | None = None) -> DistanceReport:
    """Weighted L1 quasi-distance of two radial metric fields.

    Integrates dtilde * r0^-(n+2) * (1 + rho) against dvol_{g1} over the
    sample range of r0 with adaptive Simpson, then adds power-law tails
    beyond it (or reports +inf when the tail exponent is >= -1).
    """
    lo, hi = r0.domain
    f = dtilde_1_integrand(g1, g2, r0)
    step = initial_step
    if step is None:
        breaks = r0.grid
    else:
        breaks = np.union1d(np.arange(lo, hi, step), [hi])
    quad = adaptive_simpson(f, breaks, rtol=rtol)
    notes = []
    total = quad.value
    for side, edge in (("left", -lo), ("right", hi)):
        tail = power_tail(f, edge, side)
        if not tail.finite:
            notes.append(f"{side} tail: {tail.note}")
        total += tail.value
    grid = r0.grid
    dt, rho = radial_pointwise(g1, g2, grid)
    if not quad.converged:
        notes.append("adaptive quadrature hit its depth limit")
    rel = quad.error / abs(quad.value) if quad.value else quad.error
    return DistanceReport(float(np.max(dt)), float(total), (float(rho.min()), float(rho.max())),
                          float(rel), False, notes)


def dtilde_1_pointwise(g1: PointwiseMetric, g2: PointwiseMetric, points, weights, r0_values) -> DistanceReport:
    """Sample-measure estimate for general metrics: sum of w_i dtilde r0^-(n+2) (1 + rho).

    ``weights`` must already carry the g1 volume density of the points.
    """
    G1, G2 = np.asarray(g1.fn(points)), np.asarray(g2.fn(points))
    alphas = distortion_eigenvalues(G1, G2)
    n = alphas.shape[-1]
    dt = dtilde_from_d(d_from_alphas(alphas), n)
    rho = np.exp(-0.5 * np.sum(np.log(alphas), axis=-1))
    r0v = np.asarray(r0_values, dtype=float)
    val = float(np.sum(np.asarray(weights) * dt * r0v ** (-(n + 2)) * (1 + rho)))
    return DistanceReport(float(dt.max()), val, (float(rho.min()), float(rho.max())), float("nan"),
                          True, ["general metric: d1 integrated against a user sample measure"])


@dataclass
class Admissibility:
    admissible: bool
    report: DistanceReport
    bounds_checked: bool
    bounds: LowerBoundCheck | None = None
    reasons: list[str] = field(default_factory=list)


DEFAULT_CHECK_GRID = np.linspace(-20.0, 20.0, 81)


def _own_coordinate(g: MetricField, s: np.ndarray) -> np.ndarray:
    """Map s to the arc-length coordinate of the warped rewrite of g."""
    if g.mu is None or g.mu.support is None:
        return s
    a, b = g.mu.support
    fine = np.linspace(a, b, 4001)
    vals = np.exp(g.mu.value(fine))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(fine))])
    inner = a + np.interp(s, fine, cum)
    return np.where(s <= a, s, np.where(s >= b, s + cum[-1] - (b - a), inner))


def admissibility(g0: MetricField, g, gamma: float, eps: float, r0: SampledFunction,
                  constants: Constants = Constants(), check_grid=None,
                  report: DistanceReport | None = None) -> Admissibility:
    """Membership of g in the ball {dtilde_inf <= gamma, d1 <= eps, lower bounds with r0}."""
    reasons = []
    if isinstance(g, PointwiseMetric):
        raise DomainError("use admissibility_pointwise for general metrics")
    if report is None:
        report = dtilde_1(g0, g, r0)
        report.d_inf = max(report.d_inf, dtilde_inf(g0, g, r0.grid))
    ok = True
    if not report.d_inf <= gamma:
        ok = False
        reasons.append(f"d_inf={report.d_inf:.6g} > gamma={gamma:g}")
    if not report.d1 <= eps:
        ok = False
        reasons.append(f"d1={report.d1:.6g} > eps={eps:g}")
    check = None
    if ok:
        grid = DEFAULT_CHECK_GRID if check_grid is None else np.asarray(check_grid, dtype=float)
        prof = g.as_warped_profile()
        t = _own_coordinate(g, grid)
        r0_at = SampledFunction(t, r0(grid)) if t.size > 1 else r0
        check = lower_bounds_hold(prof, r0_at, t, constants)
        if not check.holds:
            ok = False
            reasons.append(
                f"lower bounds fail: iota/r0 >= {check.worst_iota_ratio:.4g} "
                f"(need {constants.iota_factor:g}), ricci margin {check.worst_ricci_margin:.4g}")
    return Admissibility(ok, report, check is not None, check, reasons)


def admissibility_pointwise(g0: PointwiseMetric, g: PointwiseMetric, gamma: float, eps: float,
                            points, weights, r0_values) -> Admissibility:
    """Distance part of the gate for general metrics; curvature bounds stay unchecked."""
    report = dtilde_1_pointwise(g0, g, points, weights, r0_values)
    ok = report.d_inf <= gamma and report.d1 <= eps
    reasons = ["bounds unchecked: lower bounds are not computable from a pointwise callback"]
    return Admissibility(bool(ok), report, False, None, reasons)
