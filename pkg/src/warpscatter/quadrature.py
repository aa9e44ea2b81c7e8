"""Vectorized adaptive Simpson quadrature with power-law tail handling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int
    converged: bool


def adaptive_simpson(f: Callable[[np.ndarray], np.ndarray], breakpoints, rtol: float = 1e-10,
                     atol: float = 1e-14, max_depth: int = 30, min_depth: int = 2) -> QuadResult:
    """Integrate ``f`` over [breakpoints[0], breakpoints[-1]].

    ``breakpoints`` define the initial partition; put them at kinks of the
    integrand.  Every interval is bisected until the Simpson/two-panel
    discrepancy is below its share of the tolerance on two consecutive levels
    (and the depth is at least ``min_depth``), so that a panel cannot pass by
    a chance agreement of the two rules.  The accepted panels are
    Richardson-corrected; the reported error is the sum of the
    discrepancies / 15 (the usual step-halving estimate).
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    a, b = pts[:-1], pts[1:]
    total_len = float(pts[-1] - pts[0])
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    evals = 2 * a.size + a.size
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    scale = abs(float(np.sum(whole)))
    tol = max(atol, rtol * scale)

    value, error = 0.0, 0.0
    converged = True
    parent_ok = np.zeros(a.size, dtype=bool)
    for depth in range(max_depth + 1):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        evals += 2 * a.size
        left = (m - a) / 6.0 * (fa + 4 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4 * frm + fb)
        halves = left + right
        diff = halves - whole
        budget = tol * (b - a) / total_len
        ok = np.abs(diff) <= 15.0 * budget
        done = ok & parent_ok & (depth >= min_depth)
        if depth == max_depth:
            converged = bool(np.all(done))
            done = np.ones_like(done)
        value += float(np.sum(halves[done] + diff[done] / 15.0))
        error += float(np.sum(np.abs(diff[done]))) / 15.0
        keep = ~done
        if not np.any(keep):
            break
        a, m, b = a[keep], m[keep], b[keep]
        fa, fm, fb = fa[keep], fm[keep], fb[keep]
        lm, rm, flm, frm = lm[keep], rm[keep], flm[keep], frm[keep]
        left, right = left[keep], right[keep]
        parent_ok = np.concatenate([ok[keep], ok[keep]])
        a, m, b, fa, fm, fb, whole = (
            np.concatenate([a, m]), np.concatenate([lm, rm]), np.concatenate([m, b]),
            np.concatenate([fa, fm]), np.concatenate([flm, frm]), np.concatenate([fm, fb]),
            np.concatenate([left, right]),
        )
    return QuadResult(value, error, evals, converged)


@dataclass(frozen=True)
class TailEstimate:
    value: float
    exponent: float
    finite: bool
    note: str


def power_tail(f: Callable[[np.ndarray], np.ndarray], edge: float, side: str,
               margin: float = 0.05, decades: float = 1.0, samples: int = 41) -> TailEstimate:
    """Estimate the integral of f beyond |s| = edge from a log-log fit.

    The integrand is sampled on the last ``decades`` before the edge.  A fitted
    exponent p < -1 - margin certifies convergence and the tail is
    extrapolated as f(edge) * edge / (-p - 1); otherwise the integral is
    declared divergent.
    """
    sign = 1.0 if side == "right" else -1.0
    x = np.geomspace(edge * 10.0 ** (-decades), edge, samples)
    vals = np.abs(np.asarray(f(sign * x), dtype=float))
    pos = vals > 0
    if not pos[-3:].any():
        return TailEstimate(0.0, -np.inf, True, "integrand vanishes near the edge")
    p = float(np.polyfit(np.log(x[pos]), np.log(vals[pos]), 1)[0])
    if p < -1.0 - margin:
        return TailEstimate(float(vals[-1] * edge / (-p - 1.0)), p, True,
                            f"tail exponent {p:.3f}")
    return TailEstimate(np.inf, p, False, f"tail exponent {p:.3f} >= -1: integral diverges")
