"""Wave packets on the line: Crank-Nicolson evolution and mass bookkeeping.

The discrete Hamiltonian is the three-point Laplacian plus the sampled
potential with Dirichlet ends; Crank-Nicolson makes each step a Cayley
transform of that Hermitian matrix, so the norm is conserved up to round-off.
Free evolution for the stationary-phase check is done exactly in Fourier
space instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import AliasingError, InstabilityError
from .scatter1d import EnvelopeSpec

BAND_FRACTION = 0.8
DRIFT_ABORT = 1e-4


@dataclass(frozen=True, eq=False)
class WavePacket:
    grid: np.ndarray
    psi: np.ndarray
    v: float
    envelope: EnvelopeSpec
    kind: str = "plane_mod"
    time: float = 0.0

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.psi) ** 2) * self.step))


def symmetric_grid(L: float, step: float) -> np.ndarray:
    """Uniform grid on [-L, L] containing s = 0."""
    half = int(round(L / step))
    return step * np.arange(-half, half + 1, dtype=float)


def envelope_values(envelope: EnvelopeSpec, x: np.ndarray, nodes: int = 256) -> np.ndarray:
    """phi_0(x) = (2 pi)^{-1/2} int phi_0-hat(q) e^{iq(x - center)} dq by Gauss-Legendre."""
    q, w = np.polynomial.legendre.leggauss(nodes)
    q = envelope.support * q
    w = envelope.support * w * envelope.spectrum(q)
    out = np.empty(x.shape, dtype=complex)
    for i in range(0, x.size, 4096):
        xs = x[i:i + 4096] - envelope.center
        out[i:i + 4096] = np.exp(1j * np.outer(xs, q)) @ w
    return out / math.sqrt(2 * math.pi)


def make_state(kind: str, v: float, envelope: EnvelopeSpec, grid) -> WavePacket:
    """plane_mod: e^{ivs} phi_0(s); odd_dirichlet: phi_v(s) - phi_v(-s).

    Both are normalized in the discrete L^2 norm.  The odd state needs a grid
    symmetric about 0.
    """
    g = np.asarray(grid, dtype=float)
    h = float(g[1] - g[0])
    band = abs(v) + envelope.support
    limit = BAND_FRACTION * math.pi / h
    if band >= limit:
        raise AliasingError(f"spectral band |k| <= {band:g} exceeds 0.8 pi/h = {limit:g}; "
                            f"use a step below {BAND_FRACTION * math.pi / band:.4g}")

    def phi_v(x):
        return np.exp(1j * v * x) * envelope_values(envelope, x)

    if kind == "plane_mod":
        psi = phi_v(g)
    elif kind == "odd_dirichlet":
        if not np.allclose(g, -g[::-1], rtol=0, atol=1e-12 * max(1.0, abs(g[0]))):
            raise ValueError("odd_dirichlet needs a grid symmetric about 0")
        psi = phi_v(g) - phi_v(-g)
        psi[np.abs(g) < 0.5 * h] = 0.0
    else:
        raise ValueError(f"unknown state kind {kind!r}")
    nrm = math.sqrt(np.sum(np.abs(psi) ** 2) * h)
    if nrm <= 1e-10 * math.sqrt(np.sum(np.abs(phi_v(g)) ** 2) * h):
        raise ValueError("the state vanishes on the grid (odd part of an even envelope?)")
    return WavePacket(g, psi / nrm, float(v), envelope, kind)


def _hamiltonian(n: int, h: float, V: np.ndarray) -> sparse.csc_matrix:
    off = np.full(n - 1, -1.0 / h**2)
    return sparse.diags([off, 2.0 / h**2 + V, off], [-1, 0, 1], format="csc")


def evolve(potential, packet: WavePacket, T: float, dt: float, wall: bool = False,
           check_every: int = 100) -> WavePacket:
    """Crank-Nicolson from packet.time to packet.time + T.

    ``potential`` is a callable or an array sampled on the packet grid.  With
    ``wall=True`` a Dirichlet condition is imposed at s = 0, which decouples
    the two half-lines.
    """
    g = packet.grid
    h = packet.step
    V = np.asarray(potential(g) if callable(potential) else potential, dtype=float)
    if V.shape != g.shape:
        raise ValueError("potential samples must match the packet grid")
    k_max = abs(packet.v) + packet.envelope.support
    if dt * float(np.max(np.abs(V))) >= 0.5:
        raise InstabilityError(f"dt * max|V| = {dt * np.max(np.abs(V)):.3g} must stay below 0.5")
    if dt * k_max**2 >= 1.0:
        raise InstabilityError(f"dt * k_max^2 = {dt * k_max**2:.3g} must stay below 1")
    steps = int(round(T / dt))
    if steps < 0:
        raise ValueError("T must be non-negative")
    H = _hamiltonian(g.size, h, V).tolil()
    if wall:
        z = int(np.argmin(np.abs(g)))
        if abs(g[z]) > 1e-9 * h:
            raise ValueError("the Dirichlet wall needs a grid node at s = 0")
        H[z, :] = 0.0
        H[:, z] = 0.0
    H = H.tocsc()
    eye = sparse.identity(g.size, dtype=complex, format="csc")
    A = (eye + 0.5j * dt * H).tocsc()
    B = (eye - 0.5j * dt * H).tocsr()
    lu = splu(A)
    psi = packet.psi.astype(complex).copy()
    if wall:
        psi[z] = 0.0
    n0 = float(np.sum(np.abs(psi) ** 2))
    for i in range(1, steps + 1):
        psi = lu.solve(B @ psi)
        if i % check_every == 0 or i == steps:
            drift = abs(float(np.sum(np.abs(psi) ** 2)) / n0 - 1.0) if n0 > 0 else 0.0
            if not np.isfinite(drift) or drift > DRIFT_ABORT:
                raise InstabilityError(f"norm drift {drift:.3g} after {i} steps (dt={dt:g})")
    return replace(packet, psi=psi, time=packet.time + steps * dt)


@dataclass(frozen=True)
class MassReport:
    t_final: float
    mass_left: float
    mass_right: float
    mass_center: float
    norm_drift: float
    settled: bool

    def lines(self) -> list[str]:
        return [f"t_final={self.t_final:.12g}", f"mass_left={self.mass_left:.12g}",
                f"mass_right={self.mass_right:.12g}", f"mass_center={self.mass_center:.12g}",
                f"norm_drift={self.norm_drift:.3g}", f"settled={self.settled}"]


def asymptotic_masses(packet: WavePacket, split_radius: float = 20.0,
                      reference_norm: float = 1.0) -> MassReport:
    """|psi|^2 mass left of, inside and right of [-split_radius, split_radius]."""
    g = packet.grid
    dens = np.abs(packet.psi) ** 2 * packet.step
    total = float(dens.sum())
    left = float(dens[g < -split_radius].sum())
    right = float(dens[g > split_radius].sum())
    center = total - left - right
    drift = abs(total - reference_norm**2)
    return MassReport(packet.time, left, right, center, drift, center < 0.05)


def snapshot_columns(packet: WavePacket) -> dict[str, np.ndarray]:
    return {"s": packet.grid, "re_psi": packet.psi.real, "im_psi": packet.psi.imag,
            "abs_psi_sq": np.abs(packet.psi) ** 2}


# -- free evolution and stationary phase --------------------------------------

def free_evolution(envelope: EnvelopeSpec, v: float, x, t: float, nodes: int = 512) -> np.ndarray:
    """Exact free solution started from e^{ivs} phi_0(s), as produced by make_state.

    psi(x, t) = (2 pi)^{-1/2} int phi_0-hat(q) e^{i((v + q) x - q c - (v + q)^2 t)} dq.
    """
    q, w = np.polynomial.legendre.leggauss(nodes)
    q = envelope.support * q
    w = envelope.support * w * envelope.spectrum(q)
    k = v + q
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.exp(1j * (np.outer(x, k) - q * envelope.center - k * k * t))
    return phase @ w / math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class StationaryPhaseResult:
    order: float
    inside_order: float
    passes: bool
    inconclusive: bool
    times: tuple[float, ...]
    off_cone_sup: tuple[float, ...]
    halving_ratios: tuple[float, ...]


def stationary_phase_check(envelope: EnvelopeSpec, v: float, times, cone: tuple[float, float],
                           required_order: float = 3.0, noise_floor: float = 1e-13,
                           samples: int = 2001, reach: float = 2.0) -> StationaryPhaseResult:
    """Decay of the free packet outside {x : x / (2t) in cone}.

    Each side of the cone is handled separately: for every t the supremum of
    |psi| over x / (2t) within ``reach`` cone widths outside the cone is
    paired with 1 + |x*| + t at its location, and the slope of log sup
    against log(1 + |x*| + t) gives a decay order.  The reported order is the
    smaller of the two sides.  The inside-cone order is fitted against
    log(1 + t) from the sup over the cone.
    """
    a, b = cone
    lo_k, hi_k = v - envelope.support, v + envelope.support
    if not (a < lo_k and hi_k < b):
        raise ValueError(f"spectrum [{lo_k:g}, {hi_k:g}] is not strictly inside the cone {cone}")
    width = b - a
    ts = np.asarray(times, dtype=float)
    side_sups = {"left": [], "right": []}
    side_locs = {"left": [], "right": []}
    inner = []
    for t in ts:
        for side, (u0, u1) in (("left", (a - reach * width, a)), ("right", (b, b + reach * width))):
            x = envelope.center + 2 * t * np.linspace(u0, u1, samples)
            vals = np.abs(free_evolution(envelope, v, x, t))
            i = int(np.argmax(vals))
            side_sups[side].append(float(vals[i]))
            side_locs[side].append(float(abs(x[i])))
        x_in = envelope.center + 2 * t * np.linspace(a, b, samples)
        inner.append(float(np.max(np.abs(free_evolution(envelope, v, x_in, t)))))
    orders = []
    for side in ("left", "right"):
        sup = np.asarray(side_sups[side])
        scale = np.log(1.0 + np.asarray(side_locs[side]) + ts)
        orders.append(-float(np.polyfit(scale, np.log(np.maximum(sup, 1e-300)), 1)[0]))
    sups = np.maximum(side_sups["left"], side_sups["right"])
    inconclusive = bool(np.any(sups <= noise_floor))
    order = min(orders)
    inside = -float(np.polyfit(np.log(1.0 + ts), np.log(inner), 1)[0])
    ratios = tuple(float(sups[i] / sups[i + 1]) for i in range(len(ts) - 1))
    return StationaryPhaseResult(order, inside, (order >= required_order) and not inconclusive,
                                 inconclusive, tuple(float(t) for t in ts),
                                 tuple(float(x) for x in sups), ratios)
