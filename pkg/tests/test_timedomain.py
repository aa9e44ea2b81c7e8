import math

import numpy as np
import pytest

from warpscatter.errors import AliasingError, InstabilityError
from warpscatter.scatter1d import EnvelopeSpec
from warpscatter.timedomain import (asymptotic_masses, envelope_values, evolve, free_evolution,
                                    make_state, snapshot_columns, stationary_phase_check,
                                    symmetric_grid)


def mean_position(packet):
    dens = np.abs(packet.psi) ** 2
    return float(np.sum(packet.grid * dens) / np.sum(dens))


def test_envelope_matches_closed_form_gaussian():
    env = EnvelopeSpec(1.0, 2.0, kind="gaussian")
    x = np.linspace(-5, 7, 41)
    # inverse transform of exp(-q^2 / (2 sigma^2)) is sigma exp(-sigma^2 x^2 / 2)
    # (the spectrum is cut at 6 sigma, which leaves an error of order e^-18)
    exact = 2.0 * np.exp(-2.0 * (x - 1.0) ** 2)
    assert np.allclose(envelope_values(env, x), exact, atol=1e-7)


def test_free_packet_moves_at_group_velocity():
    grid = symmetric_grid(40.0, 0.01)
    v, T = 5.0, 1.0
    packet = make_state("plane_mod", v, EnvelopeSpec(-10.0, 1.0), grid)
    x0 = mean_position(packet)
    out = evolve(np.zeros_like(grid), packet, T, 0.001)
    assert out.time == pytest.approx(T)
    moved = mean_position(out) - x0
    assert moved == pytest.approx(2 * v * T, rel=1e-3)


def test_free_packet_converges_to_exact_evolution():
    # halving h and dt together cuts the error by about 4 (second order)
    env = EnvelopeSpec(-10.0, 1.0)
    errs = []
    for h in (0.01, 0.005):
        grid = symmetric_grid(80.0, h)
        out = evolve(np.zeros_like(grid), make_state("plane_mod", 3.0, env, grid), 1.0, h / 10)
        exact = free_evolution(env, 3.0, grid, 1.0)
        exact /= math.sqrt(np.sum(np.abs(exact) ** 2) * h)
        errs.append(math.sqrt(np.sum(np.abs(out.psi - exact) ** 2) * h))
    assert errs[0] < 2e-3
    assert errs[0] / errs[1] > 3.5


def test_norm_drift_per_thousand_steps():
    grid = symmetric_grid(30.0, 0.02)
    V = 5.0 * np.exp(-grid**2)
    packet = make_state("plane_mod", 4.0, EnvelopeSpec(-10.0, 1.0), grid)
    out = evolve(V, packet, 1000 * 0.002, 0.002)
    assert abs(out.norm() ** 2 - packet.norm() ** 2) < 1e-8


def test_odd_state():
    grid = symmetric_grid(30.0, 0.01)
    packet = make_state("odd_dirichlet", 4.0, EnvelopeSpec(-10.0, 1.0), grid)
    assert np.allclose(packet.psi, -packet.psi[::-1], atol=1e-12)
    assert abs(packet.psi[grid.size // 2]) < 1e-12
    assert packet.norm() == pytest.approx(1.0)
    # centered at 0 the odd part is 2i sin(vs) phi_0(s)
    env = EnvelopeSpec(0.0, 1.0)
    centered = make_state("odd_dirichlet", 4.0, env, grid)
    ref = 2j * np.sin(4.0 * grid) * envelope_values(env, grid)
    ref /= math.sqrt(np.sum(np.abs(ref) ** 2) * 0.01)
    assert np.allclose(centered.psi, ref, atol=1e-12)
    # with v = 0 as well the envelope is even and nothing is left
    with pytest.raises(ValueError, match="vanishes"):
        make_state("odd_dirichlet", 0.0, env, grid)


def test_state_spectrum_peaks_at_v():
    grid = symmetric_grid(50.0, 0.02)
    packet = make_state("plane_mod", 7.0, EnvelopeSpec(0.0, 1.0), grid)
    k = 2 * math.pi * np.fft.fftfreq(grid.size, 0.02)
    assert abs(k[np.argmax(np.abs(np.fft.fft(packet.psi)))] - 7.0) < 2 * math.pi / 100


def test_even_potential_keeps_parity_and_wall_is_consistent():
    grid = symmetric_grid(30.0, 0.02)
    V = 3.0 * np.exp(-grid**2)
    packet = make_state("odd_dirichlet", 4.0, EnvelopeSpec(-8.0, 1.0), grid)
    full = evolve(V, packet, 2.0, 0.002)
    walled = evolve(V, packet, 2.0, 0.002, wall=True)
    assert np.max(np.abs(full.psi - walled.psi)) < 1e-8
    m = asymptotic_masses(full, 5.0)
    assert m.mass_left == pytest.approx(m.mass_right, abs=1e-12)


def test_aliasing_refused():
    with pytest.raises(AliasingError, match="step below"):
        make_state("plane_mod", 100.0, EnvelopeSpec(), symmetric_grid(10.0, 0.05))


def test_unstable_step_refused():
    grid = symmetric_grid(10.0, 0.01)
    packet = make_state("plane_mod", 5.0, EnvelopeSpec(), grid)
    with pytest.raises(InstabilityError):
        evolve(np.zeros_like(grid), packet, 1.0, 0.1)
    with pytest.raises(InstabilityError):
        evolve(np.full_like(grid, 100.0), packet, 1.0, 0.01)


def test_mass_bookkeeping():
    grid = symmetric_grid(30.0, 0.02)
    packet = make_state("plane_mod", 4.0, EnvelopeSpec(-20.0, 1.0), grid)
    m = asymptotic_masses(packet, 5.0)
    # the envelope of a compact spectrum has slowly decaying spatial tails
    assert m.mass_left == pytest.approx(1.0, abs=1e-3)
    assert m.mass_left + m.mass_center + m.mass_right == pytest.approx(1.0, abs=1e-12)
    assert not any(v < 0 for v in (m.mass_left, m.mass_right, m.mass_center))
    assert set(snapshot_columns(packet)) == {"s", "re_psi", "im_psi", "abs_psi_sq"}


def test_stationary_phase_decay():
    env = EnvelopeSpec(0.0, 0.5, sharpness=4.0)
    res = stationary_phase_check(env, 1.5, (10.0, 20.0, 40.0), (0.5, 2.5))
    assert res.passes and res.order >= 3
    assert not res.inconclusive
    assert all(r > 2 for r in res.halving_ratios)
    # inside the cone the packet only disperses like t^-1/2
    assert res.inside_order < 1


def test_stationary_phase_requires_cone_around_spectrum():
    with pytest.raises(ValueError):
        stationary_phase_check(EnvelopeSpec(0.0, 0.5), 1.5, (10.0, 20.0), (1.2, 2.5))
