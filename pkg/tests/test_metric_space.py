import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from oracles import dtilde_ref, random_spd, rho_ref
from warpscatter.errors import DomainError
from warpscatter.functions import RadialFunction, smooth_bump
from warpscatter.geometry import r0_function
from warpscatter.metric_space import (PointwiseMetric, admissibility, admissibility_pointwise, conformal,
                                      d_from_alphas, density_rho, distortion_eigenvalues, dtilde_1,
                                      dtilde_from_d, dtilde_inf, pointwise_d, pointwise_dtilde,
                                      radial_alphas, radial_pointwise, relative_distortion, sphere_area,
                                      warped, weak_triangle_factor)
from warpscatter.profile import evaluate, horn_euclidean
from warpscatter.stability import PerturbationFamily


def test_diagonal_example():
    dist = relative_distortion(np.diag([1.0, 1.0]), np.diag([4.0, 1.0]))
    assert np.allclose(dist.alphas, [1.0, 4.0])
    assert np.allclose(dist.A, np.diag([4.0, 1.0]))
    assert pointwise_d(dist) == pytest.approx(math.log(4))
    assert pointwise_dtilde(dist) == pytest.approx(1.5)
    assert density_rho(dist) == pytest.approx(0.5)


def test_non_spd_rejected():
    with pytest.raises(DomainError):
        distortion_eigenvalues(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(DomainError):
        distortion_eigenvalues(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2))


@pytest.mark.parametrize("n", [2, 3, 5])
def test_eigenvalues_match_scipy_pencil(n):
    rng = np.random.default_rng(n)
    g1, g2 = random_spd(rng, 200, n), random_spd(rng, 200, n)
    al = distortion_eigenvalues(g1, g2)
    assert np.allclose(dtilde_from_d(d_from_alphas(al), n), dtilde_ref(g1, g2), rtol=1e-10)
    assert np.allclose(np.exp(-0.5 * np.log(al).sum(-1)), rho_ref(g1, g2), rtol=1e-10)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 5), seed=st.integers(0, 2**32 - 1), spread=st.floats(0.05, 2.0))
def test_symmetry_and_definiteness(n, seed, spread):
    rng = np.random.default_rng(seed)
    g1, g2 = random_spd(rng, 4, n, spread), random_spd(rng, 4, n, spread)
    d12 = d_from_alphas(distortion_eigenvalues(g1, g2))
    d21 = d_from_alphas(distortion_eigenvalues(g2, g1))
    assert np.allclose(d12, d21, rtol=1e-10, atol=1e-12)
    assert np.all(d_from_alphas(distortion_eigenvalues(g1, g1)) < 1e-12)
    assert np.all(d12 > 0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 5), seed=st.integers(0, 2**32 - 1), spread=st.floats(0.05, 1.5))
def test_weak_triangle_and_sandwich(n, seed, spread):
    rng = np.random.default_rng(seed)
    g1, g2, g3 = (random_spd(rng, 8, n, spread) for _ in range(3))

    def dt(a, b):
        return dtilde_from_d(d_from_alphas(distortion_eigenvalues(a, b)), n)

    a, b, c = dt(g1, g2), dt(g2, g3), dt(g1, g3)
    assert np.all(c <= weak_triangle_factor(a, b) * (1 + 1e-12) + 1e-12)
    rho = np.exp(-0.5 * np.log(distortion_eigenvalues(g1, g2)).sum(-1))
    assert np.all((a + 1) ** -2 <= rho * (1 + 1e-12))
    assert np.all(rho <= (a + 1) ** 2 * (1 + 1e-12))


@settings(max_examples=100, deadline=None)
@given(a=st.floats(0, 1), b=st.floats(0, 1), gamma=st.floats(0, 1))
def test_bounded_triangle_constant(a, b, gamma):
    # inside a ball of radius gamma the factor is at most (1 + gamma/2)(a + b)
    a, b = min(a, gamma), min(b, gamma)
    assert weak_triangle_factor(a, b) <= (1 + gamma / 2) * (a + b) + 1e-15


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 5), seed=st.integers(0, 2**32 - 1), mu=st.floats(-2, 2))
def test_conformal_identity(n, seed, mu):
    g = random_spd(np.random.default_rng(seed), 3, n)
    dt = dtilde_from_d(d_from_alphas(distortion_eigenvalues(g, math.exp(2 * mu) * g)), n)
    assert np.allclose(dt, 2 * math.sinh(n * abs(mu) / 2), rtol=1e-12, atol=1e-12)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2)


def _example(eps, mode="warp"):
    p = horn_euclidean(L=40, grid_step=0.05)
    fam = PerturbationFamily(p, smooth_bump(0.0, 2.0), mode, (eps,))
    return p, fam.g0, fam.member(eps)


def test_radial_alphas_match_matrices():
    p, g0, g = _example(0.1)
    s = np.linspace(-1.5, 1.5, 7)
    r0, r1 = evaluate(p, s)[0], evaluate(g.profile, s)[0]
    # cotangent forms in the orthonormal frame of (ds, r0 dtheta)
    G0 = np.repeat(np.eye(2)[None], s.size, axis=0)
    G1 = np.zeros_like(G0)
    G1[:, 0, 0] = 1.0
    G1[:, 1, 1] = (r0 / r1) ** 2
    assert np.allclose(np.sort(radial_alphas(g0, g, s), axis=1), distortion_eigenvalues(G0, G1),
                       rtol=1e-12)


def test_warp_d1_matches_quad_oracle():
    eps = 0.05
    p, g0, g = _example(eps)
    r0 = r0_function(p)
    phi = smooth_bump(0.0, 2.0)

    def integrand(s):
        r = evaluate(p, s)[0]
        ratio = 1 + eps * phi(s)
        dt = 2 * math.sinh(2 * abs(math.log(ratio)) / 2)   # n = 2, d = 2|ln ratio|
        rho = ratio                                        # volume ratio in n = 2
        return dt * r0(s) ** -4 * (1 + rho) * 2 * math.pi * r

    oracle = quad(integrand, -2, 2, points=[-1, 0, 1], epsabs=1e-13, limit=400)[0]
    assert dtilde_1(g0, g, r0).d1 == pytest.approx(oracle, rel=1e-7)


@pytest.mark.parametrize("mode", ["warp", "conformal"])
def test_d1_swap_symmetry_and_step_halving(mode):
    p, g0, g = _example(0.01, mode)
    r0 = r0_function(p)
    a = dtilde_1(g0, g, r0, initial_step=0.5).d1
    b = dtilde_1(g0, g, r0, initial_step=0.25).d1
    c = dtilde_1(g, g0, r0, initial_step=0.5).d1
    assert abs(a - b) < 1e-4 * a
    assert abs(a - c) < 1e-10 * a


def test_d1_zero_for_identical_fields():
    p, g0, _ = _example(0.1)
    assert dtilde_1(g0, g0, r0_function(p)).d1 == 0.0


def test_conformal_pointwise_identity_on_field():
    p = horn_euclidean(L=20, grid_step=0.05)
    mu = smooth_bump(0.0, 1.0, 0.2)
    s = np.linspace(-0.9, 0.9, 19)
    dt, rho = radial_pointwise(warped(p), conformal(p, mu), s)
    assert np.allclose(dt, 2 * np.sinh(2 * np.abs(mu(s)) / 2), rtol=1e-12)
    assert np.allclose(rho, np.exp(2 * mu(s)), rtol=1e-12)   # dvol ratio e^{n mu}


def test_d1_divergent_tail_reported():
    p = horn_euclidean(L=40, grid_step=0.05)
    # a conformal factor that never decays makes the weighted integral diverge
    const = RadialFunction(lambda s: 0.1 + 0 * s, lambda s: 0 * s, lambda s: 0 * s, None, "0.1")
    rep = dtilde_1(warped(p), conformal(p, const), r0_function(p))
    assert rep.d1 == math.inf
    assert any("diverges" in note for note in rep.diagnostics)


def test_admissibility_of_g0_itself():
    p, g0, _ = _example(0.1)
    adm = admissibility(g0, g0, 0.5, math.inf, r0_function(p))
    assert adm.admissible and adm.bounds_checked
    assert adm.report.d_inf == 0.0


def test_admissibility_gamma_gate():
    p, g0, g = _example(0.1)
    r0 = r0_function(p)
    assert dtilde_inf(g0, g, r0.grid) == pytest.approx(1.1 - 1 / 1.1, rel=1e-3)  # 2 sinh(ln 1.1)
    assert not admissibility(g0, g, 0.05, math.inf, r0).admissible
    assert admissibility(g0, g, 0.5, math.inf, r0).admissible
    tight = admissibility(g0, g, 0.5, 1.0, r0)
    assert not tight.admissible and any("d1=" in r for r in tight.reasons)


def test_pointwise_admissibility_leaves_bounds_unchecked():
    g0 = PointwiseMetric(lambda x: np.repeat(np.eye(3)[None], len(x), 0), 3)
    g1 = PointwiseMetric(lambda x: np.repeat(1.01 * np.eye(3)[None], len(x), 0), 3)
    pts = np.zeros((5, 3))
    adm = admissibility_pointwise(g0, g1, 0.1, 10.0, pts, np.ones(5), np.ones(5))
    assert adm.admissible and not adm.bounds_checked
    assert adm.report.d_inf == pytest.approx(2 * math.sinh(3 * math.log(1.01) / 4))
