import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from warpscatter.errors import ProfileError, RangeError
from warpscatter.functions import smooth_bump
from warpscatter.profile import (PowerLawSpec, build_power_law, conformal_rewrite, cylinder, evaluate,
                                 horn_euclidean, from_functions, from_samples, gluing_jump,
                                 local_boundedness_constant, quintic_blend, read_profile_csv,
                                 warp_perturbed)


def right_end(beta, tau):
    return build_power_law(PowerLawSpec(1.0, 1.0, beta, tau), grid_step=0.1, L=20)


def test_euclidean_end_is_exact():
    assert evaluate(right_end(1.0, 1.0), 2.0) == (2.0, 1.0, 0.0)


def test_flat_cylinder_end():
    assert evaluate(right_end(0.0, 0.5), 5.0) == (0.5, 0.0, 0.0)


def test_horn_end_derivatives():
    r, rd, rdd = evaluate(right_end(-1.0, 1.0), 2.0)
    assert (r, rd, rdd) == pytest.approx((0.5, -0.25, 0.25), rel=1e-15)


def test_power_law_accepts_any_real_s():
    p = right_end(1.0, 1.0)
    assert evaluate(p, 1e6)[0] == pytest.approx(1e6)
    assert evaluate(p, -1e6)[0] == pytest.approx(1e6)


def test_symmetric_blend_is_even_cap():
    p = build_power_law(PowerLawSpec(1, 1, 1, 1))
    s = np.linspace(-3, 3, 601)
    assert np.allclose(p(s), p(-s), atol=1e-14)
    assert np.allclose(p(s[np.abs(s) >= 1]), np.abs(s[np.abs(s) >= 1]))
    assert np.all(p(s) > 0)
    assert np.allclose(quintic_blend(PowerLawSpec(1, 1, 1, 1)).coef, [0.375, 0, 0.75, 0, -0.125, 0])


def test_horn_euclidean_right_end():
    assert evaluate(horn_euclidean(), 2.0)[0] == 0.5
    assert evaluate(horn_euclidean(), -3.0)[0] == 3.0


@settings(max_examples=60, deadline=None)
@given(bm=st.floats(-2, 2), tm=st.floats(0.2, 3), bp=st.floats(-2, 2), tp=st.floats(0.2, 3))
def test_gluing_is_c2(bm, tm, bp, tp):
    spec = PowerLawSpec(bm, tm, bp, tp)
    assert gluing_jump(spec) < 1e-8
    try:
        p = build_power_law(spec, grid_step=0.05, L=5)
    except ProfileError:
        return  # blend not positive: construction correctly refused
    # evaluation just inside and just outside each seam agrees
    for x in (-1.0, 1.0):
        a = np.array(evaluate(p, x - 1e-9))
        b = np.array(evaluate(p, x + 1e-9))
        assert np.allclose(a, b, rtol=1e-6, atol=1e-6)


def test_nonpositive_blend_is_refused():
    # small ends curving away from the seams force the quintic below zero
    with pytest.raises(ProfileError):
        build_power_law(PowerLawSpec(3.0, 0.1, 3.0, 0.1))


@settings(max_examples=30, deadline=None)
@given(bm=st.floats(-1.5, 1.5), tm=st.floats(0.3, 2), bp=st.floats(-1.5, 1.5), tp=st.floats(0.3, 2))
def test_mirror_symmetry(bm, tm, bp, tp):
    spec = PowerLawSpec(bm, tm, bp, tp)
    try:
        p = build_power_law(spec, grid_step=0.05, L=5)
        q = build_power_law(spec.mirrored(), grid_step=0.05, L=5)
    except ProfileError:
        return
    s = np.linspace(-4, 4, 161)
    r, rd, rdd = evaluate(p, s)
    rm, rdm, rddm = evaluate(q, -s)
    assert np.allclose(r, rm, rtol=1e-12, atol=1e-12)
    assert np.allclose(rd, -rdm, rtol=1e-12, atol=1e-12)
    assert np.allclose(rdd, rddm, rtol=1e-12, atol=1e-11)


def test_derivative_consistency_order():
    # centered differences of r converge to rdot, rddot at second order
    # (away from s = +-1, where r''' jumps and the stencil only sees C^2)
    p = build_power_law(PowerLawSpec(1.0, 1.0, -0.5, 2.0))
    s = np.linspace(-3, 3, 37)
    s = s[np.abs(np.abs(s) - 1.0) > 0.1]
    errs1, errs2 = [], []
    hs = [0.04, 0.02, 0.01]
    for h in hs:
        rm, r0, rp = p(s - h), p(s), p(s + h)
        _, rd, rdd = evaluate(p, s)
        errs1.append(np.max(np.abs((rp - rm) / (2 * h) - rd)))
        errs2.append(np.max(np.abs((rp - 2 * r0 + rm) / h**2 - rdd)))
    for errs in (errs1, errs2):
        order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert order >= 1.9


def test_sampled_profile_range_error():
    s = np.linspace(0, 10, 101)
    p = from_samples(2, s, 1 + s**2)
    with pytest.raises(RangeError):
        evaluate(p, 11.0)
    r, rd, rdd = evaluate(p, 5.0)
    assert (r, rd, rdd) == pytest.approx((26, 10, 2), rel=1e-6)


def test_read_profile_csv(tmp_path):
    s = np.linspace(-5, 5, 201)
    path = tmp_path / "r.csv"
    np.savetxt(path, np.column_stack([s, np.cosh(s)]), delimiter=",", header="s,r", comments="")
    p = read_profile_csv(path, 2)
    assert p.kind == "sampled"
    assert evaluate(p, 1.0)[0] == pytest.approx(np.cosh(1.0), rel=1e-6)


def test_local_boundedness_constant_cylinder():
    assert local_boundedness_constant(cylinder(0.7, L=20, grid_step=0.1)) == 1.0


def test_local_boundedness_exponential():
    s = np.linspace(0, 10, 1001)
    p = from_functions(2, np.exp, np.exp, np.exp, (0.0, 10.0), grid_step=0.01)
    assert local_boundedness_constant(p, 2.0) == pytest.approx(np.e**2, rel=1e-9)
    # brute force oracle over the grid
    r = np.exp(s)
    m = max(np.max(r[np.abs(s - x) <= 2 + 1e-9]) / r[i] for i, x in enumerate(s))
    assert m == pytest.approx(np.e**2, rel=1e-9)


def test_local_boundedness_linear():
    one = lambda s: np.ones_like(s)  # noqa: E731
    p = from_functions(2, lambda s: s, one, lambda s: 0 * s, (2.0, 100.0), grid_step=0.01)
    assert local_boundedness_constant(p, 2.0) == pytest.approx(2.0, rel=1e-9)


def test_local_boundedness_unbounded_sentinel():
    p = from_functions(2, lambda s: np.exp(s**2), lambda s: 2 * s * np.exp(s**2),
                       lambda s: (2 + 4 * s**2) * np.exp(s**2), (0.0, 6.0), grid_step=0.01)
    assert local_boundedness_constant(p) == float("inf")


def test_warp_perturbation_zero_is_identity():
    p = horn_euclidean(L=20, grid_step=0.1)
    q = warp_perturbed(p, smooth_bump(0, 2), 0.0)
    s = np.linspace(-10, 10, 101)
    assert np.array_equal(np.array(evaluate(p, s)), np.array(evaluate(q, s)))


def test_conformal_rewrite_constant_shift_outside_support():
    p = horn_euclidean(L=20, grid_step=0.1)
    mu = smooth_bump(0.0, 1.0, 0.3)
    q = conformal_rewrite(p, mu)
    # new arc length of the support, computed independently
    length = quad(lambda x: np.exp(mu(x)), -1, 1, epsabs=1e-14)[0]
    shift = length - 2.0
    assert evaluate(q, -5.0)[0] == pytest.approx(5.0)
    assert evaluate(q, 4.0 + shift)[0] == pytest.approx(0.25, rel=1e-9)
    assert q.right_tail.origin == pytest.approx(shift, rel=1e-9)
    # r~ = e^mu r at the image of s = 0.5
    t_half = -1.0 + quad(lambda x: np.exp(mu(x)), -1, 0.5, epsabs=1e-14)[0]
    r_expected = np.exp(mu(0.5)) * evaluate(p, 0.5)[0]
    assert evaluate(q, t_half)[0] == pytest.approx(r_expected, rel=1e-8)
