import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mp_ref import Ref
from corrdecay import DomainError, InvalidInputError, NonContractiveError
from corrdecay.recursion import (
    F_fn,
    G_fn,
    J_fn,
    K_fn,
    K_second,
    TreeParams,
    critical_log_lambda,
    d1_identities,
    f_fn,
    f_prime,
    fixed_point,
    g_double_prime,
    g_fn,
    g_prime,
    grad_G_l1,
    h_fn,
    h_inverse,
    message_constants,
    message_range,
    phi,
    phi_prime,
    psi,
    psi_prime,
    r_from_p,
    ratio_recurrence,
    uniform_equivalent,
    uniqueness_check,
)

# frozen from independent bisection (see test_fixed_point_independent_bisection)
X_STAR_D2_B02_L4 = 0.3543974624571071
LOG_LAMBDA_C_D2_B02 = 3.1594463960791472


def cdiff(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2 * h)


def cdiff2(fn, x, h=1e-4):
    return (fn(x + h) - 2 * fn(x) + fn(x - h)) / (h * h)


def random_params(rng, d_max=13):
    d = int(rng.integers(1, d_max + 1))
    beta = float(rng.uniform(0.02, 0.98))
    lam = math.exp(rng.uniform(-4, 4))
    return TreeParams(d, beta, lam)


def test_h_examples():
    for b in (0.1, 0.5, 0.9):
        assert h_fn(0.5, b) == 1.0
        assert h_fn(0.0, b) == pytest.approx(b)
        assert h_fn(1.0, b) == pytest.approx(1 / b)
    assert h_fn(0.25, 0.5) == pytest.approx(5 / 7, rel=1e-15)
    assert h_inverse(h_fn(0.3, 0.4), 0.4) == pytest.approx(0.3)


def test_f_examples():
    assert f_fn(0.5, TreeParams(7, 0.3, 1.0)) == pytest.approx(0.5, abs=1e-15)
    assert f_fn(0.0, TreeParams(2, 0.5, 1.0)) == pytest.approx(0.8, rel=1e-15)
    assert f_fn(1.0, TreeParams(2, 0.5, 2.0)) == pytest.approx(1 / 9, rel=1e-15)


def test_F_examples():
    p = TreeParams(3, 0.4, 1.7)
    assert F_fn([0.3] * 3, 0.4, 1.7) == pytest.approx(f_fn(0.3, p), rel=1e-15)
    assert F_fn([0.1, 0.9, 0.5], 0.4, 1.7) == F_fn([0.1, 0.9], 0.4, 1.7)
    assert F_fn([0.0, 1.0], 0.5, 1.0) == pytest.approx(0.5, rel=1e-15)


def test_tree_params_validation():
    for bad in [(0, 0.5, 1), (2, 1.0, 1), (2, 0.0, 1), (2, 0.5, 0)]:
        with pytest.raises(InvalidInputError):
            TreeParams(*bad)


def test_message_constants_examples():
    mc = message_constants(2, 0.2)
    assert mc.A == pytest.approx(2.56, rel=1e-15)
    assert mc.D == pytest.approx((math.sqrt(3.36) - 1.6) / 3.2, rel=1e-14)
    assert mc.D == pytest.approx(0.0728219, abs=1e-7)
    assert mc.A * mc.D * (1 + mc.D) == pytest.approx(0.2, rel=1e-12)
    assert mc.L1 == pytest.approx(14.664, abs=1e-3)
    assert mc.L2 == pytest.approx(0.286411, abs=1e-6)
    assert phi(0.0, mc) == pytest.approx(math.log(mc.D / (1 + mc.D)), rel=1e-15)
    assert phi(0.0, mc) == pytest.approx(-2.69, abs=5e-3)


def test_L1_L2_are_extremes(rng):
    for _ in range(20):
        d, b = int(rng.integers(1, 14)), float(rng.uniform(0.01, 0.99))
        mc = message_constants(d, b)
        xs = np.linspace(0, 1, 2001)
        assert np.max(phi_prime(xs, mc)) == pytest.approx(mc.L1, rel=1e-12)
        lo, hi = message_range(mc)
        ys = np.linspace(lo, hi, 2001)
        assert np.max(psi_prime(ys, mc)) == pytest.approx(mc.L2, rel=1e-12)


def test_phi_psi_pair(rng):
    mc = message_constants(3, 0.35)
    assert phi(0.5, mc) == 0.0
    assert psi(0.0, mc) == 0.5
    lo, hi = message_range(mc)
    assert psi(lo, mc) == pytest.approx(0.0, abs=1e-15)
    assert psi(hi, mc) == pytest.approx(1.0, abs=1e-15)
    for x in rng.uniform(0, 1, 50):
        assert psi(phi(x, mc), mc) == pytest.approx(x, abs=1e-14)
    for y in rng.uniform(lo + 1e-3, hi - 1e-3, 50):
        fd = cdiff(lambda t: psi(t, mc), y)
        assert fd == pytest.approx(1 / phi_prime(psi(y, mc), mc), rel=1e-6)
    with pytest.raises(DomainError):
        psi(hi + 0.1, mc)


def test_g_examples():
    p = TreeParams(2, 0.5, 1.0)
    mc = message_constants(2, 0.5)
    assert g_fn(0.0, p, mc) == 0.0
    assert g_prime(0.0, p, mc) == pytest.approx(-2 / 3, rel=1e-14)


def test_g_prime_finite_difference(rng):
    for _ in range(30):
        p = random_params(rng)
        mc = message_constants(p.d, p.beta)
        lo, hi = message_range(mc)
        for y in rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 5):
            fd = Ref(p.d, p.beta, p.lam).diff(lambda t: Ref(p.d, p.beta, p.lam).g(t), y)
            assert g_prime(y, p, mc) == pytest.approx(fd, rel=1e-6)


def test_d1_identity_examples():
    p = TreeParams(2, 0.5, 1.0)
    mc = message_constants(2, 0.5)
    ids = d1_identities(0.5, p, mc)
    assert ids.phi2_over_phi1 == 0.0
    assert ids.h1_over_h == pytest.approx(4 / 3, rel=1e-15)


def test_d1_identities_finite_difference(rng):
    for _ in range(10):
        p = random_params(rng)
        mc = message_constants(p.d, p.beta)
        ref = Ref(p.d, p.beta, p.lam)
        for x in np.linspace(0.03, 0.97, 20):
            ids = d1_identities(x, p, mc)
            assert ids.phi2_over_phi1 == pytest.approx(
                ref.diff(ref.phi, x, 2) / ref.diff(ref.phi, x), rel=1e-6, abs=1e-12)
            assert ids.h1_over_h == pytest.approx(ref.diff(ref.h, x) / float(ref.h(x)), rel=1e-6)
            assert ids.h2_over_h1 == pytest.approx(ref.diff(ref.h, x, 2) / ref.diff(ref.h, x), rel=1e-6)
            assert ids.f1 == pytest.approx(ref.diff(ref.f, x), rel=1e-6)
            assert ids.f2_over_f1 == pytest.approx(ref.diff(ref.f, x, 2) / ref.diff(ref.f, x), rel=1e-6, abs=1e-12)


def test_d1_identities_float_finite_difference():
    # plain double-precision central differences where they are well conditioned
    p = TreeParams(3, 0.4, 1.5)
    mc = message_constants(3, 0.4)
    for x in np.linspace(0.1, 0.9, 9):
        ids = d1_identities(x, p, mc)
        assert ids.f1 == pytest.approx(cdiff(lambda s: f_fn(s, p), x), rel=1e-6)
        assert ids.h1_over_h == pytest.approx(cdiff(lambda s: math.log(h_fn(s, p.beta)), x), rel=1e-6)


def test_g_double_prime_finite_difference(rng):
    for _ in range(30):
        p = random_params(rng)
        mc = message_constants(p.d, p.beta)
        ref = Ref(p.d, p.beta, p.lam)
        lo, hi = message_range(mc)
        for y in rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), 4):
            fd = ref.diff(ref.g, y, 2)
            assert g_double_prime(y, p, mc) == pytest.approx(fd, rel=1e-5, abs=1e-12)


def test_g_double_prime_sign_and_zero():
    p = TreeParams(3, 0.3, 2.5)
    mc = message_constants(3, 0.3)
    ps = fixed_point(p, mc).p_star
    assert abs(g_double_prime(ps, p, mc)) <= 1e-9
    assert g_double_prime(ps - 0.3, p, mc) < 0
    assert g_double_prime(ps + 0.3, p, mc) > 0


def test_fixed_point_examples():
    for d, b in [(2, 0.5), (5, 0.3), (13, 0.8)]:
        rep = fixed_point(TreeParams(d, b, 1.0))
        assert rep.x_star == 0.5
        assert rep.f_prime_at_star == pytest.approx(-d * (1 - b) / (1 + b), rel=1e-13)
    rep = fixed_point(TreeParams(2, 1 / 3, 1.0))
    assert rep.f_prime_at_star == pytest.approx(-1.0, abs=1e-14)
    rep = fixed_point(TreeParams(2, 0.2, 4.0))
    assert rep.x_star == pytest.approx(X_STAR_D2_B02_L4, abs=1e-13)


def test_fixed_point_independent_bisection():
    import mpmath as mp
    mp.mp.dps = 40
    b, lam = mp.mpf("0.2"), mp.mpf(4)
    f = lambda x: 1 / (1 + lam * ((b + (1 - b) * x) / (1 - (1 - b) * x)) ** 2) - x
    root = mp.findroot(f, (mp.mpf("0.2"), mp.mpf("0.5")), solver="bisect")
    assert float(root) == pytest.approx(X_STAR_D2_B02_L4, abs=1e-15)


def test_fixed_point_report_invariants(rng):
    for _ in range(200):
        p = random_params(rng)
        mc = message_constants(p.d, p.beta)
        rep = fixed_point(p, mc)
        assert abs(f_fn(rep.x_star, p) - rep.x_star) <= 1e-13
        assert rep.contraction_c == abs(rep.f_prime_at_star)
        assert rep.p_star == pytest.approx(phi(rep.x_star, mc), abs=1e-15)
        assert abs(g_prime(rep.p_star, p, mc) - rep.f_prime_at_star) <= 1e-10
        assert rep.in_uniqueness_interior == (rep.f_prime_at_star > -1)
        if rep.in_uniqueness_interior:
            assert rep.contraction_c < 1


def test_uniqueness_examples(rng):
    for lam in np.exp(rng.uniform(-5, 5, 20)):
        assert uniqueness_check(TreeParams(2, 0.5, float(lam))).unique
    assert not uniqueness_check(TreeParams(2, 0.2, 1.0)).unique
    v = uniqueness_check(TreeParams(5, 2 / 3, 1.0))
    assert not v.unique and abs(v.margin) < 1e-12


def test_max_at_fixed_point(rng):
    for _ in range(30):
        d = int(rng.integers(2, 14))
        p = TreeParams(d, float(rng.uniform(0.02, 0.98)), math.exp(rng.uniform(-4, 4)))
        mc = message_constants(p.d, p.beta)
        lo, hi = message_range(mc)
        ys = np.linspace(lo, hi, 1000)
        top = abs(g_prime(fixed_point(p, mc).p_star, p, mc))
        assert np.max(np.abs(g_prime(ys, p, mc))) <= top + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 13), st.floats(0.01, 0.99), st.floats(-6, 6))
def test_lambda_inverse_symmetry(d, b, loglam):
    a = fixed_point(TreeParams(d, b, math.exp(loglam)))
    c = fixed_point(TreeParams(d, b, math.exp(-loglam)))
    assert a.f_prime_at_star == pytest.approx(c.f_prime_at_star, abs=1e-10)
    assert a.x_star == pytest.approx(1 - c.x_star, abs=1e-12)


def test_K_concave_and_closed_form(rng):
    for b in rng.uniform(0.05, 0.95, 10):
        b = float(b)
        for x in rng.uniform(math.log(b) * 0.95, -math.log(b) * 0.95, 10):
            fd = cdiff2(lambda t: K_fn(t, b), x, 1e-3)
            assert fd < 0
            assert K_second(x, b) == pytest.approx(fd, rel=1e-4)
            assert K_fn(x, b) == pytest.approx(J_fn(h_inverse(math.exp(x), b), b), rel=1e-13)


def test_G_uniform_collapse(rng):
    p = TreeParams(4, 0.3, 1.8)
    mc = message_constants(4, 0.3)
    lo, hi = message_range(mc)
    for y in rng.uniform(lo, hi, 20):
        assert G_fn(np.full(4, y), p, mc) == pytest.approx(g_fn(y, p, mc), abs=1e-13)
        assert grad_G_l1(np.full(4, y), p, mc) == pytest.approx(abs(g_prime(y, p, mc)), rel=1e-12)


def test_grad_G_finite_difference_and_bound(rng):
    for _ in range(40):
        d = int(rng.integers(2, 9))
        p = TreeParams(d, float(rng.uniform(0.05, 0.95)), math.exp(rng.uniform(-3, 3)))
        mc = message_constants(d, p.beta)
        lo, hi = message_range(mc)
        y = rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo), d)
        ref = Ref(d, p.beta, p.lam)
        fd = 0.0
        for i in range(d):
            def along(t, i=i):
                ys = [mp.mpf(v) for v in y]
                ys[i] = t
                return ref.G(ys)
            fd += abs(ref.diff(along, y[i]))
        g1 = grad_G_l1(y, p, mc)
        assert g1 == pytest.approx(fd, rel=1e-5)
        eta_bar = uniform_equivalent(y, p, mc)
        assert g1 <= abs(g_prime(eta_bar, p, mc)) + 1e-9
        assert g1 <= fixed_point(p, mc).contraction_c + 1e-9
    with pytest.raises(InvalidInputError):
        grad_G_l1(np.zeros(3), TreeParams(2, 0.5, 1.0), message_constants(2, 0.5))


def test_r_from_p_and_ratio_recurrence(rng):
    assert r_from_p(0.5) == 1.0
    assert r_from_p(1.0) == 0.0
    assert r_from_p(0.0) == math.inf
    for _ in range(100):
        k = int(rng.integers(1, 6))
        xs = rng.uniform(0.01, 1, k)
        b, lam = float(rng.uniform(0.05, 0.95)), math.exp(rng.uniform(-3, 3))
        rs = [r_from_p(x) for x in xs]
        assert ratio_recurrence(rs, b, lam) == pytest.approx(r_from_p(F_fn(xs, b, lam)), rel=1e-12)


def test_critical_lambda_examples():
    assert critical_log_lambda(5, 2 / 3) == pytest.approx(0.0, abs=1e-8)
    assert critical_log_lambda(13, 6 / 7) == pytest.approx(0.0, abs=1e-8)
    assert critical_log_lambda(2, 0.5) is None
    assert critical_log_lambda(2, 0.2) == pytest.approx(LOG_LAMBDA_C_D2_B02, abs=1e-9)


def test_critical_lambda_brackets_uniqueness(rng):
    for _ in range(20):
        d = int(rng.integers(2, 14))
        b = float(rng.uniform(0.02, (d - 1) / (d + 1) - 0.01))
        lc = critical_log_lambda(d, b)
        assert lc > 0
        assert uniqueness_check(TreeParams(d, b, math.exp(lc) * (1 + 1e-4))).unique
        assert not uniqueness_check(TreeParams(d, b, math.exp(lc) * (1 - 1e-4))).unique
