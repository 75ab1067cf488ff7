import math

import mpmath as mp
import numpy as np
import pytest
from scipy import special

from sphere_profile import special_fn as sf

mp.mp.dps = 50


def ai_series(x, terms=80):
    # Maclaurin series Ai = c1 f - c2 g, summed in multiprecision
    x = mp.mpf(x)
    c1 = 1 / (mp.power(3, mp.mpf(2) / 3) * mp.gamma(mp.mpf(2) / 3))
    c2 = 1 / (mp.power(3, mp.mpf(1) / 3) * mp.gamma(mp.mpf(1) / 3))
    f = g = mp.mpf(0)
    tf, tg = mp.mpf(1), x
    for k in range(terms):
        f += tf
        g += tg
        tf *= x ** 3 / ((3 * k + 2) * (3 * k + 3))
        tg *= x ** 3 / ((3 * k + 3) * (3 * k + 4))
    return c1 * f - c2 * g


def A_mp(x):
    x = mp.mpf(x)
    return -2 * mp.exp(2 * x ** 3 / 3) * (x * mp.airyai(x * x) + mp.airyai(x * x, 1))


# ---------------------------------------------------------------------------
# Airy functions

def test_airy_at_zero_matches_series_constants():
    assert sf.airy_ai(0.0) == pytest.approx(0.355028053887817, abs=1e-15)
    assert sf.airy_ai_prime(0.0) == pytest.approx(-0.258819403792807, abs=1e-15)
    assert float(ai_series(0)) == pytest.approx(sf.airy_ai(0.0), rel=1e-15)


def test_airy_at_one():
    assert sf.airy_ai(1.0) == pytest.approx(0.135292416312881, abs=1e-15)
    assert float(ai_series(1)) == pytest.approx(0.135292416312881, abs=1e-15)
    # integral representation Ai(x) = (1/pi) int_0^inf cos(t^3/3 + x t) dt
    rep = mp.quadosc(lambda t: mp.cos(t ** 3 / 3 + t), [0, mp.inf],
                     zeros=lambda n: mp.cbrt(3 * mp.pi * n)) / mp.pi
    assert float(rep) == pytest.approx(0.135292416312881, abs=1e-12)


def test_airy_accuracy_against_mpmath():
    # on the oscillatory side errors are measured against the envelope
    for x in np.concatenate([np.linspace(-20, 20, 161), [-35.0, 25.0, 40.0]]):
        a, ap = mp.airyai(x), mp.airyai(x, 1)
        if x < 0:
            ea = mp.pi ** -0.5 * abs(x) ** -0.25
            eap = mp.pi ** -0.5 * abs(x) ** 0.25
        else:
            ea, eap = abs(a), abs(ap)
        tol = 1e-12 if abs(x) <= 20 else 1e-9
        assert float(abs(sf.airy_ai(x) - a) / ea) < tol
        assert float(abs(sf.airy_ai_prime(x) - ap) / eap) < tol


def test_airy_vectorised():
    x = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(sf.airy_ai(x), [float(mp.airyai(v)) for v in x], rtol=1e-13)


# ---------------------------------------------------------------------------
# map-Airy

def test_map_airy_at_zero():
    assert sf.map_airy_A(0.0) == pytest.approx(0.517638807585614, abs=1e-14)
    assert sf.map_airy_A(0.0) == pytest.approx(-2 * sf.airy_ai_prime(0.0), rel=1e-15)


@pytest.mark.parametrize("x", [-5.0, -1.0, 0.0, 1.0, 5.0])
def test_map_airy_positive(x):
    assert sf.map_airy_A(x) > 0


def test_map_airy_log_against_mpmath():
    for x in np.linspace(-40, 40, 321):
        sign, la = sf.map_airy_log(x)
        ref = mp.log(2) + 2 * mp.mpf(x) ** 3 / 3 + mp.log(-(x * mp.airyai(x * x) + mp.airyai(x * x, 1)))
        assert sign == 1
        assert abs(la - float(ref)) <= 1e-12 * max(1.0, abs(float(ref)))


def test_map_airy_extreme_arguments_stay_finite_in_log_space():
    sign, la = sf.map_airy_log(np.array([-1e5, -3000.0, 3000.0, 1e5]))
    assert np.all(sign == 1) and np.all(np.isfinite(la))
    assert la[0] < -1e14
    # heavy right tail A(x) ~ x^{-5/2} / (4 sqrt pi)
    assert la[-1] == pytest.approx(-2.5 * math.log(1e5) - math.log(4 * math.sqrt(math.pi)), rel=1e-9)


def test_map_airy_log_space_overflow_is_signalled():
    with pytest.raises(OverflowError):
        sf.map_airy_log(-1e120)


def test_map_airy_logderiv_against_numerical_derivative():
    for x in np.linspace(-8, 8, 81):
        ref = mp.diff(A_mp, x) / A_mp(x)
        assert abs(sf.map_airy_logderiv(x) - float(ref)) <= 1e-11 * max(1.0, abs(float(ref)))


def test_branch_overlap_window():
    # direct evaluation and the large-argument series agree where they meet
    for sgn in (1.0, -1.0):
        x = sgn * np.linspace(3.0, 4.0, 41)
        ai, aip = special.airye(x * x)[:2]
        direct = ai / (x * ai + aip)
        z = 2 * np.abs(x) ** 3 / 3
        su, d = sf._alt_series(sf._U, z), sf._alt_series(sf._D, z)
        series = su / (x * (d if sgn > 0 else 2 * su - d))
        assert np.max(np.abs(direct / series - 1)) < 1e-12


def test_kappa_negative():
    x = np.linspace(-30, 30, 601)
    assert np.all(sf.kappa(x) < 0)


def test_map_airy_integrates_to_one():
    f = lambda x: float(sf.map_airy_A(x))
    left = sf.integrate(f, sf.QuadratureSpec(-12.0, 0.0, abs_tol=1e-13)).value
    right = sf.integrate(f, sf.QuadratureSpec(0.0, math.inf, abs_tol=1e-9)).value
    assert left + right == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# stable density

def test_p1_at_zero():
    d = sf.stable_density(1.0, 0.0)
    assert d.p == pytest.approx(sf.C6 * 0.517638807585614, rel=1e-14)
    assert d.p == pytest.approx(0.28486761397537674, rel=1e-14)
    # the commonly quoted rounding 0.284869 is only good to about 2e-6
    assert d.p == pytest.approx(0.284869, abs=2e-6)


@pytest.mark.parametrize("t", [0.5, 2.0, 10.0])
@pytest.mark.parametrize("x", [-1.0, 0.0, 3.0])
def test_scaling_relations_hold_to_round_off(t, x):
    s = t ** (-2.0 / 3.0)
    d = sf.stable_density(t, x)
    d1 = sf.stable_density(1.0, s * x)
    assert d.p == pytest.approx(s * d1.p, rel=1e-15, abs=0)
    assert d.p_prime == pytest.approx(s * s * d1.p_prime, rel=1e-15, abs=0)


def test_derivative_matches_central_differences():
    x = np.linspace(-6, 6, 241)
    delta = 1e-5
    fd = (sf.stable_density(1.0, x + delta).p - sf.stable_density(1.0, x - delta).p) / (2 * delta)
    assert np.max(np.abs(fd - sf.stable_density(1.0, x).p_prime)) < 1e-6


@pytest.mark.parametrize("t", [0.0, -1.0, float("nan")])
def test_nonpositive_time_rejected(t):
    with pytest.raises(ValueError):
        sf.stable_density(t, 0.0)
    with pytest.raises(ValueError):
        sf.drift_h(t, 0.0)


@pytest.mark.parametrize("t", [0.3, 1.0, 5.0])
def test_p_t_normalised(t):
    f = lambda x: float(np.exp(sf.stable_log_density(t, x)))
    spec = sf.QuadratureSpec(sf._left_cutoff(t), 0.0, abs_tol=1e-13, rel_tol=1e-12)
    left = sf.integrate(f, spec).value
    right = sf.integrate(f, sf.QuadratureSpec(0.0, math.inf, abs_tol=1e-10)).value
    assert left + right == pytest.approx(1.0, abs=1e-9)


def test_log_density_consistent_with_density():
    x = np.linspace(-5, 30, 71)
    d = sf.stable_density(2.0, x)
    assert np.allclose(np.exp(sf.stable_log_density(2.0, x)), d.p, rtol=1e-13)
    assert np.allclose(sf.stable_logderiv(2.0, x), d.p_prime / d.p, rtol=1e-12)


def test_transform_trivial_case():
    r = sf.transform_check(1.0, 0.0)
    assert abs(r.fourier - 1.0) < 1e-9
    assert r.laplace is None


def test_fourier_transform():
    r = sf.transform_check(1.0, 1.0)
    assert r.fourier_target == pytest.approx(np.exp(-(1 + 1j) / math.sqrt(3)))
    assert r.fourier_error < 1e-3
    assert r.fourier_error < 1e-9


@pytest.mark.parametrize("t,u", [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (0.5, -1.5)])
def test_transforms_close_to_closed_forms(t, u):
    r = sf.transform_check(t, u)
    assert r.fourier_error < 1e-9
    if u > 0:
        assert r.laplace_rel_error < 1e-9


def test_laplace_at_t2():
    r = sf.transform_check(2.0, 1.0)
    assert r.laplace_target == pytest.approx(math.exp(2 * math.sqrt(2 / 3)))
    assert r.laplace_rel_error < 1e-3


# ---------------------------------------------------------------------------
# drifts

def test_h_at_origin():
    h = float(sf.drift_h(1.0, 0.0))
    assert h == pytest.approx(-8 * sf.C6 * sf.airy_ai(0.0) / sf.airy_ai_prime(0.0), rel=1e-14)
    assert h == pytest.approx(6.039097986603089, rel=1e-14)
    # 6.03919 as sometimes quoted has its last digits transposed
    assert h == pytest.approx(6.03919, abs=1e-4)
    # ratio formula with a finite-difference derivative
    delta = 1e-5
    dp = (sf.stable_density(1.0, delta).p - sf.stable_density(1.0, -delta).p) / (2 * delta)
    assert h == pytest.approx(-8 * dp / sf.stable_density(1.0, 0.0).p, rel=1e-8)


def test_h_positive_on_grid():
    x = np.arange(-50, 51, dtype=float)
    for t in (0.01, 0.1, 1.0, 10.0, 100.0):
        assert np.all(sf.drift_h(t, x) > 0)
        assert np.all(sf.drift_h_airy(t, x) > 0)


def test_h_forms_agree_where_well_conditioned():
    t, x = 1.0, np.linspace(-10, 10, 201)
    assert np.max(np.abs(sf.drift_h(t, x) / sf.drift_h_airy(t, x) - 1)) < 1e-9


def test_h_airy_form_against_mpmath():
    for t, x in [(1.0, 0.0), (0.1, 3.0), (10.0, -7.0), (0.01, 40.0), (100.0, 50.0)]:
        y = -mp.cbrt(mp.mpf(1) / 6) * mp.mpf(t) ** (-mp.mpf(2) / 3) * x / 2
        kap = mp.airyai(y * y) / (y * mp.airyai(y * y) + mp.airyai(y * y, 1))
        ref = -8 * mp.cbrt(mp.mpf(1) / 6) * mp.cbrt(t) * kap
        assert float(sf.drift_h_airy(t, x)) == pytest.approx(float(ref), rel=1e-12)


@pytest.mark.parametrize("t", [0.5, 1.0, 4.0])
@pytest.mark.parametrize("z", [-3.0, 0.0, 2.0])
def test_h_b_conjugation(t, z):
    lhs = float(sf.drift_h(t, -t ** (2 / 3) * z))
    rhs = float(-np.cbrt(t) * sf.drift_b(z) + (2 / 3) * np.cbrt(t) * z * z)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_b_at_origin():
    assert float(sf.drift_b(0.0)) == pytest.approx(-6.039097986603089, rel=1e-14)
    assert float(sf.drift_b(0.0)) == pytest.approx(-float(sf.drift_h(1.0, 0.0)), rel=1e-15)


def test_b_definition():
    z = np.linspace(-10, 10, 101)
    d = sf.stable_density(1.0, z / 2)
    assert np.max(np.abs(sf.drift_b(z) + (2 / 3) * z * z - 8 * d.p_prime / d.p)) < 1e-10


def test_b_decreasing_with_single_root():
    z = np.linspace(-30, 15, 4501)
    b = sf.drift_b(z)
    assert np.all(np.diff(b) < 0)
    assert b[0] > 0 > b[-1]


# ---------------------------------------------------------------------------
# theta and pi

def test_stationarity_identity():
    x = np.linspace(-8, 8, 1601)
    assert np.max(np.abs(8 * sf.theta_prime(x) - sf.drift_b(x) * sf.theta(x))) < 1e-8


def test_theta_normalised():
    spec = sf.QuadratureSpec(-40.0, 20.0, abs_tol=1e-14, rel_tol=1e-12)
    val = sf.integrate(lambda x: float(sf.theta(x)), spec, points=[-6, -2, 0, 3]).value
    assert val == pytest.approx(1.0, abs=1e-10)


def test_pi_mean_negative_and_matches_mpmath():
    assert sf.pi_mean() < 0
    c = mp.cbrt(mp.mpf(1) / 6)
    th = lambda x: (c * A_mp(c * x / 2)) ** 2 * mp.exp(-x ** 3 / 36)
    mp.mp.dps = 30
    try:
        z = mp.quad(th, [-30, -6, -2, 0, 3, 15])
        m = mp.quad(lambda x: x * th(x), [-30, -6, -2, 0, 3, 15]) / z
    finally:
        mp.mp.dps = 50
    assert sf.pi_mean() == pytest.approx(float(m), rel=1e-10)
    assert sf.theta_normalizer() == pytest.approx(-float(mp.log(z)), abs=1e-10)


def test_pi_cdf():
    v = sf.pi_cdf(np.array([-40.0, -2.0, 20.0]))
    assert v[0] == 0.0 and v[2] == pytest.approx(1.0, abs=1e-12)
    assert 0.3 < v[1] < 0.7
    assert sf.pi_cdf(0.0) > v[1]


def _bracket_moment():
    f = lambda x: x * (x * sf.airy_ai(x * x) + sf.airy_ai_prime(x * x)) ** 2
    # the integrand is below exp(-4|x|^3/3) * (1 + |x|)^2 outside [-10, 10]
    spec = sf.QuadratureSpec(-10.0, 10.0, abs_tol=1e-14, rel_tol=1e-13)
    return sf.integrate(f, spec, points=[0.0]).value


def test_airy_bracket_first_moment():
    # folding the negative half onto the positive one leaves
    # 4 int_0^inf x^2 Ai(x^2) Ai'(x^2) dx, which mpmath puts at -1/12
    val = _bracket_moment()
    ref = 4 * mp.quad(lambda x: x * x * mp.airyai(x * x) * mp.airyai(x * x, 1), [0, 1, 2, 8])
    assert float(ref) == pytest.approx(-1 / 12, abs=1e-30)
    assert val == pytest.approx(-1 / 12, abs=1e-12)
    assert val < 0


def test_antiderivative_identity():
    # d/dx Ai(x^2)^2 = 4x Ai(x^2) Ai'(x^2), so this integral is -Ai(0)^2
    f = lambda x: 4 * x * sf.airy_ai(x * x) * sf.airy_ai_prime(x * x)
    val = sf.integrate(f, sf.QuadratureSpec(0.0, 10.0, abs_tol=1e-14, rel_tol=1e-13)).value
    assert val == pytest.approx(-sf.airy_ai(0.0) ** 2, abs=1e-13)
    assert val == pytest.approx(-0.12604491904737083, abs=1e-13)


# ---------------------------------------------------------------------------
# quadrature plumbing

def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        sf.QuadratureSpec(1.0, 0.0)
    with pytest.raises(ValueError):
        sf.QuadratureSpec(0.0, 1.0, abs_tol=0.0)
    with pytest.raises(ValueError):
        sf.QuadratureSpec(0.0, 1.0, max_subdivisions=0)


def test_quadrature_reports_unmet_tolerance():
    spec = sf.QuadratureSpec(0.0, 1.0, abs_tol=1e-300, rel_tol=1e-300, max_subdivisions=2)
    with pytest.raises(sf.ToleranceNotMet):
        sf.integrate(lambda x: math.sqrt(x) * math.sin(50 * x), spec)


def test_quadrature_infinite_interval():
    spec = sf.QuadratureSpec(-math.inf, math.inf)
    r = sf.integrate(lambda x: math.exp(-x * x), spec)
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert r.error < 1e-10
