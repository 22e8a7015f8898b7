import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracback.certify import (
    SLACK,
    holder_certificate,
    interpolation_constants,
    log_convexity_constant,
    mean_value_point,
    run_certificate,
    verify_dissipation_lemma,
    verify_log_convexity,
    verify_noisy_holder,
    verify_thm3,
)
from fracback.cli import validate
from fracback.evolve import evolve_trajectory, forward_evolve
from fracback.exceptions import AdmissibilityError, DomainError
from fracback.specop import (
    EigenSystem,
    SpectralField,
    dirichlet_laplacian_1d,
    matrix_operator,
    neumann_laplacian_1d,
)

MIXED = EigenSystem(np.array([-0.5, 0.0, 2.0, 5.0, 9.0]), 2, 0.5)


def in_I_R(rng, es, R=2.0, eps=1.0, p=3.0):
    u = SpectralField(rng.standard_normal(es.size) / np.arange(1, es.size + 1) ** p, es)
    lam = es.eigenvalues[es.m :]
    plain = np.sqrt(np.sum((lam**eps * u.coefficients[es.m :]) ** 2))
    return u * (0.9 * R / max(u.norm(), u.operator_norm(), u.power_norm(eps), plain))


def all_pass(checks):
    return all(c.passed for c in checks)


# --- K ---------------------------------------------------------------------


def test_K_values():
    assert log_convexity_constant(dirichlet_laplacian_1d(1.0, 8), 0.5, 1.0) == (1.0, 1.0)
    assert log_convexity_constant(neumann_laplacian_1d(1.0, 8), 0.5, 1.0) == (2.0, 1.0)
    es = EigenSystem(np.array([-1.0, 3.0]), 1, 1.0)
    K, K1 = log_convexity_constant(es, 1.0, 1.0)
    assert K1 == pytest.approx(math.e) and K == pytest.approx(math.e + 1)


def test_K_cap():
    es = EigenSystem(np.array([-100.0, 3.0]), 1, 100.0)
    with pytest.raises(DomainError):
        log_convexity_constant(es, 0.5, 1.0)


@given(lam1=st.floats(-10.0, 0.0), alpha=st.floats(0.1, 1.0), T=st.floats(0.1, 2.0))
def test_K_at_least_two_with_kernel(lam1, alpha, T):
    es = EigenSystem(np.array([lam1, 1.0]), 1, -lam1)
    try:
        K, K1 = log_convexity_constant(es, alpha, T)
    except DomainError:
        # E_alpha,1(x) ~ exp(x^(1/alpha)) / alpha leaves the double range
        assert (-lam1 * T**alpha) ** (1 / alpha) > 700
        return
    assert K1 >= 1.0 and K == K1 + 1.0 and K >= 2.0


# --- log-convexity ---------------------------------------------------------


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0])
def test_log_convexity_single_mode_endpoints(alpha):
    es = dirichlet_laplacian_1d(1.0, 1)
    tr = evolve_trajectory(SpectralField(np.ones(1), es), alpha, np.linspace(0, 1, 9))
    checks = verify_log_convexity(tr, 1.0)
    assert checks[0].lhs == pytest.approx(checks[0].rhs, rel=1e-10)
    assert checks[-1].lhs == pytest.approx(checks[-1].rhs, rel=1e-10)
    if alpha == 1.0:
        assert all(c.lhs == pytest.approx(c.rhs, rel=1e-10) for c in checks)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 1.0])
def test_log_convexity_random(rng, alpha):
    es = dirichlet_laplacian_1d(1.0, 64)
    tr = evolve_trajectory(in_I_R(rng, es), alpha, np.linspace(0, 1, 33))
    assert all_pass(verify_log_convexity(tr, 1.0))


def test_log_convexity_vacuous_and_degenerate():
    es = dirichlet_laplacian_1d(1.0, 4)
    tr = evolve_trajectory(SpectralField(np.zeros(4), es), 0.5, [0.0, 0.5, 1.0])
    assert all_pass(verify_log_convexity(tr, 1.0))
    with pytest.raises(DomainError):
        verify_log_convexity(evolve_trajectory(SpectralField(np.ones(4), es), 0.5, [0.5, 1.0]), 1.0)


@given(sigma=st.floats(1e-3, 1e3))
def test_scaling_covariance(sigma):
    es = dirichlet_laplacian_1d(1.0, 16)
    u0 = SpectralField(1 / np.arange(1, 17) ** 2, es)
    t = np.linspace(0, 1, 9)
    a = verify_log_convexity(evolve_trajectory(u0, 0.5, t), 1.0)
    b = verify_log_convexity(evolve_trajectory(u0 * sigma, 0.5, t), 1.0)
    for ca, cb in zip(a, b):
        assert cb.margin == pytest.approx(ca.margin, abs=1e-10)


# --- dissipation -----------------------------------------------------------


GRID = np.linspace(0.0, 1.0, 513)


def test_dissipation_single_mode():
    es = dirichlet_laplacian_1d(1.0, 1)
    res = verify_dissipation_lemma(SpectralField(np.ones(1), es), 0.5, GRID)
    assert all_pass(res.checks)
    assert all(c.margin > 0 for c in res.checks)


def test_dissipation_kernel_mode():
    es = neumann_laplacian_1d(1.0, 1)
    res = verify_dissipation_lemma(SpectralField(np.ones(1), es), 0.5, GRID)
    assert all(c.lhs == 0 and c.rhs == 0 for c in res.checks) and all_pass(res.checks)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 1.0])
def test_dissipation_mixed(rng, alpha):
    res = verify_dissipation_lemma(in_I_R(rng, MIXED), alpha, GRID)
    assert all_pass(res.checks)


def test_dissipation_matrix(rng):
    a = rng.standard_normal((6, 6))
    es = matrix_operator(0.2 * (a + a.T))
    assert es.m >= 1
    u0 = SpectralField(rng.standard_normal(6), es)
    assert all_pass(verify_dissipation_lemma(u0, 0.5, GRID).checks)


def test_dissipation_tolerance_rate(rng):
    u0 = in_I_R(rng, dirichlet_laplacian_1d(1.0, 64))
    for alpha in (0.3, 0.5, 0.7):
        tols = [verify_dissipation_lemma(u0, alpha, np.linspace(0, 1, n + 1)).tolerance for n in (128, 256, 512)]
        rates = np.log2(np.array(tols[:-1]) / tols[1:])
        assert np.all(rates >= 1.5 - alpha)


def test_dissipation_coarse_grid():
    es = EigenSystem(np.array([-3.0, 1.0]), 1, 3.0)
    u0 = SpectralField(np.array([1.0, 0.0]), es)
    with pytest.raises(DomainError, match="coarse"):
        verify_dissipation_lemma(u0, 0.5, np.linspace(0, 1, 17))
    assert all_pass(verify_dissipation_lemma(u0, 0.5, GRID).checks)


# --- mean value point and Hoelder ------------------------------------------


def test_xi_constant_norm():
    es = neumann_laplacian_1d(1.0, 1)
    assert mean_value_point(SpectralField(np.ones(1), es), 0.5, 2.0).xi == 1.0


@pytest.mark.parametrize("lam", [0.5, 3.0, 20.0])
def test_xi_closed_form(lam):
    es = EigenSystem(np.array([lam]), 0, 0.0)
    xi = mean_value_point(SpectralField(np.ones(1), es), 1.0, 1.0).xi
    assert xi == pytest.approx(-math.log((1 - math.exp(-lam)) / lam) / lam, abs=1e-6)


def test_xi_residual(rng):
    mv = mean_value_point(in_I_R(rng, dirichlet_laplacian_1d(1.0, 32)), 0.6, 1.0)
    assert 0 < mv.xi < 1 and mv.residual <= 1e-6


def test_xi_zero():
    with pytest.raises(DomainError):
        mean_value_point(SpectralField(np.zeros(2), dirichlet_laplacian_1d(1.0, 2)), 0.5, 1.0)


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_holder(rng, alpha):
    cert = holder_certificate(in_I_R(rng, dirichlet_laplacian_1d(1.0, 64)), alpha, 1.0, 2.0)
    assert cert.passed
    assert 0 < cert.theta < 0.5
    assert cert.theta == cert.xi / 2.0


def test_holder_admissibility():
    es = dirichlet_laplacian_1d(1.0, 4)
    with pytest.raises(AdmissibilityError):
        holder_certificate(SpectralField(np.array([0.1, 0, 0, 0]), es), 0.5, 1.0, 0.5)


# --- explicit exponent -----------------------------------------------------


def test_interpolation_constants():
    es = dirichlet_laplacian_1d(1.0, 64)
    ic = interpolation_constants(es, 0.5, 1.0, 1.0)
    assert ic.beta == 0.5
    assert all_pass(ic.checks) and len(ic.checks) == 64
    assert ic.C2 == pytest.approx(ic.C1 * (1 / es.eigenvalues[0] + 1))
    betas = [interpolation_constants(es, 0.5, 1.0, e).beta for e in (0.5, 1, 2, 10, 100)]
    assert np.all(np.diff(betas) > 0) and betas[-1] == pytest.approx(100 / 101)


def test_interpolation_domain():
    with pytest.raises(DomainError):
        interpolation_constants(dirichlet_laplacian_1d(1.0, 4), 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        interpolation_constants(EigenSystem(np.array([-1.0, 0.0]), 2, 1.0), 0.5, 1.0, 1.0)


def test_thm4_single_mode():
    es = dirichlet_laplacian_1d(1.0, 1)
    u0 = SpectralField(np.array([1.5 / (es.eigenvalues[0])]), es)
    res = verify_thm3(u0, es, 0.5, 1.0, 1.0, 2.0)
    assert all_pass(res.checks) and res.rescale == 1.0


def test_thm4_zero():
    es = dirichlet_laplacian_1d(1.0, 8)
    assert all_pass(verify_thm3(SpectralField(np.zeros(8), es), es, 0.5, 1.0, 1.0, 1.0).checks)


def test_thm4_mixed(rng):
    u0 = in_I_R(rng, MIXED)
    res = verify_thm3(u0, MIXED, 0.5, 1.0, 1.0, 2.0)
    assert any("u1(0)" in c.name for c in res.checks)
    assert all_pass(res.checks)


def test_thm4_rescale():
    es = dirichlet_laplacian_1d(1.0, 1)
    big = SpectralField(np.array([50.0]), es)
    res = verify_thm3(big, es, 0.5, 1.0, 1.0, 1e4)
    assert res.rescale < 1.0 and all_pass(res.checks)


def test_thm4_admissibility():
    es = dirichlet_laplacian_1d(1.0, 2)
    with pytest.raises(AdmissibilityError):
        verify_thm3(SpectralField(np.array([1.0, 1.0]), es), es, 0.5, 1.0, 1.0, 1.0)


# --- noisy data ------------------------------------------------------------


def test_noisy_identical():
    es = dirichlet_laplacian_1d(1.0, 4)
    tr = evolve_trajectory(SpectralField(np.ones(4) * 0.1, es), 0.5, np.linspace(0, 1, 5))
    checks = verify_noisy_holder(tr, tr, 1.0, 1.0, 0.0)
    assert all_pass(checks)
    assert checks[0].rhs == 2.0


def test_noisy_dirichlet(rng):
    es = dirichlet_laplacian_1d(1.0, 64)
    u0 = in_I_R(rng, es, R=1.0)
    u1 = in_I_R(rng, es, R=1.0)
    t = np.linspace(0, 1, 17)
    a, b = evolve_trajectory(u0, 0.5, t), evolve_trajectory(u1, 0.5, t)
    delta = (forward_evolve(u0, 0.5, 1.0) - forward_evolve(u1, 0.5, 1.0)).norm()
    checks = verify_noisy_holder(a, b, 1.0, 1.0, max(delta, 1e-3))
    assert all_pass(checks) and all(c.margin > 0 for c in checks)


def test_noisy_class_violation():
    es = dirichlet_laplacian_1d(1.0, 2)
    t = [0.0, 0.5, 1.0]
    a = evolve_trajectory(SpectralField(np.array([1.0, 0.0]), es), 0.5, t)
    b = evolve_trajectory(SpectralField(np.array([0.0, 1.0]), es), 0.5, t)
    with pytest.raises(AdmissibilityError):
        verify_noisy_holder(a, b, 1.0, 0.5, 1.0)
    with pytest.raises(AdmissibilityError):
        verify_noisy_holder(a, b, 1.0, 2.0, 1e-6)


# --- full certificate ------------------------------------------------------


def test_run_certificate_schema(rng):
    es = dirichlet_laplacian_1d(1.0, 16)
    cert = run_certificate(in_I_R(rng, es), 0.5, 1.0, 2.0, 1.0, time_points=9, dissipation_steps=256)
    assert cert.passed
    assert cert.theta == cert.xi / (2 * cert.T)
    assert cert.beta_holder == cert.epsilon / (cert.epsilon + 1)
    doc = json.loads(cert.to_json())
    validate(doc, "certificate")
    for c in cert.checks:
        assert c.rhs * (1 + SLACK) >= c.lhs
    text = cert.render()
    assert "log-convexity t=0:" in text and "<=" in text


def test_run_certificate_bad_K(rng):
    es = dirichlet_laplacian_1d(1.0, 16)
    cert = run_certificate(in_I_R(rng, es), 0.5, 1.0, 2.0, 1.0, time_points=9,
                           dissipation_steps=256, K_override=0.5)
    assert not cert.passed
