import math

import numpy as np
import pytest

from nctorus.bundle import BundleModel, ConnectionSpec, ContractError, canonical_connection, flat_central_mu, random_connection
from nctorus.core import TorusElement
from nctorus.forms import TorusForm, form_star, hodge, hodge_inverse, inner_product, random_hermitian_one_form
from nctorus.yang_mills import (
    ConsistencyError,
    ResidualKind,
    TrivializedSection,
    _report,
    analytic_residual,
    closed_form_a,
    exterior_cov_derivative,
    flat_kernel_solver,
    formal_adjoint_apply,
    gauge_qlc_apply,
    gauge_shift,
    geometric_pipeline,
    geometric_residual,
    metric_compatibility_gap,
    s_adjoint_apply,
    s_trivialized,
    span_contains,
    ym_closed_form,
    ym_functional,
)

TWO_PI = 2 * math.pi


def A(xi):
    return BundleModel.create("A", xi)


def B(xi):
    return BundleModel.create("B", xi)


def u1_mu(xi):
    u1 = TorusElement.generator(xi, 1)
    return TorusForm.basis(xi, [2], u1 + u1.star())


def test_gauge_qlc_examples(xi2):
    wc = canonical_connection(A(xi2))
    assert gauge_qlc_apply(wc, TorusElement.scalar(xi2)).coefficient.is_zero()
    u1 = TorusElement.generator(xi2, 1)
    got = gauge_qlc_apply(wc, u1).coefficient
    assert got.close_to(TorusForm.basis(xi2, [1], u1 * -TWO_PI), 1e-13)


def test_exterior_derivative_examples(xi2):
    wc = canonical_connection(B(xi2))
    u1 = TorusElement.generator(xi2, 1)
    d = lambda f: exterior_cov_derivative(wc, TrivializedSection(f)).coefficient
    assert d(TorusForm.basis(xi2, [1])).is_zero()
    assert d(TorusForm.basis(xi2, [2], u1)).close_to(TorusForm.basis(xi2, [1, 2], u1 * -TWO_PI), 1e-13)
    f = TorusForm.function(u1 * 2.0 + TorusElement.generator(xi2, 2))
    assert d(d(f)).norm_inf() < 1e-12


def test_formal_adjoint(xi3, rng):
    wc = canonical_connection(A(xi3))
    assert formal_adjoint_apply(wc, TrivializedSection(TorusForm.basis(xi3, [1]))).coefficient.is_zero()
    with pytest.raises(ContractError):
        formal_adjoint_apply(wc, TrivializedSection(TorusForm.function(TorusElement.scalar(xi3, 2.0))))
    for k in range(3):
        a = TorusForm.random(xi3, rng, k, 4, 1)
        b = TorusForm.random(xi3, rng, k + 1, 4, 1)
        lhs = inner_product(exterior_cov_derivative(wc, TrivializedSection(a)).coefficient, b)
        rhs = inner_product(a, formal_adjoint_apply(wc, TrivializedSection(b)).coefficient)
        assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs))


def test_s_adjoint(xi3, rng):
    omega_a = random_connection(A(xi3), rng)
    b = TrivializedSection(TorusForm.random(xi3, rng, 2))
    assert s_adjoint_apply(omega_a, b).coefficient.is_zero()
    central = ConnectionSpec(B(xi3), flat_central_mu(xi3, [1, -2, 0]))
    scalar2 = TrivializedSection(TorusForm.basis(xi3, [1, 3], 0.7))
    assert s_adjoint_apply(central, scalar2).coefficient.is_zero()
    omega = ConnectionSpec(B(xi3), random_hermitian_one_form(xi3, rng, 3, 1))
    for k in range(3):
        a = TorusForm.random(xi3, rng, k, 4, 1)
        c = TorusForm.random(xi3, rng, k + 1, 4, 1)
        lhs = inner_product(s_trivialized(omega, TrivializedSection(a)).coefficient, c)
        rhs = inner_product(a, s_adjoint_apply(omega, TrivializedSection(c)).coefficient)
        assert abs(lhs - rhs) < 1e-9 * max(1, abs(lhs))


def test_geometric_residual_model_a(xi2):
    flat = TorusForm.one_form({1: TorusElement.scalar(xi2, 0.4), 2: TorusElement.scalar(xi2, -1.3)})
    rep = geometric_residual(ConnectionSpec(A(xi2), flat))
    assert rep.is_solution and rep.norm == 0 and rep.kind is ResidualKind.GEOMETRIC_A
    mu = u1_mu(xi2)
    rep = geometric_residual(ConnectionSpec(A(xi2), mu))
    assert not rep.is_solution
    # +4π² with the Euclidean codifferential, see the decision ledger
    assert rep.residual.coefficient.close_to(mu * (4 * math.pi**2), 1e-10)
    assert rep.consistency_gap <= 1e-9


def test_flat_solutions_model_b(xi3, rng):
    for _ in range(5):
        mu = flat_central_mu(xi3, rng.integers(-3, 4, size=3))
        assert geometric_residual(ConnectionSpec(B(xi3), mu)).is_solution
        assert analytic_residual(B(xi3), mu).is_solution
    assert analytic_residual(B(xi3), TorusForm.zero(xi3)).norm == 0


def test_analytic_equals_geometric(xi2, rng):
    for _ in range(5):
        mu = random_hermitian_one_form(xi2, rng)
        a = analytic_residual(B(xi2), mu).residual.coefficient
        g = geometric_residual(ConnectionSpec(B(xi2), mu)).residual.coefficient
        assert a.close_to(g, 1e-9)


def test_analytic_rejects_bad_mu(xi2):
    u1 = TorusElement.generator(xi2, 1)
    with pytest.raises(ContractError):
        analytic_residual(B(xi2), TorusForm.basis(xi2, [1], u1))
    with pytest.raises(ContractError):
        analytic_residual(B(xi2), TorusForm.dvol(xi2))


@pytest.mark.parametrize("tag", ["A", "B"])
def test_pipeline_matches_closed_form(tag, xi3, rng):
    m = BundleModel.create(tag, xi3)
    for _ in range(5):
        omega = random_connection(m, rng)
        pipe = geometric_pipeline(omega)
        closed = closed_form_a(omega.mu) if tag == "A" else -hodge_inverse(ym_closed_form(omega.mu))
        assert pipe.close_to(closed, 1e-9 * max(1.0, closed.norm_inf()))


@pytest.mark.parametrize("tag", ["A", "B"])
def test_pipeline_is_gradient(tag, xi2, rng):
    """d/dt ‖R(μ + tν)‖² at t=0 equals 2 Re⟨ν | pipeline⟩."""
    m = BundleModel.create(tag, xi2)
    mu = random_hermitian_one_form(xi2, rng)
    nu = random_hermitian_one_form(xi2, rng)
    f = lambda t: ym_functional(ConnectionSpec(m, mu + nu * t))
    h = 1e-3
    fd = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)
    grad = 2 * inner_product(nu, geometric_pipeline(ConnectionSpec(m, mu))).real
    assert abs(fd - grad) < 1e-5 * max(1.0, abs(grad))


def test_consistency_error_is_raised(xi2):
    zero = TorusForm.zero(xi2)
    with pytest.raises(ConsistencyError):
        _report(ResidualKind.ANALYTIC, zero, 1e-3, 1e-9)


def test_ym_functional(xi2):
    assert ym_functional(canonical_connection(A(xi2))) == 0
    assert abs(ym_functional(ConnectionSpec(A(xi2), u1_mu(xi2))) - 8 * math.pi**2) < 1e-10


def test_kernel_solver_n2(xi2):
    k = flat_kernel_solver(A(xi2), 2)
    # ker d^⋆d = ker d on the window: constants plus exact forms d(u^m), m ≠ 0
    assert k.ym_dim == k.zero_curvature_dim == 2 + 5**2 - 1
    assert k.harmonic_dim == 2
    assert k.ym_hermitian_dim == k.ym_dim
    assert abs(k.smallest_nonzero - 4 * math.pi**2) < 1e-8
    for j in (1, 2):
        assert span_contains(k.harmonic_basis, TorusForm.basis(xi2, [j]), k.labels)
        assert span_contains(k.ym_basis, TorusForm.basis(xi2, [j]), k.labels)
    exact = TorusForm.function(TorusElement.monomial(xi2, (1, -2))).d()
    assert span_contains(k.ym_basis, exact, k.labels)
    assert not span_contains(k.ym_basis, u1_mu(xi2), k.labels)


def test_kernel_solver_rejects_model_b(xi2):
    with pytest.raises(ContractError):
        flat_kernel_solver(B(xi2), 1)


def test_gauge_shift(xi2, rng):
    wc = canonical_connection(A(xi2))
    out = gauge_shift(wc, flat_central_mu(xi2, [1, 0]))
    assert out.ym_invariant
    assert out.connection.mu.close_to(flat_central_mu(xi2, [1, 0]), 0)
    mu = u1_mu(xi2)
    out = gauge_shift(wc, mu)
    assert not out.ym_invariant
    from nctorus.bundle import curvature

    assert curvature(out.connection).value.close_to(mu.d(), 1e-12)
    with pytest.raises(ContractError):
        gauge_shift(wc, TorusForm.basis(xi2, [1], TorusElement.generator(xi2, 1)))
    omega = random_connection(B(xi2), rng)
    assert not gauge_shift(omega, mu).ym_invariant
    assert gauge_shift(omega, flat_central_mu(xi2, [2, -1])).ym_invariant


@pytest.mark.parametrize("tag", ["A", "B"])
def test_metric_compatibility(tag, xi3, rng):
    m = BundleModel.create(tag, xi3)
    for _ in range(5):
        omega = random_connection(m, rng)
        b1 = TorusElement.random(xi3, rng)
        b2 = TorusElement.random(xi3, rng)
        assert metric_compatibility_gap(omega, b1, b2) < 1e-10
