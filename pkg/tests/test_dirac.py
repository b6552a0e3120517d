import math

import numpy as np
import pytest

from nctorus.bundle import BundleModel, ConnectionSpec, ContractError, canonical_connection, random_connection
from nctorus.core import DeformationMatrix, TorusElement
from nctorus.dirac import (
    GaugeSpinor,
    Spinor,
    dirac_apply,
    dirac_residual,
    dirac_spectrum,
    gamma_matrices,
    gauge_dirac_apply,
    gauge_spinor_inner,
    pi_r_apply,
    spin_dim,
    spinor_inner,
)

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("n", range(2, 8))
def test_gammas_clifford(n):
    rep = gamma_matrices(n)
    assert rep.spin_dim == spin_dim(n) == 2 ** (n // 2)
    assert rep.anticommutator_error() == 0
    for g in rep.matrices:
        assert np.array_equal(g, g.conj().T)


def test_gammas_n2_n3():
    g = gamma_matrices(2).matrices
    assert np.array_equal(g[0], [[0, 1], [1, 0]])
    assert np.array_equal(g[1], [[0, -1j], [1j, 0]])
    assert np.array_equal(gamma_matrices(3).matrices[2], np.diag([1, -1]))


def test_gamma_n1_rejected():
    with pytest.raises(ValueError):
        gamma_matrices(1)


def test_dirac_examples(xi2):
    rep = gamma_matrices(2)
    e = np.array([0.3, -1j])
    assert dirac_apply(rep, Spinor.constant(xi2, e)).norm_inf() == 0
    psi = Spinor(xi2, 2, {(1, 0): e})
    got = dirac_apply(rep, psi)
    assert np.allclose(got.terms[(1, 0)], TWO_PI * 1j * rep.matrices[0] @ e, atol=1e-14)


def test_dirac_square(xi3):
    rep = gamma_matrices(3)
    for m in [(1, 0, 0), (1, -2, 1), (0, 3, -1)]:
        psi = Spinor(xi3, 2, {m: [1.0, 2j]})
        got = dirac_apply(rep, dirac_apply(rep, psi))
        assert got.close_to(psi * (-4 * math.pi**2 * sum(x * x for x in m)), 1e-10)


def test_pi_r(xi2, rng):
    rep = gamma_matrices(2)
    psi = Spinor.random(xi2, 2, rng)
    one = TorusElement.scalar(xi2)
    assert pi_r_apply(one, one, rep, psi).norm_inf() == 0
    u1 = TorusElement.generator(xi2, 1)
    want = psi.left_multiply(u1).apply_matrix(rep.matrices[0]) * (TWO_PI * 1j)
    assert pi_r_apply(one, u1, rep, psi).close_to(want, 1e-12)


def test_pi_r_is_commutator(xi2, rng):
    """[𝒟, b] acts as π_R(1 ⊗ d b)."""
    rep = gamma_matrices(2)
    psi = Spinor.random(xi2, 2, rng)
    b = TorusElement.random(xi2, rng, 3, 1)
    comm = dirac_apply(rep, psi.left_multiply(b)) - dirac_apply(rep, psi).left_multiply(b)
    assert comm.close_to(pi_r_apply(TorusElement.scalar(xi2), b, rep, psi), 1e-10)


def model_a(xi):
    return BundleModel.create("A", xi)


def test_canonical_annihilates_constant(xi2):
    rep = gamma_matrices(2)
    wc = canonical_connection(model_a(xi2))
    psi0 = Spinor.constant(xi2, [1.0, 1j])
    out = gauge_dirac_apply(wc, rep, GaugeSpinor.trivial(psi0))
    assert out.pairs == ()
    assert dirac_residual(wc, rep, GaugeSpinor.trivial(psi0)).norm_inf() == 0


def test_section_u1_example(xi2):
    rep = gamma_matrices(2)
    wc = canonical_connection(model_a(xi2))
    u1 = TorusElement.generator(xi2, 1)
    psi0 = Spinor.constant(xi2, [0.5, -2.0])
    out = gauge_dirac_apply(wc, rep, GaugeSpinor.simple(u1, psi0)).component()
    want = psi0.left_multiply(u1).apply_matrix(rep.matrices[0]) * (-TWO_PI * 1j)
    assert out.close_to(want, 1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_residual_routes_agree(n, rng):
    xi = DeformationMatrix.random(n, rng)
    rep = gamma_matrices(n)
    omega = random_connection(model_a(xi), rng)
    psi = GaugeSpinor(
        ((TorusElement.random(xi, rng, 3, 1), Spinor.random(xi, rep.spin_dim, rng)),
         (TorusElement.random(xi, rng, 3, 1), Spinor.random(xi, rep.spin_dim, rng)))
    )
    a = gauge_dirac_apply(omega, rep, psi).component()
    b = dirac_residual(omega, rep, psi)
    assert a.close_to(b, 1e-10)


def test_model_b_rejected(xi2):
    wc = canonical_connection(BundleModel.create("B", xi2))
    rep = gamma_matrices(2)
    with pytest.raises(ContractError):
        gauge_dirac_apply(wc, rep, GaugeSpinor.trivial(Spinor.constant(xi2, [1.0, 0.0])))


def test_inner_products(xi2, rng):
    psi0 = Spinor.constant(xi2, [1.0, 0.0])
    assert abs(gauge_spinor_inner(GaugeSpinor.trivial(psi0), GaugeSpinor.trivial(psi0)) - 1) < 1e-15
    a = Spinor(xi2, 2, {(1, 0): [1.0, 0.0]})
    b = Spinor(xi2, 2, {(0, 1): [1.0, 0.0]})
    assert spinor_inner(a, b) == 0
    for _ in range(5):
        g = GaugeSpinor(
            ((TorusElement.random(xi2, rng, 2, 1), Spinor.random(xi2, 2, rng)),
             (TorusElement.random(xi2, rng, 2, 1), Spinor.random(xi2, 2, rng)))
        )
        val = gauge_spinor_inner(g, g)
        assert val.real >= -1e-12 and abs(val.imag) < 1e-10


def test_spectrum_cutoff_one(xi2):
    spec = dirac_spectrum(canonical_connection(model_a(xi2)), gamma_matrices(2), 1)
    rows = spec.multiplicities()
    r2 = round(TWO_PI * math.sqrt(2), 8)
    r1 = round(TWO_PI, 8)
    assert rows == [(0.0, 0.0, 2), (0.0, -r1, 4), (0.0, r1, 4), (0.0, -r2, 4), (0.0, r2, 4)]
    assert spec.signature == -1


def test_spectrum_with_displacement(xi2, rng):
    omega = random_connection(model_a(xi2), rng)
    for cutoff in (2, 3):
        spec = dirac_spectrum(omega, gamma_matrices(2), cutoff)
        assert spec.signature == -1
        assert np.abs(spec.eigenvalues.real).max() < 1e-8


def test_spinor_validation(xi2):
    from nctorus.core import StructureError

    with pytest.raises(StructureError):
        Spinor(xi2, 2, {(0, 0): [1.0, 2.0, 3.0]})
    with pytest.raises(ValueError):
        dirac_spectrum(canonical_connection(model_a(xi2)), gamma_matrices(2), 0)
