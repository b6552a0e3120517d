"""Dirac operator on the deformed torus and its gauge version for model A.

Spinors are finitely supported maps m -> C^{2^⌊n/2⌋}, i.e. elements of
L²(T, τ0) ⊗ C^{spin_dim} in the orthonormal basis u^m ⊗ e_s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import groupby
from typing import Iterable, Mapping

import numpy as np

from .bundle import ConnectionSpec, ContractError, ModelTag, embed, to_base
from .core import DeformationMatrix, StructureError, TorusElement, derivation, matrix_representation, window_basis
from .forms import TorusForm

TWO_PI = 2.0 * math.pi

_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)

_EXPLICIT_GAMMAS = {
    2: (_S1, _S2),
    3: (_S1, _S2, _S3),
    4: (
        np.diag([1, 1, -1, -1]).astype(complex),
        1j * np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]], dtype=complex),
        1j * np.array([[0, 0, 0, -1j], [0, 0, 1j, 0], [0, 1j, 0, 0], [-1j, 0, 0, 0]], dtype=complex),
        1j * np.array([[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]], dtype=complex),
    ),
}


def spin_dim(n: int) -> int:
    return 2 ** (n // 2)


@dataclass(frozen=True, eq=False)
class GammaRep:
    n: int
    matrices: tuple[np.ndarray, ...]

    @property
    def spin_dim(self) -> int:
        return self.matrices[0].shape[0]

    def anticommutator_error(self) -> float:
        eye = np.eye(self.spin_dim)
        err = 0.0
        for j, a in enumerate(self.matrices):
            for k, b in enumerate(self.matrices):
                err = max(err, float(np.abs(a @ b + b @ a - 2 * (j == k) * eye).max()))
        return err


def _chirality(mats: tuple[np.ndarray, ...]) -> np.ndarray:
    """Normalized product of all gammas: Hermitian, squares to 1, anticommutes with each."""
    g = np.eye(mats[0].shape[0], dtype=complex)
    for m in mats:
        g = g @ m
    sq = (g @ g)[0, 0]
    return g / np.sqrt(sq)


def gamma_matrices(n: int) -> GammaRep:
    """Explicit matrices for n = 2, 3, 4; tensor doubling above."""
    if n < 2:
        raise ValueError("gamma matrices need n ≥ 2")
    if n in _EXPLICIT_GAMMAS:
        mats = tuple(m.copy() for m in _EXPLICIT_GAMMAS[n])
    elif n % 2 == 1:
        prev = gamma_matrices(n - 1).matrices
        mats = prev + (_chirality(prev),)
    else:
        prev = gamma_matrices(n - 1).matrices
        size = prev[0].shape[0]
        mats = tuple(np.kron(m, _S1) for m in prev) + (np.kron(np.eye(size), _S2),)
    for m in mats:
        m.setflags(write=False)
    rep = GammaRep(n, mats)
    if rep.spin_dim != spin_dim(n):
        raise AssertionError(f"gamma size {rep.spin_dim} != {spin_dim(n)}")
    if rep.anticommutator_error() > 1e-14:
        raise AssertionError(f"gamma matrices for n={n} violate the Clifford relation")
    return rep


@dataclass(frozen=True, eq=False)
class Spinor:
    xi: DeformationMatrix
    spin_dim: int
    terms: Mapping[tuple[int, ...], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[tuple[int, ...], np.ndarray] = {}
        for m, v in self.terms.items():
            m = tuple(int(x) for x in m)
            if len(m) != self.xi.n:
                raise StructureError(f"exponent {m} has wrong length")
            v = np.asarray(v, dtype=complex).reshape(-1)
            if v.shape != (self.spin_dim,):
                raise StructureError(f"spinor vectors must have length {self.spin_dim}")
            clean[m] = clean[m] + v if m in clean else v.copy()
        out = {}
        for m, v in clean.items():
            if np.abs(v).max(initial=0.0) >= 1e-14:
                v.setflags(write=False)
                out[m] = v
        object.__setattr__(self, "terms", out)

    @property
    def n(self) -> int:
        return self.xi.n

    @classmethod
    def zero(cls, xi: DeformationMatrix, dim: int) -> "Spinor":
        return cls(xi, dim, {})

    @classmethod
    def constant(cls, xi: DeformationMatrix, vec) -> "Spinor":
        v = np.asarray(vec, dtype=complex)
        return cls(xi, v.shape[0], {(0,) * xi.n: v})

    @classmethod
    def random(cls, xi: DeformationMatrix, dim: int, rng: np.random.Generator, n_terms: int = 4, max_exp: int = 1) -> "Spinor":
        terms = {}
        for _ in range(n_terms):
            m = tuple(int(v) for v in rng.integers(-max_exp, max_exp + 1, size=xi.n))
            terms[m] = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return cls(xi, dim, terms)

    def _check(self, other: "Spinor"):
        if other.xi != self.xi or other.spin_dim != self.spin_dim:
            raise StructureError("spinors live in different spaces")

    def __add__(self, other: "Spinor") -> "Spinor":
        self._check(other)
        out = dict(self.terms)
        for m, v in other.terms.items():
            out[m] = out[m] + v if m in out else v
        return Spinor(self.xi, self.spin_dim, out)

    def __neg__(self):
        return Spinor(self.xi, self.spin_dim, {m: -v for m, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return Spinor(self.xi, self.spin_dim, {m: v * c for m, v in self.terms.items()})

    __rmul__ = __mul__

    def apply_matrix(self, g: np.ndarray) -> "Spinor":
        return Spinor(self.xi, self.spin_dim, {m: g @ v for m, v in self.terms.items()})

    def left_multiply(self, b: TorusElement) -> "Spinor":
        """(b ⊗ 1)ψ in the GNS representation."""
        if b.xi != self.xi:
            raise StructureError("element and spinor carry different deformations")
        out: dict[tuple[int, ...], np.ndarray] = {}
        for p, c in b.terms.items():
            for m, v in self.terms.items():
                key = tuple(x + y for x, y in zip(p, m))
                term = (c * self.xi.phase(p, m)) * v
                out[key] = out[key] + term if key in out else term
        return Spinor(self.xi, self.spin_dim, out)

    def norm_inf(self) -> float:
        return max((float(np.abs(v).max()) for v in self.terms.values()), default=0.0)

    def close_to(self, other: "Spinor", tol: float) -> bool:
        return (self - other).norm_inf() <= tol


def spinor_inner(a: Spinor, b: Spinor) -> complex:
    """Σ_s τ0(ψ_s* φ_s) = Σ_m ⟨ψ(m), φ(m)⟩."""
    a._check(b)
    return complex(sum(np.vdot(v, b.terms[m]) for m, v in a.terms.items() if m in b.terms))


def _check_rep(rep: GammaRep, psi: Spinor):
    if rep.n != psi.n or rep.spin_dim != psi.spin_dim:
        raise StructureError("gamma representation and spinor dimensions differ")


def dirac_apply(rep: GammaRep, psi: Spinor) -> Spinor:
    """(𝒟ψ)(m) = Σ_j 2πi m_j γ^j ψ(m)."""
    _check_rep(rep, psi)
    out = {}
    for m, v in psi.terms.items():
        g = sum((TWO_PI * 1j * m[j]) * rep.matrices[j] for j in range(rep.n) if m[j])
        if isinstance(g, np.ndarray):
            out[m] = g @ v
    return Spinor(psi.xi, psi.spin_dim, out)


def pi_r_apply(b0: TorusElement, b1: TorusElement, rep: GammaRep, psi: Spinor) -> Spinor:
    """π_R(b0 d_U b1)ψ = b0 Σ_j γ^j (δ_j(b1) ψ)."""
    _check_rep(rep, psi)
    total = Spinor.zero(psi.xi, psi.spin_dim)
    for j in range(1, rep.n + 1):
        db = derivation(j, b1)
        if db.is_zero():
            continue
        total = total + psi.left_multiply(db).apply_matrix(rep.matrices[j - 1])
    return total.left_multiply(b0)


def clifford_apply(form: TorusForm, rep: GammaRep, psi: Spinor) -> Spinor:
    """π_R(Σ x_j dU_j)ψ = Σ_j −i γ^j (x_j ψ)."""
    if form.degrees() - {1}:
        raise ContractError("Clifford action is defined on 1-forms")
    total = Spinor.zero(psi.xi, psi.spin_dim)
    for (j,), x in form.components.items():
        total = total + psi.left_multiply(x).apply_matrix(rep.matrices[j - 1] * (-1j))
    return total


@dataclass(frozen=True, eq=False)
class GaugeSpinor:
    """Σ_k T_k ⊗ ψ_k with T_k = T^R_1 b_k*, stored as (b_k, ψ_k) pairs."""

    pairs: tuple[tuple[TorusElement, Spinor], ...]

    def __post_init__(self):
        merged: list[tuple[TorusElement, Spinor]] = []
        for b, psi in self.pairs:
            if b.xi != psi.xi:
                raise StructureError("section and spinor carry different deformations")
            for i, (c, phi) in enumerate(merged):
                if (c - b).is_zero():
                    merged[i] = (c, phi + psi)
                    break
            else:
                merged.append((b, psi))
        kept = tuple((b, psi) for b, psi in merged if psi.terms and not b.is_zero())
        object.__setattr__(self, "pairs", kept)

    @classmethod
    def simple(cls, b: TorusElement, psi: Spinor) -> "GaugeSpinor":
        return cls(((b, psi),))

    @classmethod
    def trivial(cls, psi: Spinor) -> "GaugeSpinor":
        """T^R_1 ⊗ ψ."""
        return cls(((TorusElement.scalar(psi.xi), psi),))

    def component(self) -> Spinor | None:
        """ψ when the gauge spinor is T^R_1 ⊗ ψ."""
        if not self.pairs:
            return None
        if len(self.pairs) == 1 and (self.pairs[0][0] - 1.0).is_zero():
            return self.pairs[0][1]
        return None


def displacement_on_base(omega: ConnectionSpec) -> TorusForm:
    """Υ̂ of the displacement leg: u_{n+1}* μ u_{n+1} restricted to the base."""
    model = omega.model
    if omega.mu.is_zero():
        return omega.mu
    big = model.total_xi
    u = TorusElement.generator(big, model.n + 1)
    conj = u.star() * embed(model, omega.mu) * u
    return to_base(model, conj)


def _require_model_a(omega: ConnectionSpec):
    if omega.model.tag is not ModelTag.A:
        raise ContractError("the gauge Dirac operator is defined for model A with the δ^1 corepresentation")


def gauge_dirac_apply(omega: ConnectionSpec, rep: GammaRep, psi_in: GaugeSpinor) -> GaugeSpinor:
    """Σ_k (b_k 𝒟ψ_k − [𝒟,b_k]ψ_k − π_R(μ') b_k ψ_k), returned on T^R_1."""
    _require_model_a(omega)
    mu = displacement_on_base(omega)
    xi = omega.model.xi
    one = TorusElement.scalar(xi)
    total = Spinor.zero(xi, rep.spin_dim)
    for b, psi in psi_in.pairs:
        _check_rep(rep, psi)
        total = total + dirac_apply(rep, psi).left_multiply(b)
        total = total - pi_r_apply(one, b, rep, psi)
        if not mu.is_zero():
            total = total - clifford_apply(mu, rep, psi.left_multiply(b))
    return GaugeSpinor.trivial(total)


def dirac_residual(omega: ConnectionSpec, rep: GammaRep, psi_in: GaugeSpinor) -> Spinor:
    """Σ_k (b_k𝒟 − d(b_k))ψ_k with d(b) acting as the commutator 𝒟b − b𝒟."""
    _require_model_a(omega)
    mu = displacement_on_base(omega)
    total = Spinor.zero(omega.model.xi, rep.spin_dim)
    for b, psi in psi_in.pairs:
        bpsi = psi.left_multiply(b)
        d_psi = dirac_apply(rep, psi)
        commutator = dirac_apply(rep, bpsi) - d_psi.left_multiply(b)
        total = total + d_psi.left_multiply(b) - commutator
        if not mu.is_zero():
            total = total - clifford_apply(mu, rep, bpsi)
    return total


def gauge_spinor_inner(a: GaugeSpinor, b: GaugeSpinor) -> complex:
    """Σ ⟨ψ_k | ⟨T_k,T_l⟩_R ψ_l⟩ with ⟨T^R_1 x, T^R_1 y⟩_R = x* y and x = b*."""
    total = 0j
    for bk, psik in a.pairs:
        for bl, psil in b.pairs:
            total += spinor_inner(psik, psil.left_multiply(bk * bl.star()))
    return total


# ---------------------------------------------------------------------------
# Truncated spectra


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    signature: int | None
    cutoff: int
    matrix: np.ndarray = field(repr=False)
    basis: list[tuple[int, ...]] = field(repr=False)

    def multiplicities(self, decimals: int = 8) -> list[tuple[float, float, int]]:
        rounded = [(float(round(z.real, decimals)) + 0.0, float(round(z.imag, decimals)) + 0.0) for z in self.eigenvalues]
        rows = []
        for key, grp in groupby(rounded):
            rows.append((key[0], key[1], len(list(grp))))
        return rows


def gauge_dirac_matrix(omega: ConnectionSpec, rep: GammaRep, cutoff: int):
    """Matrix of φ ↦ 𝒟φ − π_R(μ')φ on {u^m ⊗ e_s : |m|∞ ≤ cutoff}; index = site·spin_dim + s."""
    _require_model_a(omega)
    xi = omega.model.xi
    basis = window_basis(xi.n, cutoff)
    sd = rep.spin_dim
    dirac_block = np.zeros((len(basis) * sd, len(basis) * sd), dtype=complex)
    for i, m in enumerate(basis):
        g = sum((TWO_PI * 1j * m[j]) * rep.matrices[j] for j in range(xi.n))
        dirac_block[i * sd:(i + 1) * sd, i * sd:(i + 1) * sd] = g
    mu = displacement_on_base(omega)
    for (j,), x in mu.components.items():
        left = matrix_representation(x, cutoff).matrix
        dirac_block -= np.kron(left, -1j * rep.matrices[j - 1])
    margin = mu.radius() if not mu.is_zero() else 0
    return dirac_block, basis, margin


def dirac_spectrum(omega: ConnectionSpec, rep: GammaRep, cutoff: int, tol: float = 1e-9) -> SpectrumResult:
    """Eigenvalues sorted by magnitude then argument, plus the adjointness signature."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    mat, basis, margin = gauge_dirac_matrix(omega, rep, cutoff)
    ev = np.linalg.eigvals(mat)
    ev = np.where(np.abs(ev.real) < tol, 1j * ev.imag, ev)
    ev = np.where(np.abs(ev.imag) < tol, ev.real + 0j, ev)
    order = sorted(range(len(ev)), key=lambda i: (round(abs(ev[i]), 9), round(math.atan2(ev[i].imag, ev[i].real), 9)))
    ev = ev[order]
    interior = np.repeat(
        np.array([max((abs(x) for x in m), default=0) + margin <= cutoff for m in basis]),
        rep.spin_dim,
    )
    block = mat[np.ix_(interior, interior)]
    adj = block.conj().T
    scale = max(1.0, float(np.abs(block).max()))
    signature = None
    if np.abs(adj - block).max() <= tol * scale:
        signature = 1
    elif np.abs(adj + block).max() <= tol * scale:
        signature = -1
    return SpectrumResult(ev, signature, cutoff, mat, basis)
