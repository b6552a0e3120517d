"""Gauge linear connections, Yang–Mills residuals and the flat-kernel solver.

Sections of the associated module for the trivial corepresentation are
trivialized as T^triv ⊗ η, so every operator acts on the base form η.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .bundle import (
    AdSection,
    BundleModel,
    ConnectionSpec,
    ContractError,
    ModelTag,
    curvature,
    dual_covariant_derivative,
    dual_s_operator,
    embed,
    is_central_form,
    to_base,
)
from .core import TorusElement, derivation, laplacian, star_phase_exponent, window_basis
from .forms import (
    TorusForm,
    codifferential,
    differential,
    form_star,
    hodge,
    hodge_inverse,
    inner_product,
    is_hermitian,
    norm,
)

PIPELINE_TOL = 1e-9


class ConsistencyError(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""


class ResidualKind(enum.Enum):
    ANALYTIC = "Analytic"
    GEOMETRIC_A = "GeometricA"
    GEOMETRIC_B = "GeometricB"


@dataclass(frozen=True)
class TrivializedSection:
    """T^triv ⊗ coefficient."""

    coefficient: TorusForm


@dataclass(frozen=True)
class ResidualReport:
    kind: ResidualKind
    residual: TrivializedSection
    norm: float
    is_solution: bool
    consistency_gap: float
    tolerance: float


def _pure_degree(form: TorusForm) -> int:
    ds = form.degrees()
    if len(ds) > 1:
        raise ContractError("section must have pure degree")
    return next(iter(ds), 0)


# ---------------------------------------------------------------------------
# Gauge connection and its exterior derivative


def gauge_qlc_apply(omega: ConnectionSpec, section: TorusElement) -> TrivializedSection:
    """Υ̂(D̂^ω(T)) for T = T^triv·b; the ω-dependence drops out (Grassmann)."""
    model = omega.model
    b = embed(model, TorusForm.function(section))
    return TrivializedSection(to_base(model, dual_covariant_derivative(omega, b)))


def exterior_cov_derivative(omega: ConnectionSpec, s: TrivializedSection) -> TrivializedSection:
    """d^∇(T⊗η) = ∇(T)η + T⊗dη with T = T^triv."""
    one = TorusElement.scalar(omega.model.xi)
    nabla_t = gauge_qlc_apply(omega, one).coefficient
    return TrivializedSection(nabla_t * s.coefficient + s.coefficient.d())


def formal_adjoint_apply(omega: ConnectionSpec, s: TrivializedSection) -> TrivializedSection:
    """(−1)^k ⋆^{-1} d^∇ ⋆ on a section of degree k+1."""
    p = _pure_degree(s.coefficient)
    if p == 0 and not s.coefficient.is_zero():
        raise ContractError("formal adjoint needs a section of degree ≥ 1")
    if s.coefficient.is_zero():
        return s
    inner = exterior_cov_derivative(omega, TrivializedSection(hodge(s.coefficient))).coefficient
    return TrivializedSection(hodge_inverse(inner) * ((-1) ** (p - 1)))


def s_trivialized(omega: ConnectionSpec, s: TrivializedSection, dual: bool = True) -> TrivializedSection:
    """d^{Ŝ} (dual=True) or d^{S} = −d^{Ŝ} on trivialized sections."""
    val = dual_s_operator(omega, AdSection(s.coefficient)).value
    return TrivializedSection(val if dual else -val)


def s_adjoint_apply(omega: ConnectionSpec, s: TrivializedSection, dual: bool = True) -> TrivializedSection:
    """(−1)^a ⋆^{-1} d^{Ŝ} ⋆ on a section of degree a+1; zero in model A."""
    if omega.model.tag is ModelTag.A or s.coefficient.is_zero():
        return TrivializedSection(TorusForm.zero(omega.model.xi))
    p = _pure_degree(s.coefficient)
    if p == 0:
        raise ContractError("adjoint of the S-operator needs a section of degree ≥ 1")
    inner = s_trivialized(omega, TrivializedSection(hodge(s.coefficient)), dual).coefficient
    return TrivializedSection(hodge_inverse(inner) * ((-1) ** (p - 1)))


# ---------------------------------------------------------------------------
# Residuals


def curvature_section(omega: ConnectionSpec) -> TrivializedSection:
    """Υ̂(R^ω)."""
    return TrivializedSection(curvature(omega).value)


def geometric_pipeline(omega: ConnectionSpec) -> TorusForm:
    """(d^∇ − d^S)^⋆ Υ̂(R^ω): the adjoint of the twisted derivative DS^ω = D^ω − S^ω.

    This is the gradient of ‖R^ω‖² (up to the factor 2).
    """
    f = curvature_section(omega)
    return (
        formal_adjoint_apply(omega, f).coefficient
        - s_adjoint_apply(omega, f, dual=False).coefficient
    )


def closed_form_a(mu: TorusForm) -> TorusForm:
    """d^⋆dμ componentwise: Σ_k (−Δ_L x_k + δ_k Σ_j δ_j x_j) dU_k for μ = Σ x_j dU_j."""
    xi = mu.xi
    n = xi.n
    div = TorusElement.zero(xi)
    for j in range(1, n + 1):
        div = div + derivation(j, mu.coefficient((j,)))
    comps = {}
    for k in range(1, n + 1):
        comps[(k,)] = -laplacian(mu.coefficient((k,))) + derivation(k, div)
    return TorusForm(xi, comps)


def ym_closed_form(mu: TorusForm) -> TorusForm:
    """d(⋆F) + μ⋆F + (−1)^{n−1}⋆Fμ with F = dμ + μμ."""
    n = mu.n
    f = mu.d() + mu * mu
    sf = hodge(f)
    return sf.d() + mu * sf + (sf * mu) * ((-1) ** (n - 1))


def _report(kind, residual: TorusForm, gap: float, tol: float) -> ResidualReport:
    if gap > PIPELINE_TOL * max(1.0, residual.norm_inf()):
        raise ConsistencyError(f"{kind.value} residual: independent evaluations differ by {gap:.3e}")
    nrm = norm(residual)
    return ResidualReport(kind, TrivializedSection(residual), nrm, nrm <= tol, gap, tol)


def geometric_residual(omega: ConnectionSpec, tol: float = 1e-9) -> ResidualReport:
    """Geometric YM residual, evaluated via the operator pipeline and a closed form.

    Model A reports d^⋆dμ (a 1-form). Model B reports the closed form
    d⋆F + μ⋆F + (−1)^{n−1}⋆Fμ; the pipeline equals −⋆^{-1} of it.
    """
    pipe = geometric_pipeline(omega)
    if omega.model.tag is ModelTag.A:
        closed = closed_form_a(omega.mu)
        return _report(ResidualKind.GEOMETRIC_A, closed, (pipe - closed).norm_inf(), tol)
    closed = ym_closed_form(omega.mu)
    mapped = -hodge(pipe)
    return _report(ResidualKind.GEOMETRIC_B, closed, (mapped - closed).norm_inf(), tol)


def module_connection(model: BundleModel, mu: TorusForm):
    """∇̂ = ∇̂^{ω^c} + Λ with Λ(T^triv) = T^triv⊗μ, as d^∇ on trivialized forms."""
    from .bundle import canonical_connection

    wc = canonical_connection(model)
    one = TorusElement.scalar(model.xi)
    nabla_one = gauge_qlc_apply(wc, one).coefficient + mu

    def d_nabla(eta: TorusForm) -> TorusForm:
        return nabla_one * eta + eta.d()

    return d_nabla


def analytic_residual(model: BundleModel, mu: TorusForm, tol: float = 1e-9) -> ResidualReport:
    """[d^∇̂, ⋆R^∇̂] applied to T^triv for the qlc ∇̂ with displacement μ."""
    if mu.degrees() - {1}:
        raise ContractError("mu must be a 1-form")
    if not is_hermitian(mu, 1e-10):
        raise ContractError("mu must be Hermitian")
    d_nabla = module_connection(model, mu)
    one = TorusForm.function(TorusElement.scalar(model.xi))
    curv = d_nabla(d_nabla(one))  # R^∇̂(T^triv) = T^triv⊗F
    psi = hodge(curv)
    grade = (-1) ** (model.n - 2)
    commutator = d_nabla(psi * one) - psi * d_nabla(one) * grade
    closed = ym_closed_form(mu)
    return _report(ResidualKind.ANALYTIC, commutator, (commutator - closed).norm_inf(), tol)


def ym_functional(omega: ConnectionSpec) -> float:
    """‖R^ω‖² = ⟨Υ̂(R^ω)|Υ̂(R^ω)⟩."""
    r = curvature_section(omega).coefficient
    return float(inner_product(r, r).real)


# ---------------------------------------------------------------------------
# Kernel solver


@dataclass(frozen=True)
class KernelResult:
    """Kernels on the window {u^m dU_j : |m|∞ ≤ max_exp}."""

    ym_basis: list[TorusForm]
    zero_curvature_basis: list[TorusForm]
    harmonic_basis: list[TorusForm]
    ym_hermitian_dim: int
    singular_gap: float
    smallest_nonzero: float
    labels: list[tuple[tuple[int, ...], int]] = field(repr=False)

    @property
    def ym_dim(self) -> int:
        return len(self.ym_basis)

    @property
    def zero_curvature_dim(self) -> int:
        return len(self.zero_curvature_basis)

    @property
    def harmonic_dim(self) -> int:
        return len(self.harmonic_basis)


def _one_form_labels(n: int, max_exp: int):
    return [(m, j) for m in window_basis(n, max_exp) for j in range(1, n + 1)]


def _column(form: TorusForm, index) -> np.ndarray:
    v = np.zeros(len(index), dtype=complex)
    for axes, x in form.components.items():
        for m, c in x.terms.items():
            v[index[(m, axes[0])]] += c
    return v


def _form_of(vec: np.ndarray, labels, xi) -> TorusForm:
    comps: dict = {}
    for c, (m, j) in zip(vec, labels):
        if abs(c) > 1e-12:
            comps.setdefault((j,), {})[m] = c
    return TorusForm(xi, {a: TorusElement(xi, t) for a, t in comps.items()})


def _null_space(mat: np.ndarray, gap: float):
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s >= gap))
    null = vh[rank:].conj().T
    nonzero = s[s >= gap]
    return null, s, float(nonzero.min()) if nonzero.size else 0.0


def _star_matrix(labels, xi) -> np.ndarray:
    """P with star(v) = P conj(v) on 1-form coefficient vectors."""
    index = {lab: i for i, lab in enumerate(labels)}
    p = np.zeros((len(labels), len(labels)), dtype=complex)
    for i, (m, j) in enumerate(labels):
        s = star_phase_exponent(xi, m)
        p[index[(tuple(-x for x in m), j)], i] = complex(math.cos(2 * math.pi * s), math.sin(2 * math.pi * s))
    return p


def _hermitian_dim(null: np.ndarray, p: np.ndarray, gap: float) -> int:
    """Real dimension of {v ∈ span(null) : P conj(v) = v}."""
    if null.shape[1] == 0:
        return 0
    vecs = []
    for w in null.T:
        sw = p @ w.conj()
        vecs.append(w + sw)
        vecs.append(1j * (w - sw))
    real = np.array([np.concatenate([v.real, v.imag]) for v in vecs])
    s = np.linalg.svd(real, compute_uv=False)
    return int(np.sum(s >= gap))


def flat_kernel_solver(model: BundleModel, max_exp: int, gap: float = 1e-6) -> KernelResult:
    """Kernels of μ ↦ d^⋆dμ, μ ↦ dμ and the Hodge Laplacian on the truncated 1-forms."""
    if max_exp < 1:
        raise ValueError("max_exp must be at least 1")
    if model.tag is not ModelTag.A:
        raise ContractError("the flat kernel solver is linear and only defined for model A")
    xi = model.xi
    n = xi.n
    labels = _one_form_labels(n, max_exp)
    index = {lab: i for i, lab in enumerate(labels)}
    wc = ConnectionSpec(model, TorusForm.zero(xi))

    ym_cols, d_cols, lap_cols = [], [], []
    two_form_index: dict = {}
    for m, j in labels:
        e = TorusForm.basis(xi, [j], TorusElement.monomial(xi, m))
        ym = formal_adjoint_apply(wc, TrivializedSection(e.d())).coefficient
        ym_cols.append(_column(ym, index))
        lap = ym + differential(codifferential(e))
        lap_cols.append(_column(lap, index))
        de = e.d()
        col = {}
        for axes, x in de.components.items():
            for mm, c in x.terms.items():
                key = (mm, axes)
                two_form_index.setdefault(key, len(two_form_index))
                col[two_form_index[key]] = c
        d_cols.append(col)

    ym_mat = np.array(ym_cols).T
    lap_mat = np.array(lap_cols).T
    d_mat = np.zeros((max(len(two_form_index), 1), len(labels)), dtype=complex)
    for i, col in enumerate(d_cols):
        for r, c in col.items():
            d_mat[r, i] = c

    ym_null, s, smallest = _null_space(ym_mat, gap)
    d_null, _, _ = _null_space(d_mat, gap)
    lap_null, _, _ = _null_space(lap_mat, gap)
    p = _star_matrix(labels, xi)
    return KernelResult(
        ym_basis=[_form_of(v, labels, xi) for v in ym_null.T],
        zero_curvature_basis=[_form_of(v, labels, xi) for v in d_null.T],
        harmonic_basis=[_form_of(v, labels, xi) for v in lap_null.T],
        ym_hermitian_dim=_hermitian_dim(ym_null, p, gap),
        singular_gap=gap,
        smallest_nonzero=smallest,
        labels=labels,
    )


def span_contains(basis: list[TorusForm], form: TorusForm, labels, tol: float = 1e-8) -> bool:
    """Whether form lies in the span of basis (least squares residual)."""
    index = {lab: i for i, lab in enumerate(labels)}
    a = np.array([_column(b, index) for b in basis]).T
    v = _column(form, index)
    if a.size == 0:
        return np.linalg.norm(v) <= tol
    coef, *_ = np.linalg.lstsq(a, v, rcond=None)
    return float(np.linalg.norm(a @ coef - v)) <= tol * max(1.0, float(np.linalg.norm(v)))


# ---------------------------------------------------------------------------
# Gauge shifts and metric compatibility


@dataclass(frozen=True)
class GaugeShiftResult:
    connection: ConnectionSpec
    ym_invariant: bool


def gauge_shift(omega: ConnectionSpec, shift: TorusForm, tol: float = 1e-10) -> GaugeShiftResult:
    """ω ↦ ω + shift, flagging whether ‖R‖² is guaranteed invariant."""
    if shift.degrees() - {1}:
        raise ContractError("shift must be a 1-form")
    if not is_hermitian(shift, tol):
        raise ContractError("shift must be Hermitian")
    new = ConnectionSpec(omega.model, omega.mu + shift)
    if omega.model.tag is ModelTag.A:
        ok = shift.d().norm_inf() <= tol
    else:
        ok = (shift.d() + shift * shift).norm_inf() <= tol and is_central_form(shift, tol)
    return GaugeShiftResult(new, ok)


def hermitian_structure(b1: TorusElement, b2: TorusElement) -> TorusElement:
    """⟨T_1,T_2⟩_R = b1* b2 for T_i = T^triv b_i."""
    return b1.star() * b2


def metric_compatibility_gap(omega: ConnectionSpec, b1: TorusElement, b2: TorusElement) -> float:
    """‖⟨T_1,∇̂T_2⟩ − ⟨∇̂T_1,T_2⟩ − d⟨T_1,T_2⟩‖∞."""
    nu1 = gauge_qlc_apply(omega, b1).coefficient
    nu2 = gauge_qlc_apply(omega, b2).coefficient
    left = b1.star() * nu2
    right = form_star(nu1) * b2
    target = TorusForm.function(hermitian_structure(b1, b2)).d()
    return (left - right - target).norm_inf()
