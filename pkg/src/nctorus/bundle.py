"""Quantum principal U(1)-bundles over the deformed torus.

Model A: total space T^{n+1} with the classical calculus; the extra generator
u_{n+1} carries the fiber coordinate and total forms are forms on T^{n+1}.

Model B: total space T^n ⊗ C[z, z^{-1}] with the non-standard calculus;
total forms are base forms tensored with the envelope, stored as
(axes, germ degree k, laurent exponent a) -> coefficient.

A connection is ω(ϑ) = ω^c(ϑ) + μ with μ a Hermitian base 1-form. Maps of
type ad (τ: ϑ -> horizontal form with trivial coaction) are represented by
their base-form value τ(ϑ).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np

from .core import DeformationMatrix, StructureError, TorusElement, is_central
from .forms import TorusForm, all_axes, form_star, is_hermitian, random_hermitian_one_form, shuffle_sign
from .u1 import (
    CalculusKind,
    EnvelopeElement,
    embedded_differential,
    germ_of_power,
    monomial_product,
    quantum_bracket,
    right_action,
    _d_monomial,
)


class ContractError(ValueError):
    """An operation was called outside its domain."""


class ModelTag(enum.Enum):
    A = "A"
    B = "B"

    @classmethod
    def parse(cls, text: str) -> "ModelTag":
        t = str(text).strip().upper().removeprefix("MODEL")
        try:
            return cls(t)
        except ValueError:
            raise ValueError(f"unknown bundle model {text!r}; expected A or B") from None


@dataclass(frozen=True)
class BundleModel:
    tag: ModelTag
    xi: DeformationMatrix
    fiber_row: tuple[float, ...] | None = None
    max_degree: int = 3

    def __post_init__(self):
        if self.fiber_row is not None:
            if self.tag is not ModelTag.A:
                raise ValueError("a fiber row only applies to model A")
            row = tuple(float(x) for x in self.fiber_row)
            if len(row) != self.xi.n:
                raise ValueError(f"fiber row must have length {self.xi.n}")
            object.__setattr__(self, "fiber_row", row)

    @classmethod
    def create(cls, tag, xi: DeformationMatrix, kind=None, fiber_row=None, max_degree: int = 3) -> "BundleModel":
        """Validated constructor; rejects invalid model/calculus pairings."""
        tag = tag if isinstance(tag, ModelTag) else ModelTag.parse(tag)
        model = cls(tag, xi, fiber_row, max_degree)
        if kind is not None:
            kind = kind if isinstance(kind, CalculusKind) else CalculusKind.parse(kind)
            if kind is not model.kind:
                raise ValueError(
                    f"model {tag.value} requires the {model.kind.value} calculus, got {kind.value}"
                )
        return model

    @property
    def n(self) -> int:
        return self.xi.n

    @property
    def kind(self) -> CalculusKind:
        return CalculusKind.CLASSICAL if self.tag is ModelTag.A else CalculusKind.NONSTANDARD

    @property
    def total_xi(self) -> DeformationMatrix:
        if self.tag is not ModelTag.A:
            raise ContractError("only model A has an extended deformation matrix")
        return self.xi.extend(self.fiber_row)


# ---------------------------------------------------------------------------
# Model B total forms

PKey = tuple[tuple[int, ...], int, int]


@dataclass(frozen=True, eq=False)
class ProductForm:
    """Σ (x e_S) ⊗ z^a ϑ^k in Ω(T) ⊗ Γ^∧ with the graded tensor product."""

    xi: DeformationMatrix
    terms: Mapping[PKey, TorusElement] = field(default_factory=dict)
    max_degree: int = 3

    def __post_init__(self):
        clean: dict[PKey, TorusElement] = {}
        for (axes, k, a), x in self.terms.items():
            key = (tuple(axes), int(k), int(a))
            if not isinstance(x, TorusElement) or x.xi != self.xi:
                raise StructureError("coefficients must be TorusElements over the base deformation")
            if key[1] > self.max_degree:
                continue
            clean[key] = clean[key] + x if key in clean else x
        object.__setattr__(self, "terms", {k: x for k, x in clean.items() if not x.is_zero()})

    @property
    def n(self) -> int:
        return self.xi.n

    def _like(self, terms) -> "ProductForm":
        return ProductForm(self.xi, terms, self.max_degree)

    def _check(self, other):
        if not isinstance(other, ProductForm) or other.xi != self.xi or other.max_degree != self.max_degree:
            raise StructureError("incompatible product forms")

    @classmethod
    def from_base(cls, form: TorusForm, a: int = 0, k: int = 0, max_degree: int = 3) -> "ProductForm":
        return cls(form.xi, {(axes, k, a): x for axes, x in form.components.items()}, max_degree)

    @classmethod
    def one(cls, xi: DeformationMatrix, max_degree: int = 3) -> "ProductForm":
        return cls(xi, {((), 0, 0): TorusElement.scalar(xi)}, max_degree)

    @classmethod
    def theta(cls, xi: DeformationMatrix, max_degree: int = 3) -> "ProductForm":
        return cls(xi, {((), 1, 0): TorusElement.scalar(xi)}, max_degree)

    def degrees(self) -> set[int]:
        return {len(axes) + k for (axes, k, _) in self.terms}

    def degree(self) -> int:
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(ds)}")
        return next(iter(ds), 0)

    def is_zero(self) -> bool:
        return not self.terms

    def norm_inf(self) -> float:
        return max((x.norm_inf() for x in self.terms.values()), default=0.0)

    def close_to(self, other, tol: float) -> bool:
        return (self - other).norm_inf() <= tol

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, x in other.terms.items():
            out[key] = out[key] + x if key in out else x
        return self._like(out)

    def __neg__(self):
        return self._like({key: -x for key, x in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self._like({key: x * other for key, x in self.terms.items()})
        self._check(other)
        out: dict[PKey, TorusElement] = {}
        kind = CalculusKind.NONSTANDARD
        for (s, j, a), x in self.terms.items():
            for (t, k, b), y in other.terms.items():
                if j + k > self.max_degree:
                    continue
                ws = shuffle_sign(s, t)
                if ws == 0:
                    continue
                sign = ws * monomial_product(kind, a, j, b, k) * (-1) ** (j * len(t))
                key = (tuple(sorted(s + t)), j + k, a + b)
                term = (x * y) * sign
                out[key] = out[key] + term if key in out else term
        return self._like(out)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def d(self) -> "ProductForm":
        """d(α⊗β) = dα⊗β + (−1)^{|α|} α⊗dβ."""
        out: dict[PKey, TorusElement] = {}

        def put(key, term):
            out[key] = out[key] + term if key in out else term

        for (s, k, a), x in self.terms.items():
            dx = TorusForm(self.xi, {s: x}).d()
            for t, y in dx.components.items():
                put((t, k, a), y)
            c = _d_monomial(CalculusKind.NONSTANDARD, a, k)
            if c and k + 1 <= self.max_degree:
                put((s, k + 1, a), x * (c * (-1) ** len(s)))
        return self._like(out)

    def star(self) -> "ProductForm":
        """(α⊗β)* = α*⊗β*."""
        out: dict[PKey, TorusElement] = {}
        for (s, k, a), x in self.terms.items():
            env = EnvelopeElement(CalculusKind.NONSTANDARD, {(a, k): 1.0}, self.max_degree).star()
            for (b, kk), c in env.terms.items():
                key = (s, kk, b)
                term = x.star() * c
                out[key] = out[key] + term if key in out else term
        return self._like(out)

    def __repr__(self):
        body = " + ".join(f"{x!r} dU{list(s)}⊗z^{a}ϑ^{k}" for (s, k, a), x in sorted(self.terms.items()))
        return f"ProductForm[{body or '0'}]"


TotalForm = Union[TorusForm, ProductForm]


# ---------------------------------------------------------------------------
# Connections and sections of type ad


@dataclass(frozen=True)
class ConnectionSpec:
    """ω = ω^c + λ with λ(ϑ) = mu, a Hermitian base 1-form."""

    model: BundleModel
    mu: TorusForm

    def __post_init__(self):
        if self.mu.xi != self.model.xi:
            raise StructureError("mu must live on the base torus of the model")
        if not self.mu.is_zero() and self.mu.degrees() != {1}:
            raise ContractError("mu must be a 1-form")
        if not is_hermitian(self.mu, 1e-10):
            raise ContractError("mu must be Hermitian: form_star(mu) == mu")


@dataclass(frozen=True)
class AdSection:
    """Map ϑ -> horizontal form of type ad, stored as its base-form value."""

    value: TorusForm

    def star(self) -> "AdSection":
        return AdSection(form_star(self.value))


def canonical_connection(model: BundleModel) -> ConnectionSpec:
    return ConnectionSpec(model, TorusForm.zero(model.xi))


def with_mu(model: BundleModel, mu: TorusForm) -> ConnectionSpec:
    return ConnectionSpec(model, mu)


def embed(model: BundleModel, form: TorusForm) -> TotalForm:
    """Base form as a total form (pullback along the base inclusion)."""
    if form.xi != model.xi:
        raise StructureError("form does not live on the model's base")
    if model.tag is ModelTag.B:
        return ProductForm.from_base(form, max_degree=model.max_degree)
    big = model.total_xi
    return TorusForm(
        big,
        {axes: TorusElement(big, {m + (0,): c for m, c in x.terms.items()}) for axes, x in form.components.items()},
    )


def fiber_monomial(model: BundleModel, form: TorusForm, c: int) -> TotalForm:
    """form · (fiber generator)^c: form·u_{n+1}^c in model A, form⊗z^c in model B."""
    if model.tag is ModelTag.B:
        return ProductForm.from_base(form, a=c, max_degree=model.max_degree)
    big = model.total_xi
    u = TorusElement.monomial(big, (0,) * model.n + (c,))
    return embed(model, form) * u


def total_one(model: BundleModel) -> TotalForm:
    return embed(model, TorusForm.function(TorusElement.scalar(model.xi)))


def is_horizontal(model: BundleModel, phi: TotalForm) -> bool:
    if model.tag is ModelTag.B:
        return all(k == 0 for (_, k, _) in phi.terms)
    return all(model.n + 1 not in axes for axes in phi.components)


def fiber_components(model: BundleModel, phi: TotalForm) -> dict[int, TotalForm]:
    """Split a horizontal form by fiber exponent: the coaction is φ_c ↦ φ_c ⊗ z^c."""
    if not is_horizontal(model, phi):
        raise ContractError("form is not horizontal")
    groups: dict[int, dict] = {}
    if model.tag is ModelTag.B:
        for key, x in phi.terms.items():
            groups.setdefault(key[2], {})[key] = x
        return {c: ProductForm(phi.xi, t, phi.max_degree) for c, t in sorted(groups.items())}
    for axes, x in phi.components.items():
        for m, coef in x.terms.items():
            groups.setdefault(m[-1], {}).setdefault(axes, {})[m] = coef
    return {
        c: TorusForm(phi.xi, {axes: TorusElement(phi.xi, t) for axes, t in comps.items()})
        for c, comps in sorted(groups.items())
    }


def to_base(model: BundleModel, phi: TotalForm, tol: float = 1e-9) -> TorusForm:
    """Inverse of embed on horizontal forms with trivial coaction."""
    if not is_horizontal(model, phi):
        raise ContractError("form is not horizontal")
    out: dict = {}
    if model.tag is ModelTag.B:
        for (axes, _, a), x in phi.terms.items():
            if a != 0:
                if x.norm_inf() > tol:
                    raise ContractError("form has a nontrivial fiber component")
                continue
            out[axes] = x
        return TorusForm(model.xi, out)
    for axes, x in phi.components.items():
        terms = {}
        for m, c in x.terms.items():
            if m[-1] != 0:
                if abs(c) > tol:
                    raise ContractError("form has a nontrivial fiber component")
                continue
            terms[m[:-1]] = c
        out[axes] = TorusElement(model.xi, terms)
    return TorusForm(model.xi, out)


def total_degree(phi: TotalForm) -> int:
    return phi.degree()


def connection_form(omega: ConnectionSpec) -> TotalForm:
    """ω(ϑ) = ω^c(ϑ) + μ as a total 1-form.

    Model A: ω^c(ϑ) = u_{n+1}* d u_{n+1}; model B: ω^c(ϑ) = 1⊗ϑ.
    """
    model = omega.model
    if model.tag is ModelTag.B:
        wc = ProductForm.theta(model.xi, model.max_degree)
    else:
        big = model.total_xi
        u = TorusElement.generator(big, model.n + 1)
        wc = u.star() * TorusForm.function(u).d()
    return wc + embed(model, omega.mu)


def theta_pair(model: BundleModel, left: TotalForm, right: TotalForm) -> TotalForm:
    """⟨ψ,φ⟩(ϑ) = m∘(ψ⊗φ)∘Θ(ϑ) = s ψ(ϑ)φ(ϑ) with Θ(ϑ) = sϑ⊗ϑ."""
    return (left * right) * embedded_differential(model.kind)


def bracket_pair(model: BundleModel, left: TotalForm, right: TotalForm) -> TotalForm:
    """[ψ,φ](ϑ) through c^T(ϑ) = cϑ⊗ϑ (c = 0 for U(1))."""
    return (left * right) * quantum_bracket(model.kind)


def _total_section(omega: ConnectionSpec, tau: AdSection) -> TotalForm:
    return embed(omega.model, tau.value)


def curvature_total(omega: ConnectionSpec) -> TotalForm:
    """R^ω(ϑ) = dω(ϑ) − ⟨ω,ω⟩(ϑ) in total-form arithmetic."""
    w = connection_form(omega)
    return w.d() - theta_pair(omega.model, w, w)


def curvature(omega: ConnectionSpec) -> AdSection:
    r = curvature_total(omega)
    if not is_horizontal(omega.model, r):
        raise ContractError("curvature is not horizontal; connection is malformed")
    return AdSection(to_base(omega.model, r))


def curvature_closed_form(omega: ConnectionSpec) -> TorusForm:
    """dμ in model A, dμ + μμ in model B."""
    mu = omega.mu
    if omega.model.tag is ModelTag.A:
        return mu.d()
    return mu.d() + mu * mu


def _homogeneous_parts(phi: TotalForm) -> dict[int, TotalForm]:
    if isinstance(phi, ProductForm):
        parts: dict[int, dict] = {}
        for key, x in phi.terms.items():
            parts.setdefault(len(key[0]) + key[1], {})[key] = x
        return {k: ProductForm(phi.xi, t, phi.max_degree) for k, t in parts.items()}
    return {k: phi.part(k) for k in phi.degrees()}


def _zero_like(model: BundleModel) -> TotalForm:
    return total_one(model) * 0.0


def covariant_derivative(omega: ConnectionSpec, phi: TotalForm) -> TotalForm:
    """D^ω(φ) = dφ − (−1)^k φ^{(0)} ω(π(φ^{(1)}))."""
    model = omega.model
    w = connection_form(omega)
    out = phi.d()
    for k, part in _homogeneous_parts(phi).items():
        for c, piece in fiber_components(model, part).items():
            g = germ_of_power(model.kind, c)
            if g:
                out = out - (piece * w) * (g * (-1) ** k)
    if not is_horizontal(model, out):
        raise ContractError("covariant derivative left the horizontal forms")
    return out


def dual_covariant_derivative(omega: ConnectionSpec, phi: TotalForm) -> TotalForm:
    """D̂^ω(φ) = dφ + ω(π(S^{-1}(φ^{(1)}))) φ^{(0)}."""
    model = omega.model
    w = connection_form(omega)
    out = phi.d()
    for c, piece in fiber_components(model, phi).items():
        g = germ_of_power(model.kind, -c)
        if g:
            out = out + (w * piece) * g
    if not is_horizontal(model, out):
        raise ContractError("dual covariant derivative left the horizontal forms")
    return out


def _pure_degree(tau: AdSection) -> int:
    ds = tau.value.degrees()
    if len(ds) > 1:
        raise ContractError("section must have pure degree")
    return next(iter(ds), 0)


def s_operator(omega: ConnectionSpec, tau: AdSection) -> AdSection:
    """S^ω(τ) = ⟨ω,τ⟩ − (−1)^k⟨τ,ω⟩ − (−1)^k[τ,ω]."""
    model = omega.model
    k = _pure_degree(tau)
    w = connection_form(omega)
    t = _total_section(omega, tau)
    sign = (-1) ** k
    val = theta_pair(model, w, t) - theta_pair(model, t, w) * sign - bracket_pair(model, t, w) * sign
    return AdSection(to_base(model, val))


def dual_s_operator(omega: ConnectionSpec, tau: AdSection) -> AdSection:
    """Ŝ^ω = ∗∘S^ω∘∗ (plain conjugation of the section values)."""
    return s_operator(omega, tau.star()).star()


def twisted_covariant_derivative(omega: ConnectionSpec, tau: AdSection) -> AdSection:
    """DS^ω(τ) = dτ − ⟨ω,τ⟩ + (−1)^k⟨τ,ω⟩, computed as D^ω(τ) − S^ω(τ)."""
    _pure_degree(tau)
    d_tau = covariant_derivative(omega, _total_section(omega, tau))
    return AdSection(to_base(omega.model, d_tau) - s_operator(omega, tau).value)


def dual_twisted_covariant_derivative(omega: ConnectionSpec, tau: AdSection) -> AdSection:
    """D̂S^ω = ∗∘DS^ω∘∗."""
    return twisted_covariant_derivative(omega, tau.star()).star()


def bianchi_sides(omega: ConnectionSpec) -> tuple[TorusForm, TorusForm]:
    """(DS^ω(R^ω), ⟨ω,⟨ω,ω⟩⟩ − ⟨⟨ω,ω⟩,ω⟩), both evaluated at ϑ."""
    model = omega.model
    lhs = twisted_covariant_derivative(omega, curvature(omega)).value
    w = connection_form(omega)
    ww = theta_pair(model, w, w)
    rhs_total = theta_pair(model, w, ww) - theta_pair(model, ww, w)
    return lhs, to_base(model, rhs_total)


# ---------------------------------------------------------------------------
# Coaction and structural checks

CoKey = tuple[int, int]  # (laurent exponent a, germ degree k) of the Γ^∧ leg


def _env_coproduct(a: int, k: int, max_degree: int) -> dict[tuple[CoKey, CoKey], complex]:
    """Δ(z^a ϑ^k) = (z^a⊗z^a)(ϑ⊗1 + 1⊗ϑ)^k in the graded tensor square."""
    kind = CalculusKind.NONSTANDARD
    cur: dict[tuple[CoKey, CoKey], complex] = {((a, 0), (a, 0)): 1.0 + 0j}
    factors = [(((0, 1), (0, 0)), 1.0), (((0, 0), (0, 1)), 1.0)]
    for _ in range(k):
        nxt: dict[tuple[CoKey, CoKey], complex] = {}
        for ((a1, k1), (a2, k2)), c in cur.items():
            for ((b1, j1), (b2, j2)), d in factors:
                if k1 + j1 > max_degree or k2 + j2 > max_degree:
                    continue
                sign = (-1) ** (k2 * j1)
                sign *= monomial_product(kind, a1, k1, b1, j1) * monomial_product(kind, a2, k2, b2, j2)
                key = ((a1 + b1, k1 + j1), (a2 + b2, k2 + j2))
                nxt[key] = nxt.get(key, 0j) + sign * c * d
        cur = nxt
    return cur


def coaction(model: BundleModel, phi: TotalForm) -> dict[CoKey, TotalForm]:
    """Δ_Ω(P)(φ) as a map from the Γ^∧ monomial z^a ϑ^k to its Ω(P) coefficient."""
    out: dict[CoKey, TotalForm] = {}

    def put(key, val):
        out[key] = out[key] + val if key in out else val

    if model.tag is ModelTag.A:
        big = model.total_xi
        top = model.n + 1
        for axes, x in phi.components.items():
            for m, c in x.terms.items():
                mono = TorusForm(big, {axes: TorusElement(big, {m: c})})
                put((m[-1], 0), mono)
                if top in axes:
                    rest = tuple(a for a in axes if a != top)
                    put((m[-1], 1), TorusForm(big, {rest: TorusElement(big, {m: c * (-1.0 / (2 * math.pi))})}))
        return out
    for (axes, k, a), x in phi.terms.items():
        for ((a1, k1), (a2, k2)), c in _env_coproduct(a, k, model.max_degree).items():
            put((a2, k2), ProductForm(phi.xi, {(axes, k1, a1): x * c}, phi.max_degree))
    return out


def connection_axiom_gap(omega: ConnectionSpec) -> float:
    """Distance between Δ(ω(ϑ)) and ω(ϑ)⊗1 + 1⊗ϑ."""
    model = omega.model
    w = connection_form(omega)
    co = coaction(model, w)
    expected = {(0, 0): w, (0, 1): total_one(model)}
    gap = 0.0
    for key in set(co) | set(expected):
        got = co.get(key, _zero_like(model))
        want = expected.get(key, _zero_like(model))
        gap = max(gap, (got - want).norm_inf())
    return gap


def hermiticity_gap(omega: ConnectionSpec) -> float:
    w = connection_form(omega)
    return (w.star() - w).norm_inf()


def random_horizontal(model: BundleModel, rng: np.random.Generator, degree: int, max_exp: int = 1) -> TotalForm:
    """Random horizontal form of the given degree with mixed fiber exponents."""
    total = _zero_like(model)
    for c in (-1, 0, 1, 2):
        base = TorusForm.random(model.xi, rng, degree, n_terms=2, max_exp=max_exp)
        total = total + fiber_monomial(model, base, c)
    return total


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    gap: float
    witness: TotalForm | None = None
    witness_degree: int | None = None


def check_regular(omega: ConnectionSpec, samples: int = 10, seed: int = 0, tol: float = 1e-9) -> RegularityReport:
    """Test ω(ϑ)φ = (−1)^k φ^{(0)} ω(ϑ∘φ^{(1)}) on random horizontal φ."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    model = omega.model
    rng = np.random.default_rng(seed)
    w = connection_form(omega)
    worst = 0.0
    for i in range(samples):
        k = i % (model.n + 1)
        phi = random_horizontal(model, rng, k)
        lhs = w * phi
        rhs = _zero_like(model)
        for c, piece in fiber_components(model, phi).items():
            rhs = rhs + (piece * w) * (right_action(model.kind, c) * (-1) ** k)
        gap = (lhs - rhs).norm_inf()
        worst = max(worst, gap)
        if gap > tol:
            return RegularityReport(False, gap, phi, k)
    return RegularityReport(True, worst)


def check_multiplicative(omega: ConnectionSpec, samples: int = 5, seed: int = 0, tol: float = 1e-9) -> RegularityReport:
    """Σ ω(π(q^{(1)}))ω(π(q^{(2)})) = 0 for q = (z²−1)g in the right ideal of the calculus.

    Only meaningful for the non-standard calculus; the classical 1-dimensional
    calculus is abelian and every connection is multiplicative.
    """
    model = omega.model
    if model.kind is CalculusKind.CLASSICAL:
        return RegularityReport(True, 0.0)
    rng = np.random.default_rng(seed)
    w = connection_form(omega)
    ww = w * w
    worst = 0.0
    for _ in range(samples):
        a = int(rng.integers(-4, 5))
        # q = z^{a+2} − z^a, group-like legs
        coeff = germ_of_power(model.kind, a + 2) ** 2 - germ_of_power(model.kind, a) ** 2
        worst = max(worst, (ww * coeff).norm_inf())
    return RegularityReport(worst <= tol, worst)


def random_connection(model: BundleModel, rng: np.random.Generator, n_terms: int = 2, max_exp: int = 1) -> ConnectionSpec:
    return ConnectionSpec(model, random_hermitian_one_form(model.xi, rng, n_terms, max_exp))


def flat_central_mu(xi: DeformationMatrix, ms: Iterable[float]) -> TorusForm:
    """2π Σ m_j dU_j (scalar coefficients)."""
    return TorusForm(xi, {(j,): TorusElement.scalar(xi, 2 * math.pi * m) for j, m in enumerate(ms, start=1) if m})


def is_central_form(form: TorusForm, tol: float = 1e-12) -> bool:
    return all(is_central(x, tol) for x in form.components.values())
