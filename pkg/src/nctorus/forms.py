"""Differential forms Ω(T) = T ⊗ ΛC^n over the deformed torus.

A form is a map from sorted axis tuples (1-based labels) to coefficients.
The basis 1-forms dU_j are central and self-adjoint, and
d(x e_S) = Σ_j i δ_j(x) e_j ∧ e_S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .core import DeformationMatrix, StructureError, TorusElement, derivation, trace_tau0

Axes = tuple[int, ...]


def shuffle_sign(s: Axes, t: Axes) -> int:
    """Sign of the permutation sorting the concatenation s + t (0 if they overlap)."""
    if set(s) & set(t):
        return 0
    inversions = sum(1 for a in s for b in t if a > b)
    return -1 if inversions % 2 else 1


def complement(s: Axes, n: int) -> Axes:
    return tuple(j for j in range(1, n + 1) if j not in s)


def all_axes(n: int, degree: int) -> list[Axes]:
    return list(combinations(range(1, n + 1), degree))


@dataclass(frozen=True, eq=False)
class TorusForm:
    """Element of Ω(T): Σ_S x_S e_S."""

    xi: DeformationMatrix
    components: Mapping[Axes, TorusElement] = field(default_factory=dict)

    def __post_init__(self):
        n = self.xi.n
        clean: dict[Axes, TorusElement] = {}
        for axes, x in self.components.items():
            axes = tuple(int(a) for a in axes)
            if list(axes) != sorted(set(axes)) or any(not 1 <= a <= n for a in axes):
                raise StructureError(f"axes {axes} must be strictly increasing labels in 1..{n}")
            if not isinstance(x, TorusElement):
                raise StructureError("form coefficients must be TorusElements")
            if x.xi != self.xi:
                raise StructureError("coefficient deformation differs from form deformation")
            clean[axes] = clean[axes] + x if axes in clean else x
        object.__setattr__(self, "components", {a: x for a, x in clean.items() if not x.is_zero()})

    @property
    def n(self) -> int:
        return self.xi.n

    # construction
    @classmethod
    def zero(cls, xi: DeformationMatrix) -> "TorusForm":
        return cls(xi, {})

    @classmethod
    def function(cls, x: TorusElement) -> "TorusForm":
        return cls(x.xi, {(): x})

    @classmethod
    def basis(cls, xi: DeformationMatrix, axes: Iterable[int], coeff: TorusElement | complex = 1.0) -> "TorusForm":
        """coeff · dU_{axes}, with unsorted axes reordered and signed."""
        axes = tuple(axes)
        order = sorted(range(len(axes)), key=lambda i: axes[i])
        sorted_axes = tuple(axes[i] for i in order)
        if len(set(axes)) != len(axes):
            return cls.zero(xi)
        sign = _perm_sign(order)
        if not isinstance(coeff, TorusElement):
            coeff = TorusElement.scalar(xi, coeff)
        return cls(xi, {sorted_axes: coeff * sign})

    @classmethod
    def one_form(cls, coeffs: Mapping[int, TorusElement]) -> "TorusForm":
        """Σ_j x_j dU_j from a map axis -> coefficient."""
        xs = list(coeffs.values())
        if not xs:
            raise ValueError("one_form needs at least one coefficient")
        return cls(xs[0].xi, {(j,): x for j, x in coeffs.items()})

    @classmethod
    def dvol(cls, xi: DeformationMatrix) -> "TorusForm":
        return cls.basis(xi, range(1, xi.n + 1))

    @classmethod
    def random(
        cls,
        xi: DeformationMatrix,
        rng: np.random.Generator,
        degree: int,
        n_terms: int = 3,
        max_exp: int = 2,
    ) -> "TorusForm":
        return cls(
            xi,
            {axes: TorusElement.random(xi, rng, n_terms, max_exp) for axes in all_axes(xi.n, degree)},
        )

    # inspection
    def degrees(self) -> set[int]:
        return {len(a) for a in self.components}

    def degree(self) -> int:
        """The unique degree of a homogeneous nonzero form (0 for the zero form)."""
        ds = self.degrees()
        if len(ds) > 1:
            raise ValueError(f"form is not homogeneous: degrees {sorted(ds)}")
        return next(iter(ds), 0)

    def part(self, degree: int) -> "TorusForm":
        return TorusForm(self.xi, {a: x for a, x in self.components.items() if len(a) == degree})

    def coefficient(self, axes: Iterable[int]) -> TorusElement:
        return self.components.get(tuple(axes), TorusElement.zero(self.xi))

    def is_zero(self) -> bool:
        return not self.components

    def norm_inf(self) -> float:
        return max((x.norm_inf() for x in self.components.values()), default=0.0)

    def radius(self) -> int:
        return max((x.radius() for x in self.components.values()), default=0)

    def close_to(self, other: "TorusForm", tol: float) -> bool:
        return (self - other).norm_inf() <= tol

    def _check(self, other: "TorusForm"):
        if not isinstance(other, TorusForm):
            raise StructureError(f"expected TorusForm, got {type(other).__name__}")
        if other.xi != self.xi:
            raise StructureError("forms carry different deformation matrices")

    # arithmetic
    def __add__(self, other):
        self._check(other)
        out = dict(self.components)
        for a, x in other.components.items():
            out[a] = out[a] + x if a in out else x
        return TorusForm(self.xi, out)

    def __neg__(self):
        return TorusForm(self.xi, {a: -x for a, x in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return TorusForm(self.xi, {a: x * other for a, x in self.components.items()})
        if isinstance(other, TorusElement):
            other = TorusForm.function(other)
        if isinstance(other, TorusForm):
            return wedge(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        if isinstance(other, TorusElement):
            return wedge(TorusForm.function(other), self)
        return NotImplemented

    def d(self) -> "TorusForm":
        return differential(self)

    def star(self) -> "TorusForm":
        return form_star(self)

    def hodge(self) -> "TorusForm":
        return hodge(self)

    def __repr__(self):
        body = " + ".join(f"{x!r} dU{list(a)}" for a, x in sorted(self.components.items()))
        return f"TorusForm[{body or '0'}]"


def _perm_sign(order: list[int]) -> int:
    sign = 1
    seen = list(order)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i] > seen[j]:
                sign = -sign
    return sign


def wedge(a: TorusForm, b: TorusForm) -> TorusForm:
    a._check(b)
    out: dict[Axes, TorusElement] = {}
    for s, x in a.components.items():
        for t, y in b.components.items():
            sign = shuffle_sign(s, t)
            if sign == 0:
                continue
            key = tuple(sorted(s + t))
            term = (x * y) * sign
            out[key] = out[key] + term if key in out else term
    return TorusForm(a.xi, out)


def differential(a: TorusForm) -> TorusForm:
    """d(x e_S) = Σ_j i δ_j(x) e_j ∧ e_S."""
    out: dict[Axes, TorusElement] = {}
    for s, x in a.components.items():
        for j in range(1, a.n + 1):
            if j in s:
                continue
            dx = derivation(j, x)
            if dx.is_zero():
                continue
            key = tuple(sorted((j,) + s))
            term = dx * (1j * shuffle_sign((j,), s))
            out[key] = out[key] + term if key in out else term
    return TorusForm(a.xi, out)


def hodge(a: TorusForm) -> TorusForm:
    """Euclidean Hodge star on the exterior factor: ⋆e_S = sign(S, S^c) e_{S^c}."""
    out = {}
    for s, x in a.components.items():
        c = complement(s, a.n)
        out[c] = x * shuffle_sign(s, c)
    return TorusForm(a.xi, out)


def hodge_inverse(a: TorusForm) -> TorusForm:
    """⋆^{-1}, using ⋆⋆ = (−1)^{k(n−k)} on degree k."""
    out = {}
    n = a.n
    for s, x in a.components.items():
        p = len(s)
        c = complement(s, n)
        sign = shuffle_sign(s, c) * (-1) ** (p * (n - p))
        out[c] = x * sign
    return TorusForm(a.xi, out)


def form_star(a: TorusForm) -> TorusForm:
    """Graded involution: (x e_S)* = x* e_S.

    Reversing the wedge of k self-adjoint 1-forms contributes (−1)^{k(k−1)/2},
    which cancels the prefactor of the graded tensor involution.
    """
    return TorusForm(a.xi, {s: x.star() for s, x in a.components.items()})


def is_hermitian(a: TorusForm, tol: float = 1e-12) -> bool:
    return form_star(a).close_to(a, tol)


def integrate(a: TorusForm) -> complex:
    """τ0 of the top-degree coefficient."""
    top = tuple(range(1, a.n + 1))
    x = a.components.get(top)
    return 0j if x is None else trace_tau0(x)


def inner_product(a: TorusForm, b: TorusForm) -> complex:
    """⟨a|b⟩ = ∫ a* ⋆b, summed over matching degrees."""
    a._check(b)
    total = 0j
    for k in a.degrees() & b.degrees():
        total += integrate(wedge(form_star(a.part(k)), hodge(b.part(k))))
    return total


def norm(a: TorusForm) -> float:
    return math.sqrt(max(inner_product(a, a).real, 0.0))


def codifferential(a: TorusForm) -> TorusForm:
    """d^⋆ = (−1)^k ⋆^{-1} d ⋆ on degree k+1; zero on functions."""
    if a.components and a.degrees() == {0}:
        raise ValueError("codifferential needs a component of degree ≥ 1")
    out = TorusForm.zero(a.xi)
    for p in sorted(a.degrees()):
        if p == 0:
            continue
        k = p - 1
        out = out + hodge_inverse(differential(hodge(a.part(p)))) * ((-1) ** k)
    return out


def random_hermitian_one_form(
    xi: DeformationMatrix,
    rng: np.random.Generator,
    n_terms: int = 2,
    max_exp: int = 1,
) -> TorusForm:
    """Σ_j (x_j + x_j*) dU_j with random x_j."""
    comps = {}
    for j in range(1, xi.n + 1):
        x = TorusElement.random(xi, rng, n_terms, max_exp)
        comps[(j,)] = x + x.star()
    return TorusForm(xi, comps)
