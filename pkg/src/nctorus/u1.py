"""Laurent-polynomial Hopf algebra of U(1) and its two 1-dimensional calculi.

Germ vectors are multiples of ϑ = π(z). The envelope stores z^a ϑ^k terms,
truncated at a maximal germ degree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import DEFAULT_ZERO_TOL


class CalculusKind(enum.Enum):
    CLASSICAL = "Classical"
    NONSTANDARD = "NonStandard"

    @classmethod
    def parse(cls, text: str) -> "CalculusKind":
        for kind in cls:
            if kind.value.lower() == str(text).lower():
                return kind
        raise ValueError(f"unknown calculus kind {text!r}; expected Classical or NonStandard")


@dataclass(frozen=True, eq=False)
class LaurentElement:
    terms: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean: dict[int, complex] = {}
        for a, c in self.terms.items():
            clean[int(a)] = clean.get(int(a), 0j) + complex(c)
        object.__setattr__(self, "terms", {a: c for a, c in clean.items() if abs(c) >= DEFAULT_ZERO_TOL})

    @classmethod
    def z(cls, a: int = 1, c: complex = 1.0) -> "LaurentElement":
        return cls({a: c})

    @classmethod
    def random(cls, rng: np.random.Generator, n_terms: int = 4, max_exp: int = 4) -> "LaurentElement":
        return cls({int(rng.integers(-max_exp, max_exp + 1)): complex(rng.normal(), rng.normal()) for _ in range(n_terms)})

    def __add__(self, other: "LaurentElement") -> "LaurentElement":
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0j) + c
        return LaurentElement(out)

    def __neg__(self):
        return LaurentElement({a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return LaurentElement({a: c * other for a, c in self.terms.items()})
        out: dict[int, complex] = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                out[a + b] = out.get(a + b, 0j) + c * d
        return LaurentElement(out)

    __rmul__ = __mul__

    def star(self) -> "LaurentElement":
        return LaurentElement({-a: c.conjugate() for a, c in self.terms.items()})

    def close_to(self, other: "LaurentElement", tol: float) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.terms.values())


def hopf_coproduct(g: LaurentElement) -> dict[tuple[int, int], complex]:
    """Δ(z^a) = z^a ⊗ z^a, as a map (left exponent, right exponent) -> coefficient."""
    return {(a, a): c for a, c in g.terms.items()}


def counit(g: LaurentElement) -> complex:
    return sum(g.terms.values(), 0j)


def antipode(g: LaurentElement) -> LaurentElement:
    return LaurentElement({-a: c for a, c in g.terms.items()})


def germ_of_power(kind: CalculusKind, a: int) -> int:
    """Coefficient c with π(z^a) = c ϑ."""
    if kind is CalculusKind.CLASSICAL:
        return a
    return a % 2


def germs_map(kind: CalculusKind, g: LaurentElement) -> complex:
    """π(g) as the coefficient of ϑ."""
    return sum((germ_of_power(kind, a) * c for a, c in g.terms.items()), 0j)


def right_action(kind: CalculusKind, a: int) -> int:
    """c with ϑ∘z^a = c ϑ, from π(h)∘g = π(hg) − ε(h)π(g) with h = z."""
    return germ_of_power(kind, a + 1) - germ_of_power(kind, a)


def embedded_differential(kind: CalculusKind) -> float:
    """s with Θ(ϑ) = s ϑ⊗ϑ."""
    return 0.0 if kind is CalculusKind.CLASSICAL else -1.0


def quantum_bracket(kind: CalculusKind) -> float:
    """c with c^T(ϑ) = c ϑ⊗ϑ; ad is trivial, so c^T(ϑ) = ϑ⊗π(1) = 0."""
    return float(germ_of_power(kind, 0))


@dataclass(frozen=True, eq=False)
class EnvelopeElement:
    """Σ c_{a,k} z^a ϑ^k, truncated at germ degree max_degree.

    ``truncated`` records that a product or differential dropped terms.
    """

    kind: CalculusKind
    terms: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    max_degree: int = 3
    truncated: bool = False

    def __post_init__(self):
        clean: dict[tuple[int, int], complex] = {}
        dropped = self.truncated
        for (a, k), c in self.terms.items():
            if k < 0:
                raise ValueError("germ degree must be nonnegative")
            if k > self.max_degree or (self.kind is CalculusKind.CLASSICAL and k > 1):
                if abs(c) >= DEFAULT_ZERO_TOL and k > self.max_degree:
                    dropped = True
                continue
            clean[(int(a), int(k))] = clean.get((int(a), int(k)), 0j) + complex(c)
        object.__setattr__(self, "terms", {key: c for key, c in clean.items() if abs(c) >= DEFAULT_ZERO_TOL})
        object.__setattr__(self, "truncated", dropped)

    @classmethod
    def monomial(cls, kind: CalculusKind, a: int, k: int = 0, c: complex = 1.0, max_degree: int = 3) -> "EnvelopeElement":
        return cls(kind, {(a, k): c}, max_degree)

    @classmethod
    def random(cls, kind: CalculusKind, rng: np.random.Generator, degree: int, n_terms: int = 3, max_exp: int = 3, max_degree: int = 3):
        return cls(
            kind,
            {(int(rng.integers(-max_exp, max_exp + 1)), degree): complex(rng.normal(), rng.normal()) for _ in range(n_terms)},
            max_degree,
        )

    def _like(self, terms, truncated=False) -> "EnvelopeElement":
        return EnvelopeElement(self.kind, terms, self.max_degree, truncated)

    def _check(self, other: "EnvelopeElement"):
        if other.kind is not self.kind or other.max_degree != self.max_degree:
            raise ValueError("envelope operands have different calculus kind or truncation")

    def degrees(self) -> set[int]:
        return {k for (_, k) in self.terms}

    def norm_inf(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def close_to(self, other: "EnvelopeElement", tol: float) -> bool:
        return (self - other).norm_inf() <= tol

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0j) + c
        return self._like(out, self.truncated or other.truncated)

    def __neg__(self):
        return self._like({key: -c for key, c in self.terms.items()}, self.truncated)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self._like({key: c * other for key, c in self.terms.items()}, self.truncated)
        return envelope_multiply(self, other)

    def __rmul__(self, other):
        return self * other

    def d(self) -> "EnvelopeElement":
        return envelope_differential(self)

    def star(self) -> "EnvelopeElement":
        return envelope_star(self)


def monomial_product(kind: CalculusKind, a: int, j: int, b: int, k: int) -> int:
    """Sign of (z^a ϑ^j)(z^b ϑ^k) = sign · z^{a+b} ϑ^{j+k}; 0 if it vanishes."""
    if kind is CalculusKind.CLASSICAL:
        return 0 if j + k > 1 else 1
    return -1 if (j * b) % 2 else 1


def envelope_multiply(x: EnvelopeElement, y: EnvelopeElement) -> EnvelopeElement:
    x._check(y)
    out: dict[tuple[int, int], complex] = {}
    dropped = x.truncated or y.truncated
    for (a, j), c in x.terms.items():
        for (b, k), d in y.terms.items():
            sign = monomial_product(x.kind, a, j, b, k)
            if sign == 0:
                continue
            if j + k > x.max_degree:
                dropped = True
                continue
            key = (a + b, j + k)
            out[key] = out.get(key, 0j) + sign * c * d
    return x._like(out, dropped)


def _d_monomial(kind: CalculusKind, a: int, k: int) -> int:
    """c with d(z^a ϑ^k) = c z^a ϑ^{k+1}.

    Leibniz with d(z^a) = π(z^a) z^a ϑ and dϑ = sϑϑ, where Θ(ϑ) = sϑ⊗ϑ.
    """
    first = germ_of_power(kind, a)
    theta = embedded_differential(kind)
    rest = sum((-1) ** i for i in range(k)) * theta
    return int(first + rest)


def envelope_differential(x: EnvelopeElement) -> EnvelopeElement:
    """Graded derivation with d(z^a) = π(z^a) z^a ϑ and dϑ = Θ-multiplied ϑϑ."""
    out: dict[tuple[int, int], complex] = {}
    dropped = x.truncated
    for (a, k), c in x.terms.items():
        coeff = _d_monomial(x.kind, a, k)
        if coeff == 0:
            continue
        if k + 1 > x.max_degree:
            dropped = True
            continue
        out[(a, k + 1)] = out.get((a, k + 1), 0j) + coeff * c
    return x._like(out, dropped)


def envelope_star(x: EnvelopeElement) -> EnvelopeElement:
    """(z^a ϑ^k)* = (−1)^{k(k−1)/2} ϑ^k z^{−a}, renormalized by the product rule."""
    out: dict[tuple[int, int], complex] = {}
    for (a, k), c in x.terms.items():
        sign = (-1) ** (k * (k - 1) // 2)
        # ϑ^k z^{-a} = monomial_product(0,k,-a,0) z^{-a} ϑ^k
        sign *= monomial_product(x.kind, 0, k, -a, 0)
        key = (-a, k)
        out[key] = out.get(key, 0j) + sign * c.conjugate()
    return x._like(out, x.truncated)
