"""Arithmetic in the deformed torus algebra.

Elements are finite sums of normal-ordered monomials u_1^{m_1}...u_n^{m_n}
with complex coefficients. Generators satisfy u_k u_j = e^{2πiΞ_kj} u_j u_k
and u_k* = u_k^{-1}.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product as iproduct
from typing import Iterable, Mapping

import numpy as np

DEFAULT_ZERO_TOL = 1e-14
TWO_PI = 2.0 * math.pi


class StructureError(ValueError):
    """Operands live in incompatible algebras."""


@dataclass(frozen=True)
class DeformationMatrix:
    """Real antisymmetric n×n matrix Ξ stored as nested tuples."""

    entries: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("deformation matrix must be square and non-empty")
        for k in range(n):
            if rows[k][k] != 0.0:
                raise ValueError(f"diagonal entry Ξ[{k}][{k}] must vanish")
            for j in range(k):
                if rows[k][j] != -rows[j][k]:
                    raise ValueError(f"Ξ is not antisymmetric at ({k},{j})")

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def zeros(cls, n: int) -> "DeformationMatrix":
        return cls(tuple((0.0,) * n for _ in range(n)))

    @classmethod
    def from_array(cls, arr) -> "DeformationMatrix":
        a = np.asarray(arr, dtype=float)
        if a.ndim != 2:
            raise ValueError("deformation matrix must be 2-dimensional")
        return cls(tuple(tuple(r) for r in a.tolist()))

    @classmethod
    def from_upper(cls, n: int, upper: Mapping[tuple[int, int], float]) -> "DeformationMatrix":
        """Build from entries Ξ_kj with k < j given 1-based."""
        a = np.zeros((n, n))
        for (k, j), v in upper.items():
            a[k - 1, j - 1] = v
            a[j - 1, k - 1] = -v
        return cls.from_array(a)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "DeformationMatrix":
        a = rng.uniform(-0.5, 0.5, size=(n, n))
        a = np.triu(a, 1)
        return cls.from_array(a - a.T)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    def extend(self, fiber_row: Iterable[float] | None = None) -> "DeformationMatrix":
        """Append one generator; row n+1 holds Ξ_{n+1,j}."""
        n = self.n
        row = np.zeros(n) if fiber_row is None else np.asarray(list(fiber_row), dtype=float)
        if row.shape != (n,):
            raise ValueError(f"fiber row must have length {n}")
        a = np.zeros((n + 1, n + 1))
        a[:n, :n] = self.array()
        a[n, :n] = row
        a[:n, n] = -row
        return DeformationMatrix.from_array(a)

    def phase_exponent(self, m: tuple[int, ...], mp: tuple[int, ...]) -> float:
        """s with u^m u^{m'} = e^{2πi s} u^{m+m'}."""
        s = 0.0
        e = self.entries
        for k in range(len(m)):
            mk = m[k]
            if mk == 0:
                continue
            row = e[k]
            for j in range(k):
                if mp[j]:
                    s += mk * row[j] * mp[j]
        return s

    def phase(self, m: tuple[int, ...], mp: tuple[int, ...]) -> complex:
        s = self.phase_exponent(m, mp)
        return 1.0 + 0j if s == 0.0 else cmath.exp(2j * math.pi * s)


def _clean(terms: dict, tol: float) -> dict:
    return {m: c for m, c in terms.items() if abs(c) >= tol}


@dataclass(frozen=True, eq=False)
class TorusElement:
    """Finite combination Σ a_m u^m in normal order."""

    xi: DeformationMatrix
    terms: Mapping[tuple[int, ...], complex] = field(default_factory=dict)
    tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        n = self.xi.n
        clean = {}
        for m, c in self.terms.items():
            m = tuple(int(x) for x in m)
            if len(m) != n:
                raise StructureError(f"exponent {m} has wrong length for n={n}")
            clean[m] = clean.get(m, 0j) + complex(c)
        object.__setattr__(self, "terms", _clean(clean, self.tol))

    # construction helpers
    @property
    def n(self) -> int:
        return self.xi.n

    @classmethod
    def zero(cls, xi: DeformationMatrix) -> "TorusElement":
        return cls(xi, {})

    @classmethod
    def scalar(cls, xi: DeformationMatrix, c: complex = 1.0) -> "TorusElement":
        return cls(xi, {(0,) * xi.n: c})

    @classmethod
    def monomial(cls, xi: DeformationMatrix, m: Iterable[int], c: complex = 1.0) -> "TorusElement":
        return cls(xi, {tuple(m): c})

    @classmethod
    def generator(cls, xi: DeformationMatrix, k: int) -> "TorusElement":
        """u_k for 1-based k."""
        if not 1 <= k <= xi.n:
            raise ValueError(f"generator index {k} out of range 1..{xi.n}")
        m = [0] * xi.n
        m[k - 1] = 1
        return cls.monomial(xi, m)

    @classmethod
    def random(
        cls,
        xi: DeformationMatrix,
        rng: np.random.Generator,
        n_terms: int = 4,
        max_exp: int = 2,
    ) -> "TorusElement":
        terms = {}
        for _ in range(n_terms):
            m = tuple(int(v) for v in rng.integers(-max_exp, max_exp + 1, size=xi.n))
            terms[m] = terms.get(m, 0j) + complex(rng.normal(), rng.normal())
        return cls(xi, terms)

    # structure
    def _check(self, other: "TorusElement"):
        if not isinstance(other, TorusElement):
            raise StructureError(f"expected TorusElement, got {type(other).__name__}")
        if other.xi != self.xi:
            raise StructureError("operands carry different deformation matrices")

    def is_zero(self) -> bool:
        return not self.terms

    def radius(self) -> int:
        """Largest sup-norm of an exponent in the support."""
        return max((max((abs(x) for x in m), default=0) for m in self.terms), default=0)

    def coefficient(self, m: Iterable[int]) -> complex:
        return self.terms.get(tuple(m), 0j)

    def norm_inf(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def hs_norm(self) -> float:
        """sqrt(τ0(a*a)), the L² norm of the coefficient sequence."""
        return math.sqrt(sum(abs(c) ** 2 for c in self.terms.values()))

    def close_to(self, other: "TorusElement", tol: float) -> bool:
        return (self - other).norm_inf() <= tol

    # arithmetic
    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = TorusElement.scalar(self.xi, other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0j) + c
        return TorusElement(self.xi, out, self.tol)

    __radd__ = __add__

    def __neg__(self):
        return TorusElement(self.xi, {m: -c for m, c in self.terms.items()}, self.tol)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return TorusElement(self.xi, {m: c * other for m, c in self.terms.items()}, self.tol)
        if isinstance(other, TorusElement):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def star(self) -> "TorusElement":
        return star(self)

    def __repr__(self):
        body = " + ".join(f"({c:.6g})u^{m}" for m, c in sorted(self.terms.items()))
        return f"TorusElement[{body or '0'}]"


def multiply(a: TorusElement, b: TorusElement) -> TorusElement:
    """Product with normal-ordering phases."""
    a._check(b)
    xi = a.xi
    out: dict[tuple[int, ...], complex] = {}
    for m, c in a.terms.items():
        for mp, cp in b.terms.items():
            key = tuple(x + y for x, y in zip(m, mp))
            out[key] = out.get(key, 0j) + c * cp * xi.phase(m, mp)
    return TorusElement(xi, out, a.tol)


def star_phase_exponent(xi: DeformationMatrix, m: tuple[int, ...]) -> float:
    """s with (u^m)* = e^{2πi s} u^{-m}, from normal-ordering u_n^{-m_n}...u_1^{-m_1}."""
    s = 0.0
    e = xi.entries
    for k in range(len(m)):
        if m[k] == 0:
            continue
        for j in range(k):
            if m[j]:
                s += e[k][j] * m[k] * m[j]
    return s


def star(a: TorusElement) -> TorusElement:
    """Antilinear involution with u_k* = u_k^{-1}."""
    out = {}
    for m, c in a.terms.items():
        s = star_phase_exponent(a.xi, m)
        ph = 1.0 if s == 0.0 else cmath.exp(2j * math.pi * s)
        out[tuple(-x for x in m)] = c.conjugate() * ph
    return TorusElement(a.xi, out, a.tol)


def trace_tau0(a: TorusElement) -> complex:
    return a.terms.get((0,) * a.n, 0j)


def derivation(j: int, a: TorusElement) -> TorusElement:
    """δ_j(u^m) = 2πi m_j u^m for 1-based axis j."""
    if not 1 <= j <= a.n:
        raise ValueError(f"axis {j} out of range 1..{a.n}")
    return TorusElement(a.xi, {m: 2j * math.pi * m[j - 1] * c for m, c in a.terms.items()}, a.tol)


def laplacian(a: TorusElement) -> TorusElement:
    """Δ_L = Σ_j δ_j²; on monomials multiplication by −4π²|m|²."""
    f = -(TWO_PI**2)
    return TorusElement(a.xi, {m: f * sum(x * x for x in m) * c for m, c in a.terms.items()}, a.tol)


def is_central(a: TorusElement, tol: float = 1e-12) -> bool:
    """Whether a commutes with every generator."""
    for k in range(1, a.n + 1):
        u = TorusElement.generator(a.xi, k)
        if (u * a - a * u).norm_inf() > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Operator oracle on the truncated GNS basis


def window_basis(n: int, cutoff: int) -> list[tuple[int, ...]]:
    """Exponents with |m|∞ ≤ cutoff in lexicographic order."""
    return [tuple(m) for m in iproduct(range(-cutoff, cutoff + 1), repeat=n)]


@dataclass(frozen=True)
class WindowRep:
    """Matrix of left multiplication on the window, plus interior flags.

    ``interior[i]`` is True when basis vector i is at least ``margin`` away
    from the window boundary, so products of operators with support radius
    summing to ≤ margin are exact on those columns.
    """

    matrix: np.ndarray
    basis: list[tuple[int, ...]]
    cutoff: int

    def interior(self, margin: int) -> np.ndarray:
        return np.array([max((abs(x) for x in m), default=0) + margin <= self.cutoff for m in self.basis])


@lru_cache(maxsize=16)
def _generator_maps(xi: DeformationMatrix, cutoff: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """u_k as a partial permutation: column i goes to row target[i] (−1 if it leaves) times phase[i]."""
    basis = window_basis(xi.n, cutoff)
    index = {m: i for i, m in enumerate(basis)}
    maps = []
    for k in range(xi.n):
        target = np.full(len(basis), -1)
        phase = np.zeros(len(basis), dtype=complex)
        for i, m in enumerate(basis):
            shifted = list(m)
            shifted[k] += 1
            t = index.get(tuple(shifted))
            if t is None:
                continue
            target[i] = t
            phase[i] = cmath.exp(2j * math.pi * sum(xi.entries[k][j] * m[j] for j in range(k)))
        maps.append((target, phase))
    return tuple(maps)


def _adjoint_map(target: np.ndarray, phase: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inv_t = np.full(len(target), -1)
    inv_p = np.zeros(len(target), dtype=complex)
    src = np.nonzero(target >= 0)[0]
    inv_t[target[src]] = src
    inv_p[target[src]] = phase[src].conj()
    return inv_t, inv_p


def _to_dense(target: np.ndarray, phase: np.ndarray) -> np.ndarray:
    M = np.zeros((len(target), len(target)), dtype=complex)
    cols = np.nonzero(target >= 0)[0]
    M[target[cols], cols] = phase[cols]
    return M


def generator_matrices(xi: DeformationMatrix, cutoff: int) -> list[np.ndarray]:
    """Matrices of u_k acting on the window by u_k u^m = e^{2πi Σ_{j<k} Ξ_kj m_j} u^{m+e_k}."""
    return [_to_dense(t, p) for t, p in _generator_maps(xi, cutoff)]


@lru_cache(maxsize=1024)
def _monomial_matrix(xi: DeformationMatrix, cutoff: int, m: tuple[int, ...]) -> np.ndarray:
    """U_1^{m_1}...U_n^{m_n} (negative powers via the adjoint), composed as partial permutations."""
    maps = _generator_maps(xi, cutoff)
    dim = len(maps[0][0])
    target = np.arange(dim)
    phase = np.ones(dim, dtype=complex)
    # the rightmost factor acts first
    for k in reversed(range(len(m))):
        e = m[k]
        g_t, g_p = maps[k] if e > 0 else _adjoint_map(*maps[k])
        for _ in range(abs(e)):
            alive = target >= 0
            hit = target[alive]
            phase[alive] *= g_p[hit]
            phase[~alive] = 0
            target[alive] = g_t[hit]
    M = _to_dense(target, phase)
    M.setflags(write=False)
    return M


def matrix_representation(a: TorusElement, cutoff: int) -> WindowRep:
    """Left-multiplication matrix of a built from generator matrices.

    Entries that would leave the window are lost, so only columns interior
    by the support radius are exact.
    """
    basis = window_basis(a.n, cutoff)
    total = np.zeros((len(basis), len(basis)), dtype=complex)
    for m, c in a.terms.items():
        total += c * _monomial_matrix(a.xi, cutoff, m)
    return WindowRep(total, basis, cutoff)


def vector_of(a: TorusElement, cutoff: int) -> np.ndarray:
    """Coefficient vector of a in the window basis (a must fit)."""
    basis = window_basis(a.n, cutoff)
    index = {m: i for i, m in enumerate(basis)}
    v = np.zeros(len(basis), dtype=complex)
    for m, c in a.terms.items():
        if m not in index:
            raise ValueError(f"exponent {m} outside window of radius {cutoff}")
        v[index[m]] = c
    return v
