"""Seeded invariant suite run by ``nctorus verify``.

Each suite returns a SuiteResult; the first failing case is kept as a witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bundle import (
    BundleModel,
    ConnectionSpec,
    ModelTag,
    bianchi_sides,
    canonical_connection,
    check_regular,
    curvature,
    curvature_closed_form,
    flat_central_mu,
    random_connection,
)
from .core import DeformationMatrix, TorusElement, matrix_representation
from .dirac import GaugeSpinor, Spinor, dirac_apply, dirac_spectrum, gamma_matrices, gauge_dirac_apply
from .forms import TorusForm, form_star, hodge, hodge_inverse, integrate, random_hermitian_one_form
from .yang_mills import (
    analytic_residual,
    closed_form_a,
    flat_kernel_solver,
    gauge_shift,
    geometric_pipeline,
    geometric_residual,
    metric_compatibility_gap,
    span_contains,
    ym_closed_form,
    ym_functional,
)


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    max_error: float = 0.0
    tolerance: float = 0.0
    witness: str | None = None
    failed: bool = False

    @property
    def passed(self) -> bool:
        return not self.failed

    def record(self, error: float, witness: Callable[[], str] | str = "") -> None:
        self.cases += 1
        self.max_error = max(self.max_error, float(error))
        if error > self.tolerance and not self.failed:
            self.failed = True
            self.witness = witness() if callable(witness) else witness

    def fail(self, witness: str) -> None:
        self.cases += 1
        if not self.failed:
            self.failed = True
            self.witness = witness

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "max_error": float(f"{self.max_error:.3e}"),
            "tolerance": self.tolerance,
            "witness": self.witness,
        }


@dataclass
class VerifyConfig:
    xi: DeformationMatrix
    seed: int = 0
    samples: int = 50
    max_exp: int = 2
    dirac_cutoffs: tuple[int, ...] = (1, 2, 3)

    @property
    def n(self) -> int:
        return self.xi.n


def _rng(cfg: VerifyConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


def _random_element(xi, rng, n_terms=4, max_exp=2):
    return TorusElement.random(xi, rng, n_terms, max_exp)


def suite_algebra(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("deformation_algebra", tolerance=1e-12)
    xi = cfg.xi
    rng = _rng(cfg, 1)
    for k in range(1, cfg.n + 1):
        for j in range(1, cfg.n + 1):
            uk, uj = TorusElement.generator(xi, k), TorusElement.generator(xi, j)
            phase = complex(np.exp(2j * math.pi * xi.entries[k - 1][j - 1]))
            res.record((uk * uj - (uj * uk) * phase).norm_inf(), f"u_{k}u_{j} relation")
    cutoff = 5 if cfg.n <= 2 else 3  # products of |m|≤1 terms are exact on |m|≤cutoff−2
    for _ in range(max(cfg.samples, 100)):
        a = _random_element(xi, rng, 3, 1)
        b = _random_element(xi, rng, 3, 1)
        ma = matrix_representation(a, cutoff)
        mb = matrix_representation(b, cutoff)
        prod = matrix_representation(a * b, cutoff)
        keep = ma.interior(2)
        err = float(np.abs(ma.matrix @ mb.matrix[:, keep] - prod.matrix[:, keep]).max())
        res.record(err, lambda: f"a={a!r} b={b!r}")
    return res


def suite_calculus(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("calculus_axioms", tolerance=1e-12)
    xi, n = cfg.xi, cfg.n
    rng = _rng(cfg, 2)
    for i in range(cfg.samples):
        p = i % (n + 1)
        q = (i + 1) % (n + 1)
        a = TorusForm.random(xi, rng, p, 2, 1)
        b = TorusForm.random(xi, rng, q, 2, 1)
        res.record(a.d().d().norm_inf(), lambda: f"d² on {a!r}")
        leib = (a * b).d() - (a.d() * b + (a * b.d()) * ((-1) ** p))
        res.record(leib.norm_inf(), lambda: f"Leibniz on {a!r}, {b!r}")
        x = TorusForm.random(xi, rng, 0, 3, 2)
        res.record((form_star(x).d() + form_star(x.d())).norm_inf(), lambda: f"d(a*) on {x!r}")
        top = TorusForm.random(xi, rng, n - 1, 3, 2)
        res.record(abs(integrate(top.d())), lambda: f"Stokes on {top!r}")
        res.record((hodge(hodge(a)) - a * ((-1) ** (p * (n - p)))).norm_inf(), lambda: f"⋆⋆ on {a!r}")
    return res


def suite_canonical(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("canonical_connections", tolerance=1e-10)
    xi = cfg.xi
    for tag in (ModelTag.A, ModelTag.B):
        wc = canonical_connection(BundleModel.create(tag, xi))
        res.record(curvature(wc).value.norm_inf(), f"curvature of ω^c in model {tag.value}")
        rep = check_regular(wc, samples=10, seed=cfg.seed)
        if not rep.regular:
            res.fail(f"ω^c not regular in model {tag.value}: gap {rep.gap:.3e}")
    model = BundleModel.create(ModelTag.B, xi)
    rng = _rng(cfg, 3)
    for _ in range(cfg.samples):
        omega = random_connection(model, rng)
        err = (curvature(omega).value - curvature_closed_form(omega)).norm_inf()
        res.record(err, lambda: f"model B curvature for mu={omega.mu!r}")
    return res


def suite_bianchi(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("bianchi", tolerance=1e-9)
    rng = _rng(cfg, 4)
    for tag in (ModelTag.B, ModelTag.A):
        model = BundleModel.create(tag, cfg.xi)
        for _ in range(max(20, cfg.samples // 2)):
            omega = random_connection(model, rng)
            lhs, rhs = bianchi_sides(omega)
            res.record((lhs - rhs).norm_inf(), lambda: f"model {tag.value} mu={omega.mu!r}")
            if tag is ModelTag.A:
                res.record(max(lhs.norm_inf(), rhs.norm_inf()), lambda: f"model A sides nonzero, mu={omega.mu!r}")
    return res


def suite_metric(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("metric_compatibility", tolerance=1e-10)
    rng = _rng(cfg, 5)
    for tag in (ModelTag.A, ModelTag.B):
        model = BundleModel.create(tag, cfg.xi)
        for _ in range(20):
            omega = random_connection(model, rng)
            b1, b2 = _random_element(cfg.xi, rng), _random_element(cfg.xi, rng)
            res.record(metric_compatibility_gap(omega, b1, b2), lambda: f"model {tag.value} b1={b1!r} b2={b2!r}")
    return res


def _flat_mu(xi, rng) -> TorusForm:
    ms = [int(v) for v in rng.integers(-3, 4, size=xi.n)]
    return flat_central_mu(xi, ms)


def suite_ym_solutions(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("ym_solution_spaces", tolerance=1e-9)
    xi, n = cfg.xi, cfg.n
    model_a = BundleModel.create(ModelTag.A, xi)
    model_b = BundleModel.create(ModelTag.B, xi)
    kern = flat_kernel_solver(model_a, cfg.max_exp)
    if kern.ym_dim != n:
        res.fail(f"geometric YM kernel (model A, maxExp={cfg.max_exp}) has dimension {kern.ym_dim}, expected {n}")
    else:
        res.cases += 1
    for j in range(1, n + 1):
        if not span_contains(kern.ym_basis, TorusForm.basis(xi, [j]), kern.labels):
            res.fail(f"dU_{j} not in the YM kernel")
    rng = _rng(cfg, 6)
    for _ in range(10):
        mu = _flat_mu(xi, rng)
        res.record(analytic_residual(model_b, mu).norm, lambda: f"analytic residual at flat mu={mu!r}")
        res.record(geometric_residual(ConnectionSpec(model_b, mu)).norm, lambda: f"model B residual at flat mu={mu!r}")
    for _ in range(cfg.samples):
        mu = random_hermitian_one_form(xi, rng)
        analytic = analytic_residual(model_b, mu).residual.coefficient
        geometric = geometric_residual(ConnectionSpec(model_b, mu)).residual.coefficient
        res.record((analytic - geometric).norm_inf(), lambda: f"analytic vs geometric at mu={mu!r}")
    return res


def suite_pipeline(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("residual_pipeline", tolerance=1e-9)
    rng = _rng(cfg, 7)
    for tag in (ModelTag.A, ModelTag.B):
        model = BundleModel.create(tag, cfg.xi)
        for _ in range(cfg.samples):
            omega = random_connection(model, rng)
            pipe = geometric_pipeline(omega)
            closed = closed_form_a(omega.mu) if tag is ModelTag.A else -hodge_inverse(ym_closed_form(omega.mu))
            scale = max(1.0, closed.norm_inf())
            res.record((pipe - closed).norm_inf() / scale, lambda: f"model {tag.value} mu={omega.mu!r}")
    return res


def suite_gauge(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("gauge_invariance", tolerance=1e-10)
    rng = _rng(cfg, 8)
    xi = cfg.xi
    for tag in (ModelTag.A, ModelTag.B):
        model = BundleModel.create(tag, xi)
        for _ in range(20):
            omega = random_connection(model, rng)
            shift = _flat_mu(xi, rng)
            if tag is ModelTag.A:
                h = _random_element(xi, rng, 3, 1)
                shift = shift + TorusForm.function(h + h.star()).d() * 1j
            out = gauge_shift(omega, shift)
            if not out.ym_invariant:
                res.fail(f"flat shift not recognized as YM-invariant: {shift!r}")
                continue
            before, after = ym_functional(omega), ym_functional(out.connection)
            res.record(abs(before - after) / max(1.0, abs(before)), lambda: f"functional changed for shift {shift!r}")
            res.record((curvature(omega).value - curvature(out.connection).value).norm_inf(), lambda: "curvature changed")
    return res


def suite_dirac(cfg: VerifyConfig) -> SuiteResult:
    res = SuiteResult("dirac", tolerance=1e-10)
    xi, n = cfg.xi, cfg.n
    rep = gamma_matrices(n)
    res.record(rep.anticommutator_error(), "gamma anticommutation")
    for m in [(0,) * n, (1,) + (0,) * (n - 1), tuple(range(-1, n - 1)), (2,) * n]:
        for s in range(rep.spin_dim):
            e = np.zeros(rep.spin_dim)
            e[s] = 1.0
            psi = Spinor(xi, rep.spin_dim, {m: e})
            want = psi * (-4 * math.pi**2 * sum(x * x for x in m))
            res.record((dirac_apply(rep, dirac_apply(rep, psi)) - want).norm_inf(), f"D² on u^{list(m)}⊗e_{s}")
    wc = canonical_connection(BundleModel.create(ModelTag.A, xi))
    rng = _rng(cfg, 9)
    const = Spinor.constant(xi, rng.normal(size=rep.spin_dim) + 1j * rng.normal(size=rep.spin_dim))
    out = gauge_dirac_apply(wc, rep, GaugeSpinor.trivial(const)).component()
    res.record(0.0 if out is None else out.norm_inf(), "ω^c does not annihilate T^R_1⊗ψ0")
    for cutoff in cfg.dirac_cutoffs:
        spec = dirac_spectrum(wc, rep, cutoff)
        ev = np.sort_complex(np.round(spec.eigenvalues, 8))
        neg = np.sort_complex(np.round(-spec.eigenvalues, 8))
        res.record(float(np.abs(ev - neg).max()), f"spectrum not symmetric at cutoff {cutoff}")
        if spec.signature != -1:
            res.fail(f"adjointness signature {spec.signature} at cutoff {cutoff}")
    return res


SUITES = (
    suite_algebra,
    suite_calculus,
    suite_canonical,
    suite_bianchi,
    suite_metric,
    suite_ym_solutions,
    suite_pipeline,
    suite_gauge,
    suite_dirac,
)


def run_suites(cfg: VerifyConfig) -> list[SuiteResult]:
    return [suite(cfg) for suite in SUITES]
