"""Command-line front end.

Exit codes: 0 success (a non-solution is still a result), 2 validation
error, 3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import io as nio
from .bundle import BundleModel, ConnectionSpec, ModelTag, curvature, curvature_closed_form
from .core import DeformationMatrix
from .dirac import GaugeSpinor, Spinor, dirac_residual, dirac_spectrum, gamma_matrices, gauge_dirac_apply
from .forms import TorusForm, norm
from .u1 import CalculusKind
from .verify import VerifyConfig, run_suites
from .yang_mills import ConsistencyError, ResidualReport, analytic_residual, geometric_residual, ym_functional

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONSISTENCY = 3


class ValidationError(ValueError):
    pass


def default_xi(n: int) -> DeformationMatrix:
    """Ξ_kj = 0.25 for every k < j."""
    return DeformationMatrix.from_upper(n, {(k, j): 0.25 for k in range(1, n + 1) for j in range(k + 1, n + 1)})


@dataclass
class RunConfig:
    xi: DeformationMatrix
    model: ModelTag = ModelTag.A
    kind: CalculusKind | None = None
    fiber_row: list[float] | None = None
    mu: TorusForm | None = None
    spinor: dict | None = None
    cutoff: int = 1
    max_exp: int = 2
    tolerance: float = 1e-9
    seed: int = 0
    samples: int = 50
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.xi.n

    def bundle(self) -> BundleModel:
        return BundleModel.create(self.model, self.xi, kind=self.kind, fiber_row=self.fiber_row)

    def connection(self) -> ConnectionSpec:
        mu = self.mu if self.mu is not None else TorusForm.zero(self.xi)
        return ConnectionSpec(self.bundle(), mu)


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def _load_mu(source: Any, base: Path, settings: dict) -> TorusForm | dict:
    """A form, a connection file (whose model/xi fill missing settings), or a path to either."""
    if isinstance(source, str):
        source = _read_json((base / source) if not Path(source).is_absolute() else Path(source))
    if not isinstance(source, dict):
        raise ValidationError("mu must be a form or connection object")
    if "mu" in source and "model" in source:
        for key in ("model", "n", "xi", "xi_fiber_row"):
            if key in source:
                settings.setdefault(key, source[key])
        return source["mu"]
    return source


def build_config(args: argparse.Namespace) -> RunConfig:
    settings: dict[str, Any] = {}
    base = Path.cwd()
    if args.config:
        cfg_path = Path(args.config)
        loaded = _read_json(cfg_path)
        if not isinstance(loaded, dict):
            raise ValidationError("config must be a JSON object")
        settings.update(loaded)
        base = cfg_path.parent
    for key in ("model", "n", "cutoff", "seed", "tolerance"):
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    mu_raw = None
    if args.mu:
        mu_raw = _load_mu(args.mu, Path.cwd(), settings)
    elif settings.get("mu") is not None:
        mu_raw = _load_mu(settings["mu"], base, settings)

    n = int(settings.get("n", 2))
    if n < 1:
        raise ValidationError("n must be positive")
    xi = nio.xi_from_json(n, settings["xi"]) if settings.get("xi") is not None else default_xi(n)
    cfg = RunConfig(
        xi=xi,
        model=ModelTag.parse(settings.get("model", "A")),
        kind=CalculusKind.parse(settings["calculus"]) if settings.get("calculus") else None,
        fiber_row=settings.get("xi_fiber_row"),
        cutoff=int(settings.get("cutoff", 1)),
        max_exp=int(settings.get("max_exp", 2)),
        tolerance=float(settings.get("tolerance", 1e-9)),
        seed=int(settings.get("seed", 0)),
        samples=int(settings.get("samples", 50)),
    )
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ValidationError("seed must be a 64-bit unsigned integer")
    if cfg.cutoff < 1:
        raise ValidationError("cutoff must be at least 1")
    if not cfg.tolerance > 0:
        raise ValidationError("tolerance must be positive")
    if mu_raw is not None:
        cfg.mu = nio.form_from_json(mu_raw, xi)
    spinor = settings.get("spinor")
    if isinstance(spinor, str):
        spinor = _read_json(base / spinor)
    cfg.spinor = spinor
    cfg.bundle()  # validates the model/calculus pairing early
    return cfg


def _report_json(rep: ResidualReport) -> dict:
    return {
        "kind": rep.kind.value,
        "norm": rep.norm,
        "is_solution": rep.is_solution,
        "residual": nio.form_to_json(rep.residual.coefficient),
        "consistency_gap": rep.consistency_gap,
        "tolerance": rep.tolerance,
    }


def cmd_curvature(cfg: RunConfig) -> dict:
    omega = cfg.connection()
    r = curvature(omega).value
    gap = (r - curvature_closed_form(omega)).norm_inf()
    if gap > cfg.tolerance * max(1.0, r.norm_inf()):
        raise ConsistencyError(f"curvature differs from its closed form by {gap:.3e}")
    return {
        "command": "curvature",
        "model": cfg.model.value,
        "curvature": nio.form_to_json(r),
        "norm": norm(r),
        "is_flat": r.norm_inf() <= cfg.tolerance,
        "closed_form_gap": gap,
    }


def cmd_ym(cfg: RunConfig, kind: str) -> dict:
    omega = cfg.connection()
    if kind == "analytic":
        rep = analytic_residual(omega.model, omega.mu, cfg.tolerance)
    else:
        rep = geometric_residual(omega, cfg.tolerance)
    out = _report_json(rep)
    out["model"] = cfg.model.value
    out["ym_functional"] = ym_functional(omega)
    return out


def cmd_verify(cfg: RunConfig) -> dict:
    results = run_suites(VerifyConfig(cfg.xi, seed=cfg.seed, samples=cfg.samples, max_exp=cfg.max_exp))
    failed = [r for r in results if not r.passed]
    return {
        "command": "verify",
        "n": cfg.n,
        "xi": nio.xi_to_json(cfg.xi),
        "seed": cfg.seed,
        "samples": cfg.samples,
        "suites": [r.to_json() for r in results],
        "all_passed": not failed,
        "first_failure": {"suite": failed[0].name, "witness": failed[0].witness} if failed else None,
    }


def _gauge_spinor(cfg: RunConfig, dim: int) -> GaugeSpinor:
    if cfg.spinor is not None:
        psi = nio.spinor_from_json(cfg.spinor, cfg.xi)
        if psi.spin_dim != dim:
            raise ValidationError(f"spinor has dimension {psi.spin_dim}, expected {dim}")
    else:
        e0 = np.zeros(dim)
        e0[0] = 1.0
        psi = Spinor.constant(cfg.xi, e0)
    return GaugeSpinor.trivial(psi)


def cmd_dirac(cfg: RunConfig, sub: str) -> dict:
    omega = cfg.connection()
    if omega.model.tag is not ModelTag.A:
        raise ValidationError("the gauge Dirac operator is only defined for model A")
    rep = gamma_matrices(cfg.n)
    if sub == "spectrum":
        spec = dirac_spectrum(omega, rep, cfg.cutoff)
        return {
            "command": "dirac-spectrum",
            "n": cfg.n,
            "cutoff": cfg.cutoff,
            "signature": spec.signature,
            "eigenvalues": [{"re": re, "im": im, "multiplicity": k} for re, im, k in spec.multiplicities()],
        }
    psi = _gauge_spinor(cfg, rep.spin_dim)
    res = dirac_residual(omega, rep, psi)
    via_pi = gauge_dirac_apply(omega, rep, psi).component()
    via_pi = via_pi if via_pi is not None else Spinor.zero(cfg.xi, rep.spin_dim)
    gap = (res - via_pi).norm_inf()
    if gap > 1e-9 * max(1.0, res.norm_inf()):
        raise ConsistencyError(f"gauge Dirac evaluations differ by {gap:.3e}")
    nrm = math.sqrt(sum(float(np.vdot(v, v).real) for v in res.terms.values()))
    return {
        "command": "dirac-residual",
        "n": cfg.n,
        "norm": nrm,
        "is_solution": nrm <= cfg.tolerance,
        "residual": nio.spinor_to_json(res),
        "consistency_gap": gap,
    }


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--mu", help="JSON form or connection file for the displacement μ")
    common.add_argument("--model", choices=["A", "B", "a", "b"], help="bundle model")
    common.add_argument("--n", type=int, help="torus dimension")
    common.add_argument("--cutoff", type=int, help="truncation cutoff for spectra")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--tolerance", type=float, help="solution tolerance")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")

    parser = argparse.ArgumentParser(prog="nctorus", description="Quantum principal U(1)-bundles over the deformed torus.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("curvature", parents=[common], help="curvature of the configured connection")
    ym = sub.add_parser("ym", parents=[common], help="Yang–Mills residual")
    ym.add_argument("kind", choices=["analytic", "geometric"])
    sub.add_parser("verify", parents=[common], help="run the seeded invariant suite")
    dirac = sub.add_parser("dirac", parents=[common], help="gauge Dirac operator")
    dirac.add_argument("sub", choices=["spectrum", "residual"])
    return parser


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return nio.dumps(report)
    if "eigenvalues" not in report:
        raise ValidationError("csv output is only available for dirac spectrum")
    return nio.spectrum_to_csv([(e["re"], e["im"], e["multiplicity"]) for e in report["eigenvalues"]])


def run(args: argparse.Namespace) -> tuple[int, str]:
    cfg = build_config(args)
    if args.command == "curvature":
        report = cmd_curvature(cfg)
    elif args.command == "ym":
        report = cmd_ym(cfg, args.kind)
    elif args.command == "verify":
        report = cmd_verify(cfg)
    else:
        report = cmd_dirac(cfg, args.sub)
    code = EXIT_OK
    if args.command == "verify" and not report["all_passed"]:
        code = EXIT_CONSISTENCY
    return code, _render(report, args.format)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)  # usage errors exit with status 2
    try:
        code, text = run(args)
    except ConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ValueError, KeyError, TypeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_CONSISTENCY:
        print("verification failed; see first_failure in the report", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
