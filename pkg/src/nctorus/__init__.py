"""Quantum principal U(1)-bundles over the noncommutative n-torus."""

from .bundle import (
    BundleModel,
    ConnectionSpec,
    ContractError,
    ModelTag,
    bianchi_sides,
    canonical_connection,
    check_regular,
    curvature,
    random_connection,
)
from .core import DeformationMatrix, StructureError, TorusElement, matrix_representation
from .dirac import GaugeSpinor, Spinor, dirac_spectrum, gamma_matrices, gauge_dirac_apply
from .forms import TorusForm, codifferential, form_star, hodge, inner_product
from .u1 import CalculusKind, EnvelopeElement
from .yang_mills import (
    ConsistencyError,
    analytic_residual,
    flat_kernel_solver,
    gauge_shift,
    geometric_residual,
    ym_functional,
)

__version__ = "0.1.0"

__all__ = [
    "BundleModel",
    "CalculusKind",
    "ConnectionSpec",
    "ConsistencyError",
    "ContractError",
    "DeformationMatrix",
    "EnvelopeElement",
    "GaugeSpinor",
    "ModelTag",
    "Spinor",
    "StructureError",
    "TorusElement",
    "TorusForm",
    "analytic_residual",
    "bianchi_sides",
    "canonical_connection",
    "check_regular",
    "codifferential",
    "curvature",
    "dirac_spectrum",
    "flat_kernel_solver",
    "form_star",
    "gamma_matrices",
    "gauge_dirac_apply",
    "gauge_shift",
    "geometric_residual",
    "hodge",
    "inner_product",
    "matrix_representation",
    "random_connection",
    "ym_functional",
]
