"""Elliptic R-matrices interpolating between the Baxter-Belavin vertex model and
Felder's dynamical R-matrix, with numerical verifiers and the associated IRF
(interaction-round-a-face) models.

Modules:
    elliptic: theta functions, Eisenstein series, Kronecker functions.
    heisenberg: finite Heisenberg group, clock/shift matrices, Cartan bases.
    rmatrix: quantum and classical R-matrices for every family.
    verifier: Yang-Baxter, unitarity, symmetry and limit checks.
    identities: randomised checks of elliptic function identities.
    irf: face weights, star-triangle relation, partition functions.
    report: serialisable residual reports.
    cli: command-line entry point.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (AdmissibilityError, DomainError, EllipticRMatrixError,
                     ExtrapolationError, PoleError, ResourceGuardError)
from .elliptic import (ModularParam, eisenstein, eta1, phi, phi_deformed, theta,
                       theta_char, weierstrass_p, weierstrass_zeta)
from .heisenberg import DenseOperator, clock_matrix, shift_matrix, t_basis
from .rmatrix import (FAMILIES, RMatrixSpec, build, build_felder, build_intermediate,
                      build_rational, build_trig, build_vertex, classical_r)
from .report import ReportBundle, ResidualReport
from .identities import identity_suite
from .verifier import (check_qdybe, check_qybe, check_symmetries, check_unitarity,
                       sweep)
from .irf import (boltzmann_weight, check_star_triangle, partition_function,
                  star_triangle_sweep)

__all__ = [
    "__version__", "AdmissibilityError", "DomainError", "EllipticRMatrixError",
    "ExtrapolationError", "PoleError", "ResourceGuardError", "ModularParam", "eisenstein",
    "eta1", "phi", "phi_deformed", "theta", "theta_char", "weierstrass_p", "weierstrass_zeta",
    "DenseOperator", "clock_matrix", "shift_matrix", "t_basis", "FAMILIES", "RMatrixSpec",
    "build", "build_felder", "build_intermediate", "build_rational", "build_trig",
    "build_vertex", "classical_r", "ReportBundle", "ResidualReport", "identity_suite",
    "check_qdybe", "check_qybe", "check_symmetries", "check_unitarity", "sweep",
    "boltzmann_weight", "check_star_triangle", "partition_function", "star_triangle_sweep",
]
