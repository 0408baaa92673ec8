"""Numerical toolkit for two identical particles on the half-line with a pair interaction.

One-particle threshold, variational existence certificate, two-particle
spectra in the exchange sectors and counting bounds for their discrete part.
"""

from .certificate import CertificateReport, MassFunction, find_certificate, gn_terms, mass_function, rayleigh_crosscheck
from .counting import (
    CountingBoundReport,
    CuttingProfile,
    bargmann_bound,
    count_negative_q0,
    cutting_profile,
    effective_Z,
    finiteness_audit,
    interior_sector_count,
    wr_eval,
)
from .errors import (
    AssemblyError,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DomainError,
    GroundStateError,
    HalflinePairError,
    PreconditionError,
)
from .oned import (
    EigResult1D,
    Grid1D,
    agmon_check,
    appendix_audit,
    assemble_h1d,
    ground_state,
    solve_ground_state,
    truncated_bottom,
)
from .potentials import AssumptionReport, PotentialSpec, check_assumptions, eval_v, tail_value
from .twod import (
    Grid2D,
    SpectrumReport2D,
    assemble_Q2d,
    discrete_below,
    full_square_crosscheck,
    lowest_eigs,
    weyl_residual,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "AssumptionReport",
    "CertificateReport",
    "ConfigError",
    "ConsistencyError",
    "ConvergenceError",
    "CountingBoundReport",
    "CuttingProfile",
    "DomainError",
    "EigResult1D",
    "Grid1D",
    "Grid2D",
    "GroundStateError",
    "HalflinePairError",
    "MassFunction",
    "PotentialSpec",
    "PreconditionError",
    "SpectrumReport2D",
    "agmon_check",
    "appendix_audit",
    "assemble_Q2d",
    "assemble_h1d",
    "bargmann_bound",
    "check_assumptions",
    "count_negative_q0",
    "cutting_profile",
    "discrete_below",
    "effective_Z",
    "eval_v",
    "find_certificate",
    "finiteness_audit",
    "full_square_crosscheck",
    "gn_terms",
    "ground_state",
    "interior_sector_count",
    "lowest_eigs",
    "mass_function",
    "rayleigh_crosscheck",
    "solve_ground_state",
    "tail_value",
    "truncated_bottom",
    "weyl_residual",
    "wr_eval",
]
