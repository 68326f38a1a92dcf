"""Minimizing-movement flows for double-porosity perimeter energies on Z^2.

The package simulates the discrete scheme (rectangles shedding even slabs of
lattice cells per step, with doubly-even mushy islands in their wake), the
exact closed forms for the per-step energies, the limiting piecewise-constant
curvature flow, and a brute-force oracle used to certify the structure of the
minimizers on small windows.
"""

from .lattice import (
    BondKind,
    CoordRect,
    DiscreteSet,
    EmptyDistanceError,
    Params,
    RectState,
    StructureViolation,
    bond_kind,
    chebyshev_dist_to_complement,
    chebyshev_dist_to_set,
    connected_components,
    cut_bond_counts,
    decompose,
    dissipation,
    dissipation_count,
    interior_depth_map,
    is_connected,
    perimeter_energy,
    step_energy,
)
from .closed_forms import (
    NonUniqueRegimeError,
    Regime,
    RegimeError,
    RectExtents,
    Thresholds,
    closed_form_centers,
    dissolve_value_exact,
    f_eps,
    formula_domain_ok,
    g_eps,
    i_floor_even,
    n_alpha_gamma,
    poly_eval,
    predict_displacement,
    predict_pair,
    retain_value_exact,
    step_value_exact,
    thresholds,
)
from .flow import (
    EvolveResult,
    StepOutcome,
    candidate_weak_dissolve,
    candidate_weak_retain,
    core_rect,
    evolve,
    step_minimize,
)
from .limit import (
    LimitTrace,
    SideLengths,
    crystalline_reference,
    curvature_velocity,
    integrate,
    pinning_threshold,
    rhs,
    rhs_infinite_gamma,
)
from .oracle import OracleReport, SearchSpaceError, exhaustive_minimize, verify_structure

__version__ = "0.1.0"

__all__ = [
    "BondKind",
    "CoordRect",
    "DiscreteSet",
    "EmptyDistanceError",
    "EvolveResult",
    "LimitTrace",
    "NonUniqueRegimeError",
    "OracleReport",
    "Params",
    "RectExtents",
    "RectState",
    "Regime",
    "RegimeError",
    "SearchSpaceError",
    "SideLengths",
    "StepOutcome",
    "StructureViolation",
    "Thresholds",
    "bond_kind",
    "candidate_weak_dissolve",
    "candidate_weak_retain",
    "chebyshev_dist_to_complement",
    "chebyshev_dist_to_set",
    "closed_form_centers",
    "connected_components",
    "core_rect",
    "crystalline_reference",
    "curvature_velocity",
    "cut_bond_counts",
    "decompose",
    "dissipation",
    "dissipation_count",
    "dissolve_value_exact",
    "evolve",
    "exhaustive_minimize",
    "f_eps",
    "formula_domain_ok",
    "g_eps",
    "i_floor_even",
    "integrate",
    "interior_depth_map",
    "is_connected",
    "n_alpha_gamma",
    "perimeter_energy",
    "pinning_threshold",
    "poly_eval",
    "predict_displacement",
    "predict_pair",
    "retain_value_exact",
    "rhs",
    "rhs_infinite_gamma",
    "step_energy",
    "step_minimize",
    "step_value_exact",
    "thresholds",
    "verify_structure",
]
