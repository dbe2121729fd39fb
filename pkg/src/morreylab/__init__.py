"""morreylab: dyadic harmonic analysis on truncated lattices.

The package discretizes the standard dyadic grid of R^n to a finite window of
levels, represents functions as piecewise constants on the finest cells, and
provides:

* bilinear/multilinear fractional integral operators and their iterated
  commutators with BMO symbols, by singularity-aware quadrature;
* dyadic and centered bilinear maximal operators, including weighted
  auxiliary variants;
* Morrey norms, a weak-type functional, Muckenhoupt/reverse-Holder machinery,
  and the full family of multi-weight constants used by two-weight bounds;
* constructive stopping-time (Calderon-Zygmund) decompositions;
* a CLI harness (`morreylab`) that estimates best constants of the weighted
  inequalities over seeded random inputs and emits CSV/JSON reports.

Everything is deterministic: fixed seeds reproduce reports byte for byte.
"""

from .dyadic import (
    Box,
    Cube,
    Window,
    ancestors,
    children,
    cube_box,
    cubes_containing,
    dilate3,
    nested_pairs,
    parent,
)
from .errors import InvariantViolation, MorreyLabError, ValidationError
from .exponents import (
    ExponentSet,
    Infeasible,
    ThetaWitness,
    VarthetaWitness,
    build,
    check_witness,
    default_holder_pair,
    feasible_auxiliary_indices,
    solve_st,
    validate,
)
from .field import (
    LatticeFunction,
    Weight,
    bmo_norm,
    cell_average,
    cube_average,
    from_csv,
    lambda_avg,
    oscillation_ratio,
    power_avg,
    power_weight,
    to_csv,
)
from .maximal import m_alpha_r, m_joint_weighted, m_theta
from .operators import (
    CommutatorSpec,
    bh_maximal,
    bilinear_fractional,
    bt_alpha,
    commutator_iterated,
    multilinear_fractional,
)
from .czd import (
    Decomposition,
    cz_decompose,
    cz_decompose_alpha,
    decomposition_to_json,
    necessity_pair,
    verify_decomposition,
)
from .weights_norms import (
    WeightConditionKind,
    ap_constant,
    lemma39_check,
    morrey_norm,
    rh_constant,
    rhs_bilinear_morrey,
    two_weight_constant,
    weak_morrey_functional,
)
from .harness import ExperimentConfig, Report, emit_report, parse_config, run_experiment

from ._version import __version__  # noqa: E402

__all__ = [
    "check_witness",
    "build",
    "VarthetaWitness",
    "ThetaWitness",
    "verify_decomposition",
    "decomposition_to_json",
    "to_csv",
    "oscillation_ratio",
    "from_csv",
    "cube_average",
    "Box",
    "CommutatorSpec",
    "Cube",
    "Decomposition",
    "ExperimentConfig",
    "ExponentSet",
    "Infeasible",
    "InvariantViolation",
    "LatticeFunction",
    "MorreyLabError",
    "Report",
    "ValidationError",
    "Weight",
    "WeightConditionKind",
    "Window",
    "ancestors",
    "ap_constant",
    "bh_maximal",
    "bilinear_fractional",
    "bmo_norm",
    "bt_alpha",
    "cell_average",
    "children",
    "commutator_iterated",
    "cube_box",
    "cubes_containing",
    "cz_decompose",
    "cz_decompose_alpha",
    "default_holder_pair",
    "dilate3",
    "emit_report",
    "feasible_auxiliary_indices",
    "lambda_avg",
    "lemma39_check",
    "m_alpha_r",
    "m_joint_weighted",
    "m_theta",
    "morrey_norm",
    "multilinear_fractional",
    "necessity_pair",
    "nested_pairs",
    "parent",
    "parse_config",
    "power_avg",
    "power_weight",
    "rh_constant",
    "rhs_bilinear_morrey",
    "run_experiment",
    "solve_st",
    "two_weight_constant",
    "validate",
    "weak_morrey_functional",
]
