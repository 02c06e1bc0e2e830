"""Numerical laboratory for joint-orbit density of two-sided multiplication
operators built from bilateral weighted shifts and permutation unitaries.

The package computes projected weight-product norms exactly in the log
domain, checks the decay conditions that certify joint approximation for
operator tuples, builds the explicit approximating matrices those arguments
prescribe, and mirrors everything on the functional side through finite
trace representers.  A scenario-file CLI drives the built-in and custom
experiments and writes deterministic CSV reports.
"""

from .constructor import (
    TargetTuple,
    WitnessBundle,
    construct_approximant,
    default_bundle,
    extract_witnesses,
    load_bundle,
    save_bundle,
    verify_approximant_convergence,
)
from .criteria import (
    CriterionInstance,
    DecayReport,
    NSeq,
    Verdict,
    all_decay,
    check_pointwise_decay,
    check_sufficient_decay,
    check_witness_conditions,
    make_report,
    render_summary,
    search_subsequence,
    write_reports_csv,
)
from .duality import (
    FunctionalRep,
    TestSet,
    check_dual_sufficient,
    check_dual_witness_conditions,
    construct_dual_approximant,
    default_probes,
    dual_apply_power,
    eval_functional,
    m_d,
    m_d_shift_power,
    strong_limit_distance,
    verify_dual_convergence,
    weak_star_distance,
)
from .elementary import (
    ElementaryOp,
    apply_power,
    orbit,
    orbit_distances,
    write_orbit_csv,
)
from .errors import (
    ConvergenceError,
    FormatError,
    HorizonExceeded,
    OpdynError,
    ScenarioError,
    WindowExceeded,
)
from .finmat import (
    FiniteMatrix,
    Projection,
    compose,
    load_finmat,
    op_norm,
    permute_multiply,
    projection_matrix,
    read_finmat,
    save_finmat,
    shift_multiply,
    trace_norm,
    truncate_left,
    truncate_right,
    unit,
    write_finmat,
)
from .lattice import (
    MonomialVector,
    PermutationUnitary,
    ProductNorm,
    WeightRule,
    WeightedShift,
    escape_index,
    monomial_product_norm,
    monomial_product_norm_rowcut,
    shift_power_apply,
    shift_star_power_apply,
    unitary_power_apply,
)
from .scenario import (
    BUILTIN_SCENARIOS,
    Scenario,
    analyze_scenario,
    list_builtin,
    load_builtin,
    load_scenario,
    parse_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_SCENARIOS",
    "ConvergenceError",
    "CriterionInstance",
    "DecayReport",
    "ElementaryOp",
    "FiniteMatrix",
    "FormatError",
    "FunctionalRep",
    "HorizonExceeded",
    "MonomialVector",
    "NSeq",
    "OpdynError",
    "PermutationUnitary",
    "ProductNorm",
    "Projection",
    "Scenario",
    "ScenarioError",
    "TargetTuple",
    "TestSet",
    "Verdict",
    "WeightRule",
    "WeightedShift",
    "WindowExceeded",
    "WitnessBundle",
    "all_decay",
    "analyze_scenario",
    "apply_power",
    "check_dual_sufficient",
    "check_dual_witness_conditions",
    "check_pointwise_decay",
    "check_sufficient_decay",
    "check_witness_conditions",
    "compose",
    "construct_approximant",
    "construct_dual_approximant",
    "default_bundle",
    "default_probes",
    "dual_apply_power",
    "escape_index",
    "eval_functional",
    "extract_witnesses",
    "load_builtin",
    "load_bundle",
    "load_finmat",
    "load_scenario",
    "list_builtin",
    "m_d",
    "m_d_shift_power",
    "make_report",
    "monomial_product_norm",
    "monomial_product_norm_rowcut",
    "op_norm",
    "orbit",
    "orbit_distances",
    "parse_scenario",
    "permute_multiply",
    "projection_matrix",
    "read_finmat",
    "render_summary",
    "save_bundle",
    "save_finmat",
    "search_subsequence",
    "shift_multiply",
    "shift_power_apply",
    "shift_star_power_apply",
    "strong_limit_distance",
    "trace_norm",
    "truncate_left",
    "truncate_right",
    "unit",
    "unitary_power_apply",
    "verify_approximant_convergence",
    "verify_dual_convergence",
    "weak_star_distance",
    "write_finmat",
    "write_orbit_csv",
    "write_reports_csv",
]
