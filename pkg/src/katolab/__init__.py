"""katolab: a verification lab for refined Kato inequalities.

Conformal projection catalog, injective ellipticity of first-order
symbols, pointwise inequality fuzzing, and a flat-torus field simulator,
all behind one CLI (`katolab`).
"""

from .errors import (
    BadConstants,
    BadDegree,
    ConfigError,
    FiberMismatch,
    NotConformal,
    NotSurjective,
    NotUnit,
    UnknownName,
    UnknownScenario,
    VerificationError,
    ZeroCovector,
    ZeroOperator,
    ZeroSection,
)
from .fields import (
    ScenarioReport,
    TrigField,
    apply_operator,
    coderivative,
    exterior_derivative,
    make_scenario,
    random_field,
    run_scenario,
    sample_points,
    scenario_grid,
)
from .kato import (
    FuzzReport,
    KatoVerdict,
    SpectralBounds,
    check_hodge_inequality,
    check_key_lemma,
    check_operator_inequality,
    decompose_line,
    equality_witness,
    four_block_decompose,
    fuzz_hodge_inequality,
    fuzz_key_lemma,
    fuzz_operator_inequality,
    hodge_gain_pair,
    kato_gain_lemma,
    kato_gain_operator,
    key_lemma_setups,
    line_component_setup,
    matching_first_component,
    verdicts_to_csv,
    verdicts_to_jsonl,
    verify_spectral_bounds,
)
from .projections import (
    ProjectionReport,
    clifford_projection,
    conformity_report,
    contraction_projection,
    exterior_projection,
    interior_projection,
    symmetrization_projection,
    twistor_projection,
)
from .symbols import (
    EllipticityResult,
    OperatorSpec,
    catalog,
    ellipticity_constant,
    invariance_check,
    parse_op_string,
    symbol_at,
    twist,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "VerificationError", "BadConstants", "BadDegree", "ConfigError",
    "FiberMismatch", "NotConformal", "NotSurjective", "NotUnit",
    "UnknownName", "UnknownScenario", "ZeroCovector", "ZeroOperator",
    "ZeroSection",
    # projections
    "ProjectionReport", "conformity_report", "exterior_projection",
    "interior_projection", "symmetrization_projection",
    "contraction_projection", "clifford_projection", "twistor_projection",
    # symbols
    "OperatorSpec", "EllipticityResult", "catalog", "parse_op_string",
    "symbol_at", "ellipticity_constant", "invariance_check", "twist",
    # inequality engine
    "KatoVerdict", "FuzzReport", "SpectralBounds", "kato_gain_lemma",
    "kato_gain_operator", "hodge_gain_pair", "decompose_line",
    "four_block_decompose", "verify_spectral_bounds", "check_key_lemma",
    "check_operator_inequality", "check_hodge_inequality",
    "equality_witness", "matching_first_component", "fuzz_key_lemma",
    "fuzz_operator_inequality", "fuzz_hodge_inequality",
    "key_lemma_setups", "line_component_setup", "verdicts_to_csv",
    "verdicts_to_jsonl",
    # fields
    "TrigField", "ScenarioReport", "random_field", "exterior_derivative",
    "coderivative", "apply_operator", "make_scenario", "run_scenario",
    "scenario_grid", "sample_points",
]
