"""pauli_lens: low-degree Pauli approximation certificates for shallow circuits."""

from .pauli_core import (
    ErrorLedger,
    PauliOperator,
    PauliString,
    compose_error,
    dense_limit,
    diagonal_operator,
    expand_from_dense,
    spectral_norm,
    trace_against_state,
)
from .circuit_ir import (
    ChoiMatrix,
    LLayer,
    MLayer,
    QacCircuit,
    choi,
    parse,
    simulate,
    unitary,
)
from .lowdeg_approx import (
    ApproxCertificate,
    ShapeLedger,
    VerificationReport,
    WeightPolynomial,
    approx_circuit,
    approx_cz,
    approx_layer,
    approx_product_state,
    approx_unitary_dense,
    chebyshev_top_projector,
    closed_form_degree,
    default_r,
    degree_recursion,
    heisenberg_degree_bound,
    shape_ledger,
    verify_certificate,
)
from .boolfn import (
    BooleanFunction,
    DegreeOracleError,
    DegreeQuery,
    HardnessReport,
    agnostic_runtime,
    approx_degree,
    average_case_bound,
    average_case_report,
    embed_as_operator,
    make_named,
    postprocessing_degree_bound,
    worst_case_requirement,
)
from .parity_boost import (
    AuditError,
    BoostPlan,
    CircuitSpec,
    Margin,
    PlanStep,
    ascii_tree,
    build_composed_circuit,
    compose_specs,
    designed_bias_gadget,
    exact_parity_gadget,
    full_plan,
    measure_parity_success,
    step1_plan,
    step2_plan,
    threshold_report,
)
from .states_channels import (
    PurificationReport,
    QuantumState,
    SeparationCertificate,
    WeightDistribution,
    channel_degree_bound,
    concentration_violation_degree_lb,
    css_epsilon_threshold,
    fidelity,
    longrange_report,
    make_cat,
    make_nekomata,
    nekomata_reduction_degree_lb,
    purify_near_product,
    separation_degree_lb,
    synthesis_requirement,
    trace_distance,
    weight_distribution,
)

__all__ = [
    "ApproxCertificate",
    "AuditError",
    "BooleanFunction",
    "BoostPlan",
    "ChoiMatrix",
    "CircuitSpec",
    "DegreeOracleError",
    "DegreeQuery",
    "ErrorLedger",
    "HardnessReport",
    "LLayer",
    "MLayer",
    "Margin",
    "PauliOperator",
    "PauliString",
    "PlanStep",
    "PurificationReport",
    "QacCircuit",
    "QuantumState",
    "SeparationCertificate",
    "ShapeLedger",
    "VerificationReport",
    "WeightDistribution",
    "WeightPolynomial",
    "agnostic_runtime",
    "approx_circuit",
    "approx_cz",
    "approx_degree",
    "approx_layer",
    "approx_product_state",
    "approx_unitary_dense",
    "ascii_tree",
    "average_case_bound",
    "average_case_report",
    "build_composed_circuit",
    "channel_degree_bound",
    "chebyshev_top_projector",
    "choi",
    "closed_form_degree",
    "compose_error",
    "compose_specs",
    "concentration_violation_degree_lb",
    "css_epsilon_threshold",
    "default_r",
    "degree_recursion",
    "dense_limit",
    "designed_bias_gadget",
    "diagonal_operator",
    "embed_as_operator",
    "exact_parity_gadget",
    "expand_from_dense",
    "fidelity",
    "full_plan",
    "heisenberg_degree_bound",
    "longrange_report",
    "make_cat",
    "make_named",
    "make_nekomata",
    "measure_parity_success",
    "nekomata_reduction_degree_lb",
    "parse",
    "postprocessing_degree_bound",
    "purify_near_product",
    "separation_degree_lb",
    "shape_ledger",
    "simulate",
    "spectral_norm",
    "step1_plan",
    "step2_plan",
    "synthesis_requirement",
    "threshold_report",
    "trace_against_state",
    "trace_distance",
    "unitary",
    "verify_certificate",
    "weight_distribution",
    "worst_case_requirement",
]

__version__ = "0.1.0"
