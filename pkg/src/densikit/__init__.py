"""densikit: exact certificates for compatible tuples of complete
polynomial vector fields on affine varieties.

Everything is computed over the rationals with no floating point in any
verdict path; numeric routines exist only as cross-checking oracles.
"""

from .errors import BudgetError, CertificateError, DensikitError, ParseError
from .poly import Polynomial, VarContext, parse_poly, render_poly, var_context
from .groebner import (
    DEFAULT_STEP_BUDGET,
    IdealPresentation,
    buchberger,
    contains_one,
    normal_form,
    poly_divmod,
)
from .matrices import PolyMatrix, fraction_rank, jacobian, solve_exact
from .varieties import VarietyPresentation, affine_space, sample_point
from .derivations import (
    FlowMap,
    KernelMultipleCertificate,
    LinearCoefficientsCertificate,
    LndCertificate,
    TriangularLinearCertificate,
    UnknownCompleteness,
    VectorField,
    algebraic_flow,
    completeness_certificate,
    flow_differential_check,
    flow_field_consistency_check,
    flow_group_law_check,
    flow_identity_check,
    flow_preserves_variety,
    kernel_degree,
    lie_bracket,
    lnd_certificate,
    numeric_flow_check,
    shear_multiple,
)
from .certificates import (
    BUDGET_EXCEEDED,
    INSUFFICIENT,
    REFUTED,
    VERIFIED,
    AdmissibleTree,
    CheckLine,
    Coverage,
    RecursionReport,
    SufficiencyInstance,
    SufficiencyReport,
    TreeEdge,
    TupleCertificate,
    VerifyReport,
    Witness,
    WitnessProduct,
    WitnessTarget,
    bracket_recursion,
    find_kernel_function,
    scaled_bracket_identity_check,
    span_at_point,
    span_everywhere,
    sufficiency_check,
    validate_tree,
    verify_tuple,
)
from .fibration import (
    FiberReduction,
    FibrationPresentation,
    GVVariety,
    SmoothnessVerdict,
    build_fibration,
    det_vector_field,
    fiber_reduce,
    fiber_roundtrip_check,
    gv_variety,
    is_symplectic,
    partial_identity_check,
    smoothness_check,
    top_level_vanishing_report,
)
from .catalog import (
    ExampleBundle,
    SpanClaim,
    danielewski,
    product_line_bundle,
    product_with_line,
    sl_bundle,
    sp_bundle,
)
from .certfile import (
    CertificateDocument,
    certificate_from_json,
    certificate_to_json,
    parse_certificate,
    render_certificate,
)

__version__ = "0.1.0"
