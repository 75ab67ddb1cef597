"""Stability certificates for nonautonomous delay systems.

The package turns bounds on a delayed system (decay brackets, delay
bounds, Lipschitz constants of the couplings) into checkable certificates:
a comparison matrix is built from the bounds and stability follows when it
is a nonsingular M-matrix.  On top of that sit closed-form special cases,
exponential decay-rate certification, a fixed-point equilibrium solver for
two-layer networks, a method-of-steps integrator to observe trajectories,
and a JSON-document CLI.
"""

from .linalg import (
    DEFAULT_TOL,
    ConvergenceError,
    LinalgInputError,
    MMatrixReport,
    SingularMatrixError,
    condition_estimate,
    determinant,
    dominance_screen,
    invert,
    is_m_matrix,
    leading_principal_minors,
    solve_linear,
    spectral_radius,
)
from .systems import (
    ACTIVATION_CATALOG,
    COEFF_CATALOG,
    LAG_CATALOG,
    BamConcrete,
    BamSpec,
    DelayBoundError,
    FamilyError,
    GeneralConcrete,
    GeneralSystemSpec,
    InvalidSpecError,
    LinearConcrete,
    LinearSystemSpec,
    bam_to_general,
    require_valid,
    two_neuron_spec,
    validate,
)
from .criteria import (
    ALL_TAGS,
    STATUS_INCONCLUSIVE,
    STATUS_STABLE,
    Check,
    DecayCertificate,
    NotCertifiedError,
    StabilityVerdict,
    bam_dominance_verdict,
    bam_undelayed_dominance_verdict,
    certify_decay_rate,
    stability_verdict,
    test_matrix_at_rate,
    test_matrix_bam,
    test_matrix_general,
    test_matrix_linear,
    test_matrix_linear_undelayed,
    test_matrix_no_self_coupling,
    test_matrix_undelayed_decay,
    two_dim_verdict,
    two_neuron_closed_form,
    two_neuron_comparison,
)
from .equilibrium import (
    DivergenceError,
    Equilibrium,
    ExistenceReport,
    build_existence_matrices,
    equilibrium_exists,
    solve_equilibrium,
)
from .simulate import (
    DecayFit,
    FitInapplicableError,
    SimConfig,
    SimulationError,
    Trajectory,
    fit_decay,
    simulate,
    write_csv,
)
from .specio import (
    DocumentError,
    ParsedInput,
    document_sha256,
    parse_document,
    parse_file,
    resolve_parameters,
    serialize_spec,
    set_parameter,
)
from .sweep import SweepRow, Threshold, find_failure_threshold, sweep

__version__ = "0.1.0"

__all__ = [
    "ACTIVATION_CATALOG",
    "ALL_TAGS",
    "BamConcrete",
    "BamSpec",
    "COEFF_CATALOG",
    "Check",
    "ConvergenceError",
    "DEFAULT_TOL",
    "DecayCertificate",
    "DecayFit",
    "DelayBoundError",
    "DivergenceError",
    "DocumentError",
    "Equilibrium",
    "ExistenceReport",
    "FamilyError",
    "FitInapplicableError",
    "GeneralConcrete",
    "GeneralSystemSpec",
    "InvalidSpecError",
    "LAG_CATALOG",
    "LinalgInputError",
    "LinearConcrete",
    "LinearSystemSpec",
    "MMatrixReport",
    "NotCertifiedError",
    "ParsedInput",
    "STATUS_INCONCLUSIVE",
    "STATUS_STABLE",
    "SimConfig",
    "SimulationError",
    "SingularMatrixError",
    "StabilityVerdict",
    "SweepRow",
    "Threshold",
    "Trajectory",
    "bam_dominance_verdict",
    "bam_to_general",
    "bam_undelayed_dominance_verdict",
    "build_existence_matrices",
    "certify_decay_rate",
    "condition_estimate",
    "determinant",
    "document_sha256",
    "dominance_screen",
    "equilibrium_exists",
    "find_failure_threshold",
    "fit_decay",
    "invert",
    "is_m_matrix",
    "leading_principal_minors",
    "parse_document",
    "parse_file",
    "require_valid",
    "resolve_parameters",
    "serialize_spec",
    "set_parameter",
    "simulate",
    "solve_equilibrium",
    "solve_linear",
    "spectral_radius",
    "stability_verdict",
    "sweep",
    "test_matrix_at_rate",
    "test_matrix_bam",
    "test_matrix_general",
    "test_matrix_linear",
    "test_matrix_linear_undelayed",
    "test_matrix_no_self_coupling",
    "test_matrix_undelayed_decay",
    "two_dim_verdict",
    "two_neuron_closed_form",
    "two_neuron_comparison",
    "two_neuron_spec",
    "validate",
    "write_csv",
]
