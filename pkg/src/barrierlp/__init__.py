"""barrierlp: certify control barrier functions with diagonally-dominant-SOS linear programs."""

from .polyring import (
    Monomial,
    Polynomial,
    PolyMatrix,
    evaluate,
    lie_derivative_drift,
    lie_derivative_input,
    monomial_basis,
    mul,
    partial_derivative,
)
from .lpsolve import (
    FarkasCertificate,
    LpOutcome,
    LpProblem,
    LpStatus,
    SolverOptions,
    export_lp_text,
    parse_lp_text,
    solve_feasibility,
    validate_farkas,
)
from .verifier import (
    CandidateCbf,
    Certificate,
    ControlAffineSystem,
    Verdict,
    VerificationOutcome,
    VerifierOptions,
    assemble_emptiness_lp,
    assemble_single_lp,
    augment_archimedean,
    certificate_residual,
    check_emptiness,
    verify_multi,
    verify_single,
)
from .satbench import CwParams, build_cw_system, build_inspection_cbf, run_benchmark
from .specio import (
    PolyParseError,
    ProblemFormatError,
    ProblemSpec,
    load_problem,
    load_problem_file,
    parse_polynomial,
    print_polynomial,
    problem_document,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "Monomial",
    "Polynomial",
    "PolyMatrix",
    "evaluate",
    "lie_derivative_drift",
    "lie_derivative_input",
    "monomial_basis",
    "mul",
    "partial_derivative",
    "FarkasCertificate",
    "LpOutcome",
    "LpProblem",
    "LpStatus",
    "SolverOptions",
    "export_lp_text",
    "parse_lp_text",
    "solve_feasibility",
    "validate_farkas",
    "CandidateCbf",
    "Certificate",
    "ControlAffineSystem",
    "Verdict",
    "VerificationOutcome",
    "VerifierOptions",
    "assemble_emptiness_lp",
    "assemble_single_lp",
    "augment_archimedean",
    "certificate_residual",
    "check_emptiness",
    "verify_multi",
    "verify_single",
    "CwParams",
    "build_cw_system",
    "build_inspection_cbf",
    "run_benchmark",
    "PolyParseError",
    "ProblemFormatError",
    "ProblemSpec",
    "load_problem",
    "load_problem_file",
    "parse_polynomial",
    "print_polynomial",
    "problem_document",
    "write_report",
    "__version__",
]
