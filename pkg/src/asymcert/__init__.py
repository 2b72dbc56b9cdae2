"""Existence certificates for minimizers via asymptotic cones."""

__version__ = "0.1.0"

from .algebra import ConvexityStatus, Polynomial, certify_convexity, homogeneous_decompose, leading_order
from .asymptotics import (
    ConeDescriptor,
    ConeKind,
    InfeasibleSetError,
    SamplingSchedule,
    asymptotic_cone_of_set,
    estimate_asymptotic,
    function_asymptotic_cone,
    poly_asymptotic,
    polyhedral_asymptotic_cone,
)
from .certify import (
    Certificate,
    Verdict,
    audit_certificate,
    certify,
    certify_coercive_g,
    certify_compact,
    certify_convex_structured,
    certify_functional,
    certify_main,
)
from .core import ExtendedReal, Membership, Tier
from .decay import DecayCertificate, GaugeKind, classify_decay, estimate_decay_constant
from .functions import FunctionSpec, IntersectionSet, OracleSet, Polyhedron, SublevelSet
from .io import ProblemFileError, parse_problem, parse_problem_text
from .pathsolver import PathStatus, RegSchedule, SolveTrace, regularization_path, solve_regularized
from .problem import ProblemSpec
from .retract import (
    FalsifierBudget,
    RetractionWitness,
    constancy_space,
    falsify_fun_retractive,
    falsify_set_retractive,
    lineality_space,
    polyhedron_retractive_cone,
)

__all__ = [
    "__version__",
    "Certificate",
    "ConeDescriptor",
    "ConeKind",
    "ConvexityStatus",
    "DecayCertificate",
    "ExtendedReal",
    "FalsifierBudget",
    "FunctionSpec",
    "GaugeKind",
    "InfeasibleSetError",
    "IntersectionSet",
    "Membership",
    "OracleSet",
    "PathStatus",
    "Polyhedron",
    "Polynomial",
    "ProblemFileError",
    "ProblemSpec",
    "RegSchedule",
    "RetractionWitness",
    "SamplingSchedule",
    "SolveTrace",
    "SublevelSet",
    "Tier",
    "Verdict",
    "asymptotic_cone_of_set",
    "audit_certificate",
    "certify",
    "certify_coercive_g",
    "certify_compact",
    "certify_convex_structured",
    "certify_convexity",
    "certify_functional",
    "certify_main",
    "classify_decay",
    "constancy_space",
    "estimate_asymptotic",
    "estimate_decay_constant",
    "falsify_fun_retractive",
    "falsify_set_retractive",
    "function_asymptotic_cone",
    "homogeneous_decompose",
    "leading_order",
    "lineality_space",
    "parse_problem",
    "parse_problem_text",
    "poly_asymptotic",
    "polyhedral_asymptotic_cone",
    "polyhedron_retractive_cone",
    "regularization_path",
    "solve_regularized",
]
