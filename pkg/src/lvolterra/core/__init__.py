"""Operator data model: simplex points, heredity tensors, classes, canonical form."""

from lvolterra.core.canonical import (
    CanonicalForm,
    apply_canonical,
    canonical_of,
    derive_canonical,
    interaction_violations,
    is_volterra_skew,
)
from lvolterra.core.classify import OperatorClass, OperatorKind, classify, volterra_permutation
from lvolterra.core.gen import NAMED_OPERATORS, GenSpec, named_operator, random_operator
from lvolterra.core.simplex import SimplexPoint
from lvolterra.core.tensor import (
    HeredityTensor,
    ValidationReport,
    apply_direct,
    evolve,
    evolve_batch,
    step,
    validate_tensor,
)

__all__ = [
    "NAMED_OPERATORS",
    "CanonicalForm",
    "GenSpec",
    "HeredityTensor",
    "OperatorClass",
    "OperatorKind",
    "SimplexPoint",
    "ValidationReport",
    "apply_canonical",
    "apply_direct",
    "canonical_of",
    "classify",
    "derive_canonical",
    "evolve",
    "evolve_batch",
    "interaction_violations",
    "is_volterra_skew",
    "named_operator",
    "random_operator",
    "step",
    "validate_tensor",
    "volterra_permutation",
]
