"""Functional and operator Bishop-Phelps-Bollobas machinery on l_p domains."""

from .domain import (
    FiniteDomain,
    Functional,
    conjugate_exponent,
    dual_norm,
    norming_functional,
    norming_vector,
    pnorm,
)
from .functional_bpb import FunctionalBpb, bpb_functional
from .operators import (
    NormBracket,
    OperatorIntoDisc,
    cap_boundary,
    cap_sup,
    deviation,
    equicontinuity_delta2,
    operator_norm,
    operator_norm_bracket,
    point_functional,
)
from .pipeline import (
    BpbOperatorResult,
    ComplementPart,
    ConstantEta,
    DiffNorm,
    PerturbedOperator,
    RankOnePart,
    bpb_operator,
    check_hypothesis,
    diff_norm,
    eval_N,
    ideal_decompose,
    perturbed_norm,
    sweep_points,
)

__all__ = [
    "BpbOperatorResult", "ComplementPart", "ConstantEta", "DiffNorm", "FiniteDomain", "Functional",
    "FunctionalBpb", "NormBracket", "OperatorIntoDisc", "PerturbedOperator", "RankOnePart",
    "bpb_functional", "bpb_operator", "cap_boundary", "cap_sup", "check_hypothesis",
    "conjugate_exponent", "deviation", "diff_norm", "dual_norm", "equicontinuity_delta2", "eval_N",
    "ideal_decompose", "norming_functional", "norming_vector", "operator_norm",
    "operator_norm_bracket", "perturbed_norm", "pnorm", "point_functional", "sweep_points",
]
