"""Norm-attaining perturbations of operators into the disc algebra.

Submodules: ``discfun`` (polynomials and sup norms), ``stolz`` (the Stolz
region and its Riemann map), ``peak`` (peak functions and the bump eta),
``core`` (functional and operator BPB steps), ``zoo`` (example operators)
and ``cli``.
"""

from .core import (
    BpbOperatorResult,
    FiniteDomain,
    Functional,
    OperatorIntoDisc,
    bpb_functional,
    bpb_operator,
    ideal_decompose,
    operator_norm,
)
from .discfun import DiscPoly, sup_norm
from .errors import BpbError
from .peak import make_eta
from .stolz import ConformalMap, delta1, stolz_value, theodorsen_solve

__version__ = "0.1.0"

__all__ = [
    "BpbError", "BpbOperatorResult", "ConformalMap", "DiscPoly", "FiniteDomain", "Functional",
    "OperatorIntoDisc", "bpb_functional", "bpb_operator", "delta1", "ideal_decompose", "make_eta",
    "operator_norm", "stolz_value", "sup_norm", "theodorsen_solve", "__version__",
]
