"""Exact value-ring calculator for dense subgroups of the rationals.

Describe a subgroup Z <= G < Q by its prime-divisibility profile, build the
candidate value ring (Z/qZ)[X]/(X^2 + X), and compute the exact ring value
of any quantifier-free definable subset of G^n.
"""

from .group_model import GroupDescriptor, QCertificate, compute_q, contains, validate
from .k0ring import Endpoint, K0Element, RingSpec, interval_value, point_value
from .formula import Formula, Term, parse, eval_point, normalize
from .evaluator import EvalTrace, evaluate, evaluate_cell
from .lincell import Cell, decompose, decompose_formula

__all__ = [
    "GroupDescriptor",
    "QCertificate",
    "compute_q",
    "contains",
    "validate",
    "Endpoint",
    "K0Element",
    "RingSpec",
    "interval_value",
    "point_value",
    "Formula",
    "Term",
    "parse",
    "eval_point",
    "normalize",
    "EvalTrace",
    "evaluate",
    "evaluate_cell",
    "Cell",
    "decompose",
    "decompose_formula",
]
