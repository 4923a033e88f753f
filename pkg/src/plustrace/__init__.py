"""Twisted traces of singular moduli, plus-space Kloosterman sums and explicit bounds."""

from .arith import FactoredDiscriminant, factorizations, kronecker
from .bounds import (
    TheoremParams,
    check_theorem1,
    check_theorem2,
    corollary3_threshold,
    nearest_integer_recovery,
)
from .errors import DomainError, InternalError, UnsupportedParameterError
from .kloosterman import check_theorem51, partial_sum, s_plus, weil_rhs
from .modeval import PrecisionPolicy, rectangle_sum, trace
from .qform import QuadForm, class_number, reduced_forms
from .report import BoundReport
from .weyl import weyl_direct, weyl_kohnen

__version__ = "0.1.0"
