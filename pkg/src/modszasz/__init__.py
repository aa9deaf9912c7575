"""Modified Szász-Mirakjan operators S_n driven by a sequence (b_n).

S_n(f; x) = sum_k exp(-b_n x) (b_n x)^k / k! * f(k / b_n)
"""

__version__ = "0.1.0"

from .basis import BasisContext, basis_derivative, basis_value, tail_cutoff
from .errors import ConfigError, DomainError, EvaluationError, TruncationError
from .moments import MomentTable, build_table, central_moment, coefficient_identity_check, raw_moment
from .operator import (
    EvalConfig,
    TestFunction,
    abs_shift,
    apply,
    custom,
    evaluate,
    exp_function,
    monomial,
    parse_function,
    second_derivative_repr_A,
    second_derivative_repr_B,
    sine,
)
from .sequences import BnSequence, parse_sequence, validate
from .smoothness import (
    WeightedSpace,
    k_functional_upper,
    lipschitz_alpha_estimate,
    modulus2,
    steklov_mean,
    steklov_second_derivative,
    weighted_norm,
)
