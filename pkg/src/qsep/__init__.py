"""Exact simulation of shallow qudit circuits for modular relation problems."""

from .errors import (
    CircuitValidationError, ContractError, DomainError, QsepError, ResourceError, UsageError,
)
from .gates import (
    CGradedPhase, CTopLevelPhase, Fanout, Fourier, FourierInv, GradedPhase, MonomialAdd,
    Negate, Phase, QMod, Sum, SumInv, TopLevelPhase, XShift,
)
from .state import (
    StateVector, apply, digits_of, fidelity, ghz, hamming_weight, index_of, inner_product,
    marginal_distribution, measure, special_state, weight_mod, x_basis,
)

__version__ = "0.1.0"
