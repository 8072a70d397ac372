"""Quantum quasi-inversion: numerical LP solver, unitary correction and closed forms."""
from .analytic import (
    qi_commuting_unitary,
    qi_depolarizing,
    qi_orthogonal_conjugations,
    qi_orthogonal_mixed_unitary,
    qi_tensor,
    qi_transverse_depolarizing,
)
from .lp import LpInfeasibleError, LpOptions, best_unitary_correction, quasi_inverse_lp
from .result import QiResult

__all__ = [
    "LpInfeasibleError",
    "LpOptions",
    "QiResult",
    "best_unitary_correction",
    "qi_commuting_unitary",
    "qi_depolarizing",
    "qi_orthogonal_conjugations",
    "qi_orthogonal_mixed_unitary",
    "qi_tensor",
    "qi_transverse_depolarizing",
    "quasi_inverse_lp",
]
