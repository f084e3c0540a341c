"""Rydberg-blockade quantum repeater: pulse protocols, error budgets, link
bookkeeping, chain-rate simulation and ensemble parameter calculators."""

from .engine import SystemState, apply_pulse, fidelity, measure
from .error_model import ErrorParams, e_cnot, e_loc, optimize_rabi
from .link_state import MixedPairState, chain_trajectory, purify_update, swap_update
from .repeater_sim import ChainConfig, analytic_total_time, exact_alpha0, monte_carlo

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "ErrorParams",
    "MixedPairState",
    "SystemState",
    "analytic_total_time",
    "apply_pulse",
    "chain_trajectory",
    "e_cnot",
    "e_loc",
    "exact_alpha0",
    "fidelity",
    "measure",
    "monte_carlo",
    "optimize_rabi",
    "purify_update",
    "swap_update",
]
