"""Simulator for a tranche-based, oracle-free DeFi insurance protocol."""

__version__ = "0.1.0"

from .amm import Pool, divergence_loss, hold_value, lp_value, post_trade_reserves
from .fixedpoint import WAD, fmt, to_units
from .insurance import Policy, PolicyState, compute_fallback_ratios, compute_liquid_payouts
from .ledger import Ledger
from .venues import YieldVenue

__all__ = [
    "Ledger", "Policy", "PolicyState", "Pool", "WAD", "YieldVenue",
    "compute_fallback_ratios", "compute_liquid_payouts", "divergence_loss",
    "fmt", "hold_value", "lp_value", "post_trade_reserves", "to_units",
]
