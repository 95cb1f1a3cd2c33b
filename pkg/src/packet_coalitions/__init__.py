"""Coalitions between boundary and backbone nodes in ad hoc networks.

Boundary nodes, which forward for no one, trade cooperative relaying for
packet forwarding by backbone nodes. The package covers the radio model
(``channel``), generic TU-game tools (``coopgame``), single-backbone reward
rules (``fairness``), competing backbones (``market``), network simulation
(``netsim``) and the experiment runner (``experiments``, ``cli``).
"""
from .channel import RadioParams
from .errors import (
    ConfigError,
    DegenerateGeometry,
    InfeasibleWorth,
    NoCoalition,
    NonConvergence,
    SizeLimit,
    SuperadditivityWarning,
    UnknownExperiment,
    ZeroSavingWarning,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateGeometry",
    "InfeasibleWorth",
    "NoCoalition",
    "NonConvergence",
    "RadioParams",
    "SizeLimit",
    "SuperadditivityWarning",
    "UnknownExperiment",
    "ZeroSavingWarning",
]
