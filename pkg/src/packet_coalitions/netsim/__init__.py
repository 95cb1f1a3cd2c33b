"""Network layer: placements, routing, roles, the repeated game and the cooperation protocol."""
from .montecarlo import ConnectivityCell, boundary_probability, connectivity_stats, trial_seeds
from .protocol import Coalition, ProtocolTrace, run_protocol
from .repeated import RepeatedGameParams, cooperation_sustainable, discounted_payoff
from .roles import NodeRole, classify_roles
from .routing import (
    DependencyGraph,
    RouteTable,
    TrafficMatrix,
    dependency_graph,
    discover_routes,
    draw_traffic,
)
from .topology import Explicit, Linear, Square, Topology, build_topology

__all__ = [
    "Coalition",
    "ConnectivityCell",
    "DependencyGraph",
    "Explicit",
    "Linear",
    "NodeRole",
    "ProtocolTrace",
    "RepeatedGameParams",
    "RouteTable",
    "Square",
    "Topology",
    "TrafficMatrix",
    "boundary_probability",
    "build_topology",
    "classify_roles",
    "connectivity_stats",
    "cooperation_sustainable",
    "dependency_graph",
    "discounted_payoff",
    "discover_routes",
    "draw_traffic",
    "run_protocol",
    "trial_seeds",
]
