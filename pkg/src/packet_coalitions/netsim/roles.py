"""Backbone / boundary / isolated classification."""
from __future__ import annotations

from enum import Enum

import numpy as np

from .routing import RouteTable, dependency_graph
from .topology import Topology

__all__ = ["NodeRole", "classify_roles"]


class NodeRole(str, Enum):
    BACKBONE = "backbone"
    BOUNDARY = "boundary"
    ISOLATED = "isolated"


def classify_roles(topology: Topology, routes: RouteTable) -> list[NodeRole]:
    """Role of every node given the selected routes.

    Isolated nodes have no reach neighbour. Backbone nodes forward on at
    least one selected route. Every other node is boundary: it forwards for
    no one, so nobody depends on it and it has no leverage to obtain
    forwarding through the repeated game.
    """
    forwarding = dependency_graph(routes).forwarding_nodes()
    roles = []
    for k in range(topology.n_nodes):
        if topology.is_isolated(k):
            roles.append(NodeRole.ISOLATED)
        elif k in forwarding:
            roles.append(NodeRole.BACKBONE)
        else:
            roles.append(NodeRole.BOUNDARY)
    return roles


def role_array(roles) -> np.ndarray:
    return np.array([r.value for r in roles])
