"""Node placements and the reach graph they induce."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from ..channel import RadioParams
from ..errors import DegenerateGeometry

__all__ = ["Linear", "Square", "Explicit", "Placement", "Topology", "build_topology", "REACH_RTOL"]

# slack on the power cap so a link needing exactly p_max counts as reachable
REACH_RTOL = 1e-12


@dataclass(frozen=True)
class Linear:
    """``n`` nodes on the x axis, ``spacing`` meters apart, starting at the origin."""

    n: int
    spacing: float


@dataclass(frozen=True)
class Square:
    """``n`` nodes uniform in a ``side`` x ``side`` square."""

    n: int
    side: float


@dataclass(frozen=True)
class Explicit:
    positions: tuple


Placement = Union[Linear, Square, Explicit]


class Topology:
    """Node positions plus the symmetric reach relation.

    Node ``l`` is reachable from ``i`` when the direct power for the link is
    at most ``p_max``. Gains depend on distance only, so reach is symmetric.

    Attributes
    ----------
    positions : (n, 2) numpy.ndarray
    link_power : (n, n) numpy.ndarray
        Direct power for every ordered pair; ``inf`` on the diagonal.
    reach : (n, n) numpy.ndarray of bool
    """

    def __init__(self, positions, params: RadioParams | None = None):
        self.params = params or RadioParams()
        pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        n = len(pos)
        dist = cdist(pos, pos)
        off = ~np.eye(n, dtype=bool)
        if np.any(dist[off] == 0):
            i, j = np.argwhere((dist == 0) & off)[0]
            raise DegenerateGeometry(f"nodes {i} and {j} share a position")
        p = self.params
        with np.errstate(divide="ignore"):
            power = p.gamma * p.sigma2 * dist ** p.kappa
        np.fill_diagonal(power, np.inf)
        pos.flags.writeable = False
        power.flags.writeable = False
        self.positions = pos
        self.link_power = power
        self.reach = power <= p.p_max * (1 + REACH_RTOL)
        self.reach.flags.writeable = False
        self._neighbors = [np.flatnonzero(row) for row in self.reach]
        self._labels = None
        # per-destination shortest-path distances, filled lazily by routing
        self.route_cache: dict = {}

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    def neighbors(self, i: int) -> np.ndarray:
        return self._neighbors[i]

    def is_isolated(self, i: int) -> bool:
        return len(self._neighbors[i]) == 0

    def edges(self) -> list[tuple[int, int]]:
        return [tuple(e) for e in np.argwhere(self.reach).tolist()]

    def component_labels(self) -> np.ndarray:
        if self._labels is None:
            _, self._labels = connected_components(csr_matrix(self.reach), directed=False)
        return self._labels

    def __repr__(self):
        return f"Topology(n_nodes={self.n_nodes}, edges={int(self.reach.sum())})"


def build_topology(spec: Placement, seed=None, params: RadioParams | None = None) -> Topology:
    """Place nodes and compute reach edges.

    ``seed`` only matters for ``Square``; it may be an int, a
    ``SeedSequence`` or a ``Generator``.
    """
    if isinstance(spec, Linear):
        pos = np.column_stack([np.arange(spec.n) * float(spec.spacing), np.zeros(spec.n)])
    elif isinstance(spec, Square):
        rng = np.random.default_rng(seed)
        pos = rng.uniform(0.0, spec.side, size=(spec.n, 2))
    elif isinstance(spec, Explicit):
        pos = np.asarray(spec.positions, dtype=float).reshape(-1, 2)
    else:
        raise TypeError(f"unknown placement {spec!r}")
    return Topology(pos, params)
