"""Traffic draws, minimum-hop route discovery and the forwarding dependencies it induces.

Routes minimise hop count, then total direct power, then the node-id
sequence. The first two keys are folded into one edge weight
``1 + p / (p_max * n)``: the power term of any simple path is below one,
so it can never outweigh a hop. The id tie-break is applied while walking
the shortest-path tree from the source.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .topology import Topology

__all__ = [
    "TrafficMatrix",
    "draw_traffic",
    "RouteTable",
    "discover_routes",
    "DependencyGraph",
    "dependency_graph",
]

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class TrafficMatrix:
    """Destination set per node; ``destinations[i]`` is a sorted tuple."""

    destinations: tuple

    def __post_init__(self):
        for i, dst in enumerate(self.destinations):
            if i in dst:
                raise ValueError(f"node {i} lists itself as a destination")

    @classmethod
    def from_lists(cls, destinations) -> "TrafficMatrix":
        return cls(tuple(tuple(sorted(int(j) for j in d)) for d in destinations))

    @property
    def n_nodes(self) -> int:
        return len(self.destinations)

    def flows(self) -> list[tuple[int, int]]:
        return [(i, j) for i, dst in enumerate(self.destinations) for j in dst]


def draw_traffic(n_nodes: int, per_node: int, rng: np.random.Generator, labels=None) -> TrafficMatrix:
    """Uniform destinations drawn without replacement.

    If component ``labels`` are given, destinations are drawn within the
    node's own connected component; a node alone in its component draws from
    all other nodes instead (its flows are then unroutable).
    """
    out = []
    everyone = np.arange(n_nodes)
    for i in range(n_nodes):
        if labels is not None:
            pool = everyone[(labels == labels[i]) & (everyone != i)]
            if len(pool) == 0:
                pool = everyone[everyone != i]
        else:
            pool = everyone[everyone != i]
        k = min(per_node, len(pool))
        out.append(rng.choice(pool, size=k, replace=False) if k else [])
    return TrafficMatrix.from_lists(out)


@dataclass
class RouteTable:
    """Selected path per flow; ``None`` marks an unroutable flow."""

    paths: dict = field(default_factory=dict)

    def __getitem__(self, flow):
        return self.paths[flow]

    def __iter__(self):
        return iter(self.paths)

    def __len__(self):
        return len(self.paths)

    def items(self):
        return self.paths.items()

    def forwarders(self, flow) -> tuple:
        path = self.paths[flow]
        return () if path is None else tuple(path[1:-1])

    def unroutable(self) -> list:
        return [f for f, p in self.paths.items() if p is None]


def _weights(topology: Topology) -> np.ndarray:
    n = topology.n_nodes
    w = np.where(topology.reach, 1.0 + topology.link_power / (topology.params.p_max * max(n, 1)), 0.0)
    return w


def _distances_to(topology: Topology, targets) -> None:
    cache = topology.route_cache
    missing = sorted({int(j) for j in targets} - set(cache.get("dist", {})))
    if not missing:
        return
    if "weights" not in cache:
        cache["weights"] = _weights(topology)
        cache["graph"] = csr_matrix(cache["weights"])
        cache["dist"] = {}
    # the graph is symmetric, so distances from j equal distances to j
    rows = dijkstra(cache["graph"], directed=True, indices=missing)
    for j, row in zip(missing, np.atleast_2d(rows)):
        cache["dist"][j] = row


def _walk(topology: Topology, i: int, j: int):
    cache = topology.route_cache
    paths = cache.setdefault("paths", {})
    if (i, j) in paths:
        return paths[(i, j)]
    dist = cache["dist"][j]
    if not np.isfinite(dist[i]):
        paths[(i, j)] = None
        return None
    w = cache["weights"]
    path, cur = [i], i
    while cur != j:
        nbrs = topology.neighbors(cur)
        via = w[cur, nbrs] + dist[nbrs]
        best = via.min()
        # neighbours are sorted, so the first near-optimal one has the smallest id
        cur = int(nbrs[np.flatnonzero(via <= best + _TIE_TOL * max(1.0, best))[0]])
        path.append(cur)
    paths[(i, j)] = tuple(path)
    return paths[(i, j)]


def discover_routes(topology: Topology, traffic: TrafficMatrix) -> RouteTable:
    if traffic.n_nodes != topology.n_nodes:
        raise ValueError("traffic and topology disagree on the node count")
    flows = traffic.flows()
    _distances_to(topology, [j for _, j in flows])
    return RouteTable({(i, j): _walk(topology, i, j) for i, j in flows})


@dataclass(frozen=True)
class DependencyGraph:
    """Forwarders per flow and the aggregate relation ``depends[i] = {k : k forwards for i}``."""

    forwarders: dict
    depends: dict

    def forwards_for(self, k: int) -> set:
        return {i for i, ks in self.depends.items() if k in ks}

    def forwarding_nodes(self) -> set:
        out = set()
        for ks in self.depends.values():
            out |= ks
        return out


def dependency_graph(routes: RouteTable) -> DependencyGraph:
    forwarders, depends = {}, {}
    for flow in routes:
        fw = routes.forwarders(flow)
        forwarders[flow] = frozenset(fw)
        depends.setdefault(flow[0], set()).update(fw)
    return DependencyGraph(forwarders, depends)
