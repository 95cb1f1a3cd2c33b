"""Monte-Carlo estimates over random traffic and placements.

Every trial gets its own generator spawned from one ``SeedSequence``, so
results do not depend on the order trials run in.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channel import RadioParams
from .protocol import run_protocol
from .repeated import RepeatedGameParams
from .roles import NodeRole, classify_roles
from .routing import discover_routes, draw_traffic
from .topology import Linear, Square, build_topology

__all__ = ["boundary_probability", "connectivity_stats", "ConnectivityCell", "trial_seeds"]


def trial_seeds(seed, trials: int, *key: int) -> list[np.random.SeedSequence]:
    """Independent child seeds for ``trials`` trials of the cell named by ``key``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    entropy = seed.entropy if isinstance(seed, np.random.SeedSequence) else seed
    return np.random.SeedSequence(entropy, spawn_key=tuple(int(k) for k in key)).spawn(trials)


def boundary_probability(
    linear_spec: Linear,
    destinations_per_node: int,
    trials: int,
    seed=0,
    params: RadioParams | None = None,
) -> np.ndarray:
    """Fraction of trials in which each node of a line is classified boundary.

    Each trial draws ``destinations_per_node`` distinct destinations per node
    uniformly among all other nodes.
    """
    topo = build_topology(linear_spec, params=params)
    counts = np.zeros(topo.n_nodes)
    for ss in trial_seeds(seed, trials, destinations_per_node):
        traffic = draw_traffic(topo.n_nodes, destinations_per_node, np.random.default_rng(ss))
        roles = classify_roles(topo, discover_routes(topo, traffic))
        counts += [r is NodeRole.BOUNDARY for r in roles]
    return counts / trials


@dataclass(frozen=True)
class ConnectivityCell:
    """Mean un-connectivity per mode for one ``(n_nodes, side)`` cell.

    ``std_err`` entries are standard errors of the trial means.
    """

    n_nodes: int
    side: float
    trials: int
    repeated: float
    repeated_se: float
    coalition: float
    coalition_se: float
    isolated: float
    isolated_se: float
    gap_se: float

    @property
    def improvement(self) -> float:
        """Relative drop in un-connectivity from adding coalitions."""
        return 1.0 - self.coalition / self.repeated if self.repeated > 0 else 0.0


def _mean_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    se = float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(x.mean()), se


def connectivity_stats(
    n_nodes: Sequence[int],
    sides: Sequence[float],
    trials: int,
    seed=0,
    fairness_mode: str = "minmax",
    params: RadioParams | None = None,
    game_params: RepeatedGameParams | None = None,
) -> list[ConnectivityCell]:
    """Un-connectivity with and without coalitions on random square placements.

    Each trial places the nodes, gives every node one destination drawn
    uniformly within its connected component, and runs the protocol twice on
    the same draw: repeated game only, then with coalitions.
    """
    cells = []
    for a, n in enumerate(n_nodes):
        for b, side in enumerate(sides):
            rep, coal, iso = [], [], []
            for ss in trial_seeds(seed, trials, a, b):
                place_ss, traffic_ss = ss.spawn(2)
                topo = build_topology(Square(int(n), float(side)), seed=place_ss, params=params)
                traffic = draw_traffic(topo.n_nodes, 1, np.random.default_rng(traffic_ss), topo.component_labels())
                base = run_protocol(topo, traffic, fairness_mode, game_params, coalitions=False)
                full = run_protocol(topo, traffic, fairness_mode, game_params, coalitions=True)
                rep.append(base.unconnectivity())
                coal.append(full.unconnectivity())
                iso.append(np.mean([topo.is_isolated(k) for k in range(topo.n_nodes)]))
            r, r_se = _mean_se(rep)
            c, c_se = _mean_se(coal)
            i, i_se = _mean_se(iso)
            _, gap_se = _mean_se(np.subtract(coal, iso))
            cells.append(ConnectivityCell(int(n), float(side), trials, r, r_se, c, c_se, i, i_se, gap_se))
    return cells
