"""The cooperation protocol run on one topology and traffic draw.

1. Discover routes.
2. Activate forwarding that the repeated game sustains. Nodes that forward
   for someone form the forwarding community; a forwarder serves a source
   only when both belong to the community (each can punish the other's
   defection by withholding forwarding) and ``beta >= c / b``.
3. Each boundary node with failed flows lists the reach-neighbour backbones
   that have an active transmission it could relay for: any link the
   backbone transmits on along a selected route, including the hop that
   would carry the boundary node's own packets.
4. Boundary nodes are grouped onto backbone transmissions and paid a
   forwarding ratio ``alpha`` under the chosen fairness rule.
5-6. A boundary node in a coalition joins the community. For each own
   packet it relays ``1 / alpha`` packets for its backbone.

A flow is delivered when every forwarder on its route is bound to the
source, either through the community or as the source's coalition partner.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..channel import link_gain, solve_source_power_batch
from ..errors import ZeroSavingWarning
from ..fairness import MAX_RELAYS, ZERO_SAVING, CooperationInstance, average_alpha, minmax_alpha
from ..market import MAX_BACKBONES, MAX_BOUNDARIES, MarketInstance, market_equilibrium
from .repeated import RepeatedGameParams, cooperation_sustainable
from .roles import NodeRole, classify_roles
from .routing import RouteTable, TrafficMatrix, dependency_graph, discover_routes
from .topology import Topology

__all__ = ["Coalition", "ProtocolTrace", "run_protocol"]

log = logging.getLogger(__name__)

FairnessMode = Literal["minmax", "average", "market"]
MODES = ("minmax", "average", "market")
# candidates per boundary node when a market cluster is too large to solve jointly
_MARKET_FALLBACK_CANDIDATES = 4


@dataclass(frozen=True)
class Coalition:
    """Boundary nodes relaying for one backbone transmission ``link = (backbone, next_hop)``."""

    link: tuple
    boundaries: tuple
    alphas: tuple
    mode: str
    p_d: float
    p0: float

    @property
    def backbone(self) -> int:
        return self.link[0]


@dataclass
class ProtocolTrace:
    roles: list
    routes: RouteTable
    coalitions: list
    delivered: dict
    node_power: np.ndarray
    relay_packets: np.ndarray
    notes: list = field(default_factory=list)

    def partner(self, i: int):
        """Coalition holding boundary node ``i``, or None."""
        for c in self.coalitions:
            if i in c.boundaries:
                return c
        return None

    def failed_sources(self) -> set:
        return {i for (i, _), ok in self.delivered.items() if not ok}

    def unconnectivity(self) -> float:
        """Fraction of traffic sources with at least one undelivered flow."""
        sources = {i for i, _ in self.delivered}
        return len(self.failed_sources()) / len(sources) if sources else 0.0


def _delivered(routes: RouteTable, community: set, partner: dict, sustainable: bool) -> dict:
    out = {}
    for (i, j), path in routes.items():
        if path is None:
            out[(i, j)] = False
            continue
        ok = True
        for k in path[1:-1]:
            if partner.get(i) == k:
                continue
            if not (sustainable and i in community and k in community):
                ok = False
                break
        out[(i, j)] = ok
    return out


def _active_links(routes: RouteTable, roles) -> dict:
    """Links each backbone transmits on along any selected route, own flows or forwarded."""
    links: dict = {}
    for path in routes.paths.values():
        if path is None:
            continue
        for a, b in zip(path[:-1], path[1:]):
            if roles[a] is NodeRole.BACKBONE:
                links.setdefault(a, set()).add(b)
    return {k: sorted(v) for k, v in links.items()}


def _singleton_alpha(topology: Topology, pairs) -> np.ndarray:
    """``alpha`` a lone relay would earn on each ``(boundary, (src, dst))`` pair."""
    if not pairs:
        return np.zeros(0)
    pos, params = topology.positions, topology.params
    src = np.array([pos[s] for _, (s, _d) in pairs])
    dst = np.array([pos[d] for _, (_s, d) in pairs])
    rel = np.array([pos[i] for i, _ in pairs])
    g_sd = link_gain(src, dst, params)
    g_sr = link_gain(rel, src, params)[:, None]
    g_rd = link_gain(rel, dst, params)[:, None]
    p_d = params.gamma * params.sigma2 / g_sd
    p0 = solve_source_power_batch(g_sd, g_sr, g_rd, np.full((len(pairs), 1), params.p_max), params)
    saving = p_d - p0
    return np.where(saving > ZERO_SAVING, saving / p_d, 0.0)


def _group_alphas(topology: Topology, link, members, mode: str):
    pos = topology.positions
    inst = CooperationInstance(pos[link[0]], pos[link[1]], pos[list(members)], params=topology.params)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroSavingWarning)
        alpha = minmax_alpha(inst).alpha if mode == "minmax" else average_alpha(inst)
    return inst, alpha


class _Former:
    """Step 4: turn candidate lists into coalitions."""

    def __init__(self, topology: Topology, candidates: dict, mode: str, delta: float, notes: list):
        self.topology = topology
        self.mode = mode
        self.delta = delta
        self.notes = notes
        self.pairs = [(i, link) for i in sorted(candidates) for link in candidates[i]]
        alpha = _singleton_alpha(topology, self.pairs)
        self.single = {}
        for (i, link), a in zip(self.pairs, alpha):
            if a > 0:
                self.single.setdefault(i, []).append((link, float(a)))

    def best(self, i: int, limit: int | None = None) -> list:
        # largest alpha first, then lowest backbone and next-hop ids
        ranked = sorted(self.single.get(i, []), key=lambda la: (-la[1], la[0]))
        return ranked[:limit] if limit else ranked

    def form(self) -> list:
        if self.mode == "market":
            return self._market()
        return self._grouped({i: self.best(i)[0][0] for i in self.single}, self.mode)

    def _grouped(self, choice: dict, mode: str) -> list:
        groups: dict = {}
        for i in sorted(choice, key=lambda i: (-dict(self.best(i))[choice[i]], i)):
            groups.setdefault(choice[i], []).append(i)
        out = []
        for link, members in sorted(groups.items()):
            if len(members) > MAX_RELAYS:
                self.notes.append(f"link {link}: {len(members) - MAX_RELAYS} boundary nodes over the relay cap left out")
                members = members[:MAX_RELAYS]
            members = sorted(members)
            inst, alpha = _group_alphas(self.topology, link, members, mode)
            keep = [k for k, a in enumerate(alpha) if a > 0]
            if len(keep) < len(members):
                self.notes.append(f"link {link}: boundary nodes without saving dropped")
                if not keep:
                    continue
                members = [members[k] for k in keep]
                inst, alpha = _group_alphas(self.topology, link, members, mode)
            out.append(Coalition(link, tuple(members), tuple(float(a) for a in alpha), mode, inst.p_d, inst.p0_grand))
        return out

    def _clusters(self) -> list:
        """Boundary nodes linked through shared candidate backbones."""
        parent = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, links in self.single.items():
            for link, _ in links:
                parent[find(("b", i))] = find(("k", link[0]))
        clusters: dict = {}
        for i in self.single:
            clusters.setdefault(find(("b", i)), []).append(i)
        return [sorted(c) for c in clusters.values()]

    def _representative_links(self, cluster) -> list:
        """One link per candidate backbone: the one worth most to the cluster in total."""
        score: dict = {}
        for i in cluster:
            for link, a in self.single[i]:
                score[link] = score.get(link, 0.0) + a
        best: dict = {}
        for link in sorted(score):
            k = link[0]
            if k not in best or score[link] > score[best[k]]:
                best[k] = link
        return [best[k] for k in sorted(best)]

    def _best_per_backbone(self, i: int) -> list:
        seen, out = set(), []
        for link, _ in self.best(i):
            if link[0] not in seen:
                seen.add(link[0])
                out.append(link)
        return out

    def _market(self) -> list:
        coalitions, fallback = [], {}
        for cluster in sorted(self._clusters()):
            links = self._representative_links(cluster)
            endpoints = {v for link in links for v in link}
            if len(links) == 1:
                self.notes.append(f"boundary nodes {cluster}: single candidate backbone, min-max used")
                fallback.update({i: self.best(i)[0][0] for i in cluster})
            elif len(links) <= MAX_BACKBONES and len(cluster) <= MAX_BOUNDARIES and not set(cluster) & endpoints:
                coalitions += self._auction(cluster, links)
            else:
                # too large, or a boundary node is an endpoint of another candidate link
                self.notes.append(f"boundary nodes {cluster}: no joint market, solved per boundary node")
                for i in cluster:
                    top = self._best_per_backbone(i)[:_MARKET_FALLBACK_CANDIDATES]
                    if len(top) == 1:
                        self.notes.append(f"boundary node {i}: single candidate backbone, min-max used")
                        fallback[i] = top[0]
                    else:
                        coalitions += self._auction([i], top)
        coalitions += self._grouped(fallback, "minmax")
        return self._rational(coalitions)

    def _auction(self, cluster, links) -> list:
        pos = self.topology.positions
        eligible = np.array([[link in dict(self.single[i]) for link in links] for i in cluster])
        inst = MarketInstance(
            [(pos[s], pos[d]) for s, d in links], pos[cluster], params=self.topology.params, eligible=eligible
        )
        outcome = market_equilibrium(inst, self.delta)
        out = []
        for m, link in enumerate(links):
            held = [k for k in range(len(cluster)) if outcome.assignment[k] == m]
            if not held:
                continue
            out.append(Coalition(
                link,
                tuple(cluster[k] for k in held),
                tuple(float(outcome.offers[k, m]) for k in held),
                "market",
                float(inst.p_d[m]),
                float(outcome.p0[m]),
            ))
        return out

    def _rational(self, coalitions) -> list:
        # independent per-boundary auctions may stack several winners on one link
        by_link: dict = {}
        for c in coalitions:
            by_link.setdefault(c.link, []).append(c)
        out = []
        for link, group in sorted(by_link.items()):
            if len(group) == 1:
                out.append(group[0])
                continue
            members = sorted(i for c in group for i in c.boundaries)
            inst = CooperationInstance(
                self.topology.positions[link[0]], self.topology.positions[link[1]],
                self.topology.positions[members], params=self.topology.params,
            )
            alpha = dict(zip((i for c in group for i in c.boundaries), (a for c in group for a in c.alphas)))
            if inst.p0_grand + sum(alpha.values()) * inst.p_d <= inst.p_d:
                out.append(Coalition(link, tuple(members), tuple(alpha[i] for i in members), "market",
                                     inst.p_d, inst.p0_grand))
            else:
                self.notes.append(f"link {link}: stacked market offers irrational, min-max used")
                out += self._grouped({i: link for i in members}, "minmax")
        return out


def run_protocol(
    topology: Topology,
    traffic: TrafficMatrix,
    fairness_mode: FairnessMode = "minmax",
    game_params: RepeatedGameParams | None = None,
    seed=None,
    *,
    coalitions: bool = True,
    delta: float = 1e-4,
) -> ProtocolTrace:
    """Run the protocol once and record what was delivered.

    Parameters
    ----------
    fairness_mode : {"minmax", "average", "market"}
        Rule for pricing relaying in step 4. Market clusters with a single
        candidate backbone fall back to min-max (noted in the trace).
    seed
        Accepted for interface symmetry with the Monte-Carlo runners; the
        protocol itself is deterministic.
    coalitions : bool
        False runs the repeated game alone (steps 1-2).
    delta : float
        Offer grid for the market auction.
    """
    del seed
    if fairness_mode not in MODES:
        raise ValueError(f"unknown fairness mode {fairness_mode!r}")
    game_params = game_params or RepeatedGameParams()
    notes: list = []

    routes = discover_routes(topology, traffic)
    roles = classify_roles(topology, routes)
    community = {k for k, r in enumerate(roles) if r is NodeRole.BACKBONE}
    sustainable = cooperation_sustainable(game_params, mutual=True)
    delivered = _delivered(routes, community, {}, sustainable)

    formed: list = []
    if coalitions:
        active = _active_links(routes, roles)
        candidates = {}
        for i, r in enumerate(roles):
            if r is not NodeRole.BOUNDARY:
                continue
            if all(ok or routes[f] is None for f, ok in delivered.items() if f[0] == i):
                continue
            cands = [(k, b) for k in topology.neighbors(i) if k in active for b in active[k] if b != i]
            if cands:
                candidates[i] = [(int(k), int(b)) for k, b in cands]
        formed = _Former(topology, candidates, fairness_mode, delta, notes).form()
        partner = {i: c.backbone for c in formed for i in c.boundaries}
        delivered = _delivered(routes, community | set(partner), partner, sustainable)

    n = topology.n_nodes
    node_power = np.full(n, np.nan)
    relay_packets = np.zeros(n)
    alpha_of = {i: (a, c) for c in formed for i, a in zip(c.boundaries, c.alphas)}
    helped = {c.link: c.p0 for c in formed}
    sent: dict = {}
    for (i, j), path in routes.items():
        if delivered[(i, j)]:
            link = (path[0], path[1])
            sent.setdefault(i, []).append(helped.get(link, topology.link_power[link]))
    p_relay = topology.params.p_max
    for i, powers in sent.items():
        node_power[i] = float(np.mean(powers))
        if i in alpha_of:
            a = alpha_of[i][0]
            node_power[i] += p_relay / a
            relay_packets[i] = len(powers) / a
    for msg in notes:
        log.info(msg)
    return ProtocolTrace(roles, routes, formed, delivered, node_power, relay_packets, notes)
