"""Competition among several backbone nodes for the same boundary nodes.

Each backbone ``m`` posts an offer ``alpha[i, m]`` to every boundary node
``i``; a boundary node joins the backbone with the largest positive offer
(ties go to the lowest backbone index). A backbone's utility is

    U_0^m = -P_0^m(assigned set) - sum_i alpha[i, m] * P_d^m

and it only takes part while ``U_0^m >= -P_d^m``.

The equilibrium is reached by an ascending auction on a grid of step
``delta``: backbones outbid each other one grid step at a time while doing so
strictly raises their utility, drop boundary nodes that no longer pay for
themselves, and trim winning offers down to the least that still wins.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel import RadioParams
from .coopgame import NEG_INF, CharacteristicFunction, least_core_value
from .errors import NonConvergence, SizeLimit, SuperadditivityWarning
from .fairness import subset_p0

__all__ = [
    "MarketInstance",
    "MarketOutcome",
    "assignment_matrix",
    "backbone_utility",
    "boundary_choice",
    "boundary_choices",
    "break_even_offer",
    "joint_characteristic",
    "market_equilibrium",
    "verify_core_empty",
]

MAX_BACKBONES = 4
MAX_BOUNDARIES = 6


def _mask(items) -> int:
    mask = 0
    for k in items:
        mask |= 1 << int(k)
    return mask


class MarketInstance:
    """Backbone transmissions competing for a shared set of boundary nodes.

    Parameters
    ----------
    backbones : sequence of (source, destination) position pairs
    boundaries : (N, 2) array_like
        Boundary node positions.
    boundary_powers : (N,) array_like, optional
        Relay powers; default ``params.p_max``.
    params : RadioParams
    eligible : (N, M) array_like of bool, optional
        Which backbones may bid for which boundary nodes (default: all).

    Attributes
    ----------
    p_d : (M,) numpy.ndarray
        Direct power of each backbone.
    p0_of : (M, 2**N) numpy.ndarray
        ``p0_of[m, mask]`` is backbone ``m``'s source power with the boundary
        nodes in ``mask`` relaying.
    """

    def __init__(self, backbones, boundaries, boundary_powers=None, params: RadioParams | None = None,
                 eligible=None):
        self.params = params or RadioParams()
        pairs = [(np.asarray(s, dtype=float), np.asarray(d, dtype=float)) for s, d in backbones]
        self.boundaries = np.asarray(boundaries, dtype=float).reshape(-1, 2)
        if not pairs or not len(self.boundaries):
            raise ValueError("a market needs at least one backbone and one boundary node")
        if len(self.boundaries) > 10:
            raise SizeLimit("too many boundary nodes to tabulate")
        self.sources = np.array([s for s, _ in pairs])
        self.destinations = np.array([d for _, d in pairs])
        n = len(self.boundaries)
        if boundary_powers is None:
            boundary_powers = np.full(n, self.params.p_max)
        self.boundary_powers = np.asarray(boundary_powers, dtype=float).reshape(n)
        self.p0_of = np.array([
            subset_p0(s, d, self.boundaries, self.boundary_powers, self.params) for s, d in pairs
        ])
        self.p0_of.flags.writeable = False
        self.p_d = self.p0_of[:, 0].copy()
        if eligible is None:
            eligible = np.ones((n, len(pairs)), dtype=bool)
        self.eligible = np.asarray(eligible, dtype=bool).reshape(n, len(pairs))

    @property
    def n_backbones(self) -> int:
        return len(self.sources)

    @property
    def n_boundaries(self) -> int:
        return len(self.boundaries)

    def p0(self, m: int, subset) -> float:
        return float(self.p0_of[m, _mask(subset)])

    def __repr__(self):
        return f"MarketInstance(M={self.n_backbones}, N={self.n_boundaries})"


def break_even_offer(instance: MarketInstance, m: int, subset, i: int,
                     committed: Mapping[int, float] | None = None) -> float:
    """Largest offer to ``i`` that leaves backbone ``m`` no worse than going direct.

    ``committed`` maps the other members of ``subset`` to offers already
    promised to them.
    """
    subset = set(int(k) for k in subset)
    if i not in subset:
        raise ValueError("boundary i must belong to the subset")
    committed = committed or {}
    p_d = instance.p_d[m]
    promised = sum(committed.get(k, 0.0) for k in subset if k != i)
    alpha = (p_d - instance.p0(m, subset) - promised * p_d) / p_d
    return max(alpha, 0.0)


def boundary_choice(offers, i: int):
    """Backbone index with the largest positive offer to ``i``, or None."""
    row = np.asarray(offers, dtype=float)[i]
    m = int(np.argmax(row))
    return m if row[m] > 0 else None


def boundary_choices(offers) -> np.ndarray:
    """Chosen backbone per boundary node, ``-1`` where every offer is zero."""
    offers = np.asarray(offers, dtype=float)
    best = np.argmax(offers, axis=1)
    return np.where(offers[np.arange(len(offers)), best] > 0, best, -1)


def assignment_matrix(choices, n_backbones: int) -> np.ndarray:
    choices = np.asarray(choices)
    a = np.zeros((len(choices), n_backbones), dtype=int)
    rows = np.flatnonzero(choices >= 0)
    a[rows, choices[rows]] = 1
    return a


def backbone_utility(instance: MarketInstance, m: int, assignment, offers) -> float:
    """``-P_0^m(assigned) - sum alpha * P_d^m`` for boundaries assigned to ``m``."""
    assignment = np.asarray(assignment)
    offers = np.asarray(offers, dtype=float)
    held = np.flatnonzero(assignment == m)
    p_d = instance.p_d[m]
    return float(-instance.p0_of[m, _mask(held)] - offers[held, m].sum() * p_d)


@dataclass
class MarketOutcome:
    offers: np.ndarray
    assignment: np.ndarray
    backbone_utilities: np.ndarray
    boundary_utilities: np.ndarray
    p0: np.ndarray
    delta: float
    rounds: int
    utility_history: list = field(default_factory=list, repr=False)

    @property
    def assignment_matrix(self) -> np.ndarray:
        return assignment_matrix(self.assignment, self.offers.shape[1])

    def winning_offer(self, i: int) -> float:
        m = self.assignment[i]
        return float(self.offers[i, m]) if m >= 0 else 0.0


def _submask_table(n: int) -> list[np.ndarray]:
    table = []
    for mask in range(1 << n):
        subs = [mask]
        sub = (mask - 1) & mask
        while True:
            subs.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & mask
        table.append(np.array(subs))
    return table


class _Auction:
    def __init__(self, instance: MarketInstance, delta: float):
        self.inst = instance
        self.delta = delta
        self.M, self.N = instance.n_backbones, instance.n_boundaries
        self.ticks = np.zeros((self.N, self.M), dtype=np.int64)
        self.subs = _submask_table(self.N)
        self.bits = 1 << np.arange(self.N)
        self.eps = 1e-12 * instance.p_d

    def choices(self) -> np.ndarray:
        return boundary_choices(self.ticks)

    def held(self, m: int, choices) -> int:
        return int(self.bits[choices == m].sum())

    def cost(self, m: int, mask: int, bid=None) -> float:
        """Backbone ``m``'s power with ``mask`` assigned; ``bid=(i, t)`` overrides one offer."""
        col = self.ticks[:, m]
        if bid is not None:
            col = col.copy()
            col[bid[0]] = bid[1]
        paid = col[(mask & self.bits) != 0].sum()
        return self.inst.p0_of[m, mask] + paid * self.delta * self.inst.p_d[m]

    def min_winning_tick(self, m: int, i: int) -> int:
        row = self.ticks[i].copy()
        row[m] = 0
        top = int(row.max())
        if top == 0:
            return 1
        rival = int(np.argmax(row))
        return top if m < rival else top + 1

    def repair(self) -> bool:
        """Let every backbone shed boundary nodes that cost more than they save."""
        changed = False
        while True:
            dropped = False
            choices = self.choices()
            for m in range(self.M):
                held = self.held(m, choices)
                if not held:
                    continue
                subs = self.subs[held]
                sel = (subs[:, None] & self.bits) != 0
                paid = sel @ self.ticks[:, m]
                costs = self.inst.p0_of[m, subs] + paid * self.delta * self.inst.p_d[m]
                best = int(np.argmin(costs))
                if costs[best] < costs[0] - self.eps[m]:
                    drop = held & ~int(subs[best])
                    self.ticks[(drop & self.bits) != 0, m] = 0
                    dropped = changed = True
                    break
            if not dropped:
                return changed

    def try_raises(self) -> bool:
        changed = False
        for m in range(self.M):
            for i in range(self.N):
                choices = self.choices()
                if choices[i] == m or not self.inst.eligible[i, m]:
                    continue
                held = self.held(m, choices)
                t = self.min_winning_tick(m, i)
                before = self.cost(m, held)
                after = self.cost(m, held | (1 << i), bid=(i, t))
                if after < before - self.eps[m] and after <= self.inst.p_d[m] + self.eps[m]:
                    self.ticks[i, m] = t
                    self.repair()
                    changed = True
        return changed

    def trim(self) -> bool:
        changed = False
        choices = self.choices()
        for i in range(self.N):
            m = choices[i]
            if m < 0:
                continue
            t = self.min_winning_tick(m, i)
            if t < self.ticks[i, m]:
                self.ticks[i, m] = t
                changed = True
        return changed

    def utilities(self) -> np.ndarray:
        choices = self.choices()
        return np.array([-self.cost(m, self.held(m, choices)) for m in range(self.M)])


def market_equilibrium(instance: MarketInstance, delta: float = 1e-4) -> MarketOutcome:
    """Run the ascending-offer auction to a no-profitable-deviation point.

    Offers live on the grid ``k * delta``. On termination no backbone can
    move any single offer by one grid step and strictly raise its utility,
    and every backbone satisfies ``U_0^m >= -P_d^m``.
    """
    if instance.n_backbones > MAX_BACKBONES or instance.n_boundaries > MAX_BOUNDARIES:
        raise SizeLimit(
            f"market limited to {MAX_BACKBONES} backbones and {MAX_BOUNDARIES} boundary nodes"
        )
    if not delta > 0:
        raise ValueError("delta must be positive")
    auction = _Auction(instance, delta)
    cap = math.ceil(1.0 / delta) * instance.n_backbones * instance.n_boundaries
    history = []
    rounds = 0
    while True:
        changed = auction.try_raises()
        changed |= auction.trim()
        changed |= auction.repair()
        history.append(auction.utilities())
        if not changed:
            break
        rounds += 1
        if rounds > cap:
            raise NonConvergence(f"auction did not settle within {cap} rounds")

    offers = auction.ticks * delta
    choices = auction.choices()
    p0 = np.array([instance.p0_of[m, auction.held(m, choices)] for m in range(instance.n_backbones)])
    boundary_u = np.full(instance.n_boundaries, NEG_INF)
    for i, m in enumerate(choices):
        if m >= 0:
            boundary_u[i] = -instance.boundary_powers[i] / offers[i, m]
    return MarketOutcome(
        offers=offers,
        assignment=choices,
        backbone_utilities=auction.utilities(),
        boundary_utilities=boundary_u,
        p0=p0,
        delta=delta,
        rounds=rounds,
        utility_history=history,
    )


def joint_characteristic(instance: MarketInstance) -> CharacteristicFunction:
    """Power-saving game over all backbones (players ``0..M-1``) and boundaries.

    Backbones gain nothing from each other. A coalition holding ``k >= 1``
    backbones is one cooperative group whose boundary nodes time-share their
    relaying equally among those backbones, so its worth is the average of the
    backbones' savings with the group's boundary nodes. Coalitions without a
    backbone are worth 0.
    """
    M, N = instance.n_backbones, instance.n_boundaries
    n = M + N
    masks = np.arange(1 << n)
    bb = masks & ((1 << M) - 1)
    relays = masks >> M
    worth = np.zeros(1 << n)
    count = np.zeros(1 << n)
    for m in range(M):
        inside = (bb >> m) & 1
        worth += inside * (instance.p_d[m] - instance.p0_of[m, relays])
        count += inside
    worth = np.where(count > 0, worth / np.maximum(count, 1), 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SuperadditivityWarning)
        return CharacteristicFunction(n, worth)


def verify_core_empty(instance: MarketInstance) -> bool:
    """True when the joint game's least-core value is strictly positive.

    With a single backbone the question does not arise and False is returned.
    """
    if instance.n_backbones < 2:
        return False
    if instance.n_backbones + instance.n_boundaries > 10:
        raise SizeLimit("at most 10 players in total")
    return least_core_value(joint_characteristic(instance)) > 1e-9
