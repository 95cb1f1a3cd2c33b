"""Reward ratios for one backbone node and the boundary nodes relaying for it.

A boundary node ``i`` relaying for the backbone is paid in forwarding: the
backbone forwards ``alpha_i`` of the boundary node's packets per packet it
relays. Shares are computed in the power-saving game, where the backbone's
saving with relay subset ``S`` is ``P_d - P_0(S)`` and boundary ``i``'s share
of that saving is ``alpha_i * P_d``.

Relays are indexed ``0 .. N-1`` inside an instance; in the characteristic
function the backbone is player 0 and relay ``k`` is player ``k + 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .channel import RadioParams, direct_power, link_gain, solve_source_power_batch
from .coopgame import NEG_INF, TOL, CharacteristicFunction
from .errors import DegenerateGeometry, NoCoalition, SizeLimit, ZeroSavingWarning

__all__ = [
    "CooperationInstance",
    "MinMaxResult",
    "MonopolyConfig",
    "PowerSavingGame",
    "ZERO_SAVING",
    "build_characteristic",
    "minmax_alpha",
    "shapley_power_saving",
    "power_savings",
    "average_alpha",
    "core_condition",
    "monopoly_alpha",
    "utilities",
]

MAX_RELAYS = 10
# savings below this many watts are treated as no saving at all
ZERO_SAVING = 1e-12


def subset_p0(source, destination, relay_positions, relay_powers, params: RadioParams) -> np.ndarray:
    """Source power for every relay subset; index ``mask`` over relays, entry 0 is ``P_d``."""
    relay_positions = np.asarray(relay_positions, dtype=float).reshape(-1, 2)
    n = len(relay_positions)
    g_sd = link_gain(source, destination, params)
    if n == 0:
        return np.array([direct_power(g_sd, params)])
    g_sr = link_gain(relay_positions, source, params)
    g_rd = link_gain(relay_positions, destination, params)
    masks = np.arange(1 << n)
    on = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    p0 = solve_source_power_batch(np.full(len(masks), g_sd), g_sr, g_rd, on * relay_powers, params)
    p0[0] = direct_power(g_sd, params)
    return p0


class CooperationInstance:
    """A backbone transmission plus the boundary nodes that may relay for it.

    Parameters
    ----------
    backbone_pos, destination_pos : (2,) array_like
        Source and destination positions in meters.
    relay_positions : (N, 2) array_like
    relay_powers : (N,) array_like, optional
        Relay transmit powers; default ``params.p_max`` each.
    params : RadioParams

    Attributes
    ----------
    p_d : float
        Direct-transmission power.
    p0_of : numpy.ndarray
        ``p0_of[mask]`` is ``P_0`` with the relays in ``mask``; ``p0_of[0] == p_d``.
    """

    def __init__(self, backbone_pos, destination_pos, relay_positions=(), relay_powers=None,
                 params: RadioParams | None = None):
        self.params = params or RadioParams()
        self.backbone_pos = np.asarray(backbone_pos, dtype=float)
        self.destination_pos = np.asarray(destination_pos, dtype=float)
        self.relay_positions = np.asarray(relay_positions, dtype=float).reshape(-1, 2)
        n = len(self.relay_positions)
        if n > MAX_RELAYS:
            raise SizeLimit(f"{n} relays exceeds the cap of {MAX_RELAYS}")
        if relay_powers is None:
            relay_powers = np.full(n, self.params.p_max)
        self.relay_powers = np.asarray(relay_powers, dtype=float).reshape(n)
        if np.any(self.relay_powers < 0) or np.any(self.relay_powers > self.params.p_max * (1 + 1e-12)):
            raise ValueError("relay powers must lie in [0, p_max]")
        if np.array_equal(self.backbone_pos, self.destination_pos):
            raise DegenerateGeometry("backbone and destination coincide")

        p0 = subset_p0(self.backbone_pos, self.destination_pos, self.relay_positions,
                       self.relay_powers, self.params)
        p0.flags.writeable = False
        self.p0_of = p0
        self.p_d = float(p0[0])

    @property
    def n_relays(self) -> int:
        return len(self.relay_positions)

    @property
    def p0_grand(self) -> float:
        return float(self.p0_of[-1])

    @property
    def saving(self) -> float:
        """``P_d - P_0(all relays)``."""
        return self.p_d - self.p0_grand

    @property
    def direct_feasible(self) -> bool:
        return self.p_d <= self.params.p_max * (1 + 1e-12)

    def p0(self, relays) -> float:
        mask = 0
        for k in relays:
            mask |= 1 << int(k)
        return float(self.p0_of[mask])

    def __repr__(self):
        return f"CooperationInstance(n_relays={self.n_relays}, p_d={self.p_d:.4g}, p0={self.p0_grand:.4g})"


class PowerSavingGame(CharacteristicFunction):
    """Power-saving game plus the standalone absolute utilities of each node.

    ``standalone[0]`` is ``-P_d`` (or -inf if the backbone cannot reach its
    destination alone) and every boundary entry is -inf.
    """

    def __init__(self, n_players, worth, standalone, **kw):
        super().__init__(n_players, worth, **kw)
        self.standalone = np.asarray(standalone, dtype=float)


def build_characteristic(instance: CooperationInstance) -> PowerSavingGame:
    n = instance.n_relays
    masks = np.arange(1 << (n + 1))
    with_backbone = (masks & 1) == 1
    worth = np.where(with_backbone, instance.p_d - instance.p0_of[masks >> 1], 0.0)
    standalone = np.full(n + 1, NEG_INF)
    if instance.direct_feasible:
        standalone[0] = -instance.p_d
    return PowerSavingGame(n + 1, worth, standalone)


@dataclass(frozen=True)
class MinMaxResult:
    alpha: np.ndarray
    mu: float


def minmax_alpha(instance: CooperationInstance) -> MinMaxResult:
    """Equalise boundary utilities ``-P_i / alpha_i`` with the whole saving handed out.

    ``alpha_i = (P_i / sum P) * (P_d - P_0(N)) / P_d``; with equal relay powers
    this is an equal split of the saving.
    """
    saving = instance.saving
    powers = instance.relay_powers
    total = powers.sum()
    if saving <= ZERO_SAVING or total <= 0:
        warnings.warn("relays give no power saving; all alpha are zero", ZeroSavingWarning, stacklevel=2)
        return MinMaxResult(alpha=np.zeros(instance.n_relays), mu=NEG_INF)
    alpha = powers / total * saving / instance.p_d
    mu = -total * instance.p_d / saving
    return MinMaxResult(alpha=alpha, mu=mu)


def _relay_shapley_weights(n: int) -> np.ndarray:
    return np.array([math.factorial(k) * math.factorial(n - 1 - k) for k in range(n)], dtype=float) / math.factorial(n)


def shapley_power_saving(instance: CooperationInstance, i: int) -> float:
    """Expected drop in source power when relay ``i`` joins in random order.

    The backbone is always present; orders range over the relays only.
    """
    n = instance.n_relays
    if not 0 <= i < n:
        raise IndexError(f"relay {i} out of range")
    weights = _relay_shapley_weights(n)
    p0 = instance.p0_of
    bit = 1 << i
    total = 0.0
    for mask in range(1 << n):
        if mask & bit:
            continue
        total += weights[bin(mask).count("1")] * (p0[mask] - p0[mask | bit])
    return float(total)


def power_savings(instance: CooperationInstance) -> np.ndarray:
    return np.array([shapley_power_saving(instance, i) for i in range(instance.n_relays)])


def average_alpha(instance: CooperationInstance) -> np.ndarray:
    return power_savings(instance) / instance.p_d


def core_condition(alpha, instance: CooperationInstance) -> bool:
    alpha = np.asarray(alpha, dtype=float)
    return bool(np.all(alpha >= 0) and alpha.sum() <= instance.saving / instance.p_d + TOL)


@dataclass(frozen=True)
class MonopolyConfig:
    """Reserve value ``v_0`` (watts) a greedy backbone keeps before paying relays."""

    v_0: float = 0.0
    mode: Literal["minmax", "average"] = "minmax"

    def __post_init__(self):
        if self.v_0 < 0:
            raise ValueError("v_0 must be non-negative")
        if self.mode not in ("minmax", "average"):
            raise ValueError(f"unknown fairness mode {self.mode!r}")


def monopoly_alpha(instance: CooperationInstance, cfg: MonopolyConfig) -> np.ndarray:
    saving = instance.saving
    if cfg.v_0 > saving + TOL:
        raise NoCoalition(f"reserve {cfg.v_0:g} W exceeds the available saving {saving:g} W")
    left = max(saving - cfg.v_0, 0.0)
    n = instance.n_relays
    if cfg.mode == "minmax":
        return np.full(n, left / (n * instance.p_d)) if n else np.zeros(0)
    if saving <= ZERO_SAVING:
        return np.zeros(n)
    return left * power_savings(instance) / (instance.p_d * saving)


def utilities(instance: CooperationInstance, alpha: Sequence[float]) -> np.ndarray:
    """Absolute utilities ``(U_0, U_1, ..., U_N)``; a zero ratio maps to -inf."""
    alpha = np.asarray(alpha, dtype=float)
    u = np.empty(instance.n_relays + 1)
    u[0] = -instance.p0_grand - alpha.sum() * instance.p_d
    with np.errstate(divide="ignore"):
        u[1:] = np.where(alpha > 0, -instance.relay_powers / np.where(alpha > 0, alpha, 1.0), NEG_INF)
    return u
