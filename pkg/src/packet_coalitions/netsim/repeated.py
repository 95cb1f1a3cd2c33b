"""Repeated forwarding game: discounted payoffs and the grim-trigger threshold."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = ["RepeatedGameParams", "discounted_payoff", "cooperation_sustainable"]


@dataclass(frozen=True)
class RepeatedGameParams:
    """Discount factor, per-period forwarding cost and benefit, horizon.

    The cost and benefit are abstract payoff units; the defaults make mutual
    cooperation sustainable.
    """

    beta: float = 0.9
    forward_cost: float = 0.5
    forward_benefit: float = 1.0
    horizon: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if not (self.forward_cost > 0 and self.forward_benefit > 0):
            raise ValueError("forward_cost and forward_benefit must be positive")
        if not (self.horizon == math.inf or (self.horizon >= 1 and float(self.horizon).is_integer())):
            raise ValueError("horizon must be a positive integer or inf")


def discounted_payoff(stream: Sequence[float], beta: float, horizon: float = math.inf) -> float:
    """Discounted payoff of a per-period stream ``u(1), u(2), ...``.

    With a finite horizon ``T`` this is ``sum_{t<=T} beta**(t-1) u(t)``; the
    stream is padded with its last value if shorter than ``T``. With an
    infinite horizon the stream is taken as eventually constant (its last
    value repeats forever) and the normalised average
    ``(1 - beta) * sum_t beta**(t-1) u(t)`` is returned in closed form.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    u = [float(x) for x in stream]
    if not u:
        raise ValueError("empty payoff stream")
    if horizon == math.inf:
        head = sum(beta ** t * x for t, x in enumerate(u[:-1]))
        tail = beta ** (len(u) - 1) * u[-1] / (1.0 - beta)
        return (1.0 - beta) * (head + tail)
    t_max = int(horizon)
    u = (u + [u[-1]] * t_max)[:t_max]
    return sum(beta ** t * x for t, x in enumerate(u))


def cooperation_sustainable(params: RepeatedGameParams, mutual: bool) -> bool:
    """Grim-trigger test: mutual dependency and ``beta >= c / b``."""
    return bool(mutual) and params.beta >= params.forward_cost / params.forward_benefit
