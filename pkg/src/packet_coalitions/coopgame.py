"""Transferable-utility coalition games over a small player set.

Coalitions are integer bitmasks (bit ``i`` set means player ``i`` is a
member); any iterable of player indices is accepted wherever a coalition is
expected. Worths are tabulated for all ``2 ** n`` coalitions. Infeasible
coalitions carry the sentinel ``NEG_INF`` (IEEE ``-inf``), which absorbs in
excess computations and is refused by the Shapley value.
"""
from __future__ import annotations

import math
import warnings
from itertools import permutations
from typing import Callable, Iterable, Union

import numpy as np
from scipy.optimize import linprog

from .errors import InfeasibleWorth, SizeLimit, SuperadditivityWarning

__all__ = [
    "NEG_INF",
    "TOL",
    "CharacteristicFunction",
    "coalition_mask",
    "members",
    "excess",
    "is_imputation",
    "core_contains",
    "least_core",
    "least_core_value",
    "kernel_check",
    "shapley",
    "shapley_by_orders",
]

NEG_INF = float("-inf")
TOL = 1e-9

CORE_MAX_PLAYERS = 21
KERNEL_MAX_PLAYERS = 20
SHAPLEY_MAX_PLAYERS = 12
ORDERS_MAX_PLAYERS = 7
LEAST_CORE_MAX_PLAYERS = 10
_SUPERADDITIVITY_CHECK_MAX = 12

Coalition = Union[int, Iterable[int]]


def coalition_mask(coalition: Coalition) -> int:
    if isinstance(coalition, (int, np.integer)):
        return int(coalition)
    mask = 0
    for i in coalition:
        mask |= 1 << int(i)
    return mask


def members(mask: int) -> list[int]:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        pc = np.concatenate([pc, pc + 1])
    return pc


def _subset_sums(u: np.ndarray) -> np.ndarray:
    """``out[mask] = sum(u[i] for i in mask)`` for every mask."""
    sums = np.zeros(1)
    for x in u:
        sums = np.concatenate([sums, sums + x])
    return sums


class CharacteristicFunction:
    """Tabulated worth ``v(S)`` for every coalition of ``n_players``.

    Parameters
    ----------
    n_players : int
    worth : array_like, length ``2 ** n_players``
        ``worth[mask]``; the empty coalition must be worth 0.
    check : bool
        Warn (``SuperadditivityWarning``) if some pair of disjoint coalitions
        with finite worths violates super-additivity. Skipped for more than
        12 players.
    """

    def __init__(self, n_players: int, worth, *, check: bool = True):
        worth = np.array(worth, dtype=float)
        if worth.shape != (1 << n_players,):
            raise ValueError(f"expected {1 << n_players} worths, got shape {worth.shape}")
        if worth[0] != 0:
            raise ValueError("the empty coalition must be worth 0")
        if np.any(np.isnan(worth)) or np.any(worth == np.inf):
            raise ValueError("worths must be finite reals or -inf")
        worth.flags.writeable = False
        self.n_players = int(n_players)
        self.worth = worth
        if check and n_players <= _SUPERADDITIVITY_CHECK_MAX:
            bad = self.superadditivity_violation()
            if bad is not None:
                s, z = bad
                warnings.warn(
                    f"super-additivity fails for disjoint coalitions {members(s)} and {members(z)}",
                    SuperadditivityWarning,
                    stacklevel=2,
                )

    @classmethod
    def from_function(cls, n_players: int, fn: Callable[[frozenset], float], **kw):
        worth = [0.0] + [fn(frozenset(members(m))) for m in range(1, 1 << n_players)]
        return cls(n_players, worth, **kw)

    @property
    def grand(self) -> int:
        return (1 << self.n_players) - 1

    def __call__(self, coalition: Coalition) -> float:
        return float(self.worth[coalition_mask(coalition)])

    def __add__(self, other: "CharacteristicFunction") -> "CharacteristicFunction":
        if other.n_players != self.n_players:
            raise ValueError("player counts differ")
        return CharacteristicFunction(self.n_players, self.worth + other.worth, check=False)

    def superadditivity_violation(self):
        """First pair ``(S, Z)`` of disjoint masks with ``v(S) + v(Z) > v(S | Z)``, or None."""
        w = self.worth
        for union in range(1, 1 << self.n_players):
            wu = w[union]
            if wu == NEG_INF:
                # only -inf parts can sit below an infeasible union
                sub = (union - 1) & union
                while sub:
                    rest = union ^ sub
                    if sub < rest and w[sub] > NEG_INF and w[rest] > NEG_INF:
                        return sub, rest
                    sub = (sub - 1) & union
                continue
            sub = (union - 1) & union
            while sub:
                rest = union ^ sub
                if sub < rest and w[sub] + w[rest] > wu + TOL:
                    return sub, rest
                sub = (sub - 1) & union
        return None

    def to_text(self) -> str:
        """One ``mask,value`` line per coalition; ``-inf`` marks the sentinel."""
        lines = []
        for mask, value in enumerate(self.worth):
            lines.append(f"{mask},{'-inf' if value == NEG_INF else repr(float(value))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **kw) -> "CharacteristicFunction":
        table = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            mask, value = line.split(",")
            table[int(mask)] = float(value)
        size = max(table) + 1
        n = size.bit_length() - 1
        if size != 1 << n or len(table) != size:
            raise ValueError("table must list every mask 0 .. 2**n - 1 exactly once")
        return cls(n, [table[m] for m in range(size)], **kw)

    def __repr__(self):
        return f"CharacteristicFunction(n_players={self.n_players})"


def excess(v: CharacteristicFunction, u, s: Coalition) -> float:
    mask = coalition_mask(s)
    worth = v.worth[mask]
    if worth == NEG_INF:
        return NEG_INF
    u = np.asarray(u, dtype=float)
    return float(worth - sum(u[i] for i in members(mask)))


def is_imputation(v: CharacteristicFunction, u) -> bool:
    u = np.asarray(u, dtype=float)
    if u.shape != (v.n_players,) or not np.all(np.isfinite(u)):
        return False
    if abs(u.sum() - v.worth[v.grand]) > TOL:
        return False
    singles = v.worth[[1 << i for i in range(v.n_players)]]
    return bool(np.all(u >= singles - TOL))


def _check_size(v: CharacteristicFunction, cap: int):
    if v.n_players > cap:
        raise SizeLimit(f"{v.n_players} players exceeds the enumeration cap of {cap}")


def _excesses(v: CharacteristicFunction, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    with np.errstate(invalid="ignore"):
        return v.worth - _subset_sums(u)


def core_contains(v: CharacteristicFunction, u) -> bool:
    """Exhaustive core membership test over all coalitions."""
    _check_size(v, CORE_MAX_PLAYERS)
    if not is_imputation(v, u):
        return False
    return bool(np.all(_excesses(v, u) <= TOL))


def least_core(v: CharacteristicFunction) -> tuple[float, np.ndarray]:
    """Smallest uniform relaxation ``eps`` for which the relaxed core is non-empty.

    Solves ``min eps`` subject to ``x(S) >= v(S) - eps`` for every proper,
    non-empty coalition with finite worth, and ``x(N) = v(N)``.

    Returns
    -------
    eps : float
        ``-inf`` if no proper coalition has finite worth.
    x : numpy.ndarray
        An allocation attaining ``eps``.
    """
    _check_size(v, LEAST_CORE_MAX_PLAYERS)
    n = v.n_players
    grand_worth = v.worth[v.grand]
    if grand_worth == NEG_INF:
        raise InfeasibleWorth("grand coalition worth is -inf")
    rows, rhs = [], []
    for mask in range(1, v.grand):
        w = v.worth[mask]
        if w == NEG_INF:
            continue
        row = np.zeros(n + 1)
        row[members(mask)] = -1.0
        row[n] = -1.0
        rows.append(row)
        rhs.append(-w)
    if not rows:
        return NEG_INF, np.full(n, grand_worth / n)
    c = np.zeros(n + 1)
    c[n] = 1.0
    a_eq = np.ones((1, n + 1))
    a_eq[0, n] = 0.0
    # scale to O(1) so HiGHS tolerances are meaningful for watt-sized worths
    scale = max(1e-300, float(np.max(np.abs([grand_worth] + rhs))))
    res = linprog(
        c,
        A_ub=np.array(rows),
        b_ub=np.array(rhs) / scale,
        A_eq=a_eq,
        b_eq=[grand_worth / scale],
        bounds=[(None, None)] * (n + 1),
        method="highs",
    )
    if res.status == 3:
        return NEG_INF, np.full(n, grand_worth / n)
    if not res.success:
        raise RuntimeError(f"least-core LP failed: {res.message}")
    x = res.x[:n] * scale
    # recompute eps exactly from the allocation rather than trusting the LP value
    exc = _excesses(v, x)[1:-1]
    return float(np.max(exc)), x


def least_core_value(v: CharacteristicFunction) -> float:
    return least_core(v)[0]


def kernel_check(v: CharacteristicFunction, u, i: int, j: int) -> bool:
    """Balanced maximal surplus between ``i`` and ``j``.

    Compares the largest excess over coalitions containing ``i`` but not
    ``j`` with the same quantity for ``j`` over ``i``. Coalitions worth -inf
    take part with excess -inf; two -inf maxima compare equal.
    """
    if i == j:
        raise ValueError("kernel_check needs two distinct players")
    _check_size(v, KERNEL_MAX_PLAYERS)
    exc = _excesses(v, u)
    masks = np.arange(1 << v.n_players)
    bi, bj = 1 << i, 1 << j
    s_ij = np.max(exc[((masks & bi) != 0) & ((masks & bj) == 0)])
    s_ji = np.max(exc[((masks & bj) != 0) & ((masks & bi) == 0)])
    if s_ij == NEG_INF or s_ji == NEG_INF:
        return bool(s_ij == s_ji)
    return bool(abs(s_ij - s_ji) <= TOL)


def _require_finite(v: CharacteristicFunction):
    bad = np.flatnonzero(v.worth == NEG_INF)
    if bad.size:
        raise InfeasibleWorth(f"coalition {members(int(bad[0]))} has worth -inf; map sentinels first")


def shapley(v: CharacteristicFunction) -> np.ndarray:
    """Shapley value by the subset-weighted marginal-contribution sum."""
    _check_size(v, SHAPLEY_MAX_PLAYERS)
    _require_finite(v)
    n = v.n_players
    pc = _popcounts(n)
    weight = np.array([math.factorial(k) * math.factorial(n - 1 - k) for k in range(n)], dtype=float)
    weight /= math.factorial(n)
    masks = np.arange(1 << n)
    phi = np.empty(n)
    for i in range(n):
        without = masks[(masks & (1 << i)) == 0]
        marginal = v.worth[without | (1 << i)] - v.worth[without]
        phi[i] = np.sum(weight[pc[without]] * marginal)
    return phi


def shapley_by_orders(v: CharacteristicFunction) -> np.ndarray:
    """Shapley value by averaging marginal contributions over every joining order.

    Independent of ``shapley``; used as its test oracle.
    """
    n = v.n_players
    if n > ORDERS_MAX_PLAYERS:
        raise SizeLimit(f"{n} players is too many to enumerate orders")
    _require_finite(v)
    totals = [0.0] * n
    count = 0
    for order in permutations(range(n)):
        mask = 0
        for p in order:
            totals[p] += v.worth[mask | (1 << p)] - v.worth[mask]
            mask |= 1 << p
        count += 1
    return np.array(totals) / count
