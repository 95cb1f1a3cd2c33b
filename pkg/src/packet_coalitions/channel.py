"""Radio-layer arithmetic for amplify-and-forward cooperative transmission.

Channels are deterministic: the squared channel magnitude between two nodes
is ``d ** -kappa``. All powers are in watts; dB/dBm only appear through the
``RadioParams.from_db`` constructor.

The combined SNR at the destination after maximal ratio combining is::

    snr = p0 * g_sd / sigma2 + sum_i af_snr_i

    af_snr_i = p0 * P_i * g_sr_i * g_rd_i
               / (sigma2 * (p0 * g_sr_i + P_i * g_rd_i + sigma2))

and the source power needed to reach ``gamma`` is found by bisection, which
is valid because ``snr`` is strictly increasing in ``p0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometry

__all__ = [
    "RadioParams",
    "RelayLink",
    "PowerSolution",
    "db_to_linear",
    "dbm_to_watts",
    "path_gain",
    "link_gain",
    "direct_power",
    "relay_snr",
    "combined_snr",
    "solve_source_power",
    "solve_source_power_batch",
]

P0_RTOL = 1e-10
_MAX_BISECT = 200


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class RadioParams:
    """Propagation and link-quality constants.

    Parameters
    ----------
    kappa : float
        Path-loss exponent.
    sigma2 : float
        Noise power in watts (1e-9 W is -60 dBm).
    gamma : float
        Minimum linear SNR at the destination (10 is 10 dB).
    p_max : float
        Maximum transmit power in watts (0.01 W is 10 dBm).
    """

    kappa: float = 3.0
    sigma2: float = 1e-9
    gamma: float = 10.0
    p_max: float = 0.01

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        # gamma == 0 is tolerated as a degenerate "no target" setting
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if not self.p_max > 0:
            raise ValueError(f"p_max must be positive, got {self.p_max}")

    @classmethod
    def from_db(cls, kappa=3.0, sigma2_dbm=-60.0, gamma_db=10.0, p_max_dbm=10.0):
        return cls(
            kappa=float(kappa),
            sigma2=float(dbm_to_watts(sigma2_dbm)),
            gamma=float(db_to_linear(gamma_db)),
            p_max=float(dbm_to_watts(p_max_dbm)),
        )


@dataclass(frozen=True)
class RelayLink:
    """One relay's transmit power and its two channel gains."""

    relay_power: float
    g_sr: float
    g_rd: float

    def __post_init__(self):
        if self.relay_power < 0:
            raise ValueError("relay_power must be non-negative")


@dataclass(frozen=True)
class PowerSolution:
    p0: float
    feasible: bool
    achieved_snr: float


def path_gain(distance, params: RadioParams):
    """Squared channel magnitude ``distance ** -kappa``.

    Accepts scalars or arrays; raises ``DegenerateGeometry`` if any distance
    is not strictly positive.
    """
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise DegenerateGeometry(f"non-positive link distance: {distance!r}")
    g = d ** -params.kappa
    return float(g) if g.ndim == 0 else g


def link_gain(a, b, params: RadioParams):
    """Gain between two positions (any dimension, last axis is coordinates)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return path_gain(np.linalg.norm(a - b, axis=-1), params)


def direct_power(g_sd, params: RadioParams):
    """Transmit power for the direct link to hit ``gamma`` exactly (no clamping)."""
    return params.gamma * params.sigma2 / g_sd


def _af_snr(p0, p_r, g_sr, g_rd, sigma2):
    num = p0 * p_r * g_sr * g_rd
    den = sigma2 * (p0 * g_sr + p_r * g_rd + sigma2)
    return num / den


def relay_snr(p0: float, link: RelayLink, params: RadioParams) -> float:
    return float(_af_snr(p0, link.relay_power, link.g_sr, link.g_rd, params.sigma2))


def combined_snr(p0: float, g_sd: float, relays: Sequence[RelayLink], params: RadioParams) -> float:
    total = p0 * g_sd / params.sigma2
    for link in relays:
        total += relay_snr(p0, link, params)
    return float(total)


def _combined(p0, g_sd, g_sr, g_rd, p_r, sigma2):
    # p0, g_sd: (...); g_sr, g_rd, p_r: (..., n)
    relay = _af_snr(p0[..., None], p_r, g_sr, g_rd, sigma2).sum(axis=-1)
    return p0 * g_sd / sigma2 + relay


def solve_source_power_batch(g_sd, g_sr, g_rd, relay_power, params: RadioParams):
    """Vectorised source-power solve.

    Parameters
    ----------
    g_sd : array_like, shape (...)
        Source-destination gains.
    g_sr, g_rd, relay_power : array_like, shape (..., n)
        Per-relay gains and powers; set ``relay_power`` to zero to exclude a
        relay from a coalition.

    Returns
    -------
    numpy.ndarray, shape (...)
        Smallest ``p0`` reaching ``gamma``. Entries without any contributing
        relay equal the direct power exactly.
    """
    g_sd = np.asarray(g_sd, dtype=float)
    g_sr, g_rd, p_r = np.broadcast_arrays(
        np.asarray(g_sr, dtype=float), np.asarray(g_rd, dtype=float), np.asarray(relay_power, dtype=float)
    )
    if g_sr.shape[:-1] != g_sd.shape:
        g_sd = np.broadcast_to(g_sd, g_sr.shape[:-1])
    sigma2, gamma = params.sigma2, params.gamma
    p_d = gamma * sigma2 / g_sd

    lo = np.zeros_like(p_d)
    hi = p_d.copy()
    f_hi = _combined(hi, g_sd, g_sr, g_rd, p_r, sigma2) - gamma
    active = f_hi > 0
    if not np.any(active):
        return p_d
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        f_mid = _combined(mid, g_sd, g_sr, g_rd, p_r, sigma2) - gamma
        up = f_mid >= 0
        hi = np.where(up, mid, hi)
        f_hi = np.where(up, f_mid, f_hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo <= P0_RTOL * hi):
            break
    # one false-position step inside the final bracket
    f_lo = _combined(lo, g_sd, g_sr, g_rd, p_r, sigma2) - gamma
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(f_hi > f_lo, -f_lo / (f_hi - f_lo), 1.0)
    p0 = lo + (hi - lo) * np.clip(frac, 0.0, 1.0)
    return np.where(active, p0, p_d)


def solve_source_power(g_sd: float, relays: Sequence[RelayLink], params: RadioParams) -> PowerSolution:
    """Smallest source power for which the MRC output SNR reaches ``gamma``.

    With no relays the answer is exactly the direct power. ``feasible`` is
    False when the required power exceeds ``p_max``; this is reported, not
    raised.
    """
    if not g_sd > 0:
        raise DegenerateGeometry("source-destination gain must be positive")
    if relays:
        g_sr = np.array([r.g_sr for r in relays])
        g_rd = np.array([r.g_rd for r in relays])
        p_r = np.array([r.relay_power for r in relays])
        p0 = float(solve_source_power_batch(np.float64(g_sd), g_sr, g_rd, p_r, params))
    else:
        p0 = float(direct_power(g_sd, params))
    snr = combined_snr(p0, g_sd, relays, params)
    return PowerSolution(p0=p0, feasible=p0 <= params.p_max * (1 + 1e-12), achieved_snr=snr)
