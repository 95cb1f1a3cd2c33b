"""Experiment registry: configuration, seeded runs and CSV tables.

Configuration is INI text with four sections::

    [radio]     kappa, sigma2_dbm, gamma_db, p_max_dbm
    [game]      beta, c, b, v_0, delta
    [geometry]  experiment-specific placement and sweep keys
    [run]       trials, seed, output

Every key has a default reproducing the published setups, so an empty file
is a valid configuration. Sweeps are written either as a comma list
(``1,2,3``) or as an inclusive range ``start:stop:step``.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import RadioParams, db_to_linear, dbm_to_watts, link_gain, solve_source_power_batch
from .errors import ConfigError, NoCoalition, UnknownExperiment, ZeroSavingWarning
from .fairness import CooperationInstance, MonopolyConfig, average_alpha, minmax_alpha, monopoly_alpha
from .market import MarketInstance, break_even_offer, market_equilibrium
from .netsim import Linear, RepeatedGameParams, boundary_probability, connectivity_stats

__all__ = [
    "ExperimentConfig",
    "ResultTable",
    "EXPERIMENTS",
    "load_config",
    "run_experiment",
    "emit_csv",
    "format_csv",
]

RADIO_DEFAULTS = {"kappa": "3", "sigma2_dbm": "-60", "gamma_db": "10", "p_max_dbm": "10"}
GAME_DEFAULTS = {"beta": "0.9", "c": "0.5", "b": "1.0", "v_0": "0", "delta": "1e-4"}
RUN_DEFAULTS = {"seed": "0", "output": ""}

_ARC = {
    "distances": "5:100:5",
    "relays": "1,2,3",
    "destinations": "100,50",
    "angle_min_pi": "0.5",
    "angle_max_pi": "1.5",
}
_AVERAGE = {"backbone": "0,0", "destination": "-50,0", "b1_x": "20,50", "b2_x": "5:100:5"}
_MARKET = {
    "backbone1": "0,-30",
    "backbone2": "0,30",
    "destination": "-50,0",
    "b1": "44,10",
    "b2_x": "44",
    "b2_y": "-50:50:5",
}


@dataclass(frozen=True)
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)

    def __post_init__(self):
        width = len(self.columns)
        for r in self.rows:
            if len(r) != width:
                raise ValueError(f"row {r!r} does not have {width} cells")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed configuration; dB values are already converted to linear units."""

    name: str
    radio: RadioParams
    game: RepeatedGameParams
    v_0: float
    delta: float
    geometry: dict
    trials: int
    seed: int
    output: str | None


@dataclass(frozen=True)
class _Experiment:
    run: Callable
    geometry: dict
    trials: int
    summary: str


def _floats(key: str, text: str) -> list[float]:
    try:
        text = text.strip()
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + k * step for k in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(key, f"cannot read {text!r} as numbers") from None


def _ints(key: str, text: str) -> list[int]:
    vals = _floats(key, text)
    if any(v != int(v) for v in vals):
        raise ConfigError(key, f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _point(key: str, text: str) -> np.ndarray:
    vals = _floats(key, text)
    if len(vals) != 2:
        raise ConfigError(key, f"expected 'x,y', got {text!r}")
    return np.array(vals)


def _number(section: dict, sec: str, key: str) -> float:
    try:
        return float(section[key])
    except ValueError:
        raise ConfigError(f"{sec}.{key}", f"not a number: {section[key]!r}") from None


# --- min-max sweep over arc placements (Figs. 4 and 5) -------------------

def _arc_rows(cfg: ExperimentConfig) -> list:
    g, params = cfg.geometry, cfg.radio
    distances = _floats("geometry.distances", g["distances"])
    relays = _ints("geometry.relays", g["relays"])
    dests = _floats("geometry.destinations", g["destinations"])
    lo = float(_floats("geometry.angle_min_pi", g["angle_min_pi"])[0]) * math.pi
    hi = float(_floats("geometry.angle_max_pi", g["angle_max_pi"])[0]) * math.pi
    rows = []
    for a, dest in enumerate(dests):
        for b, n in enumerate(relays):
            for c, dist in enumerate(distances):
                rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(a, b, c)))
                theta = rng.uniform(lo, hi, size=(cfg.trials, n))
                rel = dist * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
                d_vec = np.array([dest, 0.0])
                g_sd = np.full(cfg.trials, link_gain(np.zeros(2), d_vec, params))
                g_sr = link_gain(rel, np.zeros(2), params)
                g_rd = link_gain(rel, d_vec, params)
                p0 = solve_source_power_batch(g_sd, g_sr, g_rd, np.full((cfg.trials, n), params.p_max), params)
                p_d = params.gamma * params.sigma2 / g_sd[0]
                saving = np.maximum(p_d - cfg.v_0 - p0, 0.0)
                alpha = saving / (n * p_d)
                rows.append((dist, n, dest, float(alpha.mean()), float(p0.mean()), p_d))
    return rows


def _alpha_minmax(cfg):
    return ResultTable(("distance_m", "n_relays", "dest_m", "alpha", "p0_w"), [r[:5] for r in _arc_rows(cfg)])


def _p0_minmax(cfg):
    return ResultTable(("distance_m", "n_relays", "dest_m", "p0_w", "p_d_w"),
                       [(d, n, dst, p0, pd) for d, n, dst, _, p0, pd in _arc_rows(cfg)])


# --- two boundary nodes under average fairness (Figs. 6 and 7) -----------

def _average_rows(cfg: ExperimentConfig) -> list:
    g = cfg.geometry
    src = _point("geometry.backbone", g["backbone"])
    dst = _point("geometry.destination", g["destination"])
    rows = []
    for x1 in _floats("geometry.b1_x", g["b1_x"]):
        for x2 in _floats("geometry.b2_x", g["b2_x"]):
            inst = CooperationInstance(src, dst, [(x1, 0.0), (x2, 0.0)], params=cfg.radio)
            if cfg.v_0 > 0:
                try:
                    alpha = monopoly_alpha(inst, MonopolyConfig(cfg.v_0, "average"))
                except NoCoalition:
                    alpha = np.zeros(2)
            else:
                alpha = average_alpha(inst)
            rows.append((x1, x2, float(alpha[0]), float(alpha[1]), inst.p0_grand, inst.p_d))
    return rows


def _alpha_average(cfg):
    return ResultTable(("b1_x_m", "b2_x_m", "alpha_1", "alpha_2"), [r[:4] for r in _average_rows(cfg)])


def _p0_average(cfg):
    return ResultTable(("b1_x_m", "b2_x_m", "p0_w", "p_d_w"), [(a, b, p0, pd) for a, b, _, _, p0, pd in _average_rows(cfg)])


# --- two backbones competing for two boundary nodes (Figs. 8 and 9) ------

_SCENARIOS = (("(2,1)", 0, (1,)), ("(2,2)", 1, (1,)), ("(1,1)", 0, (0,)), ("(1,2)", 1, (0,)),
              ("([1;2],1)", 0, (0, 1)), ("([1;2],2)", 1, (0, 1)))


def _market_instances(cfg: ExperimentConfig):
    g = cfg.geometry
    dst = _point("geometry.destination", g["destination"])
    bb = [(_point("geometry.backbone1", g["backbone1"]), dst), (_point("geometry.backbone2", g["backbone2"]), dst)]
    b1 = _point("geometry.b1", g["b1"])
    x2 = _floats("geometry.b2_x", g["b2_x"])[0]
    for y in _floats("geometry.b2_y", g["b2_y"]):
        yield y, MarketInstance(bb, [b1, (x2, y)], params=cfg.radio)


def _scenario_alpha(inst: MarketInstance, m: int, subset) -> float:
    """Per-node break-even offer; a pair splits the joint saving equally."""
    if len(subset) == 1:
        return break_even_offer(inst, m, subset, subset[0])
    return max(inst.p_d[m] - inst.p0(m, subset), 0.0) / (len(subset) * inst.p_d[m])


def _alpha_market(cfg):
    rows = []
    for y, inst in _market_instances(cfg):
        for label, m, subset in _SCENARIOS:
            rows.append((y, label, "", "", _scenario_alpha(inst, m, subset)))
        out = market_equilibrium(inst, cfg.delta)
        for i in range(inst.n_boundaries):
            m = int(out.assignment[i])
            rows.append((y, "equilibrium", i + 1, m + 1 if m >= 0 else 0, out.winning_offer(i)))
    return ResultTable(("b2_y_m", "scenario", "boundary", "backbone", "alpha"), rows)


def _p0_market(cfg):
    rows = []
    for y, inst in _market_instances(cfg):
        for label, m, subset in _SCENARIOS:
            rows.append((y, label, m + 1, inst.p0(m, subset), float(inst.p_d[m])))
        out = market_equilibrium(inst, cfg.delta)
        for m in range(inst.n_backbones):
            rows.append((y, "equilibrium", m + 1, float(out.p0[m]), float(inst.p_d[m])))
    return ResultTable(("b2_y_m", "scenario", "backbone", "p0_w", "p_d_w"), rows)


# --- network experiments (Figs. 10 and 11) -------------------------------

def _boundary_prob(cfg):
    g = cfg.geometry
    n = _ints("geometry.n_nodes", g["n_nodes"])[0]
    spacing = _floats("geometry.spacing_m", g["spacing_m"])[0]
    rows = []
    for k in _ints("geometry.destinations", g["destinations"]):
        if not 1 <= k < n:
            raise ConfigError("geometry.destinations", f"need 1 <= destinations < {n}")
        prob = boundary_probability(Linear(n, spacing), k, cfg.trials, cfg.seed, cfg.radio)
        rows += [(idx + 1, k, float(p)) for idx, p in enumerate(prob)]
    return ResultTable(("node_index", "destinations", "probability"), rows)


def _connectivity(cfg):
    g = cfg.geometry
    mode = g["fairness"].strip()
    if mode not in ("minmax", "average", "market"):
        raise ConfigError("geometry.fairness", f"unknown fairness mode {mode!r}")
    cells = connectivity_stats(
        _ints("geometry.n_nodes", g["n_nodes"]),
        _floats("geometry.sides_m", g["sides_m"]),
        cfg.trials,
        cfg.seed,
        mode,
        cfg.radio,
        cfg.game,
    )
    rows = []
    for c in cells:
        rows.append((c.n_nodes, c.side, "repeated", c.repeated, c.repeated_se, c.isolated, c.trials))
        rows.append((c.n_nodes, c.side, "coalition", c.coalition, c.coalition_se, c.isolated, c.trials))
    return ResultTable(("n_nodes", "b_m", "mode", "unconnectivity", "std_err", "isolated_fraction", "trials"), rows)


EXPERIMENTS = {
    "alpha_minmax": _Experiment(_alpha_minmax, _ARC, 1000, "min-max alpha vs relay distance"),
    "p0_minmax": _Experiment(_p0_minmax, _ARC, 1000, "backbone power under min-max"),
    "alpha_average": _Experiment(_alpha_average, _AVERAGE, 1, "Shapley alpha for two boundary nodes"),
    "p0_average": _Experiment(_p0_average, _AVERAGE, 1, "backbone power under average fairness"),
    "alpha_market": _Experiment(_alpha_market, _MARKET, 1, "market offers and break-evens"),
    "p0_market": _Experiment(_p0_market, _MARKET, 1, "backbone power under market fairness"),
    "boundary_prob": _Experiment(
        _boundary_prob, {"n_nodes": "50", "spacing_m": "100", "destinations": "1,5"}, 1000,
        "boundary probability on a line",
    ),
    "connectivity": _Experiment(
        _connectivity,
        {"n_nodes": "100,500", "sides_m": "500,1000,1500,2000,2500", "fairness": "minmax"},
        200,
        "un-connectivity with and without coalitions",
    ),
}


def _experiment(name: str) -> _Experiment:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise UnknownExperiment(name) from None


def load_config(name: str, text: str = "", overrides=()) -> ExperimentConfig:
    """Parse INI ``text`` for experiment ``name``.

    ``overrides`` are ``section.key=value`` strings applied after the file.
    """
    exp = _experiment(name)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError("<file>", str(err).splitlines()[0]) from None
    for item in overrides:
        key, sep, value = item.partition("=")
        sec, dot, opt = key.strip().partition(".")
        if not sep or not dot or not opt:
            raise ConfigError(item, "override must look like section.key=value")
        if not parser.has_section(sec):
            parser.add_section(sec)
        parser.set(sec, opt, value.strip())

    defaults = {
        "radio": RADIO_DEFAULTS,
        "game": GAME_DEFAULTS,
        "geometry": exp.geometry,
        "run": {**RUN_DEFAULTS, "trials": str(exp.trials)},
    }
    merged = {}
    for sec in parser.sections():
        if sec not in defaults:
            raise ConfigError(sec, "unknown section")
    for sec, base in defaults.items():
        values = dict(base)
        if parser.has_section(sec):
            for opt, value in parser.items(sec):
                if opt not in base:
                    raise ConfigError(f"{sec}.{opt}", f"unknown key for experiment {name!r}")
                values[opt] = value
        merged[sec] = values

    r = merged["radio"]
    try:
        radio = RadioParams(
            kappa=_number(r, "radio", "kappa"),
            sigma2=float(dbm_to_watts(_number(r, "radio", "sigma2_dbm"))),
            gamma=float(db_to_linear(_number(r, "radio", "gamma_db"))),
            p_max=float(dbm_to_watts(_number(r, "radio", "p_max_dbm"))),
        )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError("radio", str(err)) from None
    gm = merged["game"]
    try:
        game = RepeatedGameParams(
            beta=_number(gm, "game", "beta"),
            forward_cost=_number(gm, "game", "c"),
            forward_benefit=_number(gm, "game", "b"),
        )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError("game", str(err)) from None
    v_0 = _number(gm, "game", "v_0")
    delta = _number(gm, "game", "delta")
    if v_0 < 0:
        raise ConfigError("game.v_0", "must be non-negative")
    if not 0 < delta < 1:
        raise ConfigError("game.delta", "must lie in (0, 1)")
    run = merged["run"]
    trials, seed = _number(run, "run", "trials"), _number(run, "run", "seed")
    if trials < 1 or trials != int(trials):
        raise ConfigError("run.trials", "must be a positive integer")
    if seed < 0 or seed != int(seed):
        raise ConfigError("run.seed", "must be a non-negative integer")
    return ExperimentConfig(
        name=name,
        radio=radio,
        game=game,
        v_0=v_0,
        delta=delta,
        geometry=merged["geometry"],
        trials=int(trials),
        seed=int(seed),
        output=run["output"].strip() or None,
    )


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    exp = _experiment(cfg.name)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroSavingWarning)
        return exp.run(cfg)


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def format_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


def emit_csv(table: ResultTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_csv(table))
