"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even when
output is captured) or directly with ``python tests/test_acceptance.py``.
"""
import sys
import time
import warnings

import numpy as np
import pytest

from packet_coalitions.channel import RadioParams, RelayLink, combined_snr, direct_power, path_gain, solve_source_power
from packet_coalitions.coopgame import CharacteristicFunction, core_contains, kernel_check, shapley, shapley_by_orders
from packet_coalitions.errors import SuperadditivityWarning
from packet_coalitions.experiments import emit_csv, load_config, run_experiment
from packet_coalitions.fairness import (
    CooperationInstance,
    average_alpha,
    build_characteristic,
    minmax_alpha,
    power_savings,
    utilities,
)
from packet_coalitions.market import MarketInstance, break_even_offer, market_equilibrium, verify_core_empty
from packet_coalitions.netsim import connectivity_stats

P = RadioParams()
SEED = 20240607


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def _relays(rng, n, dist):
    out = []
    while len(out) < n:
        p = rng.uniform(-dist, 2 * dist, 2)
        if np.hypot(*p) > 1 and np.hypot(p[0] - dist, p[1]) > 1:
            out.append(tuple(p))
    return out


def _random_instances(count, max_relays, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        dist = rng.uniform(20, 100)
        n = int(rng.integers(1, max_relays + 1))
        yield CooperationInstance((0, 0), (dist, 0), _relays(rng, n, dist))


def test_1_radio_ground_truth(report):
    p100 = direct_power(path_gain(100.0, P), P)
    p50 = direct_power(path_gain(50.0, P), P)
    ok = abs(p100 - 0.01) <= 1e-12 * 0.01 and abs(p50 - 1.25e-3) <= 1e-12 * 1.25e-3
    report(1, "direct power at 100 m and 50 m", ok, f"P(100)={p100!r} P(50)={p50!r}")


def test_2_source_power_solver(report):
    rng = np.random.default_rng(SEED + 2)
    start = time.perf_counter()
    worst, strict = 0.0, True
    for _ in range(1000):
        d_sd, d_sr, d_rd = rng.uniform(5, 150, 3)
        g_sd, g_sr, g_rd = path_gain(d_sd, P), path_gain(d_sr, P), path_gain(d_rd, P)
        link = RelayLink(P.p_max, g_sr, g_rd)
        sol = solve_source_power(g_sd, [link], P)
        worst = max(worst, abs(combined_snr(sol.p0, g_sd, [link], P) - P.gamma) / P.gamma)
        strict &= sol.p0 < direct_power(g_sd, P)
    elapsed = time.perf_counter() - start
    report(2, "solved P_0 hits gamma and stays below P_d", worst <= 1e-6 and strict and elapsed < 5,
           f"max rel SNR error {worst:.2e}, strict={strict}, {elapsed:.2f} s")


def test_3_minmax_consistency(report):
    eq_err = mu_err = 0.0
    core_fail = kernel_fail = total = 0
    for inst in _random_instances(40, 5, SEED + 3):
        res = minmax_alpha(inst)
        eq_err = max(eq_err, abs(res.alpha.sum() - inst.saving / inst.p_d))
        mu_err = max(mu_err, float(np.max(np.abs(utilities(inst, res.alpha)[1:] / res.mu - 1))))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SuperadditivityWarning)
            v = build_characteristic(inst)
        # backbone keeps saving - sum(alpha) * P_d (zero under equality), relays get alpha * P_d
        payoff = np.concatenate([[inst.saving - res.alpha.sum() * inst.p_d], res.alpha * inst.p_d])
        total += 1
        core_fail += not core_contains(v, payoff)
        n = v.n_players
        kernel_fail += not all(kernel_check(v, payoff, i, j) for i in range(n) for j in range(i + 1, n))
    ok = eq_err <= 1e-9 and mu_err <= 1e-9 and core_fail == 0 and kernel_fail == 0
    report(3, "min-max: alphas use the whole saving, equal utilities, core and kernel", ok,
           f"eq err {eq_err:.1e}, mu rel err {mu_err:.1e}, core fails {core_fail}/{total}, "
           f"kernel fails {kernel_fail}/{total}")


def test_4_shapley_conservation(report):
    cons = match = 0.0
    for inst in _random_instances(200, 5, SEED + 4):
        cons = max(cons, abs(power_savings(inst).sum() - inst.saving))
        relay_game = CharacteristicFunction(inst.n_relays, inst.p_d - inst.p0_of, check=False)
        match = max(match, float(np.max(np.abs(average_alpha(inst) * inst.p_d - shapley(relay_game)))))
    report(4, "Shapley savings sum to the total saving and match coopgame", cons <= 1e-9 and match <= 1e-9,
           f"conservation err {cons:.1e} W, mismatch {match:.1e} W")


def test_5_shapley_oracle(report):
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    corpus = []
    for k in range(50):
        n = int(rng.integers(1, 7))
        if k % 2 and n >= 2:
            inst = CooperationInstance((0, 0), (80, 0), _relays(rng, n - 1, 80))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SuperadditivityWarning)
                corpus.append(build_characteristic(inst))
        else:
            corpus.append(CharacteristicFunction(n, np.concatenate([[0.0], rng.normal(size=(1 << n) - 1)]), check=False))
    for v in corpus:
        worst = max(worst, float(np.max(np.abs(shapley(v) - shapley_by_orders(v)))))
    report(5, "subset-weighted Shapley equals order enumeration (50 games)", worst <= 1e-12, f"max diff {worst:.1e}")


def test_6_joint_core_empty(report):
    rng = np.random.default_rng(SEED + 6)
    results = []
    for _ in range(20):
        backbones = [(tuple(rng.uniform(-40, 40, 2)), tuple(rng.uniform(-100, 100, 2))) for _ in range(2)]
        boundaries = [tuple(rng.uniform(-60, 60, 2)) for _ in range(int(rng.integers(1, 4)))]
        results.append(verify_core_empty(MarketInstance(backbones, boundaries)))
    report(6, "joint market game has an empty core (20 random M=2 instances)", all(results),
           f"{sum(results)}/20 empty")


def test_7_alpha_vs_distance(report):
    cfg = load_config("alpha_minmax", "", ["geometry.distances=5,50,95", "geometry.relays=1",
                                            "geometry.destinations=100", "run.trials=1000"])
    alpha = [r[3] for r in run_experiment(cfg).rows]
    ok = alpha[0] >= 0.95 and alpha[0] > alpha[1] > alpha[2]
    report(7, "min-max alpha near 1/N at 5 m and decreasing (dest 100 m, N=1)", ok,
           "alpha(5,50,95 m) = " + ", ".join(f"{a:.4f}" for a in alpha))


def test_8_average_coincident(report):
    diffs = []
    for x in (20.0, 50.0):
        a = average_alpha(CooperationInstance((0, 0), (-50, 0), [(x, 0), (x, 0)]))
        diffs.append(abs(a[0] - a[1]))
    report(8, "average alpha equal when boundary nodes coincide", max(diffs) <= 1e-6, f"max diff {max(diffs):.1e}")


def test_9_two_backbone_market(report):
    delta = 1e-4
    inst = MarketInstance([((0, -30), (-50, 0)), ((0, 30), (-50, 0))], [(44, 10)])
    be = [break_even_offer(inst, m, [0], 0) for m in range(2)]
    out = market_equilibrium(inst, delta)
    winner = int(out.assignment[0])
    loser = 1 - winner
    ok = winner == int(np.argmax(be)) and abs(out.winning_offer(0) - be[loser]) <= delta
    report(9, "market winner has the larger break-even and pays the loser's", ok,
           f"break-evens {be[0]:.5f}/{be[1]:.5f}, winner {winner + 1} at {out.winning_offer(0):.5f}")


def test_10_boundary_probability(report):
    cfg = load_config("boundary_prob", "", ["run.trials=1000", f"run.seed={SEED}"])
    rows = run_experiment(cfg).rows
    p = {k: np.array([r[2] for r in rows if r[1] == k]) for k in (1, 5)}
    ends = all(p[k][0] == 1.0 and p[k][-1] == 1.0 for k in (1, 5))
    middle = all(p[k][1:-1].min() < min(p[k][0], p[k][-1]) for k in (1, 5))
    order = bool(np.all(p[5][1:-1] <= p[1][1:-1]))
    report(10, "line network: ends always boundary, middle lower, 5 dest <= 1 dest", ends and middle and order,
           f"ends={ends}, middle below={middle}, five<=one={order}, mean middle 1-dest {p[1][1:-1].mean():.4f}")


def test_11_connectivity(report):
    start = time.perf_counter()
    cells = connectivity_stats([100], [500.0, 1000.0, 1500.0], 200, SEED) + connectivity_stats(
        [500], [1500.0, 2000.0, 2500.0], 200, SEED + 1
    )
    elapsed = time.perf_counter() - start
    better = all(c.coalition <= c.repeated for c in cells)
    isolated = all(abs(c.coalition - c.isolated) <= 2 * c.coalition_se for c in cells)
    best = max(c.improvement for c in cells)
    detail = "; ".join(
        f"n={c.n_nodes} B={c.side:g}: rep {c.repeated:.3f} coal {c.coalition:.3f} iso {c.isolated:.3f} "
        f"impr {100 * c.improvement:.0f}%"
        for c in cells
    )
    ok = better and isolated and best >= 0.30 and elapsed < 300
    report(11, "coalitions cut un-connectivity down to the isolated fraction", ok,
           f"{detail}; best improvement {100 * best:.0f}%, {elapsed:.0f} s")


def test_12_determinism(report, tmp_path):
    runs = {
        "alpha_minmax": ["run.trials=200"],
        "alpha_market": ["geometry.b2_y=-30,30", "game.delta=1e-3"],
        "boundary_prob": ["run.trials=100"],
        "connectivity": ["run.trials=10", "geometry.n_nodes=100", "geometry.sides_m=1000"],
    }
    same = []
    for name, sets in runs.items():
        blobs = []
        for k in range(2):
            path = tmp_path / f"{name}_{k}.csv"
            emit_csv(run_experiment(load_config(name, "", sets + ["run.seed=17"])), path)
            blobs.append(path.read_bytes())
        same.append(blobs[0] == blobs[1])
    report(12, "reruns with equal config and seed give byte-identical CSV", all(same),
           ", ".join(f"{n}={'same' if s else 'DIFF'}" for n, s in zip(runs, same)))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
