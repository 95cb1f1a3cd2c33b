import subprocess
import sys

import numpy as np
import pytest

from packet_coalitions.cli import main
from packet_coalitions.errors import ConfigError, UnknownExperiment
from packet_coalitions.experiments import (
    EXPERIMENTS,
    ResultTable,
    emit_csv,
    format_csv,
    load_config,
    run_experiment,
)


def test_defaults_convert_units_once():
    cfg = load_config("alpha_minmax")
    assert cfg.radio.p_max == pytest.approx(0.01)
    assert cfg.radio.sigma2 == pytest.approx(1e-9)
    assert cfg.radio.gamma == pytest.approx(10.0)
    assert cfg.trials == 1000 and cfg.seed == 0 and cfg.delta == 1e-4


def test_overrides_and_file_values():
    text = "[radio]\ngamma_db = 20\n[run]\ntrials = 7\n"
    cfg = load_config("alpha_minmax", text, ["run.seed=5", "geometry.relays=2"])
    assert cfg.radio.gamma == pytest.approx(100.0)
    assert cfg.trials == 7 and cfg.seed == 5
    assert cfg.geometry["relays"] == "2"


@pytest.mark.parametrize(
    "text,overrides,key",
    [
        ("[radio]\nkappa = x\n", [], "radio.kappa"),
        ("", ["radio.nope=1"], "radio.nope"),
        ("[extra]\na = 1\n", [], "extra"),
        ("", ["run.trials=0"], "run.trials"),
        ("", ["game.delta=2"], "game.delta"),
        ("", ["novalue"], "novalue"),
        ("", ["game.beta=1.5"], "game"),
    ],
)
def test_config_errors_name_the_key(text, overrides, key):
    with pytest.raises(ConfigError) as err:
        load_config("alpha_minmax", text, overrides)
    assert err.value.key == key


def test_unknown_experiment():
    with pytest.raises(UnknownExperiment):
        load_config("fig99")


def test_csv_format(tmp_path):
    empty = ResultTable(("a", "b"))
    assert format_csv(empty) == "a,b\n"
    t = ResultTable(("x", "y"), [(1, 0.1 + 0.2), ("s", 1e-20)])
    text = format_csv(t)
    assert text == "x,y\n1,0.3\ns,1e-20\n"
    path = tmp_path / "t.csv"
    emit_csv(t, path)
    first = path.read_bytes()
    emit_csv(t, path)
    assert path.read_bytes() == first and first.count(b"\n") == 3
    with pytest.raises(ValueError):
        ResultTable(("a",), [(1, 2)])


def test_alpha_minmax_columns_and_sweep():
    cfg = load_config("alpha_minmax", "", ["run.trials=20", "geometry.relays=1", "geometry.destinations=100"])
    table = run_experiment(cfg)
    assert table.columns == ("distance_m", "n_relays", "dest_m", "alpha", "p0_w")
    assert [r[0] for r in table.rows] == [float(d) for d in range(5, 101, 5)]


def test_average_experiment_crossover():
    cfg = load_config("alpha_average", "", ["geometry.b1_x=20", "geometry.b2_x=20"])
    (row,) = run_experiment(cfg).rows
    assert row[2] == pytest.approx(row[3], abs=1e-12)


def test_market_experiment_rows():
    cfg = load_config("alpha_market", "", ["geometry.b2_y=-50", "game.delta=1e-3"])
    rows = run_experiment(cfg).rows
    assert [r[1] for r in rows[:6]] == ["(2,1)", "(2,2)", "(1,1)", "(1,2)", "([1;2],1)", "([1;2],2)"]
    eq = [r for r in rows if r[1] == "equilibrium"]
    assert len(eq) == 2 and all(r[3] in (0, 1, 2) for r in eq)


def test_p0_market_and_boundary_prob_run():
    cfg = load_config("p0_market", "", ["geometry.b2_y=0", "game.delta=1e-3"])
    assert len(run_experiment(cfg).rows) == 8
    cfg = load_config("boundary_prob", "", ["run.trials=5", "geometry.n_nodes=8", "geometry.destinations=1"])
    rows = run_experiment(cfg).rows
    assert len(rows) == 8 and rows[0][2] == 1.0


def test_connectivity_rows():
    cfg = load_config("connectivity", "", ["run.trials=3", "geometry.n_nodes=20", "geometry.sides_m=300"])
    table = run_experiment(cfg)
    assert [r[2] for r in table.rows] == ["repeated", "coalition"]
    with pytest.raises(ConfigError):
        run_experiment(load_config("connectivity", "", ["geometry.fairness=greedy"]))


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_every_experiment_is_reproducible(name):
    small = {
        "alpha_minmax": ["run.trials=10", "geometry.distances=5,50"],
        "p0_minmax": ["run.trials=10", "geometry.distances=5,50"],
        "alpha_average": ["geometry.b2_x=5,60"],
        "p0_average": ["geometry.b2_x=5,60"],
        "alpha_market": ["geometry.b2_y=-20,20", "game.delta=1e-3"],
        "p0_market": ["geometry.b2_y=-20,20", "game.delta=1e-3"],
        "boundary_prob": ["run.trials=10"],
        "connectivity": ["run.trials=3", "geometry.n_nodes=30", "geometry.sides_m=400,800"],
    }[name]
    a = format_csv(run_experiment(load_config(name, "", small + ["run.seed=9"])))
    b = format_csv(run_experiment(load_config(name, "", small + ["run.seed=9"])))
    assert a == b


def test_cli_main(tmp_path, capsys):
    out = tmp_path / "a.csv"
    cfg = tmp_path / "c.ini"
    cfg.write_text("[run]\ntrials = 5\n[geometry]\ndistances = 5,10\nrelays = 1\ndestinations = 100\n")
    assert main(["alpha_minmax", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "distance_m,n_relays,dest_m,alpha,p0_w"
    assert main(["fig99"]) == 2
    assert "unknown experiment" in capsys.readouterr().err
    assert main(["alpha_minmax", "--set", "radio.kappa=abc"]) == 2
    assert main(["alpha_minmax", "--config", str(tmp_path / "missing.ini")]) == 2


def test_cli_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "packet_coalitions", "alpha_average", "--set", "geometry.b2_x=5"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout.startswith("b1_x_m,b2_x_m,alpha_1,alpha_2\n")
    help_text = subprocess.run(
        [sys.executable, "-m", "packet_coalitions", "--help"], capture_output=True, text=True, check=True
    ).stdout
    assert all(name in help_text for name in EXPERIMENTS)
