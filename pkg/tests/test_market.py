import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from packet_coalitions.coopgame import least_core_value
from packet_coalitions.errors import SizeLimit
from packet_coalitions.market import (
    MarketInstance,
    assignment_matrix,
    backbone_utility,
    boundary_choice,
    boundary_choices,
    break_even_offer,
    joint_characteristic,
    market_equilibrium,
    verify_core_empty,
)

DEST = (-50, 0)
# mpmath oracle: break-even offers of backbones (0,-30) and (0,30) for the boundary node at (44,10)
BREAK_EVEN = (0.37317922505500694984, 0.48772555802866709099)


def two_backbones(*boundaries):
    return MarketInstance([((0, -30), DEST), ((0, 30), DEST)], list(boundaries))


def test_break_even_matches_oracle():
    inst = two_backbones((44, 10))
    for m in range(2):
        assert break_even_offer(inst, m, [0], 0) == pytest.approx(BREAK_EVEN[m], rel=1e-9)


def test_break_even_with_commitments():
    inst = two_backbones((44, 10), (44, -20))
    full = (inst.p_d[0] - inst.p0(0, [0, 1])) / inst.p_d[0]
    assert break_even_offer(inst, 0, [0, 1], 0, {1: 0.1}) == pytest.approx(full - 0.1)
    with pytest.raises(ValueError):
        break_even_offer(inst, 0, [1], 0)


def test_boundary_choice_rules():
    offers = np.array([[0.2, 0.3], [0.4, 0.4], [0.0, 0.0]])
    assert boundary_choice(offers, 0) == 1
    assert boundary_choice(offers, 1) == 0
    assert boundary_choice(offers, 2) is None
    assert boundary_choices(offers).tolist() == [1, 0, -1]
    assert assignment_matrix([1, 0, -1], 2).tolist() == [[0, 1], [1, 0], [0, 0]]


def test_equilibrium_single_boundary():
    inst = two_backbones((44, 10))
    out = market_equilibrium(inst, 1e-4)
    assert out.assignment.tolist() == [1]
    assert abs(out.winning_offer(0) - BREAK_EVEN[0]) <= 1e-4
    assert out.backbone_utilities[1] >= -inst.p_d[1]
    assert out.boundary_utilities[0] == pytest.approx(-0.01 / out.winning_offer(0))


def test_equilibrium_rationality_and_no_single_step_gain():
    inst = two_backbones((44, 10), (44, -40))
    out = market_equilibrium(inst, 1e-3)
    for m in range(2):
        base = backbone_utility(inst, m, out.assignment, out.offers)
        assert base >= -inst.p_d[m] - 1e-15
        for i in range(2):
            for step in (-1e-3, 1e-3):
                off = out.offers.copy()
                off[i, m] = max(off[i, m] + step, 0.0)
                u = backbone_utility(inst, m, boundary_choices(off), off)
                assert u <= base + 1e-12
    for hist in out.utility_history:
        assert np.all(hist >= -inst.p_d - 1e-15)


def test_eligibility_mask_blocks_offers():
    inst = MarketInstance([((0, -30), DEST), ((0, 30), DEST)], [(44, 10)], eligible=[[True, False]])
    out = market_equilibrium(inst, 1e-3)
    assert out.assignment.tolist() == [0]
    assert out.offers[0, 1] == 0.0


def test_size_limit():
    many = MarketInstance([((0, k), DEST) for k in range(5)], [(44, 10)])
    with pytest.raises(SizeLimit):
        market_equilibrium(many)


def test_joint_game_single_boundary_closed_form():
    inst = two_backbones((44, 10))
    s = inst.p_d - inst.p0_of[:, 1]
    # time-sharing joint game with one boundary node: eps* = (s_max - s_min) / 4
    assert least_core_value(joint_characteristic(inst)) == pytest.approx(abs(s[1] - s[0]) / 4, rel=1e-7)
    assert verify_core_empty(inst)


def test_symmetric_boundary_leaves_core_nonempty():
    assert not verify_core_empty(two_backbones((44, 0)))


def test_single_backbone_is_never_contested():
    inst = MarketInstance([((0, 0), DEST)], [(44, 10)])
    assert not verify_core_empty(inst)


@settings(max_examples=15, deadline=None)
@given(st.tuples(st.floats(10, 60), st.floats(-50, 50)))
def test_core_empty_for_random_boundaries(pos):
    # on the symmetry axis both backbones save the same and the core is not empty
    assume(abs(pos[1]) > 0.5)
    assert verify_core_empty(two_backbones(pos))


def test_monopoly_offers_sit_at_the_grid_floor():
    inst = MarketInstance([((0, -30), DEST)], [(44, 10), (44, -20)])
    out = market_equilibrium(inst, 1e-3)
    assert np.allclose(out.offers[:, 0], 1e-3)
    assert out.assignment.tolist() == [0, 0]


def test_mirror_symmetric_backbones_tie_to_first():
    inst = two_backbones((44, 0))
    out = market_equilibrium(inst, 1e-3)
    common = break_even_offer(inst, 0, [0], 0)
    assert out.assignment.tolist() == [0]
    assert abs(out.winning_offer(0) - common) <= 1e-3


@pytest.mark.parametrize("y", [-50, -20, 0, 25, 50])
def test_offers_bounded_by_break_even(y):
    inst = two_backbones((44, 10), (44, y))
    out = market_equilibrium(inst, 1e-3)
    for m in range(2):
        for i in range(2):
            assert out.offers[i, m] <= break_even_offer(inst, m, [i], i) + 1e-3 + 1e-12


@pytest.mark.parametrize("y", [-45, -10, 10, 30])
def test_deviation_scan_single_offer(y):
    delta = 1e-3
    inst = two_backbones((44, 10), (44, y))
    out = market_equilibrium(inst, delta)
    grid = np.arange(0, 0.7, delta)
    for m in range(2):
        base = backbone_utility(inst, m, out.assignment, out.offers)
        for i in range(2):
            for a in grid:
                off = out.offers.copy()
                off[i, m] = a
                assert backbone_utility(inst, m, boundary_choices(off), off) <= base + 1e-15


def test_competition_never_lowers_winning_offers():
    rng = np.random.default_rng(11)
    for _ in range(50):
        pos = rng.uniform([10, -50], [60, 50])
        alone = market_equilibrium(MarketInstance([((0, -30), DEST)], [pos]), 1e-3)
        duel = market_equilibrium(two_backbones(pos), 1e-3)
        assert duel.winning_offer(0) >= alone.winning_offer(0)
