# %% [markdown]
# Two backbones compete for the same boundary node.
#
# Each can afford to give up to its break-even offer; the one that gains more
# wins, but only has to match what its rival could afford.

# %%
from packet_coalitions.market import MarketInstance, break_even_offer, market_equilibrium

dest = (-50, 0)
inst = MarketInstance([((0, -30), dest), ((0, 30), dest)], [(44, 10)])
for m in range(2):
    print(f"backbone {m + 1} break-even: {break_even_offer(inst, m, [0], 0):.4f}")

# %%
out = market_equilibrium(inst, delta=1e-4)
m = int(out.assignment[0])
print(f"winner: backbone {m + 1} at alpha = {out.winning_offer(0):.4f} after {out.rounds} rounds")

# %% [markdown]
# With a second boundary node the backbones no longer chase both: each ends up
# with one, paying only the other's marginal valuation.

# %%
for y in (-50, 0, 50):
    two = MarketInstance([((0, -30), dest), ((0, 30), dest)], [(44, 10), (44, y)])
    out = market_equilibrium(two, delta=1e-3)
    print(f"boundary 2 at (44, {y:>3}): assignment {out.assignment + 1}, offers {[out.winning_offer(i) for i in range(2)]}")
