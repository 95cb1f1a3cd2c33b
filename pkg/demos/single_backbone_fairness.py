# %% [markdown]
# How much forwarding does a boundary node earn by relaying for one backbone?
#
# A backbone at the origin sends to a destination 100 m away. Relays cut the
# power it needs; the saving is what it can pay back as forwarding.

# %%
import numpy as np

from packet_coalitions.fairness import CooperationInstance, average_alpha, minmax_alpha, utilities

inst = CooperationInstance((0, 0), (100, 0), [(50, 0), (30, 20)])
print(f"direct power   {inst.p_d * 1e3:.3f} mW")
print(f"with relays    {inst.p0_grand * 1e3:.3f} mW")

# %% [markdown]
# Min-max fairness splits the saving evenly when relays transmit at the same
# power, so both boundary nodes end up with the same utility.

# %%
mm = minmax_alpha(inst)
print("min-max alpha ", np.round(mm.alpha, 4), " utilities", np.round(utilities(inst, mm.alpha), 5))

# %% [markdown]
# Average fairness pays each relay its expected marginal saving instead, so
# the better-placed relay at the midpoint earns more.

# %%
av = average_alpha(inst)
print("average alpha ", np.round(av, 4), " sum", round(float(av.sum()), 4))

# %% [markdown]
# Closer relays are worth more. Sweep a single relay along the back arc.

# %%
for d in (5, 25, 50, 75, 100):
    one = CooperationInstance((0, 0), (100, 0), [(-d, 0)])
    print(f"relay {d:>3} m behind the backbone: alpha = {minmax_alpha(one).alpha[0]:.4f}")
