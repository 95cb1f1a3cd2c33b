# %% [markdown]
# Boundary nodes forward for no one, so nobody has a reason to forward for them.
#
# Four nodes on a line, 100 m apart. The middle nodes need each other; the
# ends only need the middle.

# %%
import numpy as np

from packet_coalitions.netsim import Linear, TrafficMatrix, build_topology, connectivity_stats, run_protocol

line = build_topology(Linear(4, 100))
traffic = TrafficMatrix.from_lists([[2, 3], [3], [0], [0, 1]])

alone = run_protocol(line, traffic, coalitions=False)
print("roles:", [r.value for r in alone.roles])
print("delivered without coalitions:", {f: ok for f, ok in alone.delivered.items()})

# %% [markdown]
# Let the end nodes relay for their neighbours' transmissions and get
# forwarding in return.

# %%
helped = run_protocol(line, traffic, "minmax")
for c in helped.coalitions:
    print(f"boundary {c.boundaries} relays for link {c.link}, alpha = {np.round(c.alphas, 3)}")
print("all delivered:", all(helped.delivered.values()))

# %% [markdown]
# On random square networks, only isolated nodes are left out once coalitions
# are allowed.

# %%
for cell in connectivity_stats([100], [500.0, 1000.0, 1500.0], trials=20, seed=1):
    print(f"B = {cell.side:>6.0f} m  repeated only {cell.repeated:.3f}  with coalitions {cell.coalition:.3f}"
          f"  isolated {cell.isolated:.3f}")
