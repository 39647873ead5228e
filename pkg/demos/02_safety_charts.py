"""
Safety charts in the (B, A) plane
=================================

Instead of simulating, we can ask which gains keep the follower inside the
headway safe set for every lead behaviour up to a speed bound. The answer is
a V-shaped region with its vertex at B = kbar.
"""

# %%
import numpy as np

from safeccc import ChartSpec, minimal_safe_a, rasterize

grid = rasterize(ChartSpec("th", v_bar=15.0, B_range=(0.0, 1.2, 0.1), A_range=(0.0, 3.0, 0.25)))

# %%
# Rows are A from top to bottom and columns are B. A '#' marks a safe cell.
print("   A \\ B " + "".join(f"{b:4.1f}" for b in grid.B))
for a, row in zip(grid.A[::-1], grid.member[::-1]):
    print(f"{a:8.2f} " + "".join("   #" if m else "   ." for m in row))

# %%
# A lower speed bound enlarges the region, because fewer extreme states need
# to be handled.
for v_bar in (5.0, 15.0, 30.0):
    g = rasterize(ChartSpec("th", v_bar=v_bar))
    print(f"v_bar = {v_bar:4.0f}: {g.member.mean():.1%} of the grid is safe")

# %%
# The time-to-conflict chart also depends on the lead acceleration gain C.
# Feeding forward more of the lead's braking lowers the gain A that is needed.
for C in (0.0, 0.25, 0.5, 0.75):
    print(f"C = {C:4.2f}: minimal A at B = 0.6 is {minimal_safe_a('ttc', 0.6, C):.4f}")
print("closed form at C = 0:", np.sqrt(5 / 2.4))
