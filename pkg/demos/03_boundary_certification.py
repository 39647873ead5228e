"""
Certifying a controller on the safe-set boundary
================================================

A controller keeps a set invariant if, on its boundary, it never asks for more
acceleration than the safe input allows. We sample boundary states and look at
the worst margin ks - kd.
"""

# %%
from safeccc import BrakeBound, Gains, certify_boundary, th_safe, ttc_safe

P, Q = Gains(0.4, 0.6, 0.0), Gains(0.4, 0.3, 0.0)
for name, g in (("P", P), ("Q", Q)):
    r = certify_boundary("th", g, samples=10_000, seed=0)
    s = r.argmin_state
    print(f"{name}: chart says {'safe' if th_safe(g) else 'unsafe'}, worst margin {r.worst_margin:+.3f} "
          f"at D = {s.D:.2f}, v = {s.v:.2f}, vL = {s.vL:.2f}")

# %%
# For Q the worst state has the follower at full speed behind a stopped lead.
# That is exactly the situation in the braking scenario.

# %%
# The time-to-conflict check assumes the lead brakes as hard as the bound
# gamma(vL) = sqrt(20 vL) permits.
gamma = BrakeBound.sqrt(20.0)
for g in (Gains(1.2, 0.6, 0.5), Gains(0.2, 0.6, 0.0)):
    r = certify_boundary("ttc", g, gamma=gamma, seed=1)
    print(f"{g}: chart {ttc_safe(g, gamma=gamma)}, worst margin {r.worst_margin:+.3f} over {r.samples} states")
