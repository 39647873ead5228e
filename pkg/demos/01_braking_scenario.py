"""
Braking lead, three controllers
===============================

A lead vehicle cruising at 15 m/s brakes to a stop with limited jerk. The
follower starts at its cruise-control equilibrium 30 m behind. We compare the
nominal controller with two gain sets, then put the safety filter on the
weaker one.
"""

# %%
# Two gain sets share A = 0.4 and differ only in how strongly they track the
# lead's speed.
from safeccc import P_GAINS, Q_GAINS, Controller, default_braking_scenario, monitor, run

runs = {
    "nominal P": Controller("nominal", P_GAINS),
    "nominal Q": Controller("nominal", Q_GAINS),
    "filtered Q": Controller("filtered", Q_GAINS),
}

# %%
# The headway measure hTH is positive while the follower keeps at least the
# target time gap. The nominal Q run drops below zero.
for name, ctrl in runs.items():
    s = monitor(run(default_braking_scenario(ctrl)))
    vt = s.violation_time["hTH"]
    print(f"{name:>10}: min hTH = {s.min_h['hTH']:7.3f}  "
          f"violation {'none' if vt is None else f'at {vt:.2f} s'}  "
          f"filter active {100 * s.filter_active_fraction:4.1f}% of samples")

# %%
# The filter only steps in briefly. Away from the boundary the applied input
# equals the cruise controller's.
tr = run(default_braking_scenario(runs["filtered Q"]))
active = tr["u_app"] != tr["u_des"]
print(f"filter engaged between t = {tr['t'][active].min():.2f} s and {tr['t'][active].max():.2f} s")
print(f"largest correction: {abs(tr['u_app'] - tr['u_des']).max():.3f} m/s^2")
