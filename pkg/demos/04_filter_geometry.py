"""
The safety filter as a projection
=================================

With a single affine constraint the minimum-norm filter has a closed form:
the desired input is kept when it satisfies the barrier condition, and is
otherwise projected onto the constraint's boundary hyperplane.
"""

# %%
import numpy as np

from safeccc import BarrierEvaluation, LieDerivatives, Linear, filter_closed_form, h_dot

alpha = Linear(1.0)
ev = BarrierEvaluation(h=0.5, grad=np.zeros(3), lie=LieDerivatives(-1.0, np.array([1.0, -2.0])))

# %%
# Constraint: lfh + lgh . u >= -alpha(h), i.e. u1 - 2 u2 >= 0.5.
for kd in ([3.0, 0.0], [0.0, 0.0], [1.0, 1.0]):
    u = filter_closed_form(np.array(kd), ev, alpha)
    print(f"kd = {kd} -> u = {np.round(u, 4)}  hdot + alpha(h) = {h_dot(ev.lie, u) + alpha(ev.h):+.4f}")

# %%
# The correction always points along lgh, so it is the shortest move that
# restores the condition.
kd = np.array([0.0, 0.0])
du = filter_closed_form(kd, ev, alpha) - kd
print("correction parallel to lgh:", np.allclose(np.cross(np.append(du, 0), np.append(ev.lie.lgh, 0)), 0))
