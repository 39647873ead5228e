"""Longitudinal car-following model and lead-vehicle acceleration profiles.

The state is ``x = (D, v, vL)``: the gap to the lead vehicle, the ego speed
and the lead speed.  The ego executes an acceleration command ``u``::

    dD/dt  = vL - v
    dv/dt  = u - p(v)
    dvL/dt = aL

which is control affine, ``dx/dt = f(x) + g(x) u`` with ``g = (0, 1, 0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "State",
    "ResistanceModel",
    "ConstantSpeed",
    "ConstantJerkStop",
    "PiecewiseAccel",
    "LeadProfile",
    "BrakeBound",
    "control_affine",
    "state_derivative",
    "lead_acceleration",
    "lead_speed",
    "check_brake_bound",
]

G_VECTOR = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class State:
    """Car-following state. Fields may also hold equally shaped arrays."""

    D: float
    v: float
    vL: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.D, self.v, self.vL])):
            raise ValueError(f"state must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.D, self.v, self.vL], dtype=float)

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "State":
        D, v, vL = (float(c) for c in x)
        return cls(D, v, vL)


@dataclass(frozen=True)
class ResistanceModel:
    """Rolling and air resistance ``p(v) = c0 + c2 * v**2``."""

    c0: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.c0 < 0 or self.c2 < 0:
            raise ValueError("resistance coefficients must be nonnegative")

    def __call__(self, v):
        return self.c0 + self.c2 * v * v


def _clamp_stopped(a: float, vL: float) -> float:
    # a stopped lead never reverses
    if vL <= 0.0 and a < 0.0:
        return 0.0
    return a


@dataclass(frozen=True)
class ConstantSpeed:
    v0: float

    def acceleration(self, t: float, vL: float) -> float:
        return 0.0

    def speed(self, t: float) -> float:
        return self.v0

    def kinks(self) -> Tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class ConstantJerkStop:
    """Symmetric two-phase braking to standstill at constant jerk magnitude.

    The lead cruises at ``v0`` until ``t_start``, then applies jerk ``-jerk``
    until its speed halves, and jerk ``+jerk`` until it stops with zero
    acceleration.  Each phase lasts ``sqrt(v0 / jerk)`` seconds.
    """

    v0: float
    jerk: float
    t_start: float = 0.0

    def __post_init__(self):
        if not self.v0 > 0:
            raise ValueError("ConstantJerkStop requires v0 > 0")
        if not 0 < self.jerk <= 10:
            raise ValueError("ConstantJerkStop requires 0 < jerk <= 10")
        if self.t_start < 0:
            raise ValueError("t_start must be nonnegative")

    @property
    def phase_time(self) -> float:
        return math.sqrt(self.v0 / self.jerk)

    @property
    def stop_time(self) -> float:
        return self.t_start + 2.0 * self.phase_time

    def acceleration(self, t: float, vL: float) -> float:
        s = t - self.t_start
        t1 = self.phase_time
        if s <= 0.0 or s >= 2.0 * t1:
            a = 0.0
        elif s < t1:
            a = -self.jerk * s
        else:
            a = -self.jerk * (2.0 * t1 - s)
        return _clamp_stopped(a, vL)

    def speed(self, t: float) -> float:
        s = t - self.t_start
        t1 = self.phase_time
        if s <= 0.0:
            return self.v0
        if s < t1:
            return self.v0 - 0.5 * self.jerk * s * s
        if s < 2.0 * t1:
            tau = 2.0 * t1 - s
            return 0.5 * self.jerk * tau * tau
        return 0.0

    def kinks(self) -> Tuple[float, ...]:
        t1 = self.phase_time
        return (self.t_start, self.t_start + t1, self.t_start + 2.0 * t1)


@dataclass(frozen=True)
class PiecewiseAccel:
    """Acceleration table linearly interpolated in time.

    Values are held constant outside the table.  Once the lead speed reaches
    zero the acceleration is zero, so a stopped lead stays stopped.

    Args:
        breakpoints: ``(time, accel)`` pairs with strictly increasing times.
        v0: Lead speed at ``t = 0``.
    """

    breakpoints: Tuple[Tuple[float, float], ...]
    v0: float = 0.0

    def __post_init__(self):
        bps = tuple((float(t), float(a)) for t, a in self.breakpoints)
        if not bps:
            raise ValueError("PiecewiseAccel needs at least one breakpoint")
        times = [t for t, _ in bps]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("breakpoint times must be strictly increasing")
        if self.v0 < 0:
            raise ValueError("v0 must be nonnegative")
        object.__setattr__(self, "breakpoints", bps)

    def _table_accel(self, t: float) -> float:
        times, accels = zip(*self.breakpoints)
        return float(np.interp(t, times, accels))

    def acceleration(self, t: float, vL: float) -> float:
        if vL <= 0.0:
            return 0.0
        return self._table_accel(t)

    def speed(self, t: float) -> float:
        """Exact integral of the table (piecewise quadratic), clamped at zero."""
        knots = [0.0] + [bt for bt, _ in self.breakpoints if 0.0 < bt < t] + [t]
        v = self.v0
        if v <= 0.0:
            return 0.0
        for t0, t1 in zip(knots, knots[1:]):
            h = t1 - t0
            if h <= 0:
                continue
            a0, a1 = self._table_accel(t0), self._table_accel(t1)
            # v(s) = v + a0 s + (a1 - a0) s^2 / (2h) on [0, h]
            end = v + 0.5 * (a0 + a1) * h
            lowest = end
            if a1 != a0:
                s_star = -a0 * h / (a1 - a0)
                if 0.0 < s_star < h:
                    lowest = min(lowest, v + a0 * s_star + 0.5 * (a1 - a0) * s_star**2 / h)
            if lowest <= 0.0:
                return 0.0
            v = end
        return v

    def kinks(self) -> Tuple[float, ...]:
        return tuple(t for t, _ in self.breakpoints if t >= 0)


LeadProfile = Union[ConstantSpeed, ConstantJerkStop, PiecewiseAccel]


class BrakeBound:
    """Class-K bound ``gamma`` on lead braking, ``aL >= -gamma(vL)``.

    Defaults to ``gamma(r) = sqrt(20 r)``.  Negative arguments evaluate as 0.
    """

    def __init__(self, fn: Callable | None = None, coeff: float = 20.0):
        self.coeff = coeff
        self._fn = fn
        grid = np.linspace(0.0, 50.0, 501)
        vals = np.asarray(self(grid), dtype=float)
        if vals[0] != 0.0 or np.any(np.diff(vals) <= 0):
            raise ValueError("brake bound must vanish at 0 and be strictly increasing")

    @classmethod
    def sqrt(cls, coeff: float = 20.0) -> "BrakeBound":
        if coeff <= 0:
            raise ValueError("coeff must be positive")
        return cls(coeff=coeff)

    def __call__(self, r):
        if self._fn is not None:
            return self._fn(np.maximum(r, 0.0))
        return np.sqrt(self.coeff * np.maximum(r, 0.0))

    def __repr__(self):
        if self._fn is not None:
            return f"BrakeBound({self._fn!r})"
        return f"BrakeBound.sqrt({self.coeff!r})"


def control_affine(state: State, resistance: ResistanceModel, aL: float):
    """Return the drift ``f`` and input direction ``g`` at ``state``."""
    f = np.array([state.vL - state.v, -resistance(state.v), aL], dtype=float)
    return f, G_VECTOR.copy()


def state_derivative(state: State, u: float, resistance: ResistanceModel, aL: float) -> np.ndarray:
    f, g = control_affine(state, resistance, aL)
    return f + g * u


def lead_acceleration(profile: LeadProfile, t: float, vL: float) -> float:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return profile.acceleration(t, vL)


def lead_speed(profile: LeadProfile, t: float) -> float:
    """Lead speed at time ``t`` when the profile is followed from ``t = 0``."""
    return profile.speed(t)


def check_brake_bound(profile: LeadProfile, bound: BrakeBound, dt: float, horizon: float) -> float:
    """Worst value of ``aL(t) + gamma(vL(t))`` over sampled times.

    Samples lie on a uniform grid of spacing ``dt`` over ``[0, horizon]``,
    plus the profile's own switching times.  A nonnegative result means the
    profile respects the braking bound at every sample.
    """
    if dt <= 0 or horizon <= 0:
        raise ValueError("dt and horizon must be positive")
    n = int(math.floor(horizon / dt + 1e-9))
    times = np.concatenate([dt * np.arange(n + 1), [k for k in profile.kinks() if k <= horizon]])
    worst = math.inf
    for t in times:
        vL = profile.speed(t)
        worst = min(worst, profile.acceleration(t, vL) + float(bound(vL)))
    return worst
