"""Nominal connected cruise control law with range and speed policies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .vehicle import State

__all__ = ["Gains", "PolicyParams", "range_policy", "speed_policy", "ccc_desired"]


@dataclass(frozen=True)
class Gains:
    """Feedback gains on distance (A), speed difference (B), lead acceleration (C)."""

    A: float
    B: float
    C: float = 0.0

    def __post_init__(self):
        if self.A < 0 or self.B < 0 or self.C < 0:
            raise ValueError(f"gains must be nonnegative, got {self}")


@dataclass(frozen=True)
class PolicyParams:
    D_st: float = 5.0
    kappa: float = 0.6
    v_max: float = 15.0

    def __post_init__(self):
        if self.D_st < 0 or self.kappa <= 0 or self.v_max <= 0:
            raise ValueError(f"invalid policy parameters {self}")


def range_policy(D, p: PolicyParams):
    """Desired speed for gap ``D``: zero at ``D_st``, slope ``kappa``, capped at ``v_max``."""
    return np.minimum(p.kappa * (D - p.D_st), p.v_max)


def speed_policy(vL, p: PolicyParams):
    return np.minimum(vL, p.v_max)


def ccc_desired(state: State, aL, gains: Gains, p: PolicyParams):
    """Desired acceleration ``A (V(D) - v) + B (W(vL) - v) + C aL``.

    Works elementwise when the state fields are arrays.
    """
    v = state.v
    return (
        gains.A * (range_policy(state.D, p) - v)
        + gains.B * (speed_policy(state.vL, p) - v)
        + gains.C * aL
    )
