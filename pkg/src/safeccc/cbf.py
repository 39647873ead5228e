"""Control barrier function machinery for control-affine systems.

For ``dx/dt = f(x) + g(x) u`` and a barrier ``h`` the derivative along the
dynamics is ``hdot = Lfh + Lgh u``.  The safety filter returns the input
closest to a desired one subject to ``hdot >= -alpha(h)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ClassKe",
    "Linear",
    "ScaledSqrt",
    "Custom",
    "LieDerivatives",
    "BarrierEvaluation",
    "h_dot",
    "cbf_condition_holds",
    "filter_closed_form",
    "scalar_safe_input",
    "scalar_filter",
    "extend_cbf",
]

LGH_TOL = 1e-12


class ClassKe:
    """Extended class-K-infinity function ``alpha``."""

    differentiable = False

    def __call__(self, r):
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(ClassKe):
    rate: float = 1.0
    differentiable = True

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("Linear class-K function requires rate > 0")

    def __call__(self, r):
        return self.rate * r


@dataclass(frozen=True)
class ScaledSqrt(ClassKe):
    """``alpha(r) = c * sign(r) * sqrt(|r|)``; not differentiable at 0."""

    c: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("ScaledSqrt requires c > 0")

    def __call__(self, r):
        return self.c * np.sign(r) * np.sqrt(np.abs(r))


class Custom(ClassKe):
    """Wrap a user callable, checking ``alpha(0) = 0`` and monotonicity on a grid."""

    def __init__(self, fn: Callable, differentiable: bool = False, check_range: float = 100.0):
        self.fn = fn
        self.differentiable = differentiable
        grid = np.linspace(-check_range, check_range, 2001)
        vals = np.array([fn(r) for r in grid], dtype=float)
        if fn(0.0) != 0.0 or np.any(np.diff(vals) <= 0):
            raise ValueError("custom alpha must satisfy alpha(0) = 0 and be strictly increasing")

    def __call__(self, r):
        return self.fn(r)

    def __repr__(self):
        return f"Custom({self.fn!r})"


@dataclass(frozen=True)
class LieDerivatives:
    lfh: float
    lgh: np.ndarray

    def __post_init__(self):
        lgh = np.atleast_1d(np.asarray(self.lgh, dtype=float))
        if not (np.isfinite(self.lfh) and np.all(np.isfinite(lgh))):
            raise ValueError("Lie derivatives must be finite")
        object.__setattr__(self, "lgh", lgh)


@dataclass(frozen=True)
class BarrierEvaluation:
    h: float
    grad: np.ndarray
    lie: LieDerivatives


def h_dot(lie: LieDerivatives, u) -> float:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape != lie.lgh.shape:
        raise ValueError(f"input dimension {u.shape} does not match Lgh {lie.lgh.shape}")
    return float(lie.lfh + lie.lgh @ u)


def cbf_condition_holds(ev: BarrierEvaluation, alpha: ClassKe, tol: float = LGH_TOL) -> bool:
    """Pointwise CBF condition: ``sup_u hdot > -alpha(h)``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if np.linalg.norm(ev.lie.lgh) > tol:
        return True
    return bool(ev.lie.lfh > -alpha(ev.h))


def filter_closed_form(kd, ev: BarrierEvaluation, alpha: ClassKe, tol: float = LGH_TOL) -> np.ndarray:
    """Min-norm safety filter, the explicit solution of the single-constraint QP."""
    kd = np.atleast_1d(np.asarray(kd, dtype=float))
    lgh = ev.lie.lgh
    sq = float(lgh @ lgh)
    if np.sqrt(sq) <= tol:
        return kd
    eta = -ev.lie.lfh - float(lgh @ kd) - alpha(ev.h)
    if eta <= 0:
        return kd
    return kd + eta * lgh / sq


def scalar_safe_input(lie: LieDerivatives, h: float, alpha: ClassKe, tol: float = LGH_TOL) -> float:
    """Input at which ``hdot = -alpha(h)`` for a single-input system."""
    if lie.lgh.size != 1:
        raise ValueError("scalar_safe_input needs a single input")
    lgh = float(lie.lgh[0])
    if abs(lgh) <= tol:
        raise ZeroDivisionError("Lgh vanishes; the safe input is undefined")
    return -(lie.lfh + alpha(h)) / lgh


def scalar_filter(kd: float, ks: float, lgh_sign: int) -> float:
    if lgh_sign < 0:
        return min(kd, ks)
    if lgh_sign > 0:
        return max(kd, ks)
    return kd


def extend_cbf(h: float, lfh: float, alpha: ClassKe) -> float:
    """Extended barrier ``he = Lfh + alpha(h)`` for a relative-degree-two ``h``."""
    if not alpha.differentiable:
        raise ValueError(f"extension needs a continuously differentiable alpha, got {alpha!r}")
    return lfh + alpha(h)
