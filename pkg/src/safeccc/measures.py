"""Distance, time-headway and time-to-conflict safety measures.

All three are affine in the state::

    h_D   = D - D_sf
    h_TH  = kbar_TH  (D - D_sf) - v
    h_TTC = kbar_TTC (D - D_sf) + vL - v

with ``kbar = 1 / T`` for the headway ``T_h`` and conflict time ``T_c``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cbf import BarrierEvaluation, ClassKe, LieDerivatives, Linear
from .vehicle import ResistanceModel, State

__all__ = [
    "SafetyParams",
    "MeasureKind",
    "SafetyMeasure",
    "evaluate",
    "gradient",
    "lie_derivatives",
    "safe_input_th",
    "safe_input_ttc",
]


@dataclass(frozen=True)
class SafetyParams:
    D_sf: float = 1.0
    kappa_bar_th: float = 0.6
    kappa_bar_ttc: float = 0.6

    def __post_init__(self):
        if self.D_sf < 0 or self.kappa_bar_th <= 0 or self.kappa_bar_ttc <= 0:
            raise ValueError(f"invalid safety parameters {self}")

    @classmethod
    def from_times(cls, D_sf: float, T_h: float, T_c: float) -> "SafetyParams":
        return cls(D_sf, 1.0 / T_h, 1.0 / T_c)


class MeasureKind(Enum):
    DISTANCE = "hD"
    TIME_HEADWAY = "hTH"
    TIME_TO_CONFLICT = "hTTC"


@dataclass(frozen=True)
class SafetyMeasure:
    kind: MeasureKind
    params: SafetyParams = SafetyParams()


def evaluate(measure: SafetyMeasure, state: State):
    p = measure.params
    gap = state.D - p.D_sf
    if measure.kind is MeasureKind.DISTANCE:
        return gap
    if measure.kind is MeasureKind.TIME_HEADWAY:
        return p.kappa_bar_th * gap - state.v
    return p.kappa_bar_ttc * gap + state.vL - state.v


def gradient(measure: SafetyMeasure) -> np.ndarray:
    """Constant gradient with respect to ``(D, v, vL)``."""
    p = measure.params
    if measure.kind is MeasureKind.DISTANCE:
        return np.array([1.0, 0.0, 0.0])
    if measure.kind is MeasureKind.TIME_HEADWAY:
        return np.array([p.kappa_bar_th, -1.0, 0.0])
    return np.array([p.kappa_bar_ttc, -1.0, 1.0])


def lie_derivatives(
    measure: SafetyMeasure,
    state: State,
    resistance: ResistanceModel = ResistanceModel(),
    aL: float = 0.0,
) -> BarrierEvaluation:
    p = measure.params
    closing = state.vL - state.v
    if measure.kind is MeasureKind.DISTANCE:
        lfh, lgh = closing, 0.0
    elif measure.kind is MeasureKind.TIME_HEADWAY:
        lfh, lgh = p.kappa_bar_th * closing + resistance(state.v), -1.0
    else:
        lfh, lgh = p.kappa_bar_ttc * closing + aL + resistance(state.v), -1.0
    return BarrierEvaluation(
        h=float(evaluate(measure, state)),
        grad=gradient(measure),
        lie=LieDerivatives(float(lfh), np.array([lgh])),
    )


def safe_input_th(
    state: State,
    params: SafetyParams,
    resistance: ResistanceModel = ResistanceModel(),
    alpha: ClassKe = Linear(1.0),
):
    """Largest acceleration keeping ``d/dt h_TH >= -alpha(h_TH)``."""
    kb = params.kappa_bar_th
    h = kb * (state.D - params.D_sf) - state.v
    return kb * (state.vL - state.v) + resistance(state.v) + alpha(h)


def safe_input_ttc(
    state: State,
    params: SafetyParams,
    resistance: ResistanceModel = ResistanceModel(),
    aL=0.0,
    alpha_e: ClassKe = Linear(1.0),
):
    """Largest acceleration keeping ``d/dt h_TTC >= -alpha_e(h_TTC)``."""
    kb = params.kappa_bar_ttc
    h = kb * (state.D - params.D_sf) + state.vL - state.v
    return kb * (state.vL - state.v) + resistance(state.v) + alpha_e(h) + aL
