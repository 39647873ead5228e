"""Fixed-step RK4 simulation of the closed loop and trajectory monitoring."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .cbf import ClassKe, Linear
from .ccc import Gains, PolicyParams
from .measures import SafetyParams
from .vehicle import ConstantJerkStop, LeadProfile, ResistanceModel, State

__all__ = [
    "P_GAINS",
    "Q_GAINS",
    "Controller",
    "Scenario",
    "Trajectory",
    "MonitorSummary",
    "IntegrationError",
    "default_braking_scenario",
    "control",
    "step",
    "run",
    "monitor",
]

P_GAINS = Gains(0.4, 0.6, 0.0)
Q_GAINS = Gains(0.4, 0.3, 0.0)

MODES = ("nominal", "filtered", "safe_only")
MEASURES = ("hD", "hTH", "hTTC")
COLUMNS = ("t", "D", "v", "vL", "aL", "u_des", "u_app", "ks", "hD", "hTH", "hTTC")


class IntegrationError(RuntimeError):
    def __init__(self, t: float, message: str = "non-finite state"):
        super().__init__(f"{message} at t = {t:.6g} s")
        self.t = t


@dataclass(frozen=True)
class Controller:
    """Closed-loop input selection.

    ``nominal`` applies the CCC law, ``filtered`` applies ``min(k_d, k_s)``
    for the chosen criterion, ``safe_only`` applies ``k_s``.  ``u_limit``
    clips the applied input symmetrically; clipping voids the safety
    guarantee of the filter.
    """

    mode: str = "nominal"
    gains: Gains = P_GAINS
    criterion: str = "th"
    alpha: ClassKe = Linear(1.0)
    alpha_e: ClassKe = Linear(1.0)
    u_limit: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown controller mode {self.mode!r}")
        if self.criterion not in ("th", "ttc"):
            raise ValueError(f"unknown filter criterion {self.criterion!r}")
        if self.u_limit is not None and self.u_limit <= 0:
            raise ValueError("u_limit must be positive")


@dataclass(frozen=True)
class Scenario:
    x0: State
    lead: LeadProfile
    duration: float = 30.0
    dt: float = 0.01
    controller: Controller = Controller()
    resistance: ResistanceModel = ResistanceModel()
    policy: PolicyParams = PolicyParams()
    safety: SafetyParams = SafetyParams()

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must be at least one step")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9))


def default_braking_scenario(controller: Controller = Controller(), **overrides) -> Scenario:
    """Lead at 15 m/s brakes to a stop from t = 1 s; ego starts at CCC equilibrium."""
    kwargs = dict(
        x0=State(30.0, 15.0, 15.0),
        lead=ConstantJerkStop(v0=15.0, jerk=2.0, t_start=1.0),
        duration=30.0,
        dt=0.01,
        controller=controller,
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)


def control(sc: Scenario, D: float, v: float, vL: float, aL: float):
    """Return ``(u_desired, u_applied, k_s)`` at a state, as plain floats."""
    ctl, pol, saf = sc.controller, sc.policy, sc.safety
    g = ctl.gains
    p = sc.resistance.c0 + sc.resistance.c2 * v * v
    V = min(pol.kappa * (D - pol.D_st), pol.v_max)
    W = min(vL, pol.v_max)
    kd = g.A * (V - v) + g.B * (W - v) + g.C * aL
    if ctl.criterion == "th":
        kb = saf.kappa_bar_th
        ks = kb * (vL - v) + p + ctl.alpha(kb * (D - saf.D_sf) - v)
    else:
        kb = saf.kappa_bar_ttc
        ks = kb * (vL - v) + p + ctl.alpha_e(kb * (D - saf.D_sf) + vL - v) + aL
    if ctl.mode == "nominal":
        u = kd
    elif ctl.mode == "filtered":
        u = min(kd, ks)
    else:
        u = ks
    if ctl.u_limit is not None:
        u = min(max(u, -ctl.u_limit), ctl.u_limit)
    return kd, u, ks


def _rhs(sc: Scenario, t: float, D: float, v: float, vL: float):
    aL = sc.lead.acceleration(t, vL)
    _, u, _ = control(sc, D, v, vL, aL)
    p = sc.resistance.c0 + sc.resistance.c2 * v * v
    return vL - v, u - p, aL


def _rk4(sc: Scenario, t: float, D: float, v: float, vL: float):
    dt = sc.dt
    h = 0.5 * dt
    a1, b1, c1 = _rhs(sc, t, D, v, vL)
    a2, b2, c2 = _rhs(sc, t + h, D + h * a1, v + h * b1, vL + h * c1)
    a3, b3, c3 = _rhs(sc, t + h, D + h * a2, v + h * b2, vL + h * c2)
    a4, b4, c4 = _rhs(sc, t + dt, D + dt * a3, v + dt * b3, vL + dt * c3)
    w = dt / 6.0
    D = D + w * (a1 + 2 * a2 + 2 * a3 + a4)
    v = v + w * (b1 + 2 * b2 + 2 * b3 + b4)
    vL = vL + w * (c1 + 2 * c2 + 2 * c3 + c4)
    if not (math.isfinite(D) and math.isfinite(v) and math.isfinite(vL)):
        raise IntegrationError(t + dt)
    # a stage straddling the stop time can overshoot; the lead never reverses
    return D, v, max(vL, 0.0)


def step(state: State, t: float, scenario: Scenario) -> State:
    """Advance ``state`` from time ``t`` by one RK4 step of ``scenario.dt``."""
    return State(*_rk4(scenario, t, state.D, state.v, state.vL))


@dataclass
class Trajectory:
    """Uniformly sampled closed-loop records, one array per column."""

    data: Dict[str, np.ndarray]
    dt: float
    clamped: bool = False

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def __len__(self) -> int:
        return self.data["t"].size

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.data[c] for c in COLUMNS])

    def state(self, k: int) -> State:
        return State(float(self["D"][k]), float(self["v"][k]), float(self["vL"][k]))


def run(scenario: Scenario) -> Trajectory:
    sc = scenario
    n = sc.n_steps + 1
    rec = np.empty((n, len(COLUMNS)))
    saf = sc.safety
    D, v, vL = sc.x0.D, sc.x0.v, sc.x0.vL
    for k in range(n):
        t = k * sc.dt
        aL = sc.lead.acceleration(t, vL)
        kd, u, ks = control(sc, D, v, vL, aL)
        gap = D - saf.D_sf
        rec[k] = (
            t, D, v, vL, aL, kd, u, ks,
            gap, saf.kappa_bar_th * gap - v, saf.kappa_bar_ttc * gap + vL - v,
        )
        if k + 1 < n:
            D, v, vL = _rk4(sc, t, D, v, vL)
    data = {c: rec[:, i].copy() for i, c in enumerate(COLUMNS)}
    return Trajectory(data=data, dt=sc.dt, clamped=sc.controller.u_limit is not None)


@dataclass
class MonitorSummary:
    min_h: Dict[str, float]
    violation_time: Dict[str, Optional[float]]
    u_min: float
    u_max: float
    filter_active_fraction: float
    filter_active_time: float
    clamped: bool = False
    monitored: tuple = field(default=MEASURES)

    @property
    def first_violation(self) -> Optional[float]:
        times = [self.violation_time[m] for m in self.monitored if self.violation_time[m] is not None]
        return min(times) if times else None

    @property
    def safe(self) -> bool:
        return self.first_violation is None

    def lines(self):
        for m in MEASURES:
            vt = self.violation_time[m]
            yield f"min {m} = {self.min_h[m]:.6g}  violation: {'none' if vt is None else f't = {vt:.6g} s'}"
        yield f"u range = [{self.u_min:.6g}, {self.u_max:.6g}] m/s^2"
        yield f"filter active = {100 * self.filter_active_fraction:.2f}% of samples ({self.filter_active_time:.6g} s)"
        if self.clamped:
            yield "warning: input clamp enabled, safety guarantee does not apply"


def monitor(traj: Trajectory, monitored=MEASURES) -> MonitorSummary:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    t = traj["t"]
    min_h, vt = {}, {}
    for m in MEASURES:
        h = traj[m]
        min_h[m] = float(h.min())
        bad = np.flatnonzero(h < 0)
        vt[m] = float(t[bad[0]]) if bad.size else None
    active = traj["u_app"] != traj["u_des"]
    return MonitorSummary(
        min_h=min_h,
        violation_time=vt,
        u_min=float(traj["u_app"].min()),
        u_max=float(traj["u_app"].max()),
        filter_active_fraction=float(active.mean()),
        filter_active_time=float(active.sum() * traj.dt),
        clamped=traj.clamped,
        monitored=tuple(monitored),
    )
