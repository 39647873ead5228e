"""Safety and stability charts over the (B, A) gain plane, plus boundary certification.

The safety predicates encode sufficient conditions for the nominal CCC law to
keep the time-headway set (``th_safe``) or the distance / time-to-conflict
sets (``ttc_safe``) forward invariant.  ``certify_boundary`` checks the same
property numerically: it samples states on the safe-set boundary and
evaluates ``k_s - k_d``, which must be nonnegative there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .cbf import ClassKe, Linear
from .ccc import Gains, PolicyParams, ccc_desired
from .measures import SafetyParams, safe_input_th, safe_input_ttc
from .vehicle import BrakeBound, ResistanceModel, State

__all__ = [
    "CRITERIA",
    "ChartSpec",
    "RegionGrid",
    "CertificationReport",
    "th_threshold",
    "th_safe",
    "ttc_margin",
    "ttc_safe",
    "plant_stable",
    "string_stable",
    "string_boundary",
    "rasterize",
    "minimal_safe_a",
    "certify_boundary",
]

CRITERIA = ("th", "ttc", "plant", "string")

# axis values are rounded so that nodes such as B = 0.6 are exact
_AXIS_DECIMALS = 10
# closed regions: a point on the boundary counts as a member despite round-off
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ChartSpec:
    criterion: str
    C: float = 0.0
    v_bar: float = 15.0
    policy: PolicyParams = PolicyParams()
    safety: SafetyParams = SafetyParams()
    gamma: BrakeBound = field(default_factory=BrakeBound.sqrt)
    B_range: Tuple[float, float, float] = (0.0, 1.5, 0.01)
    A_range: Tuple[float, float, float] = (0.0, 3.0, 0.01)
    vL_step: float = 0.01

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}, expected one of {CRITERIA}")
        if self.v_bar < 0:
            raise ValueError("v_bar must be nonnegative")
        for name, (lo, hi, step) in (("B_range", self.B_range), ("A_range", self.A_range)):
            if step <= 0 or hi < lo:
                raise ValueError(f"{name} must satisfy min <= max and step > 0")
        if self.vL_step <= 0:
            raise ValueError("vL_step must be positive")


@dataclass
class RegionGrid:
    """Membership matrix indexed ``[i_A, i_B]``."""

    B: np.ndarray
    A: np.ndarray
    member: np.ndarray

    def __post_init__(self):
        if self.member.shape != (self.A.size, self.B.size):
            raise ValueError("membership matrix does not match the axes")

    def at(self, B: float, A: float) -> bool:
        iB = int(np.argmin(np.abs(self.B - B)))
        iA = int(np.argmin(np.abs(self.A - A)))
        return bool(self.member[iA, iB])

    def rows(self):
        """Yield ``(B, A, member)`` in B-major order."""
        for iB, b in enumerate(self.B):
            for iA, a in enumerate(self.A):
                yield float(b), float(a), bool(self.member[iA, iB])


@dataclass
class CertificationReport:
    worst_margin: float
    argmin_state: State
    samples: int

    @property
    def certified(self) -> bool:
        return self.worst_margin >= -1e-9


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), _AXIS_DECIMALS)


# --- time headway ---------------------------------------------------------


def th_threshold(B, policy: PolicyParams, safety: SafetyParams, v_bar: float):
    """Smallest A satisfying the headway condition at gain B (second bullet)."""
    gap = policy.D_st - safety.D_sf
    if gap <= 0:
        return np.inf * np.ones_like(np.asarray(B, dtype=float))
    return np.abs(safety.kappa_bar_th - B) * v_bar / (policy.kappa * gap)


def _th_safe_arrays(A, B, policy, safety, v_bar):
    kb, kappa = safety.kappa_bar_th, policy.kappa
    first = (policy.D_st >= safety.D_sf) & (B == kb) & (kb >= kappa)
    if policy.D_st <= safety.D_sf or kb < kappa:
        return first | np.zeros(np.shape(A), dtype=bool)
    thr = th_threshold(B, policy, safety, v_bar)
    return first | (A >= thr - BOUNDARY_TOL * (1.0 + thr))


def th_safe(
    gains: Gains,
    policy: PolicyParams = PolicyParams(),
    safety: SafetyParams = SafetyParams(),
    v_bar: float = 15.0,
) -> bool:
    """Sufficient condition for time-headway safety of the nominal law (needs C = 0)."""
    if gains.C != 0:
        raise ValueError("the time-headway safety condition only covers C = 0")
    return bool(_th_safe_arrays(gains.A, gains.B, policy, safety, v_bar))


# --- distance and time to conflict ----------------------------------------


def _vl_grid(v_bar: float, step: float) -> np.ndarray:
    n = int(math.floor(v_bar / step + 1e-9))
    grid = [step * np.arange(n + 1), [v_bar]]
    fine_hi = min(0.1, v_bar)
    fine_step = step * step * v_bar
    if fine_step > 0 and fine_hi > 0:
        grid.append(np.arange(0.0, fine_hi, fine_step))
    return np.unique(np.concatenate(grid))


def _inner_min(slopes: np.ndarray, one_minus_c: float, v_bar: float, gamma: BrakeBound, step: float) -> np.ndarray:
    """``min over vL in [0, v_bar]`` of ``slope vL - (1 - C) gamma(vL)`` per slope.

    Brute-force grid search followed by a bounded scalar polish in the
    bracketing grid cells, which can only lower the grid minimum.
    """
    vl = _vl_grid(v_bar, step)
    gam = np.asarray(gamma(vl), dtype=float)
    phi = slopes[:, None] * vl[None, :] - one_minus_c * gam[None, :]
    idx = np.argmin(phi, axis=1)
    best = phi[np.arange(slopes.size), idx]
    if one_minus_c == 0:
        return best
    for k, (s, i) in enumerate(zip(slopes, idx)):
        lo, hi = vl[max(i - 1, 0)], vl[min(i + 1, vl.size - 1)]
        if hi <= lo:
            continue
        res = minimize_scalar(
            lambda r: s * r - one_minus_c * float(gamma(r)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best[k] = min(best[k], res.fun)
    return best


def _ttc_gates(policy: PolicyParams, safety: SafetyParams, C) -> bool:
    return (policy.D_st > safety.D_sf) & (safety.kappa_bar_ttc >= policy.kappa) & (C <= 1)


def ttc_margin(
    gains: Gains,
    policy: PolicyParams = PolicyParams(),
    safety: SafetyParams = SafetyParams(),
    v_bar: float = 15.0,
    gamma: Optional[BrakeBound] = None,
    vL_step: float = 0.01,
) -> float:
    """Left-hand side of the distance / time-to-conflict condition (safe iff >= 0)."""
    return float(_ttc_margin_arrays(np.array([gains.A]), np.array([gains.B]), gains.C, policy, safety, v_bar, gamma, vL_step)[0])


def _ttc_margin_arrays(A, B, C, policy, safety, v_bar, gamma, vL_step):
    if vL_step <= 0:
        raise ValueError("vL_step must be positive")
    gamma = gamma or BrakeBound.sqrt()
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    kb = safety.kappa_bar_ttc
    slopes = kb - B + A
    uniq, inv = np.unique(slopes, return_inverse=True)
    inner = _inner_min(uniq, 1.0 - C, v_bar, gamma, vL_step)[inv].reshape(A.shape)
    return A * policy.kappa * (policy.D_st - safety.D_sf) + np.minimum(0.0, B - kb) * v_bar + inner


def ttc_safe(
    gains: Gains,
    policy: PolicyParams = PolicyParams(),
    safety: SafetyParams = SafetyParams(),
    v_bar: float = 15.0,
    gamma: Optional[BrakeBound] = None,
    vL_step: float = 0.01,
) -> bool:
    """Sufficient condition for distance and time-to-conflict safety of the nominal law."""
    if not _ttc_gates(policy, safety, gains.C):
        return False
    return ttc_margin(gains, policy, safety, v_bar, gamma, vL_step) >= -BOUNDARY_TOL


# --- stability -------------------------------------------------------------


def plant_stable(gains: Gains) -> bool:
    return gains.A >= 0 and gains.A >= -gains.B


def string_boundary(B, C: float, kappa: float):
    """Smallest string-stable A at gain B, ``max(0, 2((1 - C) kappa - B))``."""
    return np.maximum(0.0, 2.0 * ((1.0 - C) * kappa - B))


def string_stable(gains: Gains, kappa: float) -> bool:
    return bool(gains.A >= 0 and gains.A >= 2.0 * ((1.0 - gains.C) * kappa - gains.B) and gains.C <= 1)


# --- rasterization ---------------------------------------------------------


def rasterize(spec: ChartSpec) -> RegionGrid:
    """Evaluate the chart predicate at every node of the (B, A) grid."""
    B = _axis(*spec.B_range)
    A = _axis(*spec.A_range)
    BB, AA = np.meshgrid(B, A)
    if spec.criterion == "th":
        if spec.C != 0:
            raise ValueError("the time-headway chart only covers C = 0")
        member = _th_safe_arrays(AA, BB, spec.policy, spec.safety, spec.v_bar)
    elif spec.criterion == "ttc":
        if _ttc_gates(spec.policy, spec.safety, spec.C):
            margin = _ttc_margin_arrays(AA, BB, spec.C, spec.policy, spec.safety, spec.v_bar, spec.gamma, spec.vL_step)
            member = margin >= -BOUNDARY_TOL
        else:
            member = np.zeros(AA.shape, dtype=bool)
    elif spec.criterion == "plant":
        member = (AA >= 0) & (AA >= -BB)
    else:
        member = (AA >= 0) & (AA >= 2.0 * ((1.0 - spec.C) * spec.policy.kappa - BB)) & (spec.C <= 1)
    return RegionGrid(B=B, A=A, member=np.asarray(member, dtype=bool))


def minimal_safe_a(
    criterion: str,
    B: float,
    C: float = 0.0,
    policy: PolicyParams = PolicyParams(),
    safety: SafetyParams = SafetyParams(),
    v_bar: float = 15.0,
    gamma: Optional[BrakeBound] = None,
    vL_step: float = 0.01,
    A_max: float = 100.0,
    tol: float = 1e-10,
) -> Optional[float]:
    """Smallest A in ``[0, A_max]`` for which the safety predicate holds, by bisection.

    Both safety conditions are monotone in A.  Returns None when even
    ``A_max`` is unsafe.
    """
    gamma = gamma or BrakeBound.sqrt()
    if criterion == "th":
        ok = lambda a: th_safe(Gains(a, B, C), policy, safety, v_bar)  # noqa: E731
    elif criterion == "ttc":
        ok = lambda a: ttc_safe(Gains(a, B, C), policy, safety, v_bar, gamma, vL_step)  # noqa: E731
    else:
        raise ValueError("minimal_safe_a supports 'th' and 'ttc'")
    if ok(0.0):
        return 0.0
    if not ok(A_max):
        return None
    lo, hi = 0.0, A_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# --- boundary certification -------------------------------------------------


def _boundary_speeds(rng: np.random.Generator, samples: int, v_bar: float):
    v = rng.uniform(0.0, v_bar, samples)
    vL = rng.uniform(0.0, v_bar, samples)
    corners = np.array([[0.0, 0.0], [0.0, v_bar], [v_bar, 0.0], [v_bar, v_bar]])
    return np.concatenate([corners[:, 0], v]), np.concatenate([corners[:, 1], vL])


def certify_boundary(
    criterion: str,
    gains: Gains,
    policy: PolicyParams = PolicyParams(),
    safety: SafetyParams = SafetyParams(),
    resistance: ResistanceModel = ResistanceModel(),
    v_bar: float = 15.0,
    gamma: Optional[BrakeBound] = None,
    samples: int = 10_000,
    seed: int = 0,
    alpha: ClassKe = Linear(1.0),
    alpha_e: ClassKe = Linear(1.0),
) -> CertificationReport:
    """Sample the safe-set boundary and report the worst ``k_s - k_d``.

    ``th``: states with ``h_TH = 0`` and ``v, vL`` uniform in ``[0, v_bar]``.
    ``ttc``: states with ``h_TTC = 0`` and ``h_D >= 0`` (so ``v >= vL``), with
    the lead braking as hard as the bound ``gamma`` allows.  The speed corners
    are always included: four for ``th``, three for ``ttc``.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    v, vL = _boundary_speeds(rng, samples, v_bar)
    if criterion == "th":
        D = safety.D_sf + v / safety.kappa_bar_th
        aL = np.zeros_like(v)
        state = State(D, v, vL)
        ks = safe_input_th(state, safety, resistance, alpha)
    elif criterion == "ttc":
        gamma = gamma or BrakeBound.sqrt()
        # sorting each pair maps the square onto the triangle v >= vL uniformly
        v, vL = np.maximum(v, vL), np.minimum(v, vL)
        v, vL = v[1:], vL[1:]  # corner (0, v_bar) folds onto (v_bar, 0)
        D = safety.D_sf + (v - vL) / safety.kappa_bar_ttc
        aL = -np.asarray(gamma(vL), dtype=float)
        state = State(D, v, vL)
        ks = safe_input_ttc(state, safety, resistance, aL, alpha_e)
    else:
        raise ValueError("certify_boundary supports 'th' and 'ttc'")
    margin = ks - ccc_desired(state, aL, gains, policy)
    i = int(np.argmin(margin))
    return CertificationReport(
        worst_margin=float(margin[i]),
        argmin_state=State(float(D[i]), float(v[i]), float(vL[i])),
        samples=int(margin.size),
    )
