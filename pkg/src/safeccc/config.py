"""Flat ``key = value`` configuration files.

Every key has a typed default; unknown keys are rejected.  Lines starting
with ``#`` are comments.  ``dump_config`` writes a file that parses back to
the identical mapping.
"""
from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Tuple, Union

from .cbf import Linear
from .ccc import Gains, PolicyParams
from .charts import ChartSpec
from .measures import SafetyParams
from .sim import MEASURES, Controller, Scenario
from .vehicle import (
    BrakeBound,
    ConstantJerkStop,
    ConstantSpeed,
    PiecewiseAccel,
    ResistanceModel,
    State,
)

Value = Union[float, int, str]

DEFAULTS: Dict[str, Value] = {
    "dynamics.c0": 0.0,
    "dynamics.c2": 0.0,
    "policy.D_st": 5.0,
    "policy.kappa": 0.6,
    "policy.v_max": 15.0,
    "safety.D_sf": 1.0,
    "safety.kappa_bar_th": 0.6,
    "safety.kappa_bar_ttc": 0.6,
    "gains.A": 0.4,
    "gains.B": 0.6,
    "gains.C": 0.0,
    "lead.profile": "constant_jerk_stop",
    "lead.v0": 15.0,
    "lead.jerk": 2.0,
    "lead.t_start": 1.0,
    "lead.breakpoints": "",
    "lead.gamma_coeff": 20.0,
    "sim.D0": 30.0,
    "sim.v0": 15.0,
    "sim.vL0": 15.0,
    "sim.duration": 30.0,
    "sim.dt": 0.01,
    "sim.controller": "nominal",
    "sim.criterion": "th",
    "sim.alpha_rate": 1.0,
    "sim.alpha_e_rate": 1.0,
    "sim.u_limit": 0.0,
    "sim.monitor": "hD,hTH,hTTC",
    "chart.C": 0.0,
    "chart.v_bar": 15.0,
    "chart.B_min": 0.0,
    "chart.B_max": 1.5,
    "chart.B_step": 0.01,
    "chart.A_min": 0.0,
    "chart.A_max": 3.0,
    "chart.A_step": 0.01,
    "chart.vL_step": 0.01,
    "certify.v_bar": 15.0,
    "certify.samples": 10000,
    "sweep.gains": "",
}


class ConfigError(ValueError):
    pass


def _coerce(key: str, raw: str) -> Value:
    default = DEFAULTS[key]
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None
    return raw


def parse_config(text: str) -> Dict[str, Value]:
    cfg = dict(DEFAULTS)
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = _coerce(key, raw)
    return cfg


def load_config(path: Union[str, Path, None]) -> Dict[str, Value]:
    if path is None:
        return dict(DEFAULTS)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: Dict[str, Value]) -> str:
    return "".join(f"{k} = {cfg[k]!r}\n" if not isinstance(cfg[k], str) else f"{k} = {cfg[k]}\n" for k in DEFAULTS)


def parse_gains(text: str) -> Gains:
    try:
        parts = [float(s) for s in text.split(",")]
    except ValueError:
        raise ConfigError(f"gains must be 'A,B,C', got {text!r}") from None
    if len(parts) != 3:
        raise ConfigError(f"gains must be 'A,B,C', got {text!r}")
    try:
        return Gains(*parts)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_gain_list(text: str) -> List[Gains]:
    return [parse_gains(chunk) for chunk in text.split(";") if chunk.strip()]


def _parse_breakpoints(text: str) -> Tuple[Tuple[float, float], ...]:
    try:
        pairs = [chunk.split(":") for chunk in text.split(",") if chunk.strip()]
        return tuple((float(t), float(a)) for t, a in pairs)
    except ValueError:
        raise ConfigError(f"lead.breakpoints must be 't:a, t:a, ...', got {text!r}") from None


def _build(key: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def gains_from(cfg) -> Gains:
    return _build("gains", Gains, cfg["gains.A"], cfg["gains.B"], cfg["gains.C"])


def policy_from(cfg) -> PolicyParams:
    return _build("policy", PolicyParams, cfg["policy.D_st"], cfg["policy.kappa"], cfg["policy.v_max"])


def safety_from(cfg) -> SafetyParams:
    return _build(
        "safety", SafetyParams, cfg["safety.D_sf"], cfg["safety.kappa_bar_th"], cfg["safety.kappa_bar_ttc"]
    )


def resistance_from(cfg) -> ResistanceModel:
    return _build("dynamics", ResistanceModel, cfg["dynamics.c0"], cfg["dynamics.c2"])


def brake_bound_from(cfg) -> BrakeBound:
    return _build("lead.gamma_coeff", BrakeBound.sqrt, cfg["lead.gamma_coeff"])


def lead_from(cfg):
    kind = cfg["lead.profile"]
    if kind == "constant_speed":
        return ConstantSpeed(cfg["lead.v0"])
    if kind == "constant_jerk_stop":
        return _build("lead", ConstantJerkStop, cfg["lead.v0"], cfg["lead.jerk"], cfg["lead.t_start"])
    if kind == "piecewise":
        return _build("lead.breakpoints", PiecewiseAccel, _parse_breakpoints(cfg["lead.breakpoints"]), cfg["lead.v0"])
    raise ConfigError(f"lead.profile: unknown profile {kind!r}")


def monitored_from(cfg) -> Tuple[str, ...]:
    names = tuple(s.strip() for s in cfg["sim.monitor"].split(",") if s.strip())
    bad = [n for n in names if n not in MEASURES]
    if bad or not names:
        raise ConfigError(f"sim.monitor: expected a subset of {MEASURES}, got {cfg['sim.monitor']!r}")
    return names


def scenario_from(cfg, gains: Gains | None = None) -> Scenario:
    u_limit = cfg["sim.u_limit"] or None
    controller = _build(
        "sim",
        Controller,
        mode=cfg["sim.controller"],
        gains=gains or gains_from(cfg),
        criterion=cfg["sim.criterion"],
        alpha=_build("sim.alpha_rate", Linear, cfg["sim.alpha_rate"]),
        alpha_e=_build("sim.alpha_e_rate", Linear, cfg["sim.alpha_e_rate"]),
        u_limit=u_limit,
    )
    x0 = _build("sim.x0", State, cfg["sim.D0"], cfg["sim.v0"], cfg["sim.vL0"])
    return _build(
        "sim",
        Scenario,
        x0=x0,
        lead=lead_from(cfg),
        duration=cfg["sim.duration"],
        dt=cfg["sim.dt"],
        controller=controller,
        resistance=resistance_from(cfg),
        policy=policy_from(cfg),
        safety=safety_from(cfg),
    )


def chart_spec_from(cfg, criterion: str) -> ChartSpec:
    return _build(
        "chart",
        ChartSpec,
        criterion=criterion,
        C=cfg["chart.C"],
        v_bar=cfg["chart.v_bar"],
        policy=policy_from(cfg),
        safety=safety_from(cfg),
        gamma=brake_bound_from(cfg),
        B_range=(cfg["chart.B_min"], cfg["chart.B_max"], cfg["chart.B_step"]),
        A_range=(cfg["chart.A_min"], cfg["chart.A_max"], cfg["chart.A_step"]),
        vL_step=cfg["chart.vL_step"],
    )
