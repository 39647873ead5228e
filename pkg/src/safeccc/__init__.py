"""Safety-critical connected cruise control with control barrier functions."""
from .cbf import (
    BarrierEvaluation,
    ClassKe,
    Custom,
    LieDerivatives,
    Linear,
    ScaledSqrt,
    cbf_condition_holds,
    extend_cbf,
    filter_closed_form,
    h_dot,
    scalar_filter,
    scalar_safe_input,
)
from .ccc import Gains, PolicyParams, ccc_desired, range_policy, speed_policy
from .charts import (
    CertificationReport,
    ChartSpec,
    RegionGrid,
    certify_boundary,
    minimal_safe_a,
    plant_stable,
    rasterize,
    string_boundary,
    string_stable,
    th_safe,
    th_threshold,
    ttc_margin,
    ttc_safe,
)
from .measures import (
    MeasureKind,
    SafetyMeasure,
    SafetyParams,
    evaluate,
    gradient,
    lie_derivatives,
    safe_input_th,
    safe_input_ttc,
)
from .sim import (
    P_GAINS,
    Q_GAINS,
    Controller,
    IntegrationError,
    MonitorSummary,
    Scenario,
    Trajectory,
    default_braking_scenario,
    monitor,
    run,
    step,
)
from .vehicle import (
    BrakeBound,
    ConstantJerkStop,
    ConstantSpeed,
    PiecewiseAccel,
    ResistanceModel,
    State,
    check_brake_bound,
    control_affine,
    lead_acceleration,
    lead_speed,
    state_derivative,
)

__version__ = "0.1.0"
