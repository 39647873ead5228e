import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from safeccc.ccc import Gains
from safeccc.sim import (
    COLUMNS,
    P_GAINS,
    Q_GAINS,
    Controller,
    IntegrationError,
    Scenario,
    control,
    default_braking_scenario,
    monitor,
    run,
    step,
)
from safeccc.vehicle import ConstantJerkStop, ConstantSpeed, PiecewiseAccel, State

SMOOTH = dict(x0=State(15.0, 5.0, 8.0), lead=ConstantSpeed(8.0), controller=Controller(gains=Gains(0.4, 0.3, 0.0)))


def exact_rhs(sc):
    def f(t, y):
        D, v, vL = y
        aL = sc.lead.acceleration(t, vL)
        return [vL - v, control(sc, D, v, vL, aL)[1], aL]
    return f


def test_equilibrium_is_fixed_point():
    sc = default_braking_scenario(Controller(gains=P_GAINS), lead=ConstantSpeed(15.0))
    x = State(30.0, 15.0, 15.0)
    y = step(x, 0.0, sc)
    np.testing.assert_allclose(y.as_array(), x.as_array(), atol=1e-12)


def test_step_difference_quotient_approaches_derivative():
    sc = Scenario(duration=1.0, **SMOOTH)
    x = SMOOTH["x0"]
    deriv = np.array(exact_rhs(sc)(0.0, x.as_array()))
    errs = []
    for dt in (1e-2, 1e-3, 1e-4):
        sc = Scenario(duration=1.0, dt=dt, **SMOOTH)
        errs.append(np.max(np.abs((step(x, 0.0, sc).as_array() - x.as_array()) / dt - deriv)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_rk4_local_error_is_fifth_order():
    """One step against a tight-tolerance adaptive integrator."""
    x = SMOOTH["x0"]
    errs = []
    dts = (0.4, 0.2, 0.1)
    for dt in dts:
        sc = Scenario(duration=1.0, dt=dt, **SMOOTH)
        ref = solve_ivp(exact_rhs(sc), (0, dt), x.as_array(), method="DOP853", rtol=1e-13, atol=1e-13).y[:, -1]
        errs.append(np.max(np.abs(step(x, 0.0, sc).as_array() - ref)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(4.5 < p < 5.5 for p in orders), orders


def test_rk4_global_order_four():
    finals = []
    for dt in (0.2, 0.1, 0.05, 0.025):
        finals.append(run(Scenario(duration=10.0, dt=dt, **SMOOTH)).as_array()[-1, 1:4])
    diffs = [np.max(np.abs(a - b)) for a, b in zip(finals, finals[1:])]
    orders = [math.log2(a / b) for a, b in zip(diffs, diffs[1:])]
    assert all(3.7 < p < 4.3 for p in orders), orders


def test_frozen_ego_follows_lead_kinematics():
    # phase switches at 1, 3 s fall on the grid, so RK4 is exact up to round-off while the lead moves
    lead = ConstantJerkStop(v0=8.0, jerk=2.0, t_start=1.0)
    sc = Scenario(x0=State(40.0, 6.0, 8.0), lead=lead, duration=8.0, dt=0.01, controller=Controller(gains=Gains(0, 0, 0)))
    tr = run(sc)
    np.testing.assert_allclose(tr["v"], 6.0, atol=1e-12)
    for k in range(0, 451, 50):
        t = tr["t"][k]
        D = 40.0 + quad(lambda s: lead.speed(s) - 6.0, 0.0, t, points=lead.kinks(), epsabs=1e-13)[0] if t > 0 else 40.0
        assert tr["D"][k] == pytest.approx(D, abs=1e-9)
        assert tr["vL"][k] == pytest.approx(lead.speed(t), abs=1e-9)
    # the stop-clamp near vL = 0 costs a little accuracy on the final step
    assert tr["vL"][-1] == pytest.approx(0.0, abs=1e-4)
    assert tr["D"][-1] == pytest.approx(40.0 + 8.0 + 16.0 - 6.0 * 8.0, abs=1e-3)


def test_record_layout():
    sc = default_braking_scenario(duration=2.0)
    tr = run(sc)
    assert len(tr) == 201
    assert tr.as_array().shape == (201, len(COLUMNS))
    np.testing.assert_allclose(np.diff(tr["t"]), 0.01, atol=1e-12)


def test_deterministic():
    sc = default_braking_scenario(Controller("filtered", Q_GAINS))
    np.testing.assert_array_equal(run(sc).as_array(), run(sc).as_array())


def test_braking_scenario_outcomes():
    p = monitor(run(default_braking_scenario(Controller("nominal", P_GAINS))))
    q = monitor(run(default_braking_scenario(Controller("nominal", Q_GAINS))))
    f = monitor(run(default_braking_scenario(Controller("filtered", Q_GAINS))))
    assert p.min_h["hTH"] >= -1e-3 and p.safe
    assert q.min_h["hTH"] < -0.01 and q.violation_time["hTH"] is not None
    assert f.min_h["hTH"] >= -1e-3 and f.safe
    assert f.filter_active_fraction > 0
    assert p.filter_active_fraction == 0


def test_nominal_never_filters():
    tr = run(default_braking_scenario(Controller("nominal", Q_GAINS)))
    np.testing.assert_array_equal(tr["u_app"], tr["u_des"])


def test_safe_only_tracks_ks():
    tr = run(default_braking_scenario(Controller("safe_only", Q_GAINS)))
    np.testing.assert_array_equal(tr["u_app"], tr["ks"])
    assert tr["hTH"].min() >= -1e-9


def test_ttc_filter_guards_distance_and_conflict():
    tr = run(default_braking_scenario(Controller("filtered", Gains(0.1, 0.1, 0.0), criterion="ttc")))
    assert tr["hTTC"].min() >= -1e-3
    assert tr["hD"].min() >= -1e-3


def test_lead_speed_stays_nonnegative_and_stopped():
    tr = run(default_braking_scenario(Controller("filtered", Q_GAINS)))
    assert tr["vL"].min() >= 0.0
    stop = np.flatnonzero(tr["t"] > 1.0 + 2 * math.sqrt(7.5) + 0.05)
    assert np.ptp(tr["vL"][stop]) == 0.0
    assert tr["vL"][stop[0]] < 1e-3


def test_dt_halving_converges():
    a = run(default_braking_scenario(Controller("filtered", Q_GAINS), dt=0.02))
    b = run(default_braking_scenario(Controller("filtered", Q_GAINS), dt=0.01))
    err = np.max(np.abs(a.as_array()[:, 1:4] - b.as_array()[::2, 1:4]))
    assert err < 0.02 * 5  # at least first order near filter switches


def test_input_clamp_is_reported():
    sc = default_braking_scenario(Controller("filtered", Q_GAINS, u_limit=2.0))
    tr = run(sc)
    s = monitor(tr)
    assert tr["u_app"].min() >= -2.0
    assert s.clamped and any("clamp" in line for line in s.lines())


def test_blowup_raises():
    lead = PiecewiseAccel(((0.0, 1e308),), v0=1.0)
    sc = Scenario(x0=State(10.0, 1.0, 1.0), lead=lead, duration=1.0, dt=0.1)
    with pytest.raises(IntegrationError) as info:
        run(sc)
    assert info.value.t > 0


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(x0=State(1, 1, 1), lead=ConstantSpeed(1.0), dt=0.0)
    with pytest.raises(ValueError):
        Scenario(x0=State(1, 1, 1), lead=ConstantSpeed(1.0), duration=0.001, dt=0.01)
    with pytest.raises(ValueError):
        Controller(mode="bogus")


def test_monitor_summary_fields():
    q = monitor(run(default_braking_scenario(Controller("nominal", Q_GAINS))))
    assert q.first_violation == q.violation_time["hTH"]
    assert q.min_h["hD"] > 0
    assert q.u_min < 0 < q.u_max or q.u_max >= 0
    safe_subset = monitor(run(default_braking_scenario(Controller("nominal", Q_GAINS))), monitored=("hD",))
    assert safe_subset.safe
