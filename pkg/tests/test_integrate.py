import math
import os

import numpy as np
import pytest

from kirchhoff_spectral import ComplexField, ConjugatePair, ParameterError, random_field
from kirchhoff_spectral.dynamics import (
    KirchhoffDynamics,
    LinearDiagonalDynamics,
    NormalFormDynamics,
)
from kirchhoff_spectral.integrate import IntegratorConfig, integrate, step
from kirchhoff_spectral.kirchhoff import random_state


class _ScalarDynamics:
    """Minimal synthetic evaluator over a single complex value."""

    def __init__(self, fn):
        self.fn = fn

    def pack(self, state):
        return np.array([state], dtype=np.complex128)

    def unpack(self, y):
        return complex(y[0])

    def rhs(self, t, y):
        return self.fn(t, y)

    def project(self, y):
        return y, 0.0

    def ball_value(self, y):
        return None


def test_config_validation():
    with pytest.raises(ParameterError):
        IntegratorConfig(scheme="euler").validate()
    with pytest.raises(ParameterError):
        IntegratorConfig(dt=0.0).validate()
    with pytest.raises(ParameterError):
        IntegratorConfig(rel_tol=0.0).validate()
    with pytest.raises(ParameterError):
        IntegratorConfig(monitor_stride=0).validate()


def test_t_end_zero_single_snapshot(grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 1, 0.5, 1.0, "free"))
    rec = integrate(dyn, w0, IntegratorConfig(t_end=0.0))
    assert rec.exit_reason == "completed"
    assert len(rec.times) == 1 and rec.times[0] == 0.0
    assert np.array_equal(rec.states[0].w.coeffs, w0.w.coeffs)


def test_zero_state_stays_zero(grid1):
    dyn = KirchhoffDynamics(grid1)
    from kirchhoff_spectral import RealPair

    z = RealPair(ComplexField.zero(grid1), ComplexField.zero(grid1))
    rec = integrate(dyn, z, IntegratorConfig(t_end=1.0, monitor_stride=5))
    assert np.all(rec.states[-1].u.coeffs == 0.0)
    assert np.all(rec.states[-1].v.coeffs == 0.0)


def test_linear_field_exact_flow(grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = random_field(grid1, 2, 0.5, 1.0, "free")
    cfg = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14, t_end=10.0, monitor_stride=10**6)
    rec = integrate(dyn, ConjugatePair(w0), cfg)
    assert rec.exit_reason == "completed"
    exact = dyn.exact(w0.coeffs, rec.times[-1])
    assert np.max(np.abs(rec.states[-1].w.coeffs - exact)) <= 1e-11


def test_single_rk4_step_order(grid1):
    # local error of one RK4 step is O(dt^5): halving dt divides it by ~32
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ComplexField.unit_mode(grid1, 4, 0.7)
    state = ConjugatePair(w0)

    def local_err(dt):
        out = step(dyn, state, dt, scheme="rk4")
        return np.max(np.abs(out.w.coeffs - dyn.exact(w0.coeffs, dt)))

    e1, e2 = local_err(0.1), local_err(0.05)
    assert 24.0 < e1 / e2 < 40.0


def test_global_rk4_order_on_kirchhoff(grid1):
    # Richardson self-convergence: global error ratio ~ 16 at fixed horizon
    dyn = KirchhoffDynamics(grid1)
    state0 = random_state(grid1, 3, 0.3)

    def final_state(dt):
        cfg = IntegratorConfig(scheme="rk4", dt=dt, t_end=2.0, monitor_stride=10**6)
        rec = integrate(dyn, state0, cfg)
        return np.concatenate([rec.states[-1].u.coeffs, rec.states[-1].v.coeffs])

    ref = final_state(0.0025)  # fine reference
    e1 = np.max(np.abs(final_state(0.02) - ref))
    e2 = np.max(np.abs(final_state(0.01) - ref))
    assert 11.0 < e1 / e2 < 22.0


def test_adaptive_rejects_oversized_initial_step(grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 4, 0.5, 1.0, "free"))
    cfg = IntegratorConfig(dt=10.0, rel_tol=1e-12, abs_tol=1e-14, t_end=1.0,
                           monitor_stride=10**6)
    rec = integrate(dyn, w0, cfg)
    assert rec.n_rejected >= 1
    exact = dyn.exact(w0.w.coeffs, rec.times[-1])
    assert np.max(np.abs(rec.states[-1].w.coeffs - exact)) <= 1e-11


def test_determinism(grid1):
    dyn = KirchhoffDynamics(grid1)
    state0 = random_state(grid1, 5, 0.2)
    cfg = IntegratorConfig(t_end=3.0, monitor_stride=7)
    mon = {"h": lambda t, st: float(np.max(np.abs(st.u.coeffs)))}
    a = integrate(dyn, state0, cfg, monitors=mon)
    b = integrate(dyn, state0, cfg, monitors=mon)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.channels["h"], b.channels["h"])
    assert a.n_steps == b.n_steps


def test_projection_defect_zero_for_hermitian_data(grid1):
    dyn = KirchhoffDynamics(grid1)
    rec = integrate(dyn, random_state(grid1, 6, 0.3), IntegratorConfig(t_end=2.0))
    assert rec.max_projection_defect == 0.0


def test_blowup_detection():
    def quadratic(t, y):
        with np.errstate(over="ignore"):
            return y * y

    dyn = _ScalarDynamics(quadratic)
    cfg = IntegratorConfig(scheme="rk4", dt=1.0, t_end=5.0)
    rec = integrate(dyn, 1e200 + 0j, cfg)
    assert rec.exit_reason == "blowup"
    assert rec.exit_time < 5.0


def test_dt_underflow_on_rough_field():
    dyn = _ScalarDynamics(lambda t, y: np.array([math.sin(1e16 * t) * 1e8], dtype=complex))
    cfg = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, t_end=1.0, dt=1e-3)
    rec = integrate(dyn, 1.0 + 0j, cfg)
    assert rec.exit_reason == "dt_underflow"


def test_ball_exit(grid1):
    dyn = NormalFormDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 7, 0.3, 1.0, "free"))
    cfg = IntegratorConfig(t_end=5.0, rel_tol=1e-8, ball_threshold=0.2)
    rec = integrate(dyn, w0, cfg)
    assert rec.exit_reason == "ball_exit"
    assert rec.exit_time < 5.0


def test_field_domain_error_reported_as_ball_exit(grid1):
    # state outside the invertibility ball makes the field itself refuse
    dyn = NormalFormDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 8, 0.7, 1.0, "free"))
    rec = integrate(dyn, w0, IntegratorConfig(t_end=1.0))
    assert rec.exit_reason == "ball_exit"


def test_max_steps(grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 9, 0.5, 1.0, "free"))
    rec = integrate(dyn, w0, IntegratorConfig(t_end=100.0, max_steps=3))
    assert rec.exit_reason == "max_steps"
    assert rec.n_steps == 3


def test_t_eval_exact_landings(grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 10, 0.5, 1.0, "free"))
    ts = [0.0, 0.3, 0.7, 1.0]
    cfg = IntegratorConfig(rel_tol=1e-10, t_end=1.0)
    rec = integrate(dyn, w0, cfg, t_eval=ts)
    assert np.allclose(rec.times, ts, rtol=0, atol=1e-12)
    for t, st in zip(rec.times, rec.states):
        assert np.max(np.abs(st.w.coeffs - dyn.exact(w0.w.coeffs, t))) <= 1e-10


def test_monitor_stride(grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 11, 0.5, 1.0, "free"))
    cfg = IntegratorConfig(scheme="rk4", dt=0.01, t_end=1.0, monitor_stride=10)
    rec = integrate(dyn, w0, cfg, monitors={"n": lambda t, st: st.w.norm(1.0)})
    assert len(rec.times) == len(rec.channels["n"])
    assert 10 <= len(rec.times) <= 12


def test_csv_round_trip(tmp_path, grid1):
    dyn = LinearDiagonalDynamics(grid1)
    w0 = ConjugatePair(random_field(grid1, 12, 0.5, 1.0, "free"))
    cfg = IntegratorConfig(scheme="rk4", dt=0.05, t_end=0.5, monitor_stride=2)
    rec = integrate(dyn, w0, cfg, monitors={"norm_1": lambda t, st: st.w.norm(1.0)})
    path = os.path.join(tmp_path, "traj.csv")
    rec.to_csv(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    assert b"\r" not in raw  # LF endings
    lines = raw.decode().strip().split("\n")
    assert lines[0] == "time,norm_1"
    for i, line in enumerate(lines[1:]):
        t_str, n_str = line.split(",")
        assert float(t_str) == rec.times[i]  # 17 significant digits round-trip
        assert float(n_str) == rec.channels["norm_1"][i]


def test_step_preserves_state_class(grid1):
    dyn = KirchhoffDynamics(grid1)
    state = random_state(grid1, 13, 0.2)
    out = step(dyn, state, 0.01, scheme="rk4")
    assert out.u.coeffs.shape == state.u.coeffs.shape
    out45 = step(dyn, state, 0.01, scheme="rk45_adaptive")
    assert np.max(np.abs(out45.u.coeffs - out.u.coeffs)) <= 1e-10
