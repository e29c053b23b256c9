import math

import numpy as np
import pytest

from nonlocal_waves import (
    BlowUpError,
    ModelSpec,
    State,
    StepControl,
    integrate,
    make_grid,
    rk4_step,
)
from nonlocal_waves.initial_data import random_band_limited
from nonlocal_waves.invariants import DiagnosticObserver

CH = ModelSpec("b_family", b=2.0)


def grid(n=128):
    return make_grid("circle", n, 1.0)


def test_step_control_validation():
    with pytest.raises(ValueError):
        StepControl(t_end=1.0)
    with pytest.raises(ValueError):
        StepControl(t_end=1.0, dt=0.1, cfl_safety=0.5)
    with pytest.raises(ValueError):
        StepControl(t_end=0.0, dt=0.1)
    with pytest.raises(ValueError):
        StepControl(t_end=1.0, cfl_safety=1.5)
    with pytest.raises(ValueError):
        StepControl(t_end=1.0, dt=0.1, record_every=0)


def test_zero_rhs_advances_time_only():
    g = grid(16)
    s = State.from_arrays(g, [np.linspace(0, 1, g.n)], t=0.3)
    out = rk4_step(lambda st: (np.zeros(g.n),), s, 0.25)
    np.testing.assert_array_equal(out.fields[0].values, s.fields[0].values)
    assert out.t == 0.55


@pytest.mark.parametrize("z", [-0.7, 0.3, -2.0])
def test_linear_step_is_taylor_polynomial(z):
    g = grid(8)
    s = State.from_arrays(g, [np.ones(g.n)])
    out = rk4_step(lambda st: (z * st.fields[0].values,), s, 1.0)
    taylor = 1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24
    np.testing.assert_allclose(out.fields[0].values, taylor, rtol=1e-15)


def test_snapshots_cadence_and_final_time():
    g = grid()
    s0 = State.from_arrays(g, [random_band_limited(g, 4, 0.1)])
    traj = integrate(CH, s0, StepControl(t_end=0.105, dt=0.01, record_every=3))
    t = traj.times
    assert t[0] == 0.0 and t[-1] == pytest.approx(0.105, abs=1e-14)
    assert np.all(np.diff(t) > 0)
    assert traj.steps == 11 and traj.reached_t_end


def test_zero_state_stays_zero_bitwise():
    g = grid(64)
    traj = integrate(CH, State.from_arrays(g, [np.zeros(g.n)]), StepControl(t_end=0.5, dt=0.05))
    assert all(not np.any(s.fields[0].values) for s in traj.snapshots)


def test_temporal_self_convergence_ratio():
    g = grid(256)
    s0 = State.from_arrays(g, [random_band_limited(g, 8, 0.07, seed=0)])

    def final(dt):
        return integrate(CH, s0, StepControl(t_end=0.5, dt=dt, record_every=10**6)).final.fields[0].values

    ref = final(0.002 / 8)
    e1 = np.max(np.abs(final(0.004) - ref))
    e2 = np.max(np.abs(final(0.002) - ref))
    assert 16 * 0.8 <= e1 / e2 <= 16 * 1.2


def test_time_translation_invariance():
    g = grid()
    s0 = State.from_arrays(g, [random_band_limited(g, 6, 0.1, seed=4)])
    direct = integrate(CH, s0, StepControl(t_end=0.2, dt=0.01)).final
    half = integrate(CH, s0, StepControl(t_end=0.1, dt=0.01)).final
    restarted = integrate(CH, half, StepControl(t_end=0.2, dt=0.01)).final
    assert restarted.t == pytest.approx(0.2)
    assert np.max(np.abs(direct.fields[0].values - restarted.fields[0].values)) <= 1e-12


def test_determinism():
    g = grid()
    s0 = State.from_arrays(g, [random_band_limited(g, 6, 0.1, seed=4)])
    a = integrate(CH, s0, StepControl(t_end=0.1, dt=0.01)).field_history()
    b = integrate(CH, s0, StepControl(t_end=0.1, dt=0.01)).field_history()
    np.testing.assert_array_equal(a, b)


def test_cfl_mode_respects_step_bound():
    g = grid(64)
    u0 = 2.0 * np.sin(2 * np.pi * g.nodes)
    traj = integrate(CH, State.from_arrays(g, [u0]), StepControl(t_end=0.01, cfl_safety=0.5))
    # dt = 0.5 dx / max(1, |u|) <= 0.25 dx
    assert traj.steps >= math.ceil(0.01 / (0.25 * g.dx))
    assert traj.final.t == pytest.approx(0.01)


def test_fornberg_whitham_steep_data_blows_up():
    g = grid(256)
    u0 = 5.0 * np.cos(2 * np.pi * g.nodes)
    traj = integrate(ModelSpec("fornberg_whitham"), State.from_arrays(g, [u0]),
                     StepControl(t_end=1.0, dt=5e-4))
    assert traj.blew_up and not traj.reached_t_end
    assert 0 < traj.blowup_time < 1.0
    assert traj.blowup_reason
    assert traj.final.t < traj.blowup_time


def test_amplitude_blowup_raised_from_stage():
    g = grid(8)
    s = State.from_arrays(g, [np.ones(g.n)])
    with pytest.raises(BlowUpError):
        rk4_step(lambda st: (np.full(g.n, np.inf),), s, 0.1)


def test_observer_fills_diagnostics():
    g = grid()
    obs = DiagnosticObserver(CH, ["mass_u"])
    s0 = State.from_arrays(g, [random_band_limited(g, 4, 0.1, mean=0.25)])
    traj = integrate(CH, s0, StepControl(t_end=0.05, dt=0.01), obs)
    assert traj.diagnostics is obs.series
    assert len(obs.series) == len(traj.snapshots)
    np.testing.assert_allclose(obs.series.values["mass_u"], 0.25, atol=1e-14)


def test_store_rates_matches_rhs():
    g = grid(64)
    s0 = State.from_arrays(g, [random_band_limited(g, 4, 0.1)])
    traj = integrate(CH, s0, StepControl(t_end=0.02, dt=0.01), store_rates=True)
    assert len(traj.rates) == len(traj.snapshots)
    for s, r in zip(traj.snapshots, traj.rates):
        np.testing.assert_array_equal(r[0], CH.rhs(s)[0])
