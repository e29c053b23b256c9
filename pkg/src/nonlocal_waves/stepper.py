"""Classical RK4 time stepping with blow-up detection and snapshot recording."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .domain import NonFiniteError, deriv_values
from .models import ModelSpec, State

logger = logging.getLogger(__name__)

Rhs = Callable[[State], tuple]

BLOWUP_AMPLITUDE = 1e8

_run_ids = itertools.count(1)


class BlowUpError(RuntimeError):
    """Non-finite or unbounded values appeared during a step."""

    def __init__(self, t: float, max_norm: float, reason: str):
        super().__init__(f"blow-up at t={t:.6g} ({reason}, max-norm {max_norm:.3g})")
        self.t = t
        self.max_norm = max_norm
        self.reason = reason


@dataclass(frozen=True)
class StepControl:
    """Step-size policy: exactly one of ``dt`` and ``cfl_safety``.

    ``t_end`` is an absolute time. ``slope_limit`` caps ``max |u_x|`` before
    a run is declared broken; ``None`` picks ``max(1, max|u0|) / dx``.
    """

    t_end: float
    dt: float | None = None
    cfl_safety: float | None = None
    record_every: int = 1
    max_steps: int = 10_000_000
    slope_limit: float | None = None

    def __post_init__(self):
        if (self.dt is None) == (self.cfl_safety is None):
            raise ValueError("set exactly one of dt and cfl_safety")
        if self.dt is not None and not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be positive")
        if self.cfl_safety is not None and not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if not (np.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError("t_end must be positive")
        if int(self.record_every) < 1:
            raise ValueError("record_every must be a positive integer")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be a positive integer")


@dataclass
class Trajectory:
    """Recorded states of one run.

    ``rates`` holds the right-hand side evaluated at each snapshot; particle
    tracking uses it for cubic Hermite interpolation in time.
    """

    snapshots: list[State] = field(default_factory=list)
    rates: list[tuple[np.ndarray, ...]] = field(default_factory=list)
    diagnostics: object = None
    blew_up: bool = False
    blowup_time: float | None = None
    blowup_norm: float | None = None
    blowup_reason: str | None = None
    steps: int = 0
    reached_t_end: bool = False
    model: ModelSpec | None = None
    run_id: int = field(default_factory=lambda: next(_run_ids))

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> State:
        return self.snapshots[-1]

    def field_history(self, index: int = 0) -> np.ndarray:
        return np.array([s.fields[index].values for s in self.snapshots])


def _stage(s: State, k, h: float, t: float) -> State:
    try:
        return State.from_arrays(s.grid, [a + h * b for a, b in zip(s.arrays, k)], t)
    except NonFiniteError:
        raise BlowUpError(t, np.inf, "non-finite stage") from None


def _eval(rhs: Rhs, s: State) -> tuple:
    try:
        k = rhs(s)
    except NonFiniteError:
        raise BlowUpError(s.t, np.inf, "non-finite rate") from None
    if not all(np.all(np.isfinite(a)) for a in k):
        raise BlowUpError(s.t, np.inf, "non-finite rate")
    return k


def rk4_step(rhs: Rhs, s: State, dt: float, k1=None) -> State:
    """One classical Runge-Kutta step of size ``dt``.

    ``k1`` may carry a precomputed ``rhs(s)``. Raises :class:`BlowUpError`
    on any non-finite stage.
    """
    if not (np.isfinite(dt) and dt > 0):
        raise ValueError("dt must be positive")
    if k1 is None:
        k1 = _eval(rhs, s)
    half = s.t + 0.5 * dt
    k2 = _eval(rhs, _stage(s, k1, 0.5 * dt, half))
    k3 = _eval(rhs, _stage(s, k2, 0.5 * dt, half))
    k4 = _eval(rhs, _stage(s, k3, dt, s.t + dt))
    arrays = [
        a + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(s.arrays, k1, k2, k3, k4)
    ]
    try:
        return State.from_arrays(s.grid, arrays, s.t + dt)
    except NonFiniteError:
        raise BlowUpError(s.t + dt, np.inf, "non-finite update") from None


def _check_bounds(s: State, slope_limit: float) -> None:
    norm = s.max_abs()
    if norm > BLOWUP_AMPLITUDE:
        raise BlowUpError(s.t, norm, "amplitude above 1e8")
    slope = np.max(np.abs(deriv_values(s.fields[0].values, s.grid)))
    if slope > slope_limit:
        raise BlowUpError(s.t, norm, f"slope {slope:.3g} above {slope_limit:.3g}")


def integrate(
    model: ModelSpec | Rhs,
    s0: State,
    ctl: StepControl,
    observer: Callable[[State], None] | None = None,
    *,
    store_rates: bool = False,
) -> Trajectory:
    """Advance ``s0`` to ``ctl.t_end`` and record every ``record_every`` steps.

    ``model`` is a :class:`ModelSpec` or a bare right-hand-side callable.
    The observer sees the initial state, every recorded state and the
    final state. A blow-up stops the run and is flagged on the returned
    trajectory, which keeps everything recorded up to that point.
    """
    if isinstance(model, ModelSpec):
        if s0.arity != model.arity:
            raise ValueError(f"{model.id.value} expects {model.arity} fields, got {s0.arity}")
        model.check_grid(s0.grid)
        rhs = model.rhs
        spec = model
    else:
        rhs, spec = model, None
    if ctl.t_end <= s0.t:
        raise ValueError("t_end must lie after the initial time")

    grid = s0.grid
    slope_limit = ctl.slope_limit
    if slope_limit is None:
        slope_limit = max(1.0, s0.fields[0].max_abs()) / grid.dx
    traj = Trajectory(model=spec)
    if observer is not None and hasattr(observer, "series"):
        traj.diagnostics = observer.series

    def record(state: State, k) -> None:
        traj.snapshots.append(state)
        if store_rates:
            traj.rates.append(tuple(np.array(a) for a in k))
        if observer is not None:
            observer(state)

    s = s0
    try:
        k = _eval(rhs, s) if store_rates else None
    except BlowUpError as exc:
        traj.snapshots.append(s)
        _flag(traj, exc)
        return traj
    record(s, k)
    step = 0
    tol = 1e-12 * max(1.0, abs(ctl.t_end))
    while s.t < ctl.t_end - tol:
        if step >= ctl.max_steps:
            logger.warning("max_steps=%d reached at t=%g", ctl.max_steps, s.t)
            break
        if ctl.dt is not None:
            dt = ctl.dt
        else:
            dt = ctl.cfl_safety * grid.dx / max(1.0, s.max_abs())
        dt = min(dt, ctl.t_end - s.t)
        try:
            s_new = rk4_step(rhs, s, dt, k1=k)
            if abs(s_new.t - ctl.t_end) <= tol:
                s_new = State(s_new.fields, ctl.t_end)
            _check_bounds(s_new, slope_limit)
            step += 1
            final = s_new.t >= ctl.t_end - tol
            need_rate = store_rates and (step % ctl.record_every == 0 or final)
            k = _eval(rhs, s_new) if need_rate else None
        except BlowUpError as exc:
            traj.steps = step
            if traj.snapshots[-1] is not s:
                record(s, _safe_rate(rhs, s, store_rates))
            _flag(traj, exc)
            return traj
        s = s_new
        if step % ctl.record_every == 0 or final:
            record(s, k)
        if not store_rates:
            k = None
    traj.steps = step
    traj.reached_t_end = s.t >= ctl.t_end - tol
    return traj


def _safe_rate(rhs: Rhs, s: State, store_rates: bool):
    if not store_rates:
        return None
    try:
        return _eval(rhs, s)
    except BlowUpError:
        return tuple(np.full_like(a, np.nan) for a in s.arrays)


def _flag(traj: Trajectory, exc: BlowUpError) -> None:
    traj.blew_up = True
    traj.blowup_time = exc.t
    traj.blowup_norm = exc.max_norm
    traj.blowup_reason = exc.reason
    logger.info("run %d: %s", traj.run_id, exc)
