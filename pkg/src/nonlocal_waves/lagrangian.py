"""Particle paths ``q_t = u(t, q)`` and transport of density along them.

The accumulated stretching ``int_0^t u_x(tau, q(tau, x)) d tau`` is carried
with each particle, which yields both the Jacobian ``q_x`` and the
Lagrangian representation of a transported density ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import Field, GridKind, interpolate, interpolate_modes
from .stepper import Trajectory

CORE_MARGIN = 2.0


@dataclass(frozen=True)
class FlowMap:
    """Particle positions and Jacobians at the snapshot times of a run.

    ``positions`` live on the universal cover for the circle (unwrapped),
    ``exited`` marks particles that started in the line's core and later came
    within ``CORE_MARGIN`` of the boundary.
    """

    times: np.ndarray
    seeds: np.ndarray
    positions: np.ndarray
    stretch: np.ndarray
    exited: np.ndarray
    run_id: int

    @property
    def jacobian(self) -> np.ndarray:
        return np.exp(self.stretch)

    def wrapped(self, length: float, left: float = 0.0) -> np.ndarray:
        return left + np.mod(self.positions - left, length)


def _velocity_modes(traj: Trajectory, i: int, field_index: int):
    grid = traj.snapshots[i].grid
    ik = grid.symbol("ik")
    uh = np.fft.rfft(traj.snapshots[i].fields[field_index].values) / grid.n
    rh = np.fft.rfft(traj.rates[i][field_index]) / grid.n
    return np.stack([uh, ik * uh]), np.stack([rh, ik * rh])


def flow_map(traj: Trajectory, seeds=None, *, field_index: int = 0) -> FlowMap:
    """Integrate ``q_t = u(t, q)``, ``q(0) = seeds`` through a recorded run.

    One RK4 step is taken per snapshot interval. The velocity between
    snapshots is the cubic Hermite interpolant built from stored fields and
    rates (``integrate(..., store_rates=True)``); in space it is the Fourier
    interpolant. Seeds default to the grid nodes.
    """
    if len(traj.snapshots) < 1:
        raise ValueError("empty trajectory")
    if len(traj.rates) != len(traj.snapshots):
        raise ValueError("trajectory lacks stored rates; integrate with store_rates=True")
    grid = traj.snapshots[0].grid
    q = np.array(grid.nodes if seeds is None else seeds, dtype=float).ravel()
    if grid.kind is GridKind.LINE and np.any(np.abs(q) > grid.halfwidth):
        raise ValueError("seeds must lie inside the truncated domain")
    times = traj.times
    stretch = np.zeros_like(q)
    positions = [q.copy()]
    stretches = [stretch.copy()]
    core = grid.halfwidth - CORE_MARGIN
    started_inside = np.abs(q) < core if grid.kind is GridKind.LINE else np.ones(q.size, bool)
    exited = np.zeros(q.size, dtype=bool)

    cur, cur_rate = _velocity_modes(traj, 0, field_index)
    for i in range(1, len(times)):
        nxt, nxt_rate = _velocity_modes(traj, i, field_index)
        h = times[i] - times[i - 1]
        mid = 0.5 * (cur + nxt) + (h / 8.0) * (cur_rate - nxt_rate)

        def vel(modes, x):
            out = interpolate_modes(modes, grid, x)
            return out[0], out[1]

        a1, b1 = vel(cur, q)
        a2, b2 = vel(mid, q + 0.5 * h * a1)
        a3, b3 = vel(mid, q + 0.5 * h * a2)
        a4, b4 = vel(nxt, q + h * a3)
        q = q + (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)
        stretch = stretch + (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(stretch))):
            raise FloatingPointError(f"particle integration failed at t={times[i]:.6g}")
        if grid.kind is GridKind.LINE:
            exited |= started_inside & (np.abs(q) >= core)
        positions.append(q.copy())
        stretches.append(stretch.copy())
        cur, cur_rate = nxt, nxt_rate

    return FlowMap(
        times=times,
        seeds=positions[0],
        positions=np.array(positions),
        stretch=np.array(stretches),
        exited=exited,
        run_id=traj.run_id,
    )


def rho_along_characteristics(rho0: Field, fm: FlowMap, traj: Trajectory) -> np.ndarray:
    """``rho(t, q(t, x)) = rho0(x) exp(-int_0^t u_x(tau, q) d tau)`` per time and seed."""
    if fm.run_id != traj.run_id:
        raise ValueError(f"flow map belongs to run {fm.run_id}, trajectory is run {traj.run_id}")
    grid = rho0.grid
    if fm.seeds.shape == grid.nodes.shape and np.array_equal(fm.seeds, grid.nodes):
        r0 = np.asarray(rho0.values)
    else:
        r0 = interpolate(rho0.values, grid, fm.seeds)
    return r0[None, :] * np.exp(-fm.stretch)


def eulerian_at_particles(fm: FlowMap, traj: Trajectory, field_index: int = 1) -> np.ndarray:
    """Fourier-interpolate a recorded field at the particle positions, per time."""
    if fm.run_id != traj.run_id:
        raise ValueError(f"flow map belongs to run {fm.run_id}, trajectory is run {traj.run_id}")
    grid = traj.snapshots[0].grid
    return np.array([
        interpolate(s.fields[field_index].values, grid, fm.positions[i])
        for i, s in enumerate(traj.snapshots)
    ])


def finite_difference_jacobian(fm: FlowMap, length: float | None = None) -> np.ndarray:
    """Central differences of positions over equispaced seeds.

    With ``length`` the seeds are treated as one period of a circle (the
    neighbour of the last seed is the first seed shifted by ``length``);
    otherwise the two end seeds are dropped.
    """
    q = fm.positions
    h = fm.seeds[1] - fm.seeds[0]
    if length is not None:
        right = np.concatenate([q[:, 1:], q[:, :1] + length], axis=1)
        left = np.concatenate([q[:, -1:] - length, q[:, :-1]], axis=1)
        return (right - left) / (2 * h)
    return (q[:, 2:] - q[:, :-2]) / (2 * h)


@dataclass(frozen=True)
class SignReport:
    min_rho: float
    max_rho0: float
    tolerance: float
    status: str  # "pass", "fail" or "precondition-violated"

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def sign_persistence_check(traj: Trajectory, field_index: int = 1, rtol: float = 1e-8) -> SignReport:
    """Check that a non-negative initial density stays non-negative.

    Initial data with a negative value does not meet the hypothesis, which
    is reported as ``precondition-violated`` rather than as a failure.
    """
    rho0 = traj.snapshots[0].fields[field_index].values
    max0 = float(np.max(rho0))
    tol = rtol * max(max0, 0.0)
    min_rho = float(min(np.min(s.fields[field_index].values) for s in traj.snapshots))
    if np.min(rho0) < 0:
        status = "precondition-violated"
    elif min_rho >= -tol:
        status = "pass"
    else:
        status = "fail"
    return SignReport(min_rho=min_rho, max_rho0=max0, tolerance=tol, status=status)
