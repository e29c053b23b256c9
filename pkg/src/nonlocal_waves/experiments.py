"""Run, sweep and unique-continuation experiments driven by a config."""

from __future__ import annotations

import csv
import json
import logging
import math
import platform
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, emit_config, set_initial_param
from .domain import GridKind
from .initial_data import generate
from .invariants import DiagnosticObserver, drift_report
from .models import ModelId, State
from .stepper import Trajectory, integrate

logger = logging.getLogger(__name__)

EXIT_COMPLETED = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2

VANISHING_RTOL = 1e-10
BOUNDARY_BAND = 1.0


def build_state(cfg: ExperimentConfig) -> State:
    grid = cfg.grid.build()
    fields = []
    for i, init in enumerate(cfg.initial):
        params = init.kwargs()
        if init.generator == "random-band-limited" and "seed" not in params:
            params["seed"] = cfg.seed + i
        fields.append(generate(init.generator, grid, **params))
    return State(tuple(fields), 0.0)


def boundary_magnitude(state: State, band: float = BOUNDARY_BAND) -> float:
    """Largest ``|field|`` within ``band`` of the ends of a truncated line (0 on a circle)."""
    grid = state.grid
    if grid.kind is GridKind.CIRCLE:
        return 0.0
    near = np.abs(grid.nodes) >= grid.halfwidth - band
    return max(float(np.max(np.abs(f.values[near]))) for f in state.fields)


@dataclass
class RunReport:
    status: str
    exit_code: int
    t_final: float
    steps: int
    drift: dict[str, float]
    blowup_time: float | None = None
    blowup_reason: str | None = None
    boundary_magnitude: float = 0.0
    output_dir: str | None = None
    trajectory: Trajectory | None = field(default=None, repr=False)

    def summary(self) -> str:
        lines = [f"status: {self.status} (exit {self.exit_code})",
                 f"t_final: {self.t_final!r}  steps: {self.steps}"]
        if self.blowup_time is not None:
            lines.append(f"blow-up at t = {self.blowup_time!r}: {self.blowup_reason}")
        if self.boundary_magnitude:
            lines.append(f"boundary magnitude: {self.boundary_magnitude:.3e}")
        lines.append("max relative drift:")
        for k, v in self.drift.items():
            lines.append(f"  {k:<32s} {v:.3e}")
        if self.output_dir:
            lines.append(f"outputs: {self.output_dir}")
        return "\n".join(lines)


def _num(v) -> str:
    return f"{float(v):.17g}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])


def write_outputs(cfg: ExperimentConfig, traj: Trajectory, report: RunReport, out: Path) -> None:
    """Snapshots as one CSV each, diagnostics CSV, manifest and canonical config."""
    out.mkdir(parents=True, exist_ok=True)
    snapdir = out / "snapshots"
    snapdir.mkdir(exist_ok=True)
    names = cfg.model.field_names
    files = []
    for i, s in enumerate(traj.snapshots):
        if i % cfg.snapshot_every and i != len(traj.snapshots) - 1:
            continue
        fname = f"snapshot_{i:06d}.csv"
        cols = [s.grid.nodes] + [f.values for f in s.fields]
        _write_csv(snapdir / fname, ["x", *names], zip(*cols))
        files.append({"file": f"snapshots/{fname}", "t": s.t, "index": i})
    d = traj.diagnostics
    _write_csv(out / "diagnostics.csv", ["t", *d.names], d.as_array())
    (out / "config.ini").write_text(emit_config(cfg))
    manifest = {
        "package": "nonlocal_waves",
        "version": __version__,
        "python": platform.python_version(),
        "model": cfg.model.id.value,
        "fields": list(names),
        "grid": {"kind": cfg.grid.kind.value, "n": cfg.grid.n, "extent": cfg.grid.extent,
                 "length": s.grid.length},
        "status": report.status,
        "exit_code": report.exit_code,
        "t_final": report.t_final,
        "steps": report.steps,
        "blowup_time": report.blowup_time,
        "blowup_reason": report.blowup_reason,
        "boundary_magnitude": report.boundary_magnitude,
        "drift": report.drift,
        "diagnostics": list(d.names),
        "snapshots": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def simulate(cfg: ExperimentConfig, *, store_rates: bool = False, record_every=None):
    """Integrate a config in memory and return ``(trajectory, report)``."""
    s0 = build_state(cfg)
    ctl = cfg.control
    if record_every is not None:
        ctl = replace(ctl, record_every=record_every)
    obs = DiagnosticObserver(cfg.model, cfg.diagnostics)
    traj = integrate(cfg.model, s0, ctl, obs, store_rates=store_rates)
    drift = drift_report(obs.series)
    if traj.blew_up:
        status, code = "blow-up", EXIT_BLOWUP
    else:
        status, code = "completed", EXIT_COMPLETED
    report = RunReport(
        status=status,
        exit_code=code,
        t_final=traj.final.t,
        steps=traj.steps,
        drift=drift,
        blowup_time=traj.blowup_time,
        blowup_reason=traj.blowup_reason,
        boundary_magnitude=max(boundary_magnitude(s) for s in traj.snapshots),
        trajectory=traj,
    )
    return traj, report


def run(cfg: ExperimentConfig, *, write: bool = True) -> RunReport:
    """Build, integrate and (optionally) write outputs for one config."""
    traj, report = simulate(cfg)
    if write:
        out = cfg.output_path()
        write_outputs(cfg, traj, report, out)
        report.output_dir = str(out)
    return report


# --- sweeps ---------------------------------------------------------------

SWEEP_PARAMETERS = ("n", "dt", "delta", "L")


@dataclass
class SweepRow:
    value: float
    error: float
    order: float
    boundary: float
    status: str


@dataclass
class SweepTable:
    parameter: str
    rows: list[SweepRow]
    reference: float
    fitted_order: float

    def to_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["value", "error", "order", "boundary", "status"])
            for r in self.rows:
                w.writerow([_num(r.value), _num(r.error), _num(r.order),
                            _num(r.boundary), r.status])

    def format(self) -> str:
        lines = [f"sweep over {self.parameter} (reference {self.parameter} = {self.reference!r})",
                 f"{'value':>12s} {'error':>12s} {'order':>8s} {'boundary':>12s}"]
        for r in self.rows:
            lines.append(f"{r.value:12.5g} {r.error:12.4e} {r.order:8.3f} {r.boundary:12.4e}")
        lines.append(f"fitted order: {self.fitted_order:.3f}")
        return "\n".join(lines)


def _variant(cfg: ExperimentConfig, parameter: str, value) -> ExperimentConfig:
    if parameter == "n":
        return replace(cfg, grid=replace(cfg.grid, n=int(value)))
    if parameter == "dt":
        if cfg.control.dt is None:
            raise ValueError("a dt sweep needs a fixed-step config")
        return replace(cfg, control=replace(cfg.control, dt=float(value)))
    if parameter == "delta":
        return set_initial_param(cfg, "delta", float(value))
    if parameter == "L":
        if cfg.grid.kind is not GridKind.LINE:
            raise ValueError("an L sweep needs a truncated-line grid")
        return replace(cfg, grid=replace(cfg.grid, extent=float(value)))
    raise ValueError(f"cannot sweep {parameter!r}; choose from {SWEEP_PARAMETERS}")


def _field_error(fine: State, coarse: State) -> float:
    """Max-norm difference on the coarse nodes (which are a subset of the fine ones)."""
    ratio = fine.grid.n // coarse.grid.n
    return max(float(np.max(np.abs(f.values[::ratio] - c.values)))
               for f, c in zip(fine.fields, coarse.fields))


def _diag_error(a: RunReport, b: RunReport) -> float:
    da = a.trajectory.diagnostics
    db = b.trajectory.diagnostics
    return max(abs(da.values[n][-1] - db.values[n][-1]) for n in da.names)


def sweep(cfg: ExperimentConfig, parameter: str, values) -> SweepTable:
    """Repeat a run over ``values`` and compare each with the finest level.

    ``n`` and ``dt`` compare final fields in the max norm, ``delta`` and
    ``L`` compare final diagnostic values. Orders are
    ``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` with ``h`` the resolution
    (``1/n``, ``dt``, ``delta``); for ``L`` the column holds the exponential
    decay rate of the boundary magnitude.
    """
    values = [float(v) for v in values]
    if len(values) < 3:
        raise ValueError("a sweep needs at least three values to fit an order")
    if len(set(values)) != len(values):
        raise ValueError("sweep values must be distinct")
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"cannot sweep {parameter!r}; choose from {SWEEP_PARAMETERS}")
    # order from coarsest to finest
    finer_is_larger = parameter in ("n", "L")
    values.sort(reverse=not finer_is_larger)
    reports = [simulate(_variant(cfg, parameter, v))[1] for v in values]
    ref = reports[-1]
    errors = []
    for rep in reports:
        if parameter in ("n", "dt"):
            errors.append(_field_error(ref.trajectory.final, rep.trajectory.final))
        else:
            errors.append(_diag_error(ref, rep))
    bounds = [r.boundary_magnitude for r in reports]
    h = [1.0 / v if parameter == "n" else v for v in values]
    orders = [math.nan]
    for i in range(1, len(values)):
        if parameter == "L":
            b0, b1 = bounds[i - 1], bounds[i]
            ok = b0 > 0 and b1 > 0
            orders.append(math.log(b0 / b1) / (values[i] - values[i - 1]) if ok else math.nan)
        else:
            e0, e1 = errors[i - 1], errors[i]
            ok = e0 > 0 and e1 > 0
            orders.append(math.log(e0 / e1) / math.log(h[i - 1] / h[i]) if ok else math.nan)
    if parameter == "L":
        x = np.array(values)
        y = np.log(np.maximum(bounds, 1e-300))
        fitted = float(-np.polyfit(x, y, 1)[0])
    else:
        pts = [(math.log(hh), math.log(e)) for hh, e in zip(h[:-1], errors[:-1]) if e > 0]
        if len(pts) >= 2:
            xs, ys = zip(*pts)
            fitted = float(np.polyfit(xs, ys, 1)[0])
        else:
            fitted = math.nan
    rows = [SweepRow(v, e, o, b, r.status)
            for v, e, o, b, r in zip(values, errors, orders, bounds, reports)]
    return SweepTable(parameter, rows, values[-1], fitted)


# --- unique-continuation experiments ------------------------------------------

@dataclass
class ConsistencyReport:
    interval: tuple[float, float]
    threshold_rtol: float
    invasion_time: float | None
    max_in_interval: list[float]
    times: list[float]
    functionals_initial: dict[str, float]
    functionals_final: dict[str, float]
    drift: dict[str, float]
    blew_up: bool

    @property
    def message(self) -> str:
        if self.invasion_time is None:
            return ("solution stayed zero on the interval for the whole run; "
                    "this is consistent with unique continuation only for the zero solution")
        return (f"nonzero values entered [{self.interval[0]}, {self.interval[1]}] at "
                f"t* = {self.invasion_time!r}; consistent with unique continuation "
                "(a nonzero solution does not remain zero on an open set)")


@dataclass
class BurgersReport:
    max_discrepancy: float
    times: list[float]
    discrepancy: list[float]
    blew_up: bool

    @property
    def message(self) -> str:
        return (f"max |u_mEP - u_Burgers| = {self.max_discrepancy:.3e}; "
                "consistent with the rho = 0 Burgers reduction")


def _interval_of(cfg: ExperimentConfig) -> tuple[float, float]:
    init = cfg.initial[0]
    if init.generator == "zero":
        grid = cfg.grid.build()
        return grid.left, grid.left + grid.length
    if init.generator != "bump-vanishing-on":
        raise ValueError("the consistency experiment needs bump-vanishing-on (or zero) data for u")
    p = init.kwargs()
    return float(p["a"]), float(p["b"])


def consistency_experiment(cfg: ExperimentConfig) -> ConsistencyReport:
    """Evolve data vanishing on ``[a, b]`` and find when the interval is invaded."""
    a, b = _interval_of(cfg)
    traj, rep = simulate(cfg, record_every=1)
    grid = traj.snapshots[0].grid
    inside = (grid.nodes >= a) & (grid.nodes <= b)
    times, inner = [], []
    t_star = None
    for s in traj.snapshots:
        u = s.fields[0].values
        m_in = float(np.max(np.abs(u[inside]))) if inside.any() else 0.0
        m_all = float(np.max(np.abs(u)))
        times.append(s.t)
        inner.append(m_in)
        if t_star is None and m_all > 0 and m_in > VANISHING_RTOL * m_all:
            t_star = s.t
    d = traj.diagnostics
    first = {n: d.values[n][0] for n in d.names}
    last = {n: d.values[n][-1] for n in d.names}
    return ConsistencyReport((a, b), VANISHING_RTOL, t_star, inner, times, first, last,
                             rep.drift, traj.blew_up)


def burgers_rhs_reference(u: np.ndarray, length: float) -> np.ndarray:
    """``-u u_x`` with a spectral derivative and a two-thirds filter on the product.

    Self-contained on purpose: it shares no code with the model evaluators.
    """
    n = u.size
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)
    dk = 1j * k
    dk[-1] = 0.0
    ux = np.fft.irfft(dk * np.fft.rfft(u), n=n)
    prod = np.fft.rfft(u * ux)
    prod[np.arange(prod.size) > n // 3] = 0.0
    return -np.fft.irfft(prod, n=n)


def burgers_reference(u0: np.ndarray, length: float, dt: float, nsteps: int,
                      t_end: float) -> list[np.ndarray]:
    """Plain-array RK4 Burgers integration; returns the field after every step."""
    u = np.array(u0, dtype=float)
    out = [u.copy()]
    t = 0.0
    for _ in range(nsteps):
        h = min(dt, t_end - t)
        k1 = burgers_rhs_reference(u, length)
        k2 = burgers_rhs_reference(u + 0.5 * h * k1, length)
        k3 = burgers_rhs_reference(u + 0.5 * h * k2, length)
        k4 = burgers_rhs_reference(u + h * k3, length)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        out.append(u.copy())
    return out


def burgers_experiment(cfg: ExperimentConfig) -> BurgersReport:
    """mEP with ``rho0 = 0`` against an independent Burgers solve."""
    if cfg.model.id is not ModelId.MODIFIED_EULER_POISSON:
        raise ValueError("the Burgers reduction experiment needs a modified_euler_poisson config")
    if cfg.initial[1].generator != "zero":
        raise ValueError("the Burgers reduction experiment needs rho0 = 0 (generator = zero)")
    if cfg.control.dt is None:
        raise ValueError("the Burgers reduction experiment needs a fixed dt")
    traj, _ = simulate(cfg, record_every=1)
    grid = traj.snapshots[0].grid
    ref = burgers_reference(traj.snapshots[0].fields[0].values, grid.length,
                            cfg.control.dt, len(traj.snapshots) - 1, cfg.control.t_end)
    disc = [float(np.max(np.abs(s.fields[0].values - r))) for s, r in zip(traj.snapshots, ref)]
    return BurgersReport(max(disc), [s.t for s in traj.snapshots], disc, traj.blew_up)


def uc_experiment(cfg: ExperimentConfig, experiment: str):
    if experiment == "consistency":
        return consistency_experiment(cfg)
    if experiment == "burgers":
        return burgers_experiment(cfg)
    raise ValueError(f"unknown experiment {experiment!r}; choose consistency or burgers")
