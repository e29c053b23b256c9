"""Experiment configuration: flat ``key = value`` files with section headers.

Example::

    [run]
    seed = 0

    [model]
    id = b_family
    b = 2.0

    [grid]
    kind = circle
    n = 1024
    extent = 1.0

    [initial.u]
    generator = random-band-limited
    kmax = 8
    amplitude = 0.05

    [control]
    dt = 0.001
    t_end = 1.0
    record_every = 100

    [diagnostics]
    names = mass_u, h1_energy

    [output]
    directory = runs/ch
    snapshot_every = 1

``emit_config`` writes the canonical form; parsing it back and emitting
again yields identical bytes.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, replace
from pathlib import Path

from .domain import GridKind, make_grid
from .initial_data import PARAMETERS
from .invariants import DEFAULT_DIAGNOSTICS, validate_names
from .models import ModelId, ModelSpec
from .stepper import StepControl

OUTPUT_ROOT_ENV = "NONLOCAL_WAVES_OUTPUT_ROOT"


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class GridConfig:
    kind: GridKind = GridKind.CIRCLE
    n: int = 256
    extent: float = 1.0

    def build(self):
        return make_grid(self.kind, self.n, self.extent)


@dataclass(frozen=True)
class InitialData:
    generator: str = "zero"
    params: tuple[tuple[str, object], ...] = ()

    def kwargs(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec
    grid: GridConfig
    initial: tuple[InitialData, ...]
    control: StepControl
    diagnostics: tuple[str, ...]
    output_dir: str = "runs/default"
    snapshot_every: int = 1
    seed: int = 0

    def with_updates(self, **changes) -> ExperimentConfig:
        return replace(self, **changes)

    def output_path(self) -> Path:
        root = os.environ.get(OUTPUT_ROOT_ENV)
        path = Path(self.output_dir)
        if root and not path.is_absolute():
            return Path(root) / path
        return path


_SECTIONS = ("run", "model", "grid", "control", "diagnostics", "output")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _get(section, key, conv, where, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"[{where}] missing required key {key!r}")
        return default
    raw = section[key]
    try:
        if conv is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        return conv(raw.strip())
    except ValueError:
        raise ConfigError(f"[{where}] {key} = {raw!r}: expected {conv.__name__}") from None


def _check_keys(section, allowed, where):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"[{where}] unknown key(s): {', '.join(extra)}")


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse configuration text. Errors name the offending section/key or line."""
    cp = configparser.ConfigParser(
        interpolation=None, default_section="__no_default__", strict=True
    )
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    known = set(_SECTIONS)
    for name in cp.sections():
        if name not in known and not name.startswith("initial."):
            raise ConfigError(f"{source}: unknown section [{name}]")

    def sec(name):
        return cp[name] if cp.has_section(name) else {}

    run = sec("run")
    _check_keys(run, ["seed"], "run")
    seed = _get(run, "seed", int, "run", 0)

    m = sec("model")
    _check_keys(m, ["id", "b", "nonlinearity", "printed_sign"], "model")
    try:
        mid = ModelId.parse(_get(m, "id", str, "model", required=True))
    except ValueError as exc:
        raise ConfigError(f"[model] id: {exc}") from None
    kwargs = {"id": mid}
    if mid is ModelId.B_FAMILY:
        kwargs["b"] = _get(m, "b", float, "model", 2.0)
    elif "b" in m:
        raise ConfigError("[model] b is only meaningful for b_family")
    if mid is ModelId.BOUSSINESQ:
        kwargs["nonlinearity"] = _get(m, "nonlinearity", str, "model", "square")
        kwargs["printed_sign"] = _get(m, "printed_sign", bool, "model", False)
    elif "nonlinearity" in m or "printed_sign" in m:
        raise ConfigError("[model] nonlinearity/printed_sign apply to boussinesq only")
    try:
        model = ModelSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from None

    g = sec("grid")
    _check_keys(g, ["kind", "n", "extent"], "grid")
    try:
        kind = GridKind.parse(_get(g, "kind", str, "grid", "circle"))
    except ValueError as exc:
        raise ConfigError(f"[grid] kind: {exc}") from None
    grid = GridConfig(kind, _get(g, "n", int, "grid", required=True),
                      _get(g, "extent", float, "grid", 1.0))
    try:
        grid.build()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[grid] {exc}") from None
    if model.id is ModelId.PI_CH and kind is not GridKind.CIRCLE:
        raise ConfigError("[grid] kind: pi_ch requires a circle grid")

    initial = []
    for fname in model.field_names:
        where = f"initial.{fname}"
        s = sec(where)
        gen = _get(s, "generator", str, where, "zero")
        if gen not in PARAMETERS:
            raise ConfigError(f"[{where}] generator: unknown {gen!r}; "
                              f"choose from {sorted(PARAMETERS)}")
        spec = PARAMETERS[gen]
        _check_keys(s, ["generator", *spec], where)
        params = tuple((k, _get(s, k, spec[k], where)) for k in spec if k in s)
        initial.append(InitialData(gen, params))
    for name in cp.sections():
        if name.startswith("initial.") and name[8:] not in model.field_names:
            raise ConfigError(f"[{name}] is not a field of {model.id.value} "
                              f"(fields: {', '.join(model.field_names)})")

    c = sec("control")
    _check_keys(c, ["dt", "cfl_safety", "t_end", "record_every", "max_steps", "slope_limit"],
                "control")
    try:
        control = StepControl(
            t_end=_get(c, "t_end", float, "control", required=True),
            dt=_get(c, "dt", float, "control"),
            cfl_safety=_get(c, "cfl_safety", float, "control"),
            record_every=_get(c, "record_every", int, "control", 1),
            max_steps=_get(c, "max_steps", int, "control", 10_000_000),
            slope_limit=_get(c, "slope_limit", float, "control"),
        )
    except ValueError as exc:
        raise ConfigError(f"[control] {exc}") from None

    d = sec("diagnostics")
    _check_keys(d, ["names"], "diagnostics")
    if "names" in d:
        names = tuple(n.strip() for n in d["names"].split(",") if n.strip())
    else:
        names = tuple(DEFAULT_DIAGNOSTICS[model.id])
    try:
        validate_names(model, names)
    except ValueError as exc:
        raise ConfigError(f"[diagnostics] names: {exc}") from None

    o = sec("output")
    _check_keys(o, ["directory", "snapshot_every"], "output")
    snapshot_every = _get(o, "snapshot_every", int, "output", 1)
    if snapshot_every < 1:
        raise ConfigError("[output] snapshot_every must be a positive integer")

    return ExperimentConfig(
        model=model,
        grid=grid,
        initial=tuple(initial),
        control=control,
        diagnostics=names,
        output_dir=_get(o, "directory", str, "output", "runs/default"),
        snapshot_every=snapshot_every,
        seed=seed,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, source=str(path))


def emit_config(cfg: ExperimentConfig) -> str:
    """Canonical text form: fixed section and key order, ``repr`` floats."""
    lines: list[str] = []

    def section(name, items):
        lines.append(f"[{name}]")
        for k, v in items:
            if v is not None:
                lines.append(f"{k} = {_fmt(v)}")
        lines.append("")

    section("run", [("seed", cfg.seed)])
    m = cfg.model
    items = [("id", m.id.value)]
    if m.id is ModelId.B_FAMILY:
        items.append(("b", float(m.b)))
    if m.id is ModelId.BOUSSINESQ:
        items += [("nonlinearity", m.nonlinearity), ("printed_sign", m.printed_sign)]
    section("model", items)
    section("grid", [("kind", cfg.grid.kind.value), ("n", cfg.grid.n),
                     ("extent", float(cfg.grid.extent))])
    for fname, init in zip(m.field_names, cfg.initial):
        spec = PARAMETERS[init.generator]
        params = init.kwargs()
        section(f"initial.{fname}", [("generator", init.generator)]
                + [(k, params[k]) for k in spec if k in params])
    c = cfg.control
    section("control", [
        ("dt", c.dt), ("cfl_safety", c.cfl_safety), ("t_end", float(c.t_end)),
        ("record_every", c.record_every), ("max_steps", c.max_steps),
        ("slope_limit", c.slope_limit),
    ])
    section("diagnostics", [("names", ", ".join(cfg.diagnostics))])
    section("output", [("directory", cfg.output_dir), ("snapshot_every", cfg.snapshot_every)])
    return "\n".join(lines)


def default_config(model: str = "b_family", **overrides) -> ExperimentConfig:
    """A small ready-to-run configuration, mainly for tests and ``verify``."""
    spec = ModelSpec(model)
    cfg = ExperimentConfig(
        model=spec,
        grid=GridConfig(GridKind.CIRCLE, 256, 1.0),
        initial=tuple(InitialData() for _ in spec.field_names),
        control=StepControl(t_end=0.1, dt=1e-3, record_every=10),
        diagnostics=tuple(DEFAULT_DIAGNOSTICS[spec.id]),
    )
    return replace(cfg, **overrides)


def set_initial_param(cfg: ExperimentConfig, key: str, value, field_index: int | None = None):
    """Return ``cfg`` with generator parameter ``key`` set on every field that takes it."""
    new = []
    hit = False
    for i, init in enumerate(cfg.initial):
        if (field_index is None or i == field_index) and key in PARAMETERS[init.generator]:
            conv = PARAMETERS[init.generator][key]
            params = dict(init.params)
            params[key] = conv(value)
            new.append(InitialData(init.generator, tuple(params.items())))
            hit = True
        else:
            new.append(init)
    if not hit:
        raise ConfigError(f"no initial-data generator takes parameter {key!r}")
    return replace(cfg, initial=tuple(new))
