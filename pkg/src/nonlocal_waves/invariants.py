"""Conserved functionals and drift auditing along trajectories."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .domain import (
    Field,
    Grid,
    GridKind,
    check_values,
    deriv2_values,
    deriv_values,
    dx_helmholtz_inverse_values,
    helmholtz_inverse_values,
    integrate,
)
from .models import ModelId, ModelSpec, State, get_nonlinearity, pi_projection


def _vals(f: Field) -> np.ndarray:
    return check_values(f.values, f.grid)


def mass(u: Field) -> float:
    """``int u dx`` by the periodic trapezoid rule."""
    return integrate(_vals(u), u.grid)


def h1_energy(u: Field) -> float:
    """``int (u^2 + u_x^2) dx``."""
    v = _vals(u)
    ux = deriv_values(v, u.grid)
    return integrate(v * v + ux * ux, u.grid)


def potential_ch_energy(u: Field) -> float:
    """``int (u_x^2 + u_xx^2) dx``."""
    v = _vals(u)
    ux = deriv_values(v, u.grid)
    uxx = deriv2_values(v, u.grid)
    return integrate(ux * ux + uxx * uxx, u.grid)


def pich_energy(u: Field, rho: Field) -> float:
    """``||u||_{H^1}^2 + ||rho - mean(rho)||_{L^2}^2`` on the circle."""
    if u.grid.kind is not GridKind.CIRCLE:
        raise ValueError("pi-CH energy is defined on the circle only")
    p = pi_projection(_vals(rho), rho.grid)
    return h1_energy(u) + integrate(p * p, rho.grid)


def zero_mean_antiderivative(v: np.ndarray, grid: Grid, rtol: float = 1e-10) -> np.ndarray:
    """Periodic ``z`` with ``z_x = v`` and zero mean.

    Raises ``ValueError`` if ``v`` has a mean above ``rtol * max(1, max|v|)``,
    since then no periodic antiderivative exists.
    """
    v = np.asarray(v, dtype=float)
    vhat = np.fft.rfft(v)
    if abs(vhat[0].real) / grid.n > rtol * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("v has nonzero mean; its antiderivative is not periodic")
    k = grid.rwavenumbers
    zhat = np.zeros_like(vhat)
    zhat[1:-1] = vhat[1:-1] / (1j * k[1:-1])
    return np.fft.irfft(zhat, n=grid.n)


def boussinesq_hamiltonian(u: Field, v: Field, f="square", *, project: bool = False) -> float:
    """``1/2 ||z||_{H^1}^2 + int P(u) dx`` with ``z_x = v`` and ``P' = f``.

    ``project=True`` drops the mean of ``v`` before integrating instead of
    rejecting it; this keeps the functional defined for flows that do not
    preserve a zero mean.
    """
    nl = get_nonlinearity(f)
    grid = u.grid
    vv = _vals(v)
    if project:
        vv = vv - np.mean(vv)
    z = zero_mean_antiderivative(vv, grid)
    zx = deriv_values(z, grid)
    return 0.5 * integrate(z * z + zx * zx, grid) + integrate(nl.antiderivative(_vals(u)), grid)


@dataclass(frozen=True)
class MEPFunctionals:
    h1_printed: float
    h1_variant: float
    h2: float
    rho_mass: float

    def __iter__(self):
        # (H1, H2, H) triple as printed; the variant rides along as an attribute
        return iter((self.h1_printed, self.h2, self.rho_mass))


def mep_functionals(u: Field, rho: Field) -> MEPFunctionals:
    """Hamiltonians of modified Euler-Poisson.

    ``h1_printed`` keeps the duplicated ``(H rho)^2`` term,
    ``h1_variant`` replaces the second copy by ``(d_x H rho)^2``.
    Unpacks as ``(h1_printed, h2, rho_mass)``.
    """
    grid = u.grid
    uv, rv = _vals(u), _vals(rho)
    phi = helmholtz_inverse_values(rv, grid)
    phix = dx_helmholtz_inverse_values(rv, grid)
    base = rv * uv * uv
    return MEPFunctionals(
        h1_printed=integrate(base + 2.0 * phi * phi, grid),
        h1_variant=integrate(base + phi * phi + phix * phix, grid),
        h2=integrate(uv * rv, grid),
        rho_mass=integrate(rv, grid),
    )


# Functional registry. Each entry maps a State (and the model) to a float.

def _l2(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(integrate(values * values, grid)))


FUNCTIONALS: dict[str, Callable[[State, ModelSpec], float]] = {
    "mass_u": lambda s, m: mass(s.fields[0]),
    "mass_rho": lambda s, m: mass(s.fields[1]),
    "mass_v": lambda s, m: mass(s.fields[1]),
    "h1_energy": lambda s, m: h1_energy(s.fields[0]),
    "potential_ch_energy": lambda s, m: potential_ch_energy(s.fields[0]),
    "pich_energy": lambda s, m: pich_energy(s.fields[0], s.fields[1]),
    "boussinesq_hamiltonian": lambda s, m: boussinesq_hamiltonian(
        s.fields[0], s.fields[1], m.nonlinearity
    ),
    "boussinesq_hamiltonian_projected": lambda s, m: boussinesq_hamiltonian(
        s.fields[0], s.fields[1], m.nonlinearity, project=True
    ),
    "mep_h1_printed": lambda s, m: mep_functionals(s.fields[0], s.fields[1]).h1_printed,
    "mep_h1_variant": lambda s, m: mep_functionals(s.fields[0], s.fields[1]).h1_variant,
    "mep_h2": lambda s, m: mep_functionals(s.fields[0], s.fields[1]).h2,
    "max_abs_u": lambda s, m: s.fields[0].max_abs(),
    "l2_u": lambda s, m: _l2(s.fields[0].values, s.grid),
    "max_abs_ux": lambda s, m: float(
        np.max(np.abs(deriv_values(s.fields[0].values, s.grid)))
    ),
    "min_second": lambda s, m: float(np.min(s.fields[1].values)),
}

_ALLOWED = {
    ModelId.B_FAMILY: {"mass_u", "h1_energy", "potential_ch_energy"},
    ModelId.FORNBERG_WHITHAM: {"mass_u", "h1_energy"},
    ModelId.POTENTIAL_CH: {"mass_u", "h1_energy", "potential_ch_energy"},
    ModelId.PI_CH: {"mass_u", "mass_rho", "h1_energy", "pich_energy", "min_second"},
    ModelId.BOUSSINESQ: {
        "mass_u", "mass_v", "h1_energy", "boussinesq_hamiltonian",
        "boussinesq_hamiltonian_projected",
    },
    ModelId.MODIFIED_EULER_POISSON: {
        "mass_u", "mass_rho", "h1_energy", "mep_h1_printed", "mep_h1_variant",
        "mep_h2", "min_second",
    },
}
_NORMS = {"max_abs_u", "l2_u", "max_abs_ux"}

DEFAULT_DIAGNOSTICS = {
    ModelId.B_FAMILY: ["mass_u", "h1_energy"],
    ModelId.FORNBERG_WHITHAM: ["mass_u"],
    ModelId.POTENTIAL_CH: ["potential_ch_energy"],
    ModelId.PI_CH: ["mass_u", "mass_rho", "pich_energy"],
    ModelId.BOUSSINESQ: ["mass_u", "mass_v", "boussinesq_hamiltonian"],
    ModelId.MODIFIED_EULER_POISSON: ["mass_rho", "mep_h2", "mep_h1_printed", "mep_h1_variant"],
}


def functionals_for(model: ModelSpec) -> list[str]:
    """Names valid for ``model``, conserved quantities first."""
    return sorted(_ALLOWED[model.id]) + sorted(_NORMS)


def validate_names(model: ModelSpec, names) -> list[str]:
    names = list(names)
    allowed = _ALLOWED[model.id] | _NORMS
    bad = [n for n in names if n not in allowed]
    if bad:
        raise ValueError(
            f"functional(s) {bad} not defined for {model.id.value}; "
            f"choose from {sorted(allowed)}"
        )
    return names


def evaluate(state: State, model: ModelSpec, names) -> dict[str, float]:
    return {name: float(FUNCTIONALS[name](state, model)) for name in names}


@dataclass
class DiagnosticSeries:
    names: list[str]
    times: list[float] = field(default_factory=list)
    values: dict[str, list[float]] = field(default_factory=dict)

    def __post_init__(self):
        for n in self.names:
            self.values.setdefault(n, [])

    def append(self, t: float, row: dict[str, float]) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError("diagnostic times must increase")
        self.times.append(float(t))
        for n in self.names:
            self.values[n].append(float(row[n]))

    def __len__(self) -> int:
        return len(self.times)

    def as_array(self) -> np.ndarray:
        """Rows of ``(t, v_1, ..., v_m)`` in ``names`` order."""
        cols = [self.times] + [self.values[n] for n in self.names]
        return np.column_stack(cols) if self.times else np.empty((0, len(cols)))


class DiagnosticObserver:
    """Stepper callback that evaluates functionals at every recorded state."""

    def __init__(self, model: ModelSpec, names=None):
        self.model = model
        names = DEFAULT_DIAGNOSTICS[model.id] if names is None else names
        self.series = DiagnosticSeries(validate_names(model, names))

    def __call__(self, state: State) -> None:
        self.series.append(state.t, evaluate(state, self.model, self.series.names))


def drift_report(d: DiagnosticSeries) -> dict[str, float]:
    """Max over time of ``|H(t) - H(0)| / max(1, |H(0)|)`` per functional."""
    if len(d) == 0:
        raise ValueError("empty diagnostic series")
    out = {}
    for name in d.names:
        v = np.asarray(d.values[name], dtype=float)
        out[name] = float(np.max(np.abs(v - v[0])) / max(1.0, abs(v[0])))
    return out
