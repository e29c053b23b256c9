"""Right-hand sides of the six nonlocal evolution equations.

Every model is written as ``U_t = R(U)`` with ``U`` a tuple of one or two
fields. Quadratic products are evaluated pointwise and filtered with the
two-thirds rule; linear nonlocal terms use the Fourier symbols from
:mod:`nonlocal_waves.domain`.
"""

from __future__ import annotations

import enum
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .domain import (
    Field,
    Grid,
    GridKind,
    dealias_values,
    deriv2_values,
    deriv_values,
    dx_helmholtz_inverse_values,
    helmholtz_inverse_values,
)


class ModelId(str, enum.Enum):
    B_FAMILY = "b_family"
    FORNBERG_WHITHAM = "fornberg_whitham"
    POTENTIAL_CH = "potential_ch"
    PI_CH = "pi_ch"
    BOUSSINESQ = "boussinesq"
    MODIFIED_EULER_POISSON = "modified_euler_poisson"

    @classmethod
    def parse(cls, value: ModelId | str) -> ModelId:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "bfamily": cls.B_FAMILY,
            "b": cls.B_FAMILY,
            "ch": cls.B_FAMILY,
            "fornbergwhitham": cls.FORNBERG_WHITHAM,
            "fw": cls.FORNBERG_WHITHAM,
            "potentialch": cls.POTENTIAL_CH,
            "pich": cls.PI_CH,
            "mep": cls.MODIFIED_EULER_POISSON,
            "modifiedeulerpoisson": cls.MODIFIED_EULER_POISSON,
        }
        for member in cls:
            if member.value == key:
                return member
        try:
            return aliases[key.replace("_", "")]
        except KeyError:
            raise ValueError(f"unknown model {value!r}") from None


ARITY = {
    ModelId.B_FAMILY: 1,
    ModelId.FORNBERG_WHITHAM: 1,
    ModelId.POTENTIAL_CH: 1,
    ModelId.PI_CH: 2,
    ModelId.BOUSSINESQ: 2,
    ModelId.MODIFIED_EULER_POISSON: 2,
}

FIELD_NAMES = {
    ModelId.B_FAMILY: ("u",),
    ModelId.FORNBERG_WHITHAM: ("u",),
    ModelId.POTENTIAL_CH: ("u",),
    ModelId.PI_CH: ("u", "rho"),
    ModelId.BOUSSINESQ: ("u", "v"),
    ModelId.MODIFIED_EULER_POISSON: ("u", "rho"),
}


@dataclass(frozen=True)
class Nonlinearity:
    """Smooth ``f >= 0`` vanishing only at 0, with antiderivative ``P(u) = int_0^u f``."""

    name: str
    f: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    antiderivative: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    quadratic: bool = field(default=False, compare=False)


NONLINEARITIES = {
    "square": Nonlinearity("square", lambda u: u * u, lambda u: u**3 / 3.0, True),
    "quartic": Nonlinearity("quartic", lambda u: u**4, lambda u: u**5 / 5.0),
    "abs_cube": Nonlinearity(
        "abs_cube", lambda u: np.abs(u) ** 3, lambda u: np.sign(u) * u**4 / 4.0
    ),
}


def get_nonlinearity(name: str | Nonlinearity) -> Nonlinearity:
    if isinstance(name, Nonlinearity):
        return name
    try:
        return NONLINEARITIES[name]
    except KeyError:
        raise ValueError(
            f"unknown nonlinearity {name!r}; choose from {sorted(NONLINEARITIES)}"
        ) from None


@dataclass(frozen=True)
class ModelSpec:
    """Which equation to solve, with its parameters.

    ``b`` is only read by the b-family, ``nonlinearity`` only by Boussinesq.
    ``printed_sign`` switches Boussinesq to ``v_t = H f + f`` (kept for the
    sign comparison experiment; the default is ``v_t = H f - f`` where ``H``
    is the inverse Helmholtz operator).
    """

    id: ModelId
    b: float = 2.0
    nonlinearity: str = "square"
    printed_sign: bool = False

    def __post_init__(self):
        object.__setattr__(self, "id", ModelId.parse(self.id))
        if self.id is ModelId.B_FAMILY:
            if not np.isfinite(self.b):
                raise ValueError("b must be finite")
            if not 0.0 <= self.b <= 3.0:
                warnings.warn(
                    f"b = {self.b} lies outside [0, 3]", RuntimeWarning, stacklevel=3
                )
        if self.id is ModelId.BOUSSINESQ:
            get_nonlinearity(self.nonlinearity)

    @property
    def arity(self) -> int:
        return ARITY[self.id]

    @property
    def field_names(self) -> tuple[str, ...]:
        return FIELD_NAMES[self.id]

    def check_grid(self, grid: Grid) -> None:
        if self.id is ModelId.PI_CH and grid.kind is not GridKind.CIRCLE:
            raise ValueError("the pi-CH system is defined on the circle only")
        if self.id is ModelId.POTENTIAL_CH and grid.kind is GridKind.CIRCLE:
            warnings.warn(
                "potential CH on the circle is experimental", RuntimeWarning, stacklevel=3
            )

    def rhs(self, s: State) -> tuple[np.ndarray, ...]:
        if s.arity != self.arity:
            raise ValueError(f"{self.id.value} expects {self.arity} fields, got {s.arity}")
        if self.id is ModelId.B_FAMILY:
            return rhs_b_family(s, self.b)
        if self.id is ModelId.FORNBERG_WHITHAM:
            return rhs_fornberg_whitham(s)
        if self.id is ModelId.POTENTIAL_CH:
            return rhs_potential_ch(s)
        if self.id is ModelId.PI_CH:
            return rhs_pi_ch(s)
        if self.id is ModelId.BOUSSINESQ:
            return rhs_boussinesq(s, self.nonlinearity, printed_sign=self.printed_sign)
        return rhs_mep(s)


@dataclass(frozen=True, eq=False)
class State:
    """Fields at time ``t``; all fields share one grid."""

    fields: tuple[Field, ...]
    t: float = 0.0

    def __post_init__(self):
        fs = tuple(self.fields)
        if not fs or len(fs) > 2:
            raise ValueError("a state carries one or two fields")
        grid = fs[0].grid
        if any(f.grid != grid for f in fs[1:]):
            raise ValueError("all fields of a state must share one grid")
        if not np.isfinite(self.t):
            raise ValueError("state time must be finite")
        object.__setattr__(self, "fields", fs)
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def from_arrays(cls, grid: Grid, arrays: Sequence, t: float = 0.0) -> State:
        return cls(tuple(Field(a, grid) for a in arrays), t)

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @property
    def arity(self) -> int:
        return len(self.fields)

    @property
    def arrays(self) -> tuple[np.ndarray, ...]:
        return tuple(f.values for f in self.fields)

    def max_abs(self) -> float:
        return max(f.max_abs() for f in self.fields)


def _expect(s: State, arity: int, name: str) -> None:
    if s.arity != arity:
        raise ValueError(f"{name} expects {arity} field(s), got {s.arity}")


def _product(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    return dealias_values(a * b, grid)


def rhs_b_family(s: State, b: float) -> tuple[np.ndarray]:
    """``u_t = -u u_x - d_x H(b/2 u^2 + (3-b)/2 u_x^2)``."""
    _expect(s, 1, "b-family")
    if not np.isfinite(b):
        raise ValueError("b must be finite")
    grid = s.grid
    u = s.fields[0].values
    ux = deriv_values(u, grid)
    forcing = (0.5 * b) * _product(u, u, grid) + (0.5 * (3.0 - b)) * _product(ux, ux, grid)
    return (-_product(u, ux, grid) - dx_helmholtz_inverse_values(forcing, grid),)


def rhs_fornberg_whitham(s: State) -> tuple[np.ndarray]:
    """``u_t = -3/2 u u_x + d_x H u``."""
    _expect(s, 1, "Fornberg-Whitham")
    grid = s.grid
    u = s.fields[0].values
    ux = deriv_values(u, grid)
    return (-1.5 * _product(u, ux, grid) + dx_helmholtz_inverse_values(u, grid),)


def rhs_potential_ch(s: State) -> tuple[np.ndarray]:
    """``u_t = u_x^2 / 2 + H(u_x^2 + u_xx^2 / 2)``."""
    _expect(s, 1, "potential CH")
    grid = s.grid
    u = s.fields[0].values
    ux = deriv_values(u, grid)
    uxx = deriv2_values(u, grid)
    ux2 = _product(ux, ux, grid)
    return (0.5 * ux2 + helmholtz_inverse_values(ux2 + 0.5 * _product(uxx, uxx, grid), grid),)


def pi_projection(rho: np.ndarray, grid: Grid) -> np.ndarray:
    """``rho`` minus its mean over the circle."""
    rho = np.asarray(rho, dtype=float)
    return rho - np.mean(rho)


def rhs_pi_ch(s: State) -> tuple[np.ndarray, np.ndarray]:
    """pi-CH system carried on ``(u, rho)`` with the mean of ``rho`` frozen."""
    _expect(s, 2, "pi-CH")
    grid = s.grid
    if grid.kind is not GridKind.CIRCLE:
        raise ValueError("the pi-CH system is defined on the circle only")
    u, rho = s.fields[0].values, s.fields[1].values
    p = pi_projection(rho, grid)
    ux = deriv_values(u, grid)
    rhox = deriv_values(rho, grid)
    forcing = _product(u, u, grid) + 0.5 * _product(ux, ux, grid) + 0.5 * _product(p, p, grid)
    du = -_product(u, ux, grid) - dx_helmholtz_inverse_values(forcing, grid)
    drho = -_product(u, rhox, grid) - _product(p, ux, grid)
    drho = drho - np.mean(drho)
    return du, drho


def rhs_boussinesq(
    s: State, f: str | Nonlinearity = "square", *, printed_sign: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """``u_t = v``, ``v_t = H f(u) - f(u)`` (``+ f(u)`` if ``printed_sign``)."""
    _expect(s, 2, "Boussinesq")
    grid = s.grid
    nl = get_nonlinearity(f)
    u, v = s.fields[0].values, s.fields[1].values
    fu = dealias_values(nl.f(u), grid) if nl.quadratic else nl.f(u)
    sign = 1.0 if printed_sign else -1.0
    return v.copy(), helmholtz_inverse_values(fu, grid) + sign * fu


def rhs_mep(s: State) -> tuple[np.ndarray, np.ndarray]:
    """Modified Euler-Poisson on ``(u, rho)``.

    ``rho_t = -(u rho)_x`` and ``u_t = -u u_x - d_x H rho``.
    """
    _expect(s, 2, "modified Euler-Poisson")
    grid = s.grid
    u, rho = s.fields[0].values, s.fields[1].values
    ux = deriv_values(u, grid)
    du = -_product(u, ux, grid) - dx_helmholtz_inverse_values(rho, grid)
    drho = -deriv_values(_product(u, rho, grid), grid)
    return du, drho
