"""Spatial grids and the Fourier operators shared by every model.

All operators act on real samples through ``numpy.fft.rfft``. Two grid
kinds exist: the unit circle and a truncated line ``[-L, L)`` that is
treated as periodic; decaying data keeps the wrap-around error small.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class NonFiniteError(ValueError):
    """Raised when a field contains NaN or Inf."""


class GridKind(str, enum.Enum):
    CIRCLE = "circle"
    LINE = "line"

    @classmethod
    def parse(cls, value: GridKind | str) -> GridKind:
        if isinstance(value, cls):
            return value
        aliases = {
            "circle": cls.CIRCLE,
            "periodiccircle": cls.CIRCLE,
            "periodic": cls.CIRCLE,
            "line": cls.LINE,
            "truncatedline": cls.LINE,
        }
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown grid kind {value!r}") from None


@dataclass(frozen=True)
class Grid:
    """Equispaced periodic grid.

    ``length`` is the period: the circle length for ``CIRCLE`` and ``2 L``
    for a line truncated to ``[-L, L)``.
    """

    kind: GridKind
    n: int
    length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise TypeError("n must be an integer")
        if self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if self.n % 2:
            raise ValueError(f"n must be even, got {self.n}")
        if self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"domain extent must be positive, got {self.length}")

    @property
    def left(self) -> float:
        return 0.0 if self.kind is GridKind.CIRCLE else -0.5 * self.length

    @property
    def halfwidth(self) -> float:
        return 0.5 * self.length

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.left + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular frequencies ``2 pi k / length`` in FFT order (length n)."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=1.0 / self.n) / self.length
        k.flags.writeable = False
        return k

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Non-negative angular frequencies for the rfft layout; last is Nyquist."""
        k = 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.length
        k.flags.writeable = False
        return k

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    @cached_property
    def _symbols(self) -> dict[str, np.ndarray]:
        k = self.rwavenumbers
        ik = 1j * k
        ik[-1] = 0.0  # odd symbol: drop Nyquist
        helm = 1.0 / (1.0 + k**2)
        keep = np.arange(k.size) <= self.n // 3
        return {
            "ik": ik,
            "helm": helm,
            "dx_helm": ik * helm,
            "dealias": keep.astype(float),
        }

    def symbol(self, name: str) -> np.ndarray:
        return self._symbols[name]

    def field(self, values) -> Field:
        return Field(values, self)

    def zeros(self) -> Field:
        return Field(np.zeros(self.n), self)


def make_grid(kind: GridKind | str, n: int, extent: float = 1.0) -> Grid:
    """Build a grid.

    For a circle ``extent`` is the period (1 for the unit circle); for a
    line it is the half-width ``L`` of the truncated interval ``[-L, L)``.
    """
    kind = GridKind.parse(kind)
    extent = float(extent)
    if not np.isfinite(extent) or extent <= 0:
        raise ValueError(f"domain extent must be positive, got {extent}")
    length = extent if kind is GridKind.CIRCLE else 2.0 * extent
    return Grid(kind, int(n) if isinstance(n, (int, np.integer)) else n, length)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on the nodes of a grid. Immutable and always finite."""

    values: np.ndarray
    grid: Grid = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"field has shape {v.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("field contains non-finite values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def check_values(values, grid: Grid) -> np.ndarray:
    """Return ``values`` as a float array of grid length, rejecting NaN/Inf."""
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("non-finite input")
    return v


def _apply(values: np.ndarray, grid: Grid, symbol: str) -> np.ndarray:
    return np.fft.irfft(grid.symbol(symbol) * np.fft.rfft(values), n=grid.n)


# Array-level kernels. Models call these directly to avoid re-validating
# intermediate arrays; the Field-level functions below are the public API.

def deriv_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return _apply(values, grid, "ik")


def deriv2_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    k = grid.rwavenumbers
    return np.fft.irfft(-(k**2) * np.fft.rfft(values), n=grid.n)


def helmholtz_inverse_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return _apply(values, grid, "helm")


def dx_helmholtz_inverse_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return _apply(values, grid, "dx_helm")


def dealias_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero every mode above ``n // 3`` (two-thirds rule)."""
    return _apply(values, grid, "dealias")


def deriv(f: Field) -> Field:
    """Spectral first derivative; the Nyquist mode of the result is zero."""
    return Field(deriv_values(check_values(f.values, f.grid), f.grid), f.grid)


def deriv2(f: Field) -> Field:
    return Field(deriv2_values(check_values(f.values, f.grid), f.grid), f.grid)


def helmholtz_inverse(f: Field) -> Field:
    """Apply ``(1 - d^2/dx^2)^{-1}`` by dividing mode k by ``1 + k^2``."""
    return Field(helmholtz_inverse_values(check_values(f.values, f.grid), f.grid), f.grid)


def dx_helmholtz_inverse(f: Field) -> Field:
    """Fused ``d/dx (1 - d^2/dx^2)^{-1}``: multiply mode k by ``ik / (1 + k^2)``."""
    return Field(dx_helmholtz_inverse_values(check_values(f.values, f.grid), f.grid), f.grid)


def kernel_samples(grid: Grid) -> Field:
    """Green's function of ``1 - d^2/dx^2`` sampled at the nodes.

    Line: ``exp(-|x|) / 2``. Circle of period 1:
    ``cosh(x - floor(x) - 1/2) / (2 sinh(1/2))``, generalised to period
    ``P`` by ``cosh(y - P/2) / (2 sinh(P/2))`` with ``y = x mod P``.
    """
    x = np.asarray(grid.nodes)
    if grid.kind is GridKind.LINE:
        g = 0.5 * np.exp(-np.abs(x))
    else:
        p = grid.length
        y = x - p * np.floor(x / p)
        g = np.cosh(y - 0.5 * p) / (2.0 * np.sinh(0.5 * p))
    return Field(g, grid)


def cyclic_convolution(f: Field, g: Field) -> Field:
    """Direct O(n^2) trapezoid-rule convolution ``sum_j f(x_i - x_j) g(x_j) dx``.

    Used as an independent check of the Fourier-space operators. ``f`` is a
    kernel sampled at the nodes, interpreted as a function of ``x - left``
    offset so that index 0 of ``f`` corresponds to separation ``x = left``.
    """
    grid = f.grid
    n = grid.n
    # kernel as a function of separation s = i - j (mod n); for the line the
    # kernel samples are centred at x=0 which sits at index n/2.
    shift = 0 if grid.kind is GridKind.CIRCLE else n // 2
    kern = np.roll(np.asarray(f.values), -shift)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return Field(kern[idx] @ np.asarray(g.values) * grid.dx, grid)


def integrate(values, grid: Grid) -> float:
    """Periodic trapezoid rule: spectral mean times domain length."""
    return float(np.sum(values) * grid.dx)


def mean(values, grid: Grid) -> float:
    return float(np.fft.rfft(values)[0].real / grid.n)


def interpolate(values, grid: Grid, x) -> np.ndarray:
    """Trigonometric interpolant of nodal ``values`` evaluated at points ``x``.

    Exact for band-limited data. The Nyquist mode is split evenly between
    ``+k`` and ``-k`` so that the interpolant is real.
    """
    coeffs = np.fft.rfft(np.asarray(values, dtype=float), axis=-1) / grid.n
    return interpolate_modes(coeffs, grid, x)


def interpolate_modes(coeffs: np.ndarray, grid: Grid, x) -> np.ndarray:
    """Evaluate rfft coefficients (already divided by n) at points ``x``.

    ``coeffs`` may carry leading batch dimensions; the result has shape
    ``coeffs.shape[:-1] + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    weights = np.full(grid.n // 2 + 1, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    theta = 2.0 * np.pi * (flat - grid.left) / grid.length
    # powers of e^{i theta} by repeated multiplication is cheaper than exp
    z = np.exp(1j * theta)
    basis = np.empty((flat.size, grid.n // 2 + 1), dtype=complex)
    basis[:, 0] = 1.0
    if basis.shape[1] > 1:
        basis[:, 1:] = z[:, None]
        np.cumprod(basis[:, 1:], axis=1, out=basis[:, 1:])
    out = np.real((coeffs * weights) @ basis.T)
    return out.reshape(coeffs.shape[:-1] + x.shape)
