"""Named initial-data generators."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
from scipy.special import erfc, erfcx

from .domain import Field, Grid, GridKind


def zero(grid: Grid) -> np.ndarray:
    return np.zeros(grid.n)


def constant(grid: Grid, value: float = 1.0) -> np.ndarray:
    return np.full(grid.n, float(value))


def fourier_mode(grid: Grid, k: int = 1, amplitude: float = 1.0, phase: float = 0.0) -> np.ndarray:
    """``amplitude * cos(2 pi k (x - left) / length + phase)``."""
    theta = 2.0 * np.pi * int(k) * (grid.nodes - grid.left) / grid.length
    return float(amplitude) * np.cos(theta + float(phase))


def gaussian(grid: Grid, amplitude: float = 1.0, center: float | None = None,
             width: float = 1.0) -> np.ndarray:
    """``amplitude * exp(-((x - center) / width)^2)``, periodised on the circle."""
    if center is None:
        center = grid.left + 0.5 * grid.length
    x = grid.nodes - float(center)
    if grid.kind is GridKind.CIRCLE:
        x = (x + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    return float(amplitude) * np.exp(-((x / float(width)) ** 2))


def mollified_peakon(x, c: float = 1.0, x0: float = 0.0, delta: float = 0.0) -> np.ndarray:
    """``c exp(-|x - x0|)`` convolved with a Gaussian of standard deviation ``delta``.

    Closed form via complementary error functions; ``erfcx`` keeps the
    exponentially large and small factors from overflowing.
    """
    y = np.asarray(x, dtype=float) - float(x0)
    if delta <= 0:
        return float(c) * np.exp(-np.abs(y))
    s = float(delta)
    return float(c) * 0.5 * (_side(y, s) + _side(-y, s))


def _side(y: np.ndarray, s: float) -> np.ndarray:
    # e^{s^2/2} e^{-y} erfc((s^2 - y) / (sqrt(2) s))
    w = (s * s - y) / (np.sqrt(2.0) * s)
    out = np.empty_like(y)
    pos = w >= 0
    out[pos] = np.exp(-(y[pos] ** 2) / (2 * s * s)) * erfcx(w[pos])
    out[~pos] = np.exp(0.5 * s * s - y[~pos]) * erfc(w[~pos])
    return out


def smoothed_peakon(grid: Grid, c: float = 1.0, x0: float | None = None,
                    delta: float = 0.05) -> np.ndarray:
    """Peakon ``c exp(-|x - x0|)`` mollified at width ``delta``.

    On the line the closed form is used. On a circle of period ``P`` the
    periodic peakon ``c cosh(d - P/2) / cosh(P/2)`` (``d`` the distance mod
    ``P``) is mollified by a Gaussian filter in Fourier space.
    """
    if x0 is None:
        x0 = grid.left + 0.5 * grid.length
    if grid.kind is GridKind.LINE:
        return mollified_peakon(grid.nodes, c, x0, delta)
    p = grid.length
    d = np.mod(grid.nodes - float(x0), p)
    raw = float(c) * np.cosh(d - 0.5 * p) / np.cosh(0.5 * p)
    k = grid.rwavenumbers
    return np.fft.irfft(np.fft.rfft(raw) * np.exp(-0.5 * (k * float(delta)) ** 2), n=grid.n)


def _bump(s: np.ndarray) -> np.ndarray:
    """Smooth bump on (0, 1), exactly 0 outside, peak 1 at s = 1/2."""
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    si = s[inside]
    out[inside] = np.exp(4.0 - 1.0 / (si * (1.0 - si)))
    return out


def bump_vanishing_on(grid: Grid, a: float, b: float, amplitude: float = 1.0) -> np.ndarray:
    """Smooth data that is exactly zero on ``[a, b]`` and positive off it.

    Circle: one bump over the complementary arc. Line: a bump on each side
    of ``[a, b]``, each vanishing at the truncation boundary.
    """
    a, b = float(a), float(b)
    if not a < b:
        raise ValueError("bump-vanishing-on needs a < b")
    x = grid.nodes
    if grid.kind is GridKind.CIRCLE:
        p = grid.length
        if b - a >= p:
            raise ValueError("[a, b] covers the whole circle")
        gap = p - (b - a)
        s = np.mod(x - b, p) / gap
        u = _bump(s)
    else:
        lo, hi = grid.left, grid.left + grid.length
        if not lo < a < b < hi:
            raise ValueError("[a, b] must lie inside the truncated domain")
        u = _bump((x - lo) / (a - lo)) + _bump((x - b) / (hi - b))
    u = float(amplitude) * u
    u[(x >= a) & (x <= b)] = 0.0
    return u


def random_band_limited(grid: Grid, kmax: int = 8, amplitude: float = 0.05,
                        seed: int = 0, mean: float = 0.0) -> np.ndarray:
    """Random trigonometric polynomial of degree ``kmax``.

    Mode ``k`` gets standard normal cosine/sine coefficients scaled by
    ``1/k``; the result is rescaled so that ``max |u - mean| = amplitude``
    (maximum taken over a fixed fine sampling, independent of ``grid.n``).
    """
    kmax = int(kmax)
    if kmax < 1 or kmax > grid.n // 3:
        raise ValueError(f"kmax must lie in [1, {grid.n // 3}]")
    rng = np.random.default_rng(int(seed))
    coef = rng.standard_normal((kmax, 2)) / np.arange(1, kmax + 1)[:, None]

    def poly(theta):
        k = np.arange(1, kmax + 1)[:, None]
        return coef[:, 0] @ np.cos(k * theta) + coef[:, 1] @ np.sin(k * theta)

    u = poly(2.0 * np.pi * (grid.nodes - grid.left) / grid.length)
    # normalise on a fixed fine sampling so the data does not depend on n
    peak = np.max(np.abs(poly(np.linspace(0.0, 2.0 * np.pi, 64 * kmax + 1024, endpoint=False))))
    return float(amplitude) * u / peak + float(mean)


GENERATORS: dict[str, Callable[..., np.ndarray]] = {
    "zero": zero,
    "constant": constant,
    "fourier-mode": fourier_mode,
    "gaussian": gaussian,
    "smoothed-peakon": smoothed_peakon,
    "bump-vanishing-on": bump_vanishing_on,
    "random-band-limited": random_band_limited,
}

# parameter name -> converter, per generator
PARAMETERS: dict[str, dict[str, type]] = {
    "zero": {},
    "constant": {"value": float},
    "fourier-mode": {"k": int, "amplitude": float, "phase": float},
    "gaussian": {"amplitude": float, "center": float, "width": float},
    "smoothed-peakon": {"c": float, "x0": float, "delta": float},
    "bump-vanishing-on": {"a": float, "b": float, "amplitude": float},
    "random-band-limited": {"kmax": int, "amplitude": float, "seed": int, "mean": float},
}


def generate(name: str, grid: Grid, **params) -> Field:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    unknown = set(params) - set(PARAMETERS[name])
    if unknown:
        raise ValueError(f"generator {name!r} has no parameter(s) {sorted(unknown)}")
    return Field(gen(grid, **params), grid)
