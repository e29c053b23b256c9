import numpy as np
import pytest
from scipy import integrate as quad

from nonlocal_waves import make_grid
from nonlocal_waves.initial_data import (
    GENERATORS,
    bump_vanishing_on,
    fourier_mode,
    gaussian,
    generate,
    mollified_peakon,
    random_band_limited,
    smoothed_peakon,
)


def _mollified_by_quadrature(x, delta):
    kern = lambda s: np.exp(-s * s / (2 * delta * delta)) / (np.sqrt(2 * np.pi) * delta)
    val, _ = quad.quad(lambda s: np.exp(-abs(x - s)) * kern(s), -12 * delta, 12 * delta,
                       points=[x] if abs(x) < 12 * delta else None, epsabs=1e-14, limit=200)
    return val


@pytest.mark.parametrize("x", [-3.0, -0.05, 0.0, 0.013, 0.4, 7.5])
@pytest.mark.parametrize("delta", [0.02, 0.3])
def test_mollified_peakon_against_quadrature(x, delta):
    assert mollified_peakon(np.array([x]), 1.0, 0.0, delta)[0] == pytest.approx(
        _mollified_by_quadrature(x, delta), abs=1e-12)


def test_mollified_peakon_limits():
    x = np.linspace(-5, 5, 101)
    np.testing.assert_array_equal(mollified_peakon(x, 2.0, 0.5, 0.0), 2 * np.exp(-np.abs(x - 0.5)))
    far = mollified_peakon(np.array([40.0, -40.0]), 1.0, 0.0, 0.05)
    assert np.all(np.isfinite(far)) and np.all(far < 1e-16)


def test_smoothed_peakon_on_circle_is_even_about_center():
    g = make_grid("circle", 256, 1.0)
    u = smoothed_peakon(g, 1.0, 0.5, 0.02)
    np.testing.assert_allclose(u[1:], u[1:][::-1], atol=1e-14)
    assert np.argmax(u) == 128
    # the periodic peakon c cosh(d - 1/2) / cosh(1/2) peaks at c
    assert u[128] == pytest.approx(1.0, abs=0.05)


def test_bump_vanishes_exactly_on_interval():
    g = make_grid("circle", 256, 1.0)
    u = bump_vanishing_on(g, 0.4, 0.6)
    inside = (g.nodes >= 0.4) & (g.nodes <= 0.6)
    assert np.all(u[inside] == 0.0)
    assert np.all(u[~inside] > 0)
    line = make_grid("line", 256, 10.0)
    v = bump_vanishing_on(line, -1.0, 2.0, amplitude=3.0)
    inside = (line.nodes >= -1) & (line.nodes <= 2)
    assert np.all(v[inside] == 0.0) and v.max() == pytest.approx(3.0, rel=1e-3)
    with pytest.raises(ValueError):
        bump_vanishing_on(line, -11.0, 2.0)
    with pytest.raises(ValueError):
        bump_vanishing_on(g, 0.6, 0.4)


def test_random_band_limited_properties():
    g = make_grid("circle", 128, 1.0)
    u = random_band_limited(g, 8, 0.2, seed=3, mean=0.5)
    spec = np.abs(np.fft.rfft(u))
    assert np.all(spec[9:] < 1e-12 * spec.max())
    assert np.mean(u) == pytest.approx(0.5, abs=1e-15)
    assert np.max(np.abs(u - 0.5)) <= 0.2 + 1e-12
    np.testing.assert_array_equal(u, random_band_limited(g, 8, 0.2, seed=3, mean=0.5))
    assert not np.array_equal(u, random_band_limited(g, 8, 0.2, seed=4, mean=0.5))


def test_random_band_limited_independent_of_resolution():
    a = random_band_limited(make_grid("circle", 64, 1.0), 8, 0.2, seed=1)
    b = random_band_limited(make_grid("circle", 256, 1.0), 8, 0.2, seed=1)
    np.testing.assert_allclose(a, b[::4], atol=1e-15)


def test_simple_generators():
    g = make_grid("circle", 16, 1.0)
    np.testing.assert_allclose(fourier_mode(g, 2, 3.0), 3 * np.cos(4 * np.pi * g.nodes), atol=1e-15)
    assert gaussian(g, 2.0, 0.5, 0.1)[8] == 2.0
    # the circle gaussian is periodised: a centre near 0 wraps
    w = gaussian(g, 1.0, 0.0, 0.1)
    assert w[1] == pytest.approx(w[-1])


def test_generate_dispatch():
    g = make_grid("circle", 16, 1.0)
    assert set(GENERATORS) >= {"zero", "constant", "fourier-mode", "gaussian", "smoothed-peakon",
                               "bump-vanishing-on", "random-band-limited"}
    assert generate("constant", g, value=2.0).values[0] == 2.0
    with pytest.raises(ValueError):
        generate("nope", g)
    with pytest.raises(ValueError):
        generate("zero", g, value=1.0)
