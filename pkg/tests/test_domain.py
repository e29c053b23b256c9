import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as quad

from nonlocal_waves import (
    Field,
    GridKind,
    NonFiniteError,
    deriv,
    dx_helmholtz_inverse,
    helmholtz_inverse,
    kernel_samples,
    make_grid,
)
from nonlocal_waves.domain import (
    cyclic_convolution,
    deriv2,
    integrate,
    interpolate,
    mean,
)

PI = np.pi


@pytest.fixture
def circle():
    return make_grid("circle", 64, 1.0)


def test_circle_nodes():
    g = make_grid(GridKind.CIRCLE, 8, 1.0)
    np.testing.assert_array_equal(g.nodes, np.arange(8) / 8)
    assert g.dx == 0.125


def test_line_nodes():
    g = make_grid("line", 16, 20.0)
    assert g.nodes[0] == -20.0
    assert g.dx == 2.5
    assert g.length == 40.0


@pytest.mark.parametrize("n", [7, 4, 12, 0])
def test_bad_sizes_rejected(n):
    with pytest.raises(ValueError):
        make_grid("circle", n, 1.0)


@pytest.mark.parametrize("extent", [0.0, -1.0, float("nan")])
def test_bad_extent_rejected(extent):
    with pytest.raises(ValueError):
        make_grid("circle", 16, extent)


def test_wavenumbers_conjugate_pairs(circle):
    k = circle.wavenumbers
    np.testing.assert_allclose(k[1:circle.n // 2], -k[:circle.n // 2:-1])
    assert circle.symbol("ik")[-1] == 0


def test_field_rejects_nonfinite(circle):
    bad = np.zeros(circle.n)
    bad[3] = np.nan
    with pytest.raises(NonFiniteError):
        Field(bad, circle)
    with pytest.raises(ValueError):
        Field(np.zeros(circle.n + 1), circle)


def test_field_is_immutable(circle):
    f = Field(np.ones(circle.n), circle)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_deriv_examples(circle):
    x = circle.nodes
    assert np.max(np.abs(deriv(Field(np.full(circle.n, 3.0), circle)).values)) == 0
    got = deriv(Field(np.sin(2 * PI * x) + np.cos(4 * PI * x), circle)).values
    want = 2 * PI * np.cos(2 * PI * x) - 4 * PI * np.sin(4 * PI * x)
    np.testing.assert_allclose(got, want, atol=1e-12)


def test_helmholtz_examples(circle):
    x = circle.nodes
    c = np.full(circle.n, 2.5)
    np.testing.assert_allclose(helmholtz_inverse(Field(c, circle)).values, c, rtol=1e-15)
    for k in (1, 3, 7):
        f = np.cos(2 * PI * k * x)
        want = f / (1 + 4 * PI**2 * k**2)
        np.testing.assert_allclose(helmholtz_inverse(Field(f, circle)).values, want, atol=1e-15)


def test_dx_helmholtz_examples(circle):
    x = circle.nodes
    assert np.max(np.abs(dx_helmholtz_inverse(Field(np.full(circle.n, 1.0), circle)).values)) == 0
    got = dx_helmholtz_inverse(Field(np.sin(2 * PI * x), circle)).values
    np.testing.assert_allclose(got, 2 * PI * np.cos(2 * PI * x) / (1 + 4 * PI**2), atol=1e-14)


def test_dx_helmholtz_is_composition(circle):
    rng = np.random.default_rng(1)
    f = Field(rng.standard_normal(circle.n), circle)
    np.testing.assert_allclose(dx_helmholtz_inverse(f).values,
                               deriv(helmholtz_inverse(f)).values, atol=1e-12)


def test_helmholtz_of_line_kernel_is_closed_form_convolution():
    # the kink of the kernel limits convergence to second order in h
    errs = []
    for n in (4096, 8192, 16384):
        g = make_grid("line", n, 30.0)
        x = g.nodes
        want = (1 + np.abs(x)) * np.exp(-np.abs(x)) / 4
        interior = np.abs(x) < 20
        errs.append(np.max(np.abs(helmholtz_inverse(kernel_samples(g)).values - want)[interior]))
    assert errs[-1] <= 1e-6
    np.testing.assert_allclose(np.log2(np.array(errs[:-1]) / errs[1:]), 2.0, atol=0.05)


def test_kernel_values():
    c = kernel_samples(make_grid("circle", 64, 1.0)).values
    assert c[0] == pytest.approx(np.cosh(-0.5) / (2 * np.sinh(0.5)), rel=1e-14)
    assert c[0] == pytest.approx(1.0820, abs=1e-4)
    line_grid = make_grid("line", 1024, 30.0)
    assert kernel_samples(line_grid).values[line_grid.n // 2] == 0.5


def test_line_kernel_has_unit_mass():
    # trapezoid error for the kink at x = 0 is (h/2) coth(h/2) - 1 ~ h^2 / 12,
    # so 1e-8 needs h below about 3e-4
    g = make_grid("line", 2**18, 30.0)
    assert integrate(kernel_samples(g).values, g) == pytest.approx(1.0, abs=1e-8)


def test_line_kernel_trapezoid_error_matches_closed_form():
    g = make_grid("line", 1024, 30.0)
    h = g.dx
    exact_sum = (h / 2) / np.tanh(h / 2)
    exact, _ = quad.quad(lambda s: 0.5 * np.exp(-abs(s)), -30, 30, points=[0.0])
    assert exact == pytest.approx(1.0, abs=1e-12)
    assert integrate(kernel_samples(g).values, g) == pytest.approx(exact_sum, abs=1e-12)


def test_convolution_agrees_with_fourier_on_circle():
    errs = []
    for n in (64, 128, 256):
        g = make_grid("circle", n, 1.0)
        f = Field(np.exp(np.cos(2 * PI * g.nodes)), g)
        errs.append(np.max(np.abs(cyclic_convolution(kernel_samples(g), f).values
                                  - helmholtz_inverse(f).values)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    np.testing.assert_allclose(rates, 2.0, atol=0.1)


def test_second_derivative_identity(circle):
    rng = np.random.default_rng(5)
    coef = np.zeros(circle.n // 2 + 1, complex)
    coef[1:9] = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    f = Field(np.fft.irfft(coef, n=circle.n), circle)
    h = helmholtz_inverse(f)
    res = deriv2(h).values - (h.values - f.values)
    assert np.max(np.abs(res)) <= 1e-10 * f.max_abs()


def test_mean_and_integral(circle):
    v = 1.5 + np.sin(2 * PI * circle.nodes)
    assert mean(v, circle) == pytest.approx(1.5, abs=1e-15)
    assert integrate(v, circle) == pytest.approx(1.5, abs=1e-15)


def test_interpolation_is_exact_for_trig_polynomials(circle):
    x = np.linspace(-0.3, 1.7, 37)
    f = lambda s: np.cos(2 * PI * 3 * s) + 0.5 * np.sin(2 * PI * 5 * s)
    np.testing.assert_allclose(interpolate(f(circle.nodes), circle, x), f(x), atol=1e-13)


_coef = st.lists(st.floats(-10, 10), min_size=2, max_size=2)


@settings(max_examples=25, deadline=None)
@given(ab=_coef, seed=st.integers(0, 2**31 - 1))
def test_operators_are_linear(ab, seed):
    g = make_grid("circle", 32, 1.0)
    rng = np.random.default_rng(seed)
    f, h = rng.standard_normal(g.n), rng.standard_normal(g.n)
    a, b = ab
    for op in (deriv, helmholtz_inverse, dx_helmholtz_inverse):
        lhs = op(Field(a * f + b * h, g)).values
        rhs = a * op(Field(f, g)).values + b * op(Field(h, g)).values
        scale = max(1.0, np.max(np.abs(lhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale * (abs(a) + abs(b) + 1)
