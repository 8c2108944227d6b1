"""Spherical harmonic transforms, surface calculus and the ball spectrum."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from plasmeig.errors import ConfigError, EInfinitySignal, ShapeMismatchError
from plasmeig.sphere3d import (SHField, ball_spectrum, dtn_sphere_apply,
                               laplace_beltrami, sh_analysis, sh_multiply,
                               sh_synthesis, sphere_grid, surface_divergence,
                               surface_gradient)


def random_field(L, seed):
    rng = np.random.default_rng(seed)
    f = SHField(L)
    for l in range(L + 1):
        f.coeffs[l, L - l:L + l + 1] = rng.standard_normal(2 * l + 1)
    return f


def test_grid_integrates_constants_exactly():
    grid = sphere_grid(6)
    assert abs(grid.integrate(np.ones((grid.ntheta, grid.nphi)))
               - 4.0 * math.pi) < 1e-12


def test_basis_functions_are_orthonormal():
    L = 4
    grid = sphere_grid(2 * L)
    fields = [sh_synthesis(SHField.basis(L, l, m), grid)
              for l in range(L + 1) for m in range(-l, l + 1)]
    for i, fi in enumerate(fields):
        for j, fj in enumerate(fields):
            want = 1.0 if i == j else 0.0
            assert abs(grid.integrate(fi * fj) - want) < 1e-12


@given(st.integers(min_value=0, max_value=10_000))
def test_analysis_inverts_synthesis(seed):
    f = random_field(5, seed)
    back = sh_analysis(sh_synthesis(f), 5)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-12


@given(st.integers(min_value=0, max_value=10_000))
def test_parseval_identity(seed):
    f = random_field(4, seed)
    grid = sphere_grid(4)
    vals = sh_synthesis(f, grid)
    assert abs(grid.integrate(vals * vals)
               - float(np.sum(f.coeffs ** 2))) < 1e-11


def test_gradient_closed_form():
    # Y_{1,0} = sqrt(3/4pi) cos(theta); its gradient has only a theta part
    grid = sphere_grid(3)
    grad = surface_gradient(SHField.basis(1, 1, 0), grid)
    scale = math.sqrt(3.0 / (4.0 * math.pi))
    want = -scale * grid.sin_theta[:, None] * np.ones(grid.nphi)[None, :]
    assert np.max(np.abs(grad.vtheta - want)) < 1e-13
    assert np.max(np.abs(grad.vphi)) < 1e-13


def test_divergence_is_adjoint_to_gradient():
    f = random_field(4, seed=1)
    y = random_field(4, seed=2)
    grid = sphere_grid(6)
    vec = surface_gradient(f, grid)
    div = surface_divergence(vec, L=4)
    lhs = grid.integrate(sh_synthesis(div, grid) * sh_synthesis(y, grid))
    rhs = -grid.integrate(vec.dot(surface_gradient(y, grid)))
    assert abs(lhs - rhs) < 1e-11


def test_divergence_of_gradient_is_laplacian():
    f = random_field(5, seed=7)
    grid = sphere_grid(7)
    div = surface_divergence(surface_gradient(f, grid), L=5)
    lap = laplace_beltrami(f)
    assert np.max(np.abs(div.coeffs - lap.coeffs)) < 1e-10


def test_laplace_beltrami_multipliers():
    f = laplace_beltrami(SHField.basis(5, 3, 2))
    assert abs(f.coeff(3, 2) + 12.0) < 1e-15
    assert np.count_nonzero(f.coeffs) == 1


def test_product_of_axial_harmonics_closed_form():
    # Y10^2 = 1/sqrt(4pi) Y00 + 1/sqrt(5pi) Y20
    prod = sh_multiply(SHField.basis(1, 1, 0), SHField.basis(1, 1, 0))
    assert prod.L == 2
    assert abs(prod.coeff(0, 0) - 1.0 / math.sqrt(4.0 * math.pi)) < 1e-14
    assert abs(prod.coeff(2, 0) - 1.0 / math.sqrt(5.0 * math.pi)) < 1e-14
    rest = prod.copy()
    rest.set_coeff(0, 0, 0.0)
    rest.set_coeff(2, 0, 0.0)
    assert rest.norm() < 1e-14


def test_multiplication_by_one_is_identity():
    one = SHField(0)
    one.coeffs[0, 0] = math.sqrt(4.0 * math.pi)
    f = random_field(3, seed=4)
    prod = sh_multiply(one, f, L=3)
    assert np.max(np.abs(prod.coeffs - f.coeffs)) < 1e-13


def test_dtn_sphere_multipliers():
    f = random_field(4, seed=9)
    inner = dtn_sphere_apply(f, "interior")
    outer = dtn_sphere_apply(f, "exterior")
    for l in range(5):
        row = f.coeffs[l]
        assert np.max(np.abs(inner.coeffs[l] - l * row)) < 1e-15
        assert np.max(np.abs(outer.coeffs[l] + (l + 1.0) * row)) < 1e-15
    with pytest.raises(ConfigError):
        dtn_sphere_apply(f, "sideways")


def test_ball_spectrum_values_and_signals():
    for k in range(1, 11):
        eps, mult = ball_spectrum(k)
        assert eps == (k + 1.0) / k
        assert mult == 2 * k + 1
    with pytest.raises(EInfinitySignal):
        ball_spectrum(0)
    with pytest.raises(ConfigError):
        ball_spectrum(-2)
    with pytest.raises(ConfigError):
        ball_spectrum(1.5)


def test_field_json_roundtrip_and_validation():
    f = random_field(3, seed=11)
    again = SHField.from_json_dict(f.to_json_dict())
    assert np.array_equal(again.coeffs, f.coeffs)
    with pytest.raises(ConfigError):
        SHField.from_json_dict({"L": 2})
    with pytest.raises(ConfigError):
        SHField.from_json_dict({"L": 2, "coeffs": [], "extra": 1})
    with pytest.raises(ConfigError):
        SHField.from_json_dict({"L": -1, "coeffs": []})
    with pytest.raises(ConfigError):
        SHField.from_json_dict(
            {"L": 2, "coeffs": [{"l": 3, "m": 0, "c": 1.0}]})
    with pytest.raises(ConfigError):
        SHField.from_json_dict(
            {"L": 2, "coeffs": [{"l": 1, "m": 0, "x": 1.0}]})


def test_field_algebra():
    f = SHField.basis(2, 2, 1)
    g = SHField.basis(1, 1, 0)
    both = f.plus(g, factor=2.0)
    assert both.L == 2
    assert both.coeff(2, 1) == 1.0
    assert both.coeff(1, 0) == 2.0
    cut = both.truncated(1)
    assert cut.coeff(1, 0) == 2.0
    assert cut.L == 1
    assert f.scaled(3.0).coeff(2, 1) == 3.0
    assert abs(both.norm() - math.sqrt(5.0)) < 1e-15


def test_band_and_shape_guards():
    f = random_field(5, seed=3)
    with pytest.raises(ShapeMismatchError):
        sh_synthesis(f, sphere_grid(2))
    with pytest.raises(ShapeMismatchError):
        sh_analysis(np.ones((3, 3)), 2)
    with pytest.raises(ShapeMismatchError):
        SHField(2, np.zeros((2, 5)))
