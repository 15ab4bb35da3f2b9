from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripns.grid import (
    BC,
    ScalarField,
    SlipPair,
    StripGeometry,
    VectorField,
    apply_robin_ghost,
    boundary_integral,
    build_grid,
    diff_x,
    diff_xx,
    diff_y,
    diff_yy,
    integrate,
    integrate_x,
    trapezoid_weights,
)


def test_geometry_rejects_short_strip():
    with pytest.raises(ValueError):
        StripGeometry(0.5)
    with pytest.raises(ValueError):
        StripGeometry(float("nan"))


def test_grid_spacing_and_nodes():
    g = build_grid(StripGeometry(2.0), 15, 9)
    assert g.shape == (17, 11)
    assert g.hx == pytest.approx(4.0 / 16)
    assert g.hy == pytest.approx(0.1)
    assert g.x[0] == -2.0 and g.x[-1] == pytest.approx(2.0)
    assert g.y[0] == 0.0 and g.y[-1] == pytest.approx(1.0)


def test_build_grid_rejects_empty():
    with pytest.raises(ValueError):
        build_grid(StripGeometry(1.0), 0, 4)


def test_trapezoid_weights_sum():
    w = trapezoid_weights(11, 0.1)
    assert w.sum() == pytest.approx(1.0)
    assert w[0] == pytest.approx(0.05)


def test_integrate_polynomial_exact(mid_grid):
    X, Y = mid_grid.mesh()
    assert integrate(X * 0 + 1.0, mid_grid) == pytest.approx(2.0)
    assert integrate(Y, mid_grid) == pytest.approx(1.0)
    assert integrate(ScalarField(mid_grid, X)) == pytest.approx(0.0, abs=1e-14)


def test_integrate_raw_needs_grid(mid_grid):
    with pytest.raises(ValueError):
        integrate(np.zeros(mid_grid.shape))


def test_integrate_x_length_check(mid_grid):
    assert integrate_x(np.ones(mid_grid.nx + 2), mid_grid) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        integrate_x(np.ones(3), mid_grid)


def test_field_shape_validated(small_grid):
    with pytest.raises(ValueError):
        ScalarField(small_grid, np.zeros((3, 3)))


@settings(max_examples=25, deadline=None)
@given(a=st.integers(min_value=1, max_value=12))
def test_sine_modes_differentiate_exactly(a):
    g = build_grid(StripGeometry(1.5), 31, 8)
    X, _ = g.mesh()
    alpha = a * np.pi / (2 * g.L)
    at = np.sin(alpha * g.hx) / g.hx
    s = np.sin(alpha * (X + g.L))
    c = np.cos(alpha * (X + g.L))
    ds = diff_x(ScalarField(g, s, BC.DIRICHLET_ZERO)).values
    dc = diff_x(ScalarField(g, c, BC.NEUMANN_ZERO)).values
    assert np.allclose(ds, at * c, atol=1e-12)
    assert np.allclose(dc, -at * s, atol=1e-12)


def test_second_order_in_y():
    errs = []
    for ny in (16, 32, 64):
        g = build_grid(StripGeometry(1.0), 8, ny)
        _, Y = g.mesh()
        f = ScalarField(g, np.exp(Y) * np.sin(2 * Y))
        exact1 = np.exp(Y) * (np.sin(2 * Y) + 2 * np.cos(2 * Y))
        exact2 = np.exp(Y) * (4 * np.cos(2 * Y) - 3 * np.sin(2 * Y))
        errs.append((np.abs(diff_y(f).values - exact1).max(), np.abs(diff_yy(f).values - exact2).max()))
    e = np.array(errs)
    assert np.all(np.log2(e[:-1] / e[1:]) > 1.8)


def test_diff_xx_reflection():
    g = build_grid(StripGeometry(1.0), 31, 8)
    X, _ = g.mesh()
    alpha = 3 * np.pi / 2
    s = np.sin(alpha * (X + 1.0))
    d2 = diff_xx(ScalarField(g, s, BC.DIRICHLET_ZERO)).values
    lam = (2 - 2 * np.cos(alpha * g.hx)) / g.hx**2
    assert np.allclose(d2, -lam * s, atol=1e-10)


def test_robin_ghost_reproduces_condition(small_grid):
    _, Y = small_grid.mesh()
    slip = SlipPair(-1.5, 0.7)
    u1 = ScalarField(small_grid, 1.0 + Y**2, BC.DIRICHLET_ZERO, BC.ROBIN_SLIP)
    u1g = apply_robin_ghost(u1, slip, 2.0)
    uy = diff_y(u1g).values
    assert np.allclose(2.0 * uy[:, 0], -slip.k0 * u1.values[:, 0])
    assert np.allclose(2.0 * uy[:, -1], slip.k1 * u1.values[:, -1])


def test_robin_ghost_requires_tag(small_grid):
    with pytest.raises(ValueError):
        apply_robin_ghost(ScalarField(small_grid, np.zeros(small_grid.shape)), SlipPair(0, 0), 1.0)
    u1 = ScalarField(small_grid, np.zeros(small_grid.shape), bc_y=BC.ROBIN_SLIP)
    with pytest.raises(ValueError):
        apply_robin_ghost(u1, SlipPair(0, 0), 0.0)


def test_boundary_integral_volume_form(mid_grid):
    X, Y = mid_grid.mesh()
    f = np.cos(X) * (1 + Y) ** 2
    slip = SlipPair(0.3, -1.1)
    r = boundary_integral(f[:, 0], f[:, -1], slip, mid_grid, f)
    assert r.volume == pytest.approx(r.boundary, rel=1e-3)


def test_vector_field_helpers(small_grid):
    z = VectorField.zeros(small_grid)
    assert z.u1.bc_y is BC.ROBIN_SLIP and z.u2.bc_x is BC.NEUMANN_ZERO
    assert np.all(z.scaled(3.0).u1.values == 0)
    other = build_grid(StripGeometry(1.0), 9, 9)
    with pytest.raises(ValueError):
        VectorField(z.u1, ScalarField(other, np.zeros(other.shape)))
