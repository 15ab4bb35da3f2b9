from __future__ import annotations

import numpy as np
import pytest

from stripns.galerkin import ForcingSpec, integrate_run, modal_operators, project_initial
from stripns.grid import ScalarField, SlipPair, StripGeometry, VectorField, build_grid, integrate
from stripns.inequalities import random_admissible_field
from stripns.regularity import (
    StokesProblem,
    band_curl_norm,
    manufactured_free_slip,
    poisson_report,
    pressure_gradient,
    solve_dirichlet_poisson,
    stokes_solve,
    strong_solution_audit,
    wall_vorticity,
)
from stripns.spaces import navier_residual
from stripns.spectral import ShiftParams


def _smooth_forcing(grid):
    X, Y = grid.mesh()
    return VectorField(
        ScalarField(grid, np.sin(np.pi * (X + 1)) * (1 + Y**2)),
        ScalarField(grid, np.cos(np.pi * (X + 1) / 2) * np.exp(Y)),
    )


def test_problem_validation(mid_grid):
    F = _smooth_forcing(mid_grid)
    slip = SlipPair(2.0, 2.0)
    beta0 = ShiftParams.from_slip(slip, 1.0).beta0
    with pytest.raises(ValueError):
        StokesProblem(F, slip, 1.0, beta0)
    with pytest.raises(ValueError):
        StokesProblem(F, slip, 0.0, beta0 + 1)
    bad = VectorField(ScalarField(mid_grid, np.full(mid_grid.shape, np.nan)), F.u2)
    with pytest.raises(ValueError):
        StokesProblem(bad, slip, 1.0, beta0 + 1)


def test_manufactured_recovery(mid_grid):
    exact, F = manufactured_free_slip(mid_grid, 0.7)
    sol = stokes_solve(StokesProblem(F, SlipPair(0, 0), 0.7, 1.0))
    assert sol.converged
    d = (sol.u.u1.values - exact.u1.values) ** 2 + (sol.u.u2.values - exact.u2.values) ** 2
    assert np.sqrt(integrate(d, mid_grid) / integrate(exact.u1.values**2 + exact.u2.values**2, mid_grid)) < 5e-3
    # the pressure of the manufactured pair is constant
    assert sol.h2_report["grad_p_l2"] < 0.05 * sol.h2_report["F_l2"]


@pytest.mark.parametrize("k", [(0.0, 0.0), (2.0, -2.0), (-2.0, -1.0)])
def test_solution_independent_of_shift(mid_grid, k):
    F = _smooth_forcing(mid_grid)
    slip = SlipPair(*k)
    beta = ShiftParams.from_slip(slip, 1.0).beta
    a = stokes_solve(StokesProblem(F, slip, 1.0, beta))
    b = stokes_solve(StokesProblem(F, slip, 1.0, beta + 3.0))
    assert a.converged and b.converged
    assert np.abs(a.u.u1.values - b.u.u1.values).max() < 1e-8 * (1 + np.abs(a.u.u1.values).max())
    assert a.h2_report["divergence_max"] < 1e-8 * (1 + a.h2_report["u_h1"])


def test_navier_residual_first_order():
    slip = SlipPair(-1.0, 1.0)
    res = []
    for ny in (16, 32, 64):
        g = build_grid(StripGeometry(1.0), 2 * ny + 1, ny)
        sol = stokes_solve(StokesProblem(_smooth_forcing(g), slip, 1.0, ShiftParams.from_slip(slip, 1.0).beta))
        res.append(navier_residual(sol.u, slip, 1.0))
    assert res[0] / res[1] > 1.6 and res[1] / res[2] > 1.6


def test_curl_of_pressure_gradient_second_order():
    slip = SlipPair(-1.0, -0.5)
    vals = []
    for ny in (31, 63):
        g = build_grid(StripGeometry(1.0), 2 * ny + 1, ny)
        F = _smooth_forcing(g)
        sol = stokes_solve(StokesProblem(F, slip, 1.0, ShiftParams.from_slip(slip, 1.0).beta))
        vals.append(band_curl_norm(sol.p_grad))
    assert np.log2(vals[0] / vals[1]) > 1.8


def test_poisson_solve_exact_mode(mid_grid):
    X, Y = mid_grid.mesh()
    psi = np.sin(np.pi * (X + 1) / 2) * np.sin(np.pi * Y)
    lam = (2 - 2 * np.cos(np.pi / 2 * mid_grid.hx)) / mid_grid.hx**2 + (2 - 2 * np.cos(np.pi * mid_grid.hy)) / mid_grid.hy**2
    out = solve_dirichlet_poisson(ScalarField(mid_grid, -lam * psi))
    assert np.allclose(out.values, psi, atol=1e-12)
    rep = poisson_report(out, ScalarField(mid_grid, -lam * psi))
    assert rep.h2_ratio > 0 and rep.h3_ratio > 0
    with pytest.raises(ValueError):
        solve_dirichlet_poisson(ScalarField(mid_grid, np.full(mid_grid.shape, np.inf)))


def test_wall_vorticity_signs(mid_grid):
    u = VectorField.from_arrays(mid_grid, np.ones(mid_grid.shape), np.zeros(mid_grid.shape))
    g = wall_vorticity(u, SlipPair(2.0, 3.0), 0.5)
    assert g[5, 0] == pytest.approx(4.0) and g[5, -1] == pytest.approx(-6.0)
    assert np.all(g[0] == 0) and np.all(g[-1] == 0)


def test_componentwise_pressure_gradient_consistent(mid_grid):
    exact, F = manufactured_free_slip(mid_grid, 1.0)
    p = pressure_gradient(F, exact, SlipPair(0, 0), 1.0)
    inner = np.abs(p.u1.values[2:-2, 2:-2]).max()
    assert inner < 1e-2 * np.abs(F.u1.values).max()


def test_audit_on_decaying_run(small_basis):
    ops = modal_operators(small_basis)
    u0 = random_admissible_field(small_basis.grid, small_basis.slip, small_basis.mu, 1)
    state, _ = project_initial(u0, small_basis)
    traj = integrate_run(state, 1e-3, 0.05, ForcingSpec(), ops)
    rep = strong_solution_audit(traj, ForcingSpec(), 3)
    assert rep["chain_holds"] and rep["finite"]
    assert len(rep["samples"]) == 3
    assert rep["schema"] == "stripns.audit/1"
    assert rep["envelope_ratio"] > 0
