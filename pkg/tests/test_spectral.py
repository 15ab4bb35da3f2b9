from __future__ import annotations

import numpy as np
import pytest

from stripns.grid import SlipPair, StripGeometry, build_grid
from stripns.spaces import membership
from stripns.spectral import (
    ShiftParams,
    assemble_mode_problem,
    discrete_wavenumber,
    export_basis,
    gram_matrix,
    load_basis,
    solve_eigenpairs,
    verify_basis,
)


def test_shift_defaults():
    s = ShiftParams.from_slip(SlipPair(2.0, -1.0), 1.0)
    assert s.epsilon == 0.5
    assert s.beta0 == pytest.approx(4.0 / 0.5 - 1.0)
    assert s.beta == pytest.approx(s.beta0 + 1.0)
    assert s.admissible
    assert not ShiftParams.from_slip(SlipPair(2.0, -1.0), 1.0, beta=s.beta0).admissible


@pytest.mark.parametrize("kw", [{"epsilon": 1.0}, {"epsilon": 0.0}])
def test_shift_rejects_bad_epsilon(kw):
    with pytest.raises(ValueError):
        ShiftParams.from_slip(SlipPair(0, 0), 1.0, **kw)


def test_shift_rejects_bad_mu():
    with pytest.raises(ValueError):
        ShiftParams.from_slip(SlipPair(0, 0), 0.0)


def test_assembly_guards(small_grid):
    slip = SlipPair(1.0, 1.0)
    good = ShiftParams.from_slip(slip, 1.0)
    with pytest.raises(ValueError):
        assemble_mode_problem(small_grid.nx + 1, small_grid, slip, 1.0, good)
    with pytest.raises(ValueError):
        assemble_mode_problem(0, small_grid, slip, 1.0, good)
    bad = ShiftParams(good.beta0 - 1.0, good.epsilon, good.beta0)
    with pytest.raises(ValueError):
        assemble_mode_problem(1, small_grid, slip, 1.0, bad)


def test_stiffness_and_mass_spd(small_grid):
    slip = SlipPair(2.0, 2.0)
    p = assemble_mode_problem(2, small_grid, slip, 1.0, ShiftParams.from_slip(slip, 1.0))
    assert np.linalg.eigvalsh(p.mass).min() > 0
    assert np.linalg.eigvalsh(p.stiffness).min() > 0


def test_too_many_modes(small_grid):
    slip = SlipPair(0, 0)
    with pytest.raises(ValueError):
        solve_eigenpairs(10_000, small_grid, slip, 1.0, ShiftParams.from_slip(slip, 1.0))
    with pytest.raises(ValueError):
        solve_eigenpairs(0, small_grid, slip, 1.0, ShiftParams.from_slip(slip, 1.0))


def test_basis_orthonormal_and_admissible(small_basis):
    gram = gram_matrix(small_basis)
    assert np.allclose(gram, np.eye(small_basis.m), atol=1e-12)
    for p in small_basis.pairs:
        assert membership(p.field, small_basis.slip, small_basis.mu).in_W
    rep = verify_basis(small_basis)
    assert rep.ordered
    assert rep.navier_residual < 1e-10


def test_free_slip_spectrum_matches_closed_form():
    g = build_grid(StripGeometry(2.0), 127, 64)
    slip = SlipPair(0, 0)
    basis = solve_eigenpairs(3, g, slip, 1.0, ShiftParams.from_slip(slip, 1.0))
    for p in basis.pairs:
        alpha = p.x_mode * np.pi / (2 * g.L)
        # lowest y-branch of free slip: psi ~ sin(pi y)
        assert p.Lambda == pytest.approx(alpha**2 + np.pi**2, rel=5e-3)


def test_eigen_residual_decreases():
    slip = SlipPair(-1.0, 1.0)
    res = []
    for ny in (16, 32):
        g = build_grid(StripGeometry(1.0), 2 * ny + 1, ny)
        res.append(verify_basis(solve_eigenpairs(6, g, slip, 1.0, ShiftParams.from_slip(slip, 1.0))).eigen_residual)
    assert res[1] < res[0] / 3


def test_discrete_wavenumber_limit(mid_grid):
    a = 1
    alpha = np.pi / (2 * mid_grid.L)
    assert discrete_wavenumber(a, mid_grid) == pytest.approx(alpha, rel=1e-3)


def test_export_roundtrip(tmp_path, small_basis):
    files = export_basis(small_basis, tmp_path)
    assert {f.name for f in files} == {"basis.json", "basis.csv"}
    back = load_basis(tmp_path)
    assert back.m == small_basis.m
    assert np.array_equal(back.eigenvalues, small_basis.eigenvalues)
    for p, q in zip(small_basis.pairs, back.pairs):
        assert np.array_equal(p.field.u1.values, q.field.u1.values)
    (tmp_path / "basis.json").write_text('{"schema": "other"}')
    with pytest.raises(ValueError):
        load_basis(tmp_path)


def test_truncate(small_basis):
    t = small_basis.truncate(3)
    assert t.m == 3
    assert np.array_equal(t.eigenvalues, small_basis.eigenvalues[:3])
