from __future__ import annotations

import numpy as np
import pytest

from stripns.galerkin import (
    BlowUpError,
    ForcingSpec,
    GalerkinState,
    gronwall_audit,
    identity_residuals,
    integrate_run,
    ledger,
    ledger_magnitude,
    ledger_rows,
    LEDGER_COLUMNS,
    modal_operators,
    project_initial,
    read_checkpoint,
    reconstruct,
    rhs,
    step,
    trilinear_tensor,
    uniqueness_experiment,
    weak_residual,
    write_checkpoint,
)
from stripns.grid import SlipPair, VectorField
from stripns.inequalities import random_admissible_field
from stripns.spectral import ShiftParams, solve_eigenpairs


@pytest.fixture(scope="module")
def ops(small_basis):
    return modal_operators(small_basis)


@pytest.fixture(scope="module")
def state(small_basis):
    u0 = random_admissible_field(small_basis.grid, small_basis.slip, small_basis.mu, 3)
    s, _ = project_initial(u0, small_basis)
    return GalerkinState(s.coeffs * (2.0 / np.linalg.norm(s.coeffs)), 0.0, small_basis)


def _forcing(grid, with_rate):
    X, Y = grid.mesh()
    shape = np.sin(np.pi * (X + 1.0)) * Y * (1 - Y)

    def f(t):
        return np.cos(t) * shape, 0.0 * shape

    def df(t):
        return -np.sin(t) * shape, 0.0 * shape

    return ForcingSpec(f, df if with_rate else None)


def test_operators_symmetry(ops):
    assert np.allclose(ops.S, ops.S.T)
    assert np.allclose(ops.K, ops.K.T)
    assert np.linalg.eigvalsh(ops.S).min() > 0
    B = ops.tensor.B
    assert np.allclose(B, -B.transpose(0, 2, 1))
    assert ops.tensor.defect < 0.05


def test_tensor_defect_shrinks():
    slip = SlipPair(-1.0, 0.5)
    defects = []
    from stripns.grid import StripGeometry, build_grid

    for ny in (16, 32):
        g = build_grid(StripGeometry(1.0), 2 * ny + 1, ny)
        b = solve_eigenpairs(6, g, slip, 1.0, ShiftParams.from_slip(slip, 1.0))
        defects.append(trilinear_tensor(b).defect)
    assert defects[1] < defects[0] / 2


def test_projection_of_basis_field(small_basis):
    st, res = project_initial(small_basis.pairs[2].field, small_basis)
    assert np.allclose(st.coeffs, np.eye(small_basis.m)[2], atol=1e-12)
    assert res < 1e-12


def test_projection_rejects_inadmissible(small_basis):
    u = small_basis.pairs[0].field
    bad = VectorField.from_arrays(small_basis.grid, u.u1.values + 1.0, u.u2.values)
    with pytest.raises(ValueError):
        project_initial(bad, small_basis)


def test_reconstruct_linear(small_basis):
    g = np.arange(small_basis.m, dtype=float)
    u = reconstruct(small_basis, g)
    expect = sum(c * p.field.u1.values for c, p in zip(g, small_basis.pairs))
    assert np.allclose(u.u1.values, expect)


def test_rhs_shape_guard(ops, small_basis):
    with pytest.raises(ValueError):
        GalerkinState(np.zeros(3), 0.0, small_basis)


def test_step_matches_run(state, ops):
    f = ForcingSpec()
    one = step(state, 1e-3, f, ops)
    traj = integrate_run(state, 1e-3, 2e-3, f, ops)
    assert np.allclose(one.coeffs, traj.coeffs[1], rtol=0, atol=1e-15)
    assert traj.times[-1] == pytest.approx(2e-3)
    assert np.allclose(traj.rates[0], rhs(state, f, ops))


def test_dt_guards(state, ops):
    with pytest.raises(ValueError):
        integrate_run(state, 10.0 * ops.stability_bound(), 1.0, ForcingSpec(), ops)
    with pytest.raises(ValueError):
        integrate_run(state, 1e-3, 1.5e-3, ForcingSpec(), ops)
    with pytest.raises(ValueError):
        step(state, -1e-3, ForcingSpec(), ops)


def test_blow_up_detected(ops, small_basis):
    huge = GalerkinState(np.full(small_basis.m, 1e160), 0.0, small_basis)
    with pytest.raises(BlowUpError):
        integrate_run(huge, 1e-3, 1e-2, ForcingSpec(), ops)


@pytest.mark.parametrize("with_rate", [True, False])
def test_forced_energy_identity(state, ops, with_rate):
    f = _forcing(state.basis.grid, with_rate)
    traj = integrate_run(state, 1e-3, 0.2, f, ops)
    recs = ledger(traj)
    assert identity_residuals(traj).max() <= 10 * 1e-9 * ledger_magnitude(recs)
    assert any(r.forcing_power != 0 for r in recs)


def test_ledger_rows(state, ops):
    traj = integrate_run(state, 1e-3, 0.01, ForcingSpec(), ops)
    rows = ledger_rows(ledger(traj))
    assert len(rows) == 11 and len(rows[0]) == len(LEDGER_COLUMNS)


def test_gronwall_audit(state, ops):
    f = _forcing(state.basis.grid, True)
    traj = integrate_run(state, 1e-3, 0.3, f, ops)
    norms = [f.l2_norm(t, state.basis.grid) for t in traj.times]
    rep = gronwall_audit(ledger(traj), norms)
    assert not rep.violated
    assert rep.sup_energy >= rep.initial_energy
    assert rep.rate >= 1.0


def test_gronwall_flags_fake_growth(state, ops):
    from dataclasses import replace

    traj = integrate_run(state, 1e-3, 0.05, ForcingSpec(), ops)
    recs = ledger(traj)
    recs[-1] = replace(recs[-1], kinetic=recs[0].kinetic * 100)
    assert gronwall_audit(recs).violated


def test_uniqueness_linear_response(state, ops):
    a = uniqueness_experiment(state, 1e-4, 1e-3, 0.2, ForcingSpec(), ops)
    b = uniqueness_experiment(state, 5e-5, 1e-3, 0.2, ForcingSpec(), ops)
    assert a.within_envelope and b.within_envelope
    assert abs(a.final_growth - b.final_growth) / a.final_growth < 0.05
    assert set(a.as_dict()) >= {"delta", "final_growth", "final_envelope"}


def test_weak_residual_small(state, ops, small_basis):
    traj = integrate_run(state, 1e-3, 0.05, ForcingSpec(), ops)
    tests = [p.field for p in small_basis.pairs[:3]]
    r = weak_residual(traj, tests, ForcingSpec())
    scale = np.abs(traj.rates).max()
    assert r < 1e-2 * scale
    assert weak_residual(traj, [], ForcingSpec()) == 0.0


def test_checkpoint_roundtrip(tmp_path, state, small_basis):
    p = write_checkpoint(state, tmp_path / "ck.json")
    back = read_checkpoint(p, small_basis)
    assert np.array_equal(back.coeffs, state.coeffs)
    other = small_basis.truncate(small_basis.m - 1)
    with pytest.raises(ValueError):
        read_checkpoint(p, other)
