from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripns.grid import SlipPair, StripGeometry, build_grid
from stripns.inequalities import (
    Lemma,
    check,
    check_korn,
    check_l4_scalar,
    ensemble,
    korn_identity_residual,
    l4_scalar_ratio,
    matched_grid,
    random_admissible_field,
    random_stream,
    sweep,
    sweep_L,
    sweep_rows,
)
from stripns.spaces import membership


def test_streams_are_reproducible(mid_grid):
    a = random_stream(mid_grid, (4, 2))
    b = random_stream(mid_grid, (4, 2))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, random_stream(mid_grid, (4, 3)))
    with pytest.raises(ValueError):
        random_stream(mid_grid, 0, kind="other")


@pytest.mark.parametrize("kind", ["packet", "modes"])
def test_ensemble_members_admissible(mid_grid, kind):
    slip = SlipPair(-2.0, 2.0)
    for u in ensemble(mid_grid, slip, 1.0, 5, 1, kind):
        assert membership(u, slip, 1.0).in_W


def test_check_reports(mid_grid):
    slip = SlipPair(0.0, 0.0)
    fields = ensemble(mid_grid, slip, 1.0, 10, 2)
    for lem in Lemma:
        r = check(lem, fields, slip, 1.0)
        assert not r.violated and np.isfinite(r.max_ratio)
        assert r.ensemble_size == 10
    k = check_korn(fields, slip, 1.0)
    # ||u||_H1 >= sqrt(2) ||D u|| when the cross term vanishes
    assert k.max_ratio >= np.sqrt(2) * 0.99
    assert k.min_ratio == pytest.approx(1 / k.max_ratio)
    assert k.identity_residual < 1e-3


def test_zero_field_excluded(mid_grid):
    slip = SlipPair(0.0, 0.0)
    u = random_admissible_field(mid_grid, slip, 1.0, 0).scaled(0.0)
    r = check(Lemma.POINCARE, [u], slip, 1.0)
    assert r.excluded == 1 and not r.violated


def test_korn_identity_zero_field(mid_grid):
    u = random_admissible_field(mid_grid, SlipPair(0, 0), 1.0, 0).scaled(0.0)
    assert korn_identity_residual(u) == 0.0


@settings(max_examples=30, deadline=None)
@given(a=st.integers(0, 3), b=st.integers(0, 2), c=st.floats(0.1, 10))
def test_scalar_l4_constant_two(a, b, c):
    g = build_grid(StripGeometry(1.0), 31, 16)
    x = (g.x + 1.0) / 2.0
    f = c * np.outer(np.sin((2 * a + 1) * np.pi * x / 2), np.sin((2 * b + 1) * np.pi * g.y / 2))
    assert l4_scalar_ratio(f, g) < 2.0


def test_scalar_block_report():
    r = check_l4_scalar(matched_grid(1.0, 16), 30, 0)
    assert not r.violated and r.max_ratio < 2.0


def test_matched_grid_spacing():
    for L in (1.0, 4.0):
        g = matched_grid(L, 16)
        assert g.hx == pytest.approx(g.hy, rel=0.05)


def test_sweep_validation_and_rows():
    slip = SlipPair(0.0, 0.0)
    with pytest.raises(ValueError):
        sweep(["poincare"], [], 3, 0, slip, 1.0)
    with pytest.raises(ValueError):
        sweep(["poincare"], [2.0, 1.0], 3, 0, slip, 1.0)
    with pytest.raises(ValueError):
        sweep(["poincare"], [0.5], 3, 0, slip, 1.0)
    reps = sweep(["poincare", "korn"], [1.0, 2.0], 4, 0, slip, 1.0, ny=12)
    rows = sweep_rows(reps)
    assert len(rows) == 4 and rows[0][0] == "poincare"
    single = sweep_L("poincare", [1.0, 2.0], 4, 0, ny=12)
    assert single.ratios_by_L == reps["poincare"].ratios_by_L
    assert reps["poincare"].as_dict()["spread"] >= 1.0
