from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stripns.config import (
    ConfigError,
    RunConfig,
    check_stability,
    compile_expression,
    evaluate_on_grid,
    parse_config,
    parse_text,
    validate,
)


def test_parse_text_types():
    v = parse_text(
        """
        # comment
        L = 2          # trailing comment
        nx = 31
        forcing_f1 = "sin(pi * x) # not a comment"
        L_values = 1, 2, 4
        lemmas = poincare, korn
        beta = none
        """
    )
    assert v["L"] == 2.0 and v["nx"] == 31
    assert v["forcing_f1"] == "sin(pi * x) # not a comment"
    assert v["L_values"] == (1.0, 2.0, 4.0)
    assert v["lemmas"] == ("poincare", "korn")
    assert v["beta"] is None


@pytest.mark.parametrize(
    "text,key",
    [
        ('mu = "1"', "mu"),
        ("nx = 3.5", "nx"),
        ("mu = inf", "mu"),
        ("bogus = 1", "bogus"),
        ("mu = 1\nmu = 2", "mu"),
        ("L_values = 1, x", "L_values"),
    ],
)
def test_parse_errors_name_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_text(text)
    assert exc.value.key == key
    assert key in str(exc.value)


def test_missing_equals():
    with pytest.raises(ConfigError):
        parse_text("just words")


@pytest.mark.parametrize(
    "kw,key",
    [
        ({"L": 0.5}, "L"),
        ({"nx": 4}, "nx"),
        ({"mu": -1.0}, "mu"),
        ({"epsilon": 2.0}, "epsilon"),
        ({"k0": 2.0, "beta": 0.0}, "beta"),
        ({"dt": 3e-3, "T": 1e-2}, "T"),
        ({"L_values": (2.0, 1.0)}, "L_values"),
        ({"lemmas": ("nope",)}, "lemmas"),
        ({"initial": "sometimes"}, "initial"),
        ({"initial": "psi: __import__('os')"}, "initial"),
        ({"forcing_f1": "x.real"}, "forcing_f1"),
        ({"stokes_rhs": "other"}, "stokes_rhs"),
        ({"a_max": 1000}, "a_max"),
    ],
)
def test_validation(kw, key):
    with pytest.raises(ConfigError) as exc:
        validate(RunConfig(**kw))
    assert exc.value.key == key


def test_defaults_valid():
    cfg = validate(RunConfig())
    assert cfg.resolved_epsilon() == pytest.approx(0.5)
    assert len(cfg.digest()) == 64


def test_digest_ignores_output_dir():
    assert RunConfig(out="a").digest() == RunConfig(out="b").digest()
    assert RunConfig(seed=1).digest() != RunConfig(seed=2).digest()


def test_parse_config_file_and_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("nx = 31\nny = 16\nseed = 4\n")
    cfg = parse_config(p, {"seed": 9, "out": None})
    assert cfg.nx == 31 and cfg.seed == 9 and cfg.out == "out"
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.cfg")


def test_stability_check():
    cfg = validate(RunConfig(nx=31, ny=16, m=8))
    bound = check_stability(cfg)
    assert bound > 0
    with pytest.raises(ConfigError) as exc:
        check_stability(RunConfig(nx=31, ny=16, m=8, dt=2 * bound, T=200 * bound))
    assert exc.value.key == "dt"


@pytest.mark.parametrize("expr", ["__import__('os')", "x.real", "open('f')", "[1, 2]", "lambda: 1", "z", "'a'"])
def test_expression_whitelist(expr):
    with pytest.raises(ValueError):
        compile_expression(expr)


def test_expression_evaluation(small_grid):
    v = evaluate_on_grid("mu * sin(pi * x) * y + t", small_grid, 2.0, mu=3.0)
    X, Y = small_grid.mesh()
    assert np.allclose(v, 3.0 * np.sin(np.pi * X) * Y + 2.0)
    assert np.shape(evaluate_on_grid("1", small_grid)) == small_grid.shape


@settings(max_examples=40, deadline=None)
@given(
    L=st.floats(1.0, 100.0),
    mu=st.floats(0.01, 10.0),
    seed=st.integers(0, 2**31 - 1),
)
def test_roundtrip_through_text(L, mu, seed):
    text = f"L = {L!r}\nmu = {mu!r}\nseed = {seed}\n"
    v = parse_text(text)
    assert v == {"L": L, "mu": mu, "seed": seed}
