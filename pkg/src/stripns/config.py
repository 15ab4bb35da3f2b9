"""Run configuration: a plain ``key = value`` file with ``#`` comments.

Values are numbers, booleans, bare or quoted strings, or comma-separated
lists.  Every key is declared below with its type and default; unknown keys
and ill-typed values are rejected with the key named in the error.
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    L: float = 1.0
    nx: int = 63
    ny: int = 32
    k0: float = 0.0
    k1: float = 0.0
    mu: float = 1.0
    epsilon: float | None = None
    beta: float | None = None
    m: int = 16
    a_max: int | None = None
    dt: float = 1e-3
    T: float = 1.0
    initial: str = "random"
    amplitude: float = 1.0
    forcing_f1: str = "0"
    forcing_f2: str = "0"
    forcing_df1: str | None = None
    forcing_df2: str | None = None
    delta: float = 0.0
    seed: int = 0
    out: str = "out"
    L_values: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    ensemble_size: int = 200
    ineq_ny: int = 32
    lemmas: tuple[str, ...] = ("poincare", "l4", "grad_interp", "korn", "linf")
    stokes_rhs: str = "forcing"
    audit_samples: int = 5

    def resolved_epsilon(self) -> float:
        return 0.5 * self.mu if self.epsilon is None else self.epsilon

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["epsilon"] = self.resolved_epsilon()
        d["L_values"] = list(self.L_values)
        d["lemmas"] = list(self.lemmas)
        return d

    def digest(self) -> str:
        # the output directory does not affect results
        d = self.as_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


_KIND: dict[str, str] = {
    "L": "float",
    "nx": "int",
    "ny": "int",
    "k0": "float",
    "k1": "float",
    "mu": "float",
    "epsilon": "float?",
    "beta": "float?",
    "m": "int",
    "a_max": "int?",
    "dt": "float",
    "T": "float",
    "initial": "str",
    "amplitude": "float",
    "forcing_f1": "str",
    "forcing_f2": "str",
    "forcing_df1": "str?",
    "forcing_df2": "str?",
    "delta": "float",
    "seed": "int",
    "out": "str",
    "L_values": "floats",
    "ensemble_size": "int",
    "ineq_ny": "int",
    "lemmas": "strs",
    "stokes_rhs": "str",
    "audit_samples": "int",
}

assert set(_KIND) == {f.name for f in fields(RunConfig)}


def _strip_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out).strip()


def _unquote(raw: str) -> tuple[str, bool]:
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1], True
    return raw, False


def _convert(key: str, raw: str) -> Any:
    kind = _KIND[key]
    text, quoted = _unquote(raw)
    optional = kind.endswith("?")
    base = kind.rstrip("?")
    if optional and not quoted and text.lower() in ("none", ""):
        return None
    if base in ("float", "int"):
        if quoted:
            raise ConfigError(key, f"expected a {'real number' if base == 'float' else 'integer'}, got string {raw}")
        try:
            if base == "int":
                val = int(text)
            else:
                val = float(text)
        except ValueError:
            raise ConfigError(
                key, f"expected a {'real number' if base == 'float' else 'integer'}, got {raw!r}"
            ) from None
        if base == "float" and not math.isfinite(val):
            raise ConfigError(key, "must be finite")
        return val
    if base == "str":
        return text
    if base == "floats":
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return tuple(float(p) for p in parts)
        except ValueError:
            raise ConfigError(key, f"expected a comma-separated list of numbers, got {raw!r}") from None
    if base == "strs":
        return tuple(p.strip() for p in text.split(",") if p.strip())
    raise AssertionError(kind)


def parse_text(text: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = _strip_comment(line)
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(None, f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _KIND:
            raise ConfigError(key, f"unknown key (line {lineno})")
        if key in values:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        values[key] = _convert(key, raw)
    return values


def validate(cfg: RunConfig) -> RunConfig:
    def need(ok: bool, key: str, msg: str) -> None:
        if not ok:
            raise ConfigError(key, msg)

    need(cfg.L >= 1.0, "L", f"must be >= 1, got {cfg.L}")
    need(cfg.nx >= 8, "nx", f"must be >= 8, got {cfg.nx}")
    need(cfg.ny >= 8, "ny", f"must be >= 8, got {cfg.ny}")
    need(cfg.mu > 0, "mu", f"must be positive, got {cfg.mu}")
    eps = cfg.resolved_epsilon()
    need(0 < eps < cfg.mu, "epsilon", f"must lie in (0, mu), got {eps}")
    beta0 = max(cfg.k0**2, cfg.k1**2) / eps - (cfg.k0 + cfg.k1)
    if cfg.beta is not None:
        need(cfg.beta > beta0, "beta", f"must exceed beta0={beta0}, got {cfg.beta}")
    need(cfg.m >= 1, "m", f"must be >= 1, got {cfg.m}")
    if cfg.a_max is not None:
        need(1 <= cfg.a_max <= cfg.nx, "a_max", f"must lie in [1, nx], got {cfg.a_max}")
    need(cfg.dt > 0, "dt", f"must be positive, got {cfg.dt}")
    need(cfg.T > 0, "T", f"must be positive, got {cfg.T}")
    n = round(cfg.T / cfg.dt)
    need(n >= 1 and abs(n * cfg.dt - cfg.T) <= 1e-9 * max(1.0, cfg.T), "T", "must be a multiple of dt")
    need(cfg.delta >= 0, "delta", f"must be nonnegative, got {cfg.delta}")
    need(cfg.seed >= 0, "seed", f"must be nonnegative, got {cfg.seed}")
    need(len(cfg.L_values) > 0, "L_values", "must be non-empty")
    need(all(v >= 1 for v in cfg.L_values), "L_values", "entries must be >= 1")
    need(list(cfg.L_values) == sorted(cfg.L_values), "L_values", "must be sorted")
    need(cfg.ensemble_size >= 1, "ensemble_size", "must be >= 1")
    need(cfg.ineq_ny >= 8, "ineq_ny", "must be >= 8")
    known = {"poincare", "l4", "grad_interp", "korn", "linf"}
    bad = [x for x in cfg.lemmas if x not in known]
    need(not bad, "lemmas", f"unknown lemma(s) {bad}")
    need(cfg.audit_samples >= 1, "audit_samples", "must be >= 1")
    need(cfg.stokes_rhs in ("forcing", "manufactured"), "stokes_rhs", "must be 'forcing' or 'manufactured'")
    init = cfg.initial
    need(
        init in ("random", "mode1") or init.startswith("psi:"),
        "initial",
        "must be 'random', 'mode1' or 'psi: <expression>'",
    )
    for key in ("forcing_f1", "forcing_f2", "forcing_df1", "forcing_df2"):
        expr = getattr(cfg, key)
        if expr is not None:
            try:
                compile_expression(expr)
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
    if init.startswith("psi:"):
        try:
            compile_expression(init[4:])
        except ValueError as exc:
            raise ConfigError("initial", str(exc)) from None
    return cfg


def check_stability(cfg: RunConfig) -> float:
    """Assemble the modal operator and reject ``dt`` above the explicit bound; returns the bound."""
    from .galerkin import modal_operators
    from .grid import SlipPair, StripGeometry, build_grid
    from .spectral import ShiftParams, solve_eigenpairs

    grid = build_grid(StripGeometry(cfg.L), cfg.nx, cfg.ny)
    slip = SlipPair(cfg.k0, cfg.k1)
    shift = ShiftParams.from_slip(slip, cfg.mu, cfg.resolved_epsilon(), cfg.beta)
    basis = solve_eigenpairs(cfg.m, grid, slip, cfg.mu, shift, cfg.a_max)
    bound = modal_operators(basis).stability_bound()
    if cfg.dt > bound:
        raise ConfigError("dt", f"{cfg.dt} exceeds the explicit stability bound {bound:.6g}")
    return bound


def parse_config(path: str | Path, overrides: dict[str, Any] | None = None, stability: bool = False) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(None, f"config file not found: {path}")
    values = parse_text(path.read_text())
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = validate(RunConfig(**values))
    if stability:
        check_stability(cfg)
    return cfg


# ---------------------------------------------------------------------------
# expressions


_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "abs": np.abs,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = ("x", "y", "t", "L", "mu", "k0", "k1")
_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def _check_node(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _check_node(node.body)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _OPS):
            raise ValueError(f"operator {type(node.op).__name__} not allowed")
        _check_node(node.left)
        _check_node(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _OPS):
            raise ValueError(f"operator {type(node.op).__name__} not allowed")
        _check_node(node.operand)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ValueError("only elementary functions may be called")
        if node.keywords:
            raise ValueError("keyword arguments not allowed")
        for a in node.args:
            _check_node(a)
    elif isinstance(node, ast.Name):
        if node.id not in _VARS and node.id not in _CONSTS:
            raise ValueError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ValueError("only numeric constants allowed")
    else:
        raise ValueError(f"unsupported syntax {type(node).__name__}")


def compile_expression(expr: str) -> Callable[..., np.ndarray]:
    """Compile a whitelisted arithmetic expression in ``x, y, t, L, mu, k0, k1``."""
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {expr!r}") from exc
    _check_node(tree)
    code = compile(tree, "<expr>", "eval")

    def fn(**env: Any) -> np.ndarray:
        scope = {"__builtins__": {}, **_FUNCS, **_CONSTS, **env}
        return eval(code, scope)  # noqa: S307 - AST is whitelisted above

    return fn


def evaluate_on_grid(expr: str, grid, t: float = 0.0, **params: float) -> np.ndarray:
    X, Y = grid.mesh()
    val = compile_expression(expr)(x=X, y=Y, t=t, L=grid.L, **params)
    return np.broadcast_to(np.asarray(val, dtype=float), grid.shape).copy()
