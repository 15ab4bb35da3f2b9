"""Empirical constants of the strip inequalities on random admissible ensembles.

Each check returns the largest observed ratio ``LHS / RHS``.  Since only the
existence of uniform constants is claimed, the meaningful tests are
finiteness, scale invariance and flatness of the ratio as the half-length
``L`` grows.

The default ensemble is built from localized wave packets of fixed physical
width, so its statistics do not depend on ``L`` apart from packets meeting a
lateral wall.  A global-mode ensemble (``kind="modes"``) is also available.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .grid import GridSpec, ScalarField, SlipPair, StripGeometry, VectorField, build_grid, diff_x, diff_y, integrate
from .spaces import gradient, hess_sq, l2_sq, robin_project, strain_sq, velocity_from_stream

SWEEP_COLUMNS = ("lemma", "L", "ensemble_size", "max_ratio", "violated")


class Lemma(str, enum.Enum):
    POINCARE = "poincare"
    L4 = "l4"
    GRAD_INTERP = "grad_interp"
    KORN = "korn"
    LINF = "linf"


@dataclass(frozen=True)
class InequalityReport:
    """``max_ratio`` is the largest ``LHS / RHS``; for Korn it is ``||u||_H1 / ||D(u)||``."""

    name: str
    ensemble_size: int
    max_ratio: float
    ratios_by_L: dict[float, float] = field(default_factory=dict)
    violated: bool = False
    excluded: int = 0
    min_ratio: float | None = None
    identity_residual: float | None = None

    @property
    def spread(self) -> float:
        vals = list(self.ratios_by_L.values())
        if not vals:
            return 1.0
        return max(vals) / min(vals)

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ratios_by_L"] = {repr(float(k)): v for k, v in self.ratios_by_L.items()}
        d["spread"] = self.spread
        return d


# ---------------------------------------------------------------------------
# ensembles


def _bump(t: np.ndarray) -> np.ndarray:
    return np.where(np.abs(t) < 1.0, (1.0 - t**2) ** 4, 0.0)


def _packet(x: np.ndarray, L: float, rng: np.random.Generator) -> np.ndarray:
    """Odd-reflected wave packet; vanishes at ``x = -L`` and ``x = L``.

    A third of the packets sit against each lateral wall so that wall
    configurations are sampled at the same rate for every ``L``.
    """
    w = rng.uniform(0.4, 0.8)
    side = rng.integers(0, 3)
    offset = rng.uniform(0.0, 1.0)
    if side == 0:
        c = -L + offset * w
    elif side == 1:
        c = L - offset * w
    else:
        c = -L + 2.0 * L * offset
    kappa = rng.uniform(0.0, 2.0 * np.pi)
    theta = rng.uniform(0.0, 2.0 * np.pi)

    def p(s: np.ndarray) -> np.ndarray:
        return _bump((s - c) / w) * np.cos(kappa * (s - c) + theta)

    return p(x) - p(-2.0 * L - x) - p(2.0 * L - x)


def _global_mode(x: np.ndarray, L: float, rng: np.random.Generator, a_max: int) -> np.ndarray:
    a = rng.integers(1, a_max + 1)
    return np.sin(a * np.pi * (x + L) / (2.0 * L))


def _y_profile(y: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    coef = rng.standard_normal(3)
    return sum(c * np.sin((b + 1) * np.pi * y) for b, c in enumerate(coef))


def random_stream(grid: GridSpec, seed, kind: str = "packet") -> np.ndarray:
    rng = np.random.default_rng(seed)
    x, y = grid.x, grid.y
    rank = int(rng.integers(1, 4))
    psi = np.zeros(grid.shape)
    for _ in range(rank):
        if kind == "packet":
            xs = _packet(x, grid.L, rng)
        elif kind == "modes":
            xs = _global_mode(x, grid.L, rng, max(1, min(6, grid.nx // 4)))
        else:
            raise ValueError(f"unknown ensemble kind {kind!r}")
        psi += np.outer(xs, _y_profile(y, rng))
    psi *= np.exp(rng.uniform(-2.0, 2.0))
    psi[0] = psi[-1] = 0.0
    psi[:, 0] = psi[:, -1] = 0.0
    return psi


def random_admissible_field(
    grid: GridSpec,
    slip: SlipPair,
    mu: float,
    seed,
    kind: str = "packet",
    robin: bool = True,
) -> VectorField:
    """Divergence-free field with ``u.n = 0``; with ``robin`` it also meets the slip condition."""
    psi = random_stream(grid, seed, kind)
    if robin:
        psi = robin_project(psi, grid, slip, mu)
    return velocity_from_stream(ScalarField(grid, psi), robin=robin)


def ensemble(
    grid: GridSpec,
    slip: SlipPair,
    mu: float,
    size: int,
    seed: int,
    kind: str = "packet",
    robin: bool = True,
) -> list[VectorField]:
    return [random_admissible_field(grid, slip, mu, (seed, i), kind, robin) for i in range(size)]


# ---------------------------------------------------------------------------
# ratios for single fields


def ratio_poincare(u: VectorField, slip: SlipPair, mu: float) -> tuple[float, float]:
    lhs = np.sqrt(l2_sq(u))
    dy = diff_y(u.u1).values, diff_y(u.u2).values
    rhs = np.sqrt(sum(integrate(d**2, u.grid) for d in dy))
    return lhs, rhs


def ratio_l4(u: VectorField, slip: SlipPair, mu: float) -> tuple[float, float]:
    mag2 = u.u1.values**2 + u.u2.values**2
    lhs = np.sqrt(integrate(mag2**2, u.grid))
    g2 = sum(integrate(g**2, u.grid) for g in gradient(u))
    return lhs, np.sqrt(l2_sq(u) * g2)


def ratio_grad_interp(u: VectorField, slip: SlipPair, mu: float) -> tuple[float, float]:
    g2 = sum(integrate(g**2, u.grid) for g in gradient(u))
    grad_h1 = np.sqrt(g2 + hess_sq(u, slip, mu))
    return g2, np.sqrt(l2_sq(u)) * grad_h1


def ratio_korn(u: VectorField, slip: SlipPair, mu: float) -> tuple[float, float]:
    """``||u||_H1 / ||D(u)||`` so that larger still means a larger constant."""
    g2 = sum(integrate(g**2, u.grid) for g in gradient(u))
    return np.sqrt(l2_sq(u) + g2), np.sqrt(strain_sq(u))


def ratio_linf(u: VectorField, slip: SlipPair, mu: float) -> tuple[float, float]:
    mag2 = u.u1.values**2 + u.u2.values**2
    l2 = l2_sq(u)
    g2 = sum(integrate(g**2, u.grid) for g in gradient(u))
    h2 = np.sqrt(l2 + g2 + hess_sq(u, slip, mu))
    return float(mag2.max()), np.sqrt(l2) * h2


RATIOS: dict[Lemma, Callable[[VectorField, SlipPair, float], tuple[float, float]]] = {
    Lemma.POINCARE: ratio_poincare,
    Lemma.L4: ratio_l4,
    Lemma.GRAD_INTERP: ratio_grad_interp,
    Lemma.KORN: ratio_korn,
    Lemma.LINF: ratio_linf,
}


def korn_identity_residual(u: VectorField) -> float:
    """``|int |D u|^2 - 1/2 int |grad u|^2| / int |grad u|^2``."""
    g2 = sum(integrate(g**2, u.grid) for g in gradient(u))
    if g2 == 0.0:
        return 0.0
    return abs(strain_sq(u) - 0.5 * g2) / g2


# ---------------------------------------------------------------------------
# checks


def _check(
    lemma: Lemma, fields: Sequence[VectorField], slip: SlipPair, mu: float
) -> tuple[float, float | None, bool, int]:
    ratios = []
    violated = False
    excluded = 0
    for u in fields:
        lhs, rhs = RATIOS[lemma](u, slip, mu)
        if rhs == 0.0:
            if lhs > 0.0:
                violated = True
            else:
                excluded += 1
            continue
        r = lhs / rhs
        if not np.isfinite(r):
            violated = True
            continue
        ratios.append(r)
    if violated:
        return float("inf"), None, True, excluded
    if not ratios:
        return float("nan"), None, False, excluded
    return float(max(ratios)), float(min(ratios)), False, excluded


def check(
    lemma: Lemma | str,
    fields: Sequence[VectorField],
    slip: SlipPair,
    mu: float,
) -> InequalityReport:
    lemma = Lemma(lemma)
    mx, mn, violated, excluded = _check(lemma, fields, slip, mu)
    ident = None
    min_ratio = mn
    if lemma is Lemma.KORN:
        ident = max((korn_identity_residual(u) for u in fields), default=0.0)
        # report the lower-bound form ||D(u)|| / ||u||_H1
        min_ratio = None if violated or not np.isfinite(mx) else 1.0 / mx
    L = fields[0].grid.L if fields else float("nan")
    return InequalityReport(
        name=lemma.value,
        ensemble_size=len(fields),
        max_ratio=mx,
        ratios_by_L={L: mx},
        violated=violated,
        excluded=excluded,
        min_ratio=min_ratio,
        identity_residual=ident,
    )


def check_poincare(fields, slip, mu) -> InequalityReport:
    return check(Lemma.POINCARE, fields, slip, mu)


def check_l4(fields, slip, mu) -> InequalityReport:
    return check(Lemma.L4, fields, slip, mu)


def check_grad_interp(fields, slip, mu) -> InequalityReport:
    return check(Lemma.GRAD_INTERP, fields, slip, mu)


def check_korn(fields, slip, mu) -> InequalityReport:
    return check(Lemma.KORN, fields, slip, mu)


def check_linf(fields, slip, mu) -> InequalityReport:
    return check(Lemma.LINF, fields, slip, mu)


# ---------------------------------------------------------------------------
# scalar building block: ||f||_4^2 <= 2 ||f||_2 ||grad f||_2


def l4_scalar_ratio(f: np.ndarray, grid: GridSpec) -> float:
    sf = ScalarField(grid, f)
    l4sq = np.sqrt(integrate(f**4, grid))
    l2 = np.sqrt(integrate(f**2, grid))
    g = np.sqrt(integrate(diff_x(sf).values ** 2 + diff_y(sf).values ** 2, grid))
    return float(l4sq / (l2 * g))


def random_corner_scalar(grid: GridSpec, seed) -> np.ndarray:
    """Random field vanishing on ``x = -L`` and ``y = 0`` only."""
    rng = np.random.default_rng(seed)
    x = (grid.x + grid.L) / (2.0 * grid.L)
    y = grid.y
    f = np.zeros(grid.shape)
    for _ in range(int(rng.integers(1, 4))):
        a = 2 * int(rng.integers(0, 4)) + 1
        b = 2 * int(rng.integers(0, 3)) + 1
        c = rng.standard_normal()
        f += c * np.outer(np.sin(a * np.pi * x / 2.0), np.sin(b * np.pi * y / 2.0))
    return f


def check_l4_scalar(grid: GridSpec, size: int, seed: int) -> InequalityReport:
    ratios = [l4_scalar_ratio(random_corner_scalar(grid, (seed, i)), grid) for i in range(size)]
    mx = float(max(ratios))
    return InequalityReport(
        name="l4_scalar",
        ensemble_size=size,
        max_ratio=mx,
        ratios_by_L={grid.L: mx},
        violated=not mx < 2.0,
        min_ratio=float(min(ratios)),
    )


# ---------------------------------------------------------------------------
# L sweeps


def matched_grid(L: float, ny: int) -> GridSpec:
    """Grid with ``hx`` as close to ``hy`` as the node count allows (``nx`` grows with ``L``)."""
    nx = max(8, int(round(2.0 * L * (ny + 1))) - 1)
    return build_grid(StripGeometry(L), nx, ny)


def sweep(
    lemmas: Iterable[Lemma | str],
    L_values: Sequence[float],
    ensemble_size: int,
    seed: int,
    slip: SlipPair,
    mu: float,
    ny: int = 32,
    kind: str = "packet",
) -> dict[str, InequalityReport]:
    """Run several lemmas on one ensemble per ``L`` (same seeds at every ``L``)."""
    lemmas = [Lemma(x) for x in lemmas]
    L_values = [float(v) for v in L_values]
    if not L_values:
        raise ValueError("L_values must be non-empty")
    if any(v < 1.0 for v in L_values):
        raise ValueError("sweeps are defined for L >= 1")
    if L_values != sorted(L_values):
        raise ValueError("L_values must be sorted")
    per_L: dict[Lemma, dict[float, InequalityReport]] = {lem: {} for lem in lemmas}
    for L in L_values:
        grid = matched_grid(L, ny)
        fields = ensemble(grid, slip, mu, ensemble_size, seed, kind)
        for lem in lemmas:
            per_L[lem][L] = check(lem, fields, slip, mu)
    out = {}
    for lem in lemmas:
        reps = per_L[lem]
        by_L = {L: r.max_ratio for L, r in reps.items()}
        mins = [r.min_ratio for r in reps.values() if r.min_ratio is not None]
        idents = [r.identity_residual for r in reps.values() if r.identity_residual is not None]
        out[lem.value] = InequalityReport(
            name=lem.value,
            ensemble_size=ensemble_size,
            max_ratio=max(by_L.values()),
            ratios_by_L=by_L,
            violated=any(r.violated for r in reps.values()),
            excluded=sum(r.excluded for r in reps.values()),
            min_ratio=min(mins) if mins else None,
            identity_residual=max(idents) if idents else None,
        )
    return out


def sweep_L(
    lemma: Lemma | str,
    L_values: Sequence[float],
    ensemble_size: int,
    seed: int,
    slip: SlipPair = SlipPair(0.0, 0.0),
    mu: float = 1.0,
    ny: int = 32,
) -> InequalityReport:
    return sweep([lemma], L_values, ensemble_size, seed, slip, mu, ny)[Lemma(lemma).value]


def sweep_rows(reports: dict[str, InequalityReport]) -> list[tuple]:
    rows = []
    for name, rep in reports.items():
        for L, r in rep.ratios_by_L.items():
            rows.append((name, float(L), rep.ensemble_size, float(r), int(rep.violated)))
    return rows
