"""Discrete norms, differential operators and admissibility checks on the strip.

Velocity fields built with :func:`velocity_from_stream` are exactly
divergence free at the discrete level: the x and y difference operators act on
different array axes and commute, so ``div(curl psi) = 0`` up to round-off.

The discrete Navier-slip condition used throughout is the one-sided
second-order wall derivative of ``u1``::

    mu * Dy(u1)(x, 0) + k0 * u1(x, 0) = 0
    mu * Dy(u1)(x, 1) - k1 * u1(x, 1) = 0

Walls are oriented counter-clockwise (tangent ``(1, 0)`` at the bottom and
``(-1, 0)`` at the top).  With that orientation the wall shear ``2 D(u) n.t``
coincides with ``curl u`` on both walls and the slip condition reads
``mu curl u = k u.t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import (
    BC,
    GridSpec,
    ScalarField,
    SlipPair,
    VectorField,
    apply_robin_ghost,
    diff_x,
    diff_xx,
    diff_xy,
    diff_y,
    diff_yy,
    integrate,
)


@dataclass(frozen=True)
class NormReport:
    l2: float
    h1: float
    h2: float
    l4: float
    linf: float
    strain_l2: float
    grad_l2: float
    hess_l2: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class SpaceMembership:
    in_H: bool
    in_V: bool
    in_W: bool
    divergence_residual: float
    no_penetration_residual: float
    navier_bc_residual: float
    tol: float


# ---------------------------------------------------------------------------
# derivative bundles


def gradient(u: VectorField) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(d_x u1, d_y u1, d_x u2, d_y u2)`` with plain wall stencils."""
    return (
        diff_x(u.u1).values,
        diff_y(u.u1).values,
        diff_x(u.u2).values,
        diff_y(u.u2).values,
    )


def _with_robin(u1: ScalarField, slip: SlipPair | None, mu: float | None) -> ScalarField:
    if slip is not None and mu is not None and u1.bc_y is BC.ROBIN_SLIP:
        return apply_robin_ghost(u1, slip, mu)
    return u1


def hessian(
    u: VectorField, slip: SlipPair | None = None, mu: float | None = None
) -> list[np.ndarray]:
    """Second differences of both components; ``u1`` wall rows use Robin ghosts."""
    u1 = _with_robin(u.u1, slip, mu)
    out = []
    for comp in (u1, u.u2):
        out.append(diff_xx(comp).values)
        out.append(diff_xy(comp).values)
        out.append(diff_yy(comp).values)
    return out


def grad_sq(u: VectorField) -> float:
    return sum(integrate(g**2, u.grid) for g in gradient(u))


def l2_sq(u: VectorField) -> float:
    return integrate(u.u1.values**2 + u.u2.values**2, u.grid)


def hess_sq(u: VectorField, slip: SlipPair | None = None, mu: float | None = None) -> float:
    hxx1, hxy1, hyy1, hxx2, hxy2, hyy2 = hessian(u, slip, mu)
    total = 0.0
    for xx, xy, yy in ((hxx1, hxy1, hyy1), (hxx2, hxy2, hyy2)):
        total += integrate(xx**2 + 2.0 * xy**2 + yy**2, u.grid)
    return total


def norms(u: VectorField, slip: SlipPair | None = None, mu: float | None = None) -> NormReport:
    grid = u.grid
    l2s = l2_sq(u)
    g2 = grad_sq(u)
    hs = hess_sq(u, slip, mu)
    mag2 = u.u1.values**2 + u.u2.values**2
    return NormReport(
        l2=float(np.sqrt(l2s)),
        h1=float(np.sqrt(l2s + g2)),
        h2=float(np.sqrt(l2s + g2 + hs)),
        l4=float(integrate(mag2**2, grid) ** 0.25),
        linf=float(np.sqrt(mag2.max())),
        strain_l2=float(np.sqrt(strain_sq(u))),
        grad_l2=float(np.sqrt(g2)),
        hess_l2=float(np.sqrt(hs)),
    )


# ---------------------------------------------------------------------------
# operators


def divergence(u: VectorField) -> ScalarField:
    return ScalarField(u.grid, diff_x(u.u1).values + diff_y(u.u2).values)


def curl2d(
    u: VectorField, slip: SlipPair | None = None, mu: float | None = None
) -> ScalarField:
    """``d_x u2 - d_y u1``; wall rows of ``d_y u1`` use Robin ghosts when slip data is given."""
    u1 = _with_robin(u.u1, slip, mu)
    return ScalarField(u.grid, diff_x(u.u2).values - diff_y(u1).values)


def wall_shear(u: VectorField) -> tuple[np.ndarray, np.ndarray]:
    """``2 D(u) n . t`` on the bottom and top walls (counter-clockwise tangent)."""
    _, uy1, ux2, _ = gradient(u)
    shear = -(uy1 + ux2)
    return shear[:, 0], shear[:, -1]


def strain_sq(u: VectorField) -> float:
    """``int |D(u)|^2`` with ``D = (grad u + grad u^T) / 2``."""
    ux1, uy1, ux2, uy2 = gradient(u)
    density = ux1**2 + uy2**2 + 0.5 * (uy1 + ux2) ** 2
    return integrate(density, u.grid)


def velocity_from_stream(
    psi: ScalarField, robin: bool = True, tol: float = 1e-10
) -> VectorField:
    """``u = (-d_y psi, d_x psi)`` for a streamfunction vanishing on the boundary."""
    v = psi.values
    scale = 1.0 + np.abs(v).max()
    trace = max(np.abs(v[0]).max(), np.abs(v[-1]).max(), np.abs(v[:, 0]).max(), np.abs(v[:, -1]).max())
    if trace > tol * scale:
        raise ValueError(f"streamfunction boundary trace {trace:.3e} exceeds tolerance")
    psi = ScalarField(psi.grid, v, BC.DIRICHLET_ZERO, BC.DIRICHLET_ZERO)
    u1 = -diff_y(psi).values
    u2 = diff_x(psi).values
    return VectorField.from_arrays(psi.grid, u1, u2, robin=robin)


# ---------------------------------------------------------------------------
# discrete Navier condition


def diff_matrix(n: int, h: float) -> np.ndarray:
    """Dense first-difference matrix: centered inside, one-sided second order at the ends."""
    d = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    d[idx, idx + 1] = 0.5 / h
    d[idx, idx - 1] = -0.5 / h
    d[0, :3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * h)
    d[-1, -3:] = np.array([1.0, -4.0, 3.0]) / (2.0 * h)
    return d


def navier_rows(grid: GridSpec, slip: SlipPair, mu: float) -> np.ndarray:
    """Rows ``C`` with ``C @ psi_column = 0`` iff that column's ``u1`` meets the slip condition.

    Acting on a streamfunction column; ``u1 = -D psi`` so the overall sign is
    irrelevant to the constraint.
    """
    n = grid.ny + 2
    d = diff_matrix(n, grid.hy)
    bottom = mu * (d[0] @ d) + slip.k0 * d[0]
    top = mu * (d[-1] @ d) - slip.k1 * d[-1]
    return np.vstack([bottom, top])


def _correction_profiles(y: np.ndarray) -> np.ndarray:
    return np.column_stack(
        [y * (1 - y) ** 2, y**2 * (1 - y), y * (1 - y) ** 3, y**3 * (1 - y)]
    )


def robin_project(psi: np.ndarray, grid: GridSpec, slip: SlipPair, mu: float) -> np.ndarray:
    """Add the smallest polynomial correction per x-column so the slip condition holds discretely.

    Corrections vanish at ``y = 0, 1`` so no-penetration and the boundary
    trace of ``psi`` are untouched.
    """
    c = navier_rows(grid, slip, mu)
    q = _correction_profiles(grid.y)
    cq_pinv = np.linalg.pinv(c @ q)
    coeffs = -cq_pinv @ (c @ np.asarray(psi).T)
    return psi + (q @ coeffs).T


def navier_residual(u: VectorField, slip: SlipPair, mu: float) -> float:
    uy1 = diff_y(ScalarField(u.grid, u.u1.values)).values
    v = u.u1.values
    bottom = mu * uy1[:, 0] + slip.k0 * v[:, 0]
    top = mu * uy1[:, -1] - slip.k1 * v[:, -1]
    return float(max(np.abs(bottom).max(), np.abs(top).max()))


def no_penetration_residual(u: VectorField) -> float:
    v1, v2 = u.u1.values, u.u2.values
    return float(
        max(np.abs(v2[:, 0]).max(), np.abs(v2[:, -1]).max(), np.abs(v1[0]).max(), np.abs(v1[-1]).max())
    )


def membership(
    u: VectorField, slip: SlipPair, mu: float, tol: float | None = None
) -> SpaceMembership:
    if tol is None:
        tol = 1e-8 * (1.0 + norms(u).h1)
    div = float(np.abs(divergence(u).values).max())
    pen = no_penetration_residual(u)
    nav = navier_residual(u, slip, mu)
    finite = bool(np.isfinite(u.u1.values).all() and np.isfinite(u.u2.values).all())
    in_h = finite and div <= tol and pen <= tol
    in_v = in_h
    in_w = in_v and nav <= tol
    return SpaceMembership(in_h, in_v, in_w, div, pen, nav, tol)


# ---------------------------------------------------------------------------
# reflection and cut-off


@dataclass(frozen=True)
class ReflectedField:
    """Weighted even extension across a wall; ``s`` is the signed distance into the fluid."""

    x: np.ndarray
    s: np.ndarray
    values: np.ndarray
    derivative_jump: np.ndarray


def reflect_exponential(
    u1: ScalarField, k: float, mu: float, wall: str = "bottom", tol: float = 1e-3
) -> ReflectedField:
    """Extend ``e^{k s / mu} u1`` evenly across the chosen wall.

    The Robin condition at that wall is what makes the extension C^1; data
    violating it by more than ``tol`` (relative) is rejected.
    """
    if mu <= 0:
        raise ValueError("viscosity must be positive")
    grid = u1.grid
    h = grid.hy
    if wall == "bottom":
        prof = u1.values
    elif wall == "top":
        prof = u1.values[:, ::-1]
    else:
        raise ValueError(f"wall must be 'bottom' or 'top', got {wall!r}")
    # in the wall-normal coordinate s both walls read mu u_s = -k u
    ds0 = (-3.0 * prof[:, 0] + 4.0 * prof[:, 1] - prof[:, 2]) / (2.0 * h)
    resid = np.abs(mu * ds0 + k * prof[:, 0]).max() / (1.0 + np.abs(prof).max())
    if resid > tol:
        raise ValueError(f"Robin residual {resid:.3e} too large for a C^1 extension")
    s = grid.y
    weighted = np.exp(k * s / mu)[None, :] * prof
    values = np.concatenate([weighted[:, :0:-1], weighted], axis=1)
    s_full = np.concatenate([-s[:0:-1], s])
    c = s.size - 1
    right = (-3.0 * values[:, c] + 4.0 * values[:, c + 1] - values[:, c + 2]) / (2.0 * h)
    left = (3.0 * values[:, c] - 4.0 * values[:, c - 1] + values[:, c - 2]) / (2.0 * h)
    return ReflectedField(grid.x, s_full, values, right - left)


def _smoothstep(t: np.ndarray) -> np.ndarray:
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def cutoff(y):
    """C^2 even bump: 1 on ``|y| <= 1``, 0 on ``|y| >= 2``, quintic in between."""
    t = np.clip(np.abs(np.asarray(y, dtype=float)) - 1.0, 0.0, 1.0)
    out = 1.0 - _smoothstep(t)
    return float(out) if out.ndim == 0 else out


def cutoff_derivative(y):
    a = np.asarray(y, dtype=float)
    t = np.clip(np.abs(a) - 1.0, 0.0, 1.0)
    out = -30.0 * t**2 * (1.0 - t) ** 2 * np.sign(a)
    return float(out) if out.ndim == 0 else out


def cutoff_wall(y):
    """``zeta(2 y)``, used near a horizontal wall."""
    return cutoff(2.0 * np.asarray(y))


def cutoff_lateral(x, half_length: float):
    """``zeta((x + L) / L)``, used near the left lateral wall."""
    return cutoff((np.asarray(x) + half_length) / half_length)
