"""Shifted Stokes eigenbasis under Navier-slip walls.

Each eigenfield is a single x-mode ``psi = sin(alpha (x + L)) phi(y)`` with
``alpha = a pi / (2 L)``; the lateral free-slip conditions are exactly the
sine parity, so the 2D problem splits into one small generalized symmetric
eigenproblem per wavenumber ``a``.

The bilinear form on the left is::

    a(u, v) = mu int grad u : grad v - int_walls k (u.t)(v.t) + beta int u.v

which is the weak form of ``-mu Lap u + grad q + beta u`` with the slip law
``mu d_y u1 = -k0 u1`` (bottom) and ``mu d_y u1 = k1 u1`` (top).

Discrete details.  With reflection ghosts the x-differences act exactly on
sine and cosine samples: ``Dx sin = at cos`` and ``Dx cos = -at sin`` where
``at = sin(alpha hx) / hx``.  Trapezoid sums of ``sin^2`` and ``cos^2`` over
the lateral period equal ``L``, and modes with different ``a`` are exactly
orthogonal.  In y the profile ``phi`` is constrained to vanish at both walls
and to satisfy the discrete slip rows, so every eigenfield satisfies the wall
condition to round-off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .grid import GridSpec, SlipPair, StripGeometry, VectorField, build_grid, integrate
from .spaces import diff_matrix, navier_rows

BASIS_SCHEMA = "stripns.basis/1"


@dataclass(frozen=True)
class ShiftParams:
    beta: float
    epsilon: float
    beta0: float

    @classmethod
    def from_slip(
        cls,
        slip: SlipPair,
        mu: float,
        epsilon: float | None = None,
        beta: float | None = None,
    ) -> ShiftParams:
        """Threshold ``beta0 = max(k0^2, k1^2) / eps - (k0 + k1)``; ``beta`` defaults to ``beta0 + 1``."""
        if mu <= 0:
            raise ValueError(f"mu must be positive, got {mu!r}")
        eps = 0.5 * mu if epsilon is None else float(epsilon)
        if not 0.0 < eps < mu:
            raise ValueError(f"epsilon must lie in (0, mu), got {eps!r}")
        beta0 = max(slip.k0**2, slip.k1**2) / eps - (slip.k0 + slip.k1)
        b = beta0 + 1.0 if beta is None else float(beta)
        return cls(b, eps, beta0)

    @property
    def admissible(self) -> bool:
        return self.beta > self.beta0


@dataclass(frozen=True, eq=False)
class EigenPair:
    lambda_shifted: float
    Lambda: float
    x_mode: int
    y_profile: np.ndarray
    field: VectorField = field(repr=False)


@dataclass(frozen=True, eq=False)
class GalerkinBasis:
    pairs: tuple[EigenPair, ...]
    grid: GridSpec
    slip: SlipPair
    mu: float
    shift: ShiftParams

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.Lambda for p in self.pairs])

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """Velocity components of all basis fields, shape ``(m, nx + 2, ny + 2)``."""
        u1 = np.stack([p.field.u1.values for p in self.pairs])
        u2 = np.stack([p.field.u2.values for p in self.pairs])
        return u1, u2

    def truncate(self, m: int) -> GalerkinBasis:
        if not 1 <= m <= self.m:
            raise ValueError(f"cannot truncate a basis of size {self.m} to {m}")
        return GalerkinBasis(self.pairs[:m], self.grid, self.slip, self.mu, self.shift)


@dataclass(frozen=True)
class ModeProblem:
    """Reduced pencil ``A y = lambda M y``; profiles are recovered as ``phi = Z y``."""

    stiffness: np.ndarray
    mass: np.ndarray
    null_basis: np.ndarray
    alpha_discrete: float


@dataclass(frozen=True)
class BasisReport:
    gram_offdiag: float
    gram_diag_defect: float
    navier_residual: float
    eigen_residual: float
    min_Lambda: float
    beta0: float
    ordered: bool

    def as_dict(self) -> dict[str, float | bool]:
        return dict(self.__dict__)


# ---------------------------------------------------------------------------
# assembly


def _compact_second(n: int, h: float) -> np.ndarray:
    d2 = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    d2[idx, idx - 1] = 1.0
    d2[idx, idx] = -2.0
    d2[idx, idx + 1] = 1.0
    d2[0, :4] = [2.0, -5.0, 4.0, -1.0]
    d2[-1, -4:] = [-1.0, 4.0, -5.0, 2.0]
    return d2 / h**2


def discrete_wavenumber(a: int, grid: GridSpec) -> float:
    alpha = a * np.pi / (2.0 * grid.L)
    return float(np.sin(alpha * grid.hx) / grid.hx)


def assemble_mode_problem(
    a: int, grid: GridSpec, slip: SlipPair, mu: float, shift: ShiftParams
) -> ModeProblem:
    if a < 1:
        raise ValueError(f"x-mode index must be >= 1, got {a}")
    if a > grid.nx:
        raise ValueError(f"x-mode {a} is not resolved by nx={grid.nx}")
    if not shift.admissible:
        raise ValueError(
            f"beta={shift.beta} does not exceed beta0={shift.beta0}; pencil may be indefinite"
        )
    n = grid.ny + 2
    h = grid.hy
    L = grid.L
    at = discrete_wavenumber(a, grid)
    d = diff_matrix(n, h)
    d2 = _compact_second(n, h)
    w = np.diag(grid.wy)
    mass_full = L * (d.T @ w @ d + at**2 * w)
    wall = slip.k0 * np.outer(d[0], d[0]) + slip.k1 * np.outer(d[-1], d[-1])
    stiff_full = (
        mu * L * (d2.T @ w @ d2 + 2.0 * at**2 * (d.T @ w @ d) + at**4 * w)
        - L * wall
        + shift.beta * mass_full
    )
    cons = np.zeros((2, n))
    cons[0, 0] = 1.0
    cons[1, -1] = 1.0
    cons = np.vstack([cons, navier_rows(grid, slip, mu)])
    z = sla.null_space(cons)
    stiff = z.T @ stiff_full @ z
    mass = z.T @ mass_full @ z
    stiff = 0.5 * (stiff + stiff.T)
    mass = 0.5 * (mass + mass.T)
    return ModeProblem(stiff, mass, z, at)


def _mode_field(a: int, phi: np.ndarray, at: float, grid: GridSpec) -> VectorField:
    s = np.sin(a * np.pi * (grid.x + grid.L) / (2.0 * grid.L))
    c = np.cos(a * np.pi * (grid.x + grid.L) / (2.0 * grid.L))
    d = diff_matrix(grid.ny + 2, grid.hy)
    # equal to velocity_from_stream(s phi) node for node
    u1 = -np.outer(s, d @ phi)
    u2 = at * np.outer(c, phi)
    u1[0] = u1[-1] = 0.0
    return VectorField.from_arrays(grid, u1, u2, robin=True)


def solve_mode(problem: ModeProblem) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and profiles ``phi`` normalized in the mode mass."""
    try:
        chol = sla.cholesky(problem.mass, lower=True)
    except sla.LinAlgError as exc:
        raise RuntimeError("mode mass matrix is not SPD; assembly is inconsistent") from exc
    a_red = sla.solve_triangular(chol, problem.stiffness, lower=True)
    a_red = sla.solve_triangular(chol, a_red.T, lower=True)
    a_red = 0.5 * (a_red + a_red.T)
    lam, y = np.linalg.eigh(a_red)
    coeffs = sla.solve_triangular(chol.T, y, lower=False)
    profiles = problem.null_basis @ coeffs
    # sign convention: first nonzero-ish derivative sample positive
    for j in range(profiles.shape[1]):
        col = profiles[:, j]
        pivot = col[np.argmax(np.abs(col) > 1e-8 * np.abs(col).max())]
        if pivot < 0:
            profiles[:, j] = -col
    return lam, profiles


def solve_eigenpairs(
    m: int,
    grid: GridSpec,
    slip: SlipPair,
    mu: float,
    shift: ShiftParams,
    a_max: int | None = None,
) -> GalerkinBasis:
    if m < 1:
        raise ValueError(f"basis size must be >= 1, got {m}")
    if a_max is None:
        a_max = min(m, grid.nx)
    candidates: list[tuple[float, int, int, np.ndarray, float, float]] = []
    for a in range(1, a_max + 1):
        prob = assemble_mode_problem(a, grid, slip, mu, shift)
        lam, profiles = solve_mode(prob)
        for j, lj in enumerate(lam):
            candidates.append((lj - shift.beta, a, j, profiles[:, j], lj, prob.alpha_discrete))
    if m > len(candidates):
        raise ValueError(f"requested m={m} exceeds the {len(candidates)} available discrete modes")
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))
    pairs = []
    for Lam, a, _, phi, lj, at in candidates[:m]:
        pairs.append(EigenPair(float(lj), float(Lam), a, phi.copy(), _mode_field(a, phi, at, grid)))
    return GalerkinBasis(tuple(pairs), grid, slip, mu, shift)


# ---------------------------------------------------------------------------
# certification


def gram_matrix(basis: GalerkinBasis) -> np.ndarray:
    u1, u2 = basis.stacked()
    w = basis.grid.weights
    return np.einsum("ixy,jxy,xy->ij", u1, u1, w) + np.einsum("ixy,jxy,xy->ij", u2, u2, w)


def _gradients(basis: GalerkinBasis) -> list[np.ndarray]:
    from .spaces import gradient

    comps = [gradient(p.field) for p in basis.pairs]
    return [np.stack([c[i] for c in comps]) for i in range(4)]


def _wall_matrix(basis: GalerkinBasis) -> np.ndarray:
    u1, _ = basis.stacked()
    wx = basis.grid.wx
    bottom = np.einsum("ix,jx,x->ij", u1[:, :, 0], u1[:, :, 0], wx)
    top = np.einsum("ix,jx,x->ij", u1[:, :, -1], u1[:, :, -1], wx)
    return basis.slip.k0 * bottom + basis.slip.k1 * top


def verify_basis(basis: GalerkinBasis) -> BasisReport:
    from .spaces import navier_residual

    grid, mu = basis.grid, basis.mu
    gram = gram_matrix(basis)
    off = gram - np.diag(np.diag(gram))
    nav = 0.0
    for p in basis.pairs:
        scale = 1.0 + np.abs(p.field.u1.values).max()
        nav = max(nav, navier_residual(p.field, basis.slip, mu) / (mu * scale))
    grads = _gradients(basis)
    w = grid.weights
    stiff = sum(np.einsum("ixy,jxy,xy->ij", g, g, w) for g in grads)
    weak = mu * stiff - _wall_matrix(basis) - np.diag(basis.eigenvalues)
    scale = max(1.0, np.abs(basis.eigenvalues).max())
    lam = basis.eigenvalues
    return BasisReport(
        gram_offdiag=float(np.abs(off).max()) if basis.m > 1 else 0.0,
        gram_diag_defect=float(np.abs(np.diag(gram) - 1.0).max()),
        navier_residual=float(nav),
        eigen_residual=float(np.abs(weak).max() / scale),
        min_Lambda=float(lam.min()),
        beta0=basis.shift.beta0,
        ordered=bool(np.all(np.diff(lam) >= -1e-12 * scale)),
    )


# ---------------------------------------------------------------------------
# persistence


def basis_header(basis: GalerkinBasis) -> dict:
    g = basis.grid
    return {
        "schema": BASIS_SCHEMA,
        "L": g.L,
        "nx": g.nx,
        "ny": g.ny,
        "k0": basis.slip.k0,
        "k1": basis.slip.k1,
        "mu": basis.mu,
        "beta": basis.shift.beta,
        "beta0": basis.shift.beta0,
        "epsilon": basis.shift.epsilon,
        "m": basis.m,
    }


def export_basis(basis: GalerkinBasis, directory: str | Path, stem: str = "basis") -> list[Path]:
    """Write ``<stem>.json`` (header) and ``<stem>.csv`` (one row per pair: j, a, Lambda, profile...)."""
    from .io import atomic_write_text

    directory = Path(directory)
    header = basis_header(basis)
    rows = ["j,a,Lambda," + ",".join(f"phi{i}" for i in range(basis.grid.ny + 2))]
    for j, p in enumerate(basis.pairs):
        vals = ",".join(repr(float(v)) for v in p.y_profile)
        rows.append(f"{j},{p.x_mode},{p.Lambda!r},{vals}")
    jpath = directory / f"{stem}.json"
    cpath = directory / f"{stem}.csv"
    atomic_write_text(jpath, json.dumps(header, indent=2, sort_keys=True) + "\n")
    atomic_write_text(cpath, "\n".join(rows) + "\n")
    return [jpath, cpath]


def load_basis(directory: str | Path, stem: str = "basis") -> GalerkinBasis:
    directory = Path(directory)
    header = json.loads((directory / f"{stem}.json").read_text())
    if header.get("schema") != BASIS_SCHEMA:
        raise ValueError(f"unsupported basis schema {header.get('schema')!r}")
    grid = build_grid(StripGeometry(header["L"]), header["nx"], header["ny"])
    slip = SlipPair(header["k0"], header["k1"])
    shift = ShiftParams(header["beta"], header["epsilon"], header["beta0"])
    data = np.loadtxt(directory / f"{stem}.csv", delimiter=",", skiprows=1, ndmin=2)
    pairs = []
    for row in data:
        a = int(row[1])
        Lam = float(row[2])
        phi = row[3:]
        at = discrete_wavenumber(a, grid)
        pairs.append(EigenPair(Lam + shift.beta, Lam, a, phi, _mode_field(a, phi, at, grid)))
    return GalerkinBasis(tuple(pairs), grid, slip, header["mu"], shift)


def l2_inner(u: VectorField, v: VectorField) -> float:
    return integrate(u.u1.values * v.u1.values + u.u2.values * v.u2.values, u.grid)
