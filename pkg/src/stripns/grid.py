"""Truncated strip geometry, tensor grids, quadrature and finite differences.

Fields live on the closed rectangle ``[-L, L] x [0, 1]`` sampled at
``(nx + 2) x (ny + 2)`` uniform nodes, boundary nodes included.  Arrays are
indexed ``[i, j]`` with ``i`` along x and ``j`` along y.

Boundary handling differs by axis.  The lateral walls ``x = +-L`` are
free-slip symmetry planes, so fields there are extended by reflection
(odd for ``DIRICHLET_ZERO``, even for ``NEUMANN_ZERO``).  The horizontal
walls use one-sided second-order stencils unless Robin ghost rows have been
attached with :func:`apply_robin_ghost`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


class BC(enum.Enum):
    DIRICHLET_ZERO = "dirichlet-zero"
    ROBIN_SLIP = "robin-slip"
    NEUMANN_ZERO = "neumann-zero"
    NONE = "none"


@dataclass(frozen=True)
class StripGeometry:
    half_length: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.half_length) or self.half_length < 1.0:
            raise ValueError(f"half_length must be >= 1, got {self.half_length!r}")

    @property
    def area(self) -> float:
        return 2.0 * self.half_length


@dataclass(frozen=True)
class GridSpec:
    geometry: StripGeometry
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"need nx, ny >= 8, got nx={self.nx}, ny={self.ny}")

    @property
    def L(self) -> float:
        return self.geometry.half_length

    @property
    def hx(self) -> float:
        return 2.0 * self.L / (self.nx + 1)

    @property
    def hy(self) -> float:
        return 1.0 / (self.ny + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx + 2, self.ny + 2)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.nx + 2)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 2)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def wx(self) -> np.ndarray:
        return trapezoid_weights(self.nx + 2, self.hx)

    @property
    def wy(self) -> np.ndarray:
        return trapezoid_weights(self.ny + 2, self.hy)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.wx, self.wy)


@dataclass(frozen=True)
class SlipPair:
    k0: float
    k1: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.k0) and np.isfinite(self.k1)):
            raise ValueError("slip coefficients must be finite")


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Grid samples of a scalar function plus per-axis boundary metadata.

    ``ghost_bottom`` / ``ghost_top`` hold the rows at ``y = -hy`` and
    ``y = 1 + hy`` once Robin ghosts are attached.
    """

    grid: GridSpec
    values: np.ndarray
    bc_x: BC = BC.NONE
    bc_y: BC = BC.NONE
    ghost_bottom: np.ndarray | None = field(default=None, repr=False)
    ghost_top: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "values", values)

    @property
    def geometry(self) -> StripGeometry:
        return self.grid.geometry

    @property
    def has_ghosts(self) -> bool:
        return self.ghost_bottom is not None and self.ghost_top is not None

    def with_values(self, values: np.ndarray) -> ScalarField:
        return replace(self, values=values, ghost_bottom=None, ghost_top=None)

    def __mul__(self, c: float) -> ScalarField:
        return self.with_values(c * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    u1: ScalarField
    u2: ScalarField

    def __post_init__(self) -> None:
        if self.u1.grid != self.u2.grid:
            raise ValueError("components live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.u1.grid

    def scaled(self, c: float) -> VectorField:
        return VectorField(self.u1 * c, self.u2 * c)

    @classmethod
    def from_arrays(
        cls, grid: GridSpec, u1: np.ndarray, u2: np.ndarray, robin: bool = False
    ) -> VectorField:
        """Wrap raw arrays with the standard velocity boundary tags."""
        return cls(
            ScalarField(grid, u1, BC.DIRICHLET_ZERO, BC.ROBIN_SLIP if robin else BC.NONE),
            ScalarField(grid, u2, BC.NEUMANN_ZERO, BC.DIRICHLET_ZERO),
        )

    @classmethod
    def zeros(cls, grid: GridSpec, robin: bool = True) -> VectorField:
        z = np.zeros(grid.shape)
        return cls.from_arrays(grid, z, z.copy(), robin=robin)


def build_grid(geometry: StripGeometry, nx: int, ny: int) -> GridSpec:
    if nx <= 0 or ny <= 0:
        raise ValueError(f"node counts must be positive, got nx={nx}, ny={ny}")
    return GridSpec(geometry, int(nx), int(ny))


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


# ---------------------------------------------------------------------------
# differences


def _diff_axis(
    f: np.ndarray,
    h: float,
    axis: int,
    low: np.ndarray | None,
    high: np.ndarray | None,
) -> np.ndarray:
    """Centered first difference along ``axis``.

    ``low`` / ``high`` are ghost slices beyond the ends; ``None`` selects the
    one-sided second-order stencil at that end.
    """
    f = np.moveaxis(f, axis, 0)
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    if low is None:
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    else:
        d[0] = (f[1] - low) / (2.0 * h)
    if high is None:
        d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    else:
        d[-1] = (high - f[-2]) / (2.0 * h)
    return np.moveaxis(d, 0, axis)


def _second_axis(
    f: np.ndarray,
    h: float,
    axis: int,
    low: np.ndarray | None,
    high: np.ndarray | None,
) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    if low is None:
        d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    else:
        d[0] = (f[1] - 2.0 * f[0] + low) / h**2
    if high is None:
        d[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    else:
        d[-1] = (high - 2.0 * f[-1] + f[-2]) / h**2
    return np.moveaxis(d, 0, axis)


def _x_ghosts(f: ScalarField) -> tuple[np.ndarray | None, np.ndarray | None]:
    v = f.values
    if f.bc_x is BC.DIRICHLET_ZERO:
        return -v[1], -v[-2]
    if f.bc_x is BC.NEUMANN_ZERO:
        return v[1], v[-2]
    return None, None


def _y_ghosts(f: ScalarField) -> tuple[np.ndarray | None, np.ndarray | None]:
    if f.has_ghosts:
        return f.ghost_bottom, f.ghost_top
    if f.bc_y is BC.NEUMANN_ZERO:
        return f.values[:, 1], f.values[:, -2]
    return None, None


def _derived(f: ScalarField, values: np.ndarray) -> ScalarField:
    return ScalarField(f.grid, values, BC.NONE, BC.NONE)


def diff_x(f: ScalarField) -> ScalarField:
    low, high = _x_ghosts(f)
    return _derived(f, _diff_axis(f.values, f.grid.hx, 0, low, high))


def diff_y(f: ScalarField) -> ScalarField:
    low, high = _y_ghosts(f)
    return _derived(f, _diff_axis(f.values, f.grid.hy, 1, low, high))


def diff_xx(f: ScalarField) -> ScalarField:
    low, high = _x_ghosts(f)
    return _derived(f, _second_axis(f.values, f.grid.hx, 0, low, high))


def diff_yy(f: ScalarField) -> ScalarField:
    low, high = _y_ghosts(f)
    return _derived(f, _second_axis(f.values, f.grid.hy, 1, low, high))


def diff_xy(f: ScalarField) -> ScalarField:
    """Mixed derivative; the x-reflection of ``f`` carries over to ``d/dy f``."""
    dy = diff_y(f)
    return diff_x(replace(dy, bc_x=f.bc_x))


def apply_robin_ghost(u1: ScalarField, slip: SlipPair, mu: float) -> ScalarField:
    """Attach ghost rows enforcing ``mu u_y = -k0 u`` at y=0 and ``mu u_y = k1 u`` at y=1.

    The centered wall difference then reproduces the Robin relations exactly.
    """
    if mu <= 0:
        raise ValueError(f"viscosity must be positive, got {mu!r}")
    if u1.bc_y is not BC.ROBIN_SLIP:
        raise ValueError(f"field carries bc_y={u1.bc_y.value}, expected robin-slip")
    v = u1.values
    h = u1.grid.hy
    bottom = v[:, 1] + 2.0 * h * slip.k0 * v[:, 0] / mu
    top = v[:, -2] + 2.0 * h * slip.k1 * v[:, -1] / mu
    return replace(u1, ghost_bottom=bottom, ghost_top=top)


# ---------------------------------------------------------------------------
# quadrature


def integrate(f: ScalarField | np.ndarray, grid: GridSpec | None = None) -> float:
    """Composite trapezoid rule over the closed rectangle."""
    if isinstance(f, ScalarField):
        grid, values = f.grid, f.values
    else:
        if grid is None:
            raise ValueError("raw arrays need an explicit grid")
        values = np.asarray(f)
    return float(grid.wx @ values @ grid.wy)


def integrate_x(samples: np.ndarray, grid: GridSpec) -> float:
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.nx + 2,):
        raise ValueError(f"trace has length {samples.shape}, expected {grid.nx + 2}")
    return float(grid.wx @ samples)


@dataclass(frozen=True)
class BoundaryIntegral:
    boundary: float
    volume: float | None


def boundary_integral(
    f_bottom: np.ndarray,
    f_top: np.ndarray,
    slip: SlipPair,
    grid: GridSpec,
    f_volume: np.ndarray | None = None,
) -> BoundaryIntegral:
    """Wall production ``int (k1 f_top + k0 f_bottom) dx``.

    With ``f_volume`` (the full field whose traces were passed) the volume
    form ``int d/dy[((k1 + k0) y - k0) f]`` is evaluated as well.
    """
    f_bottom = np.asarray(f_bottom, dtype=float)
    f_top = np.asarray(f_top, dtype=float)
    if f_bottom.shape != f_top.shape:
        raise ValueError("bottom and top traces differ in length")
    wall = integrate_x(slip.k1 * f_top + slip.k0 * f_bottom, grid)
    volume = None
    if f_volume is not None:
        _, y = grid.mesh()
        weight = (slip.k1 + slip.k0) * y - slip.k0
        g = _diff_axis(weight * np.asarray(f_volume), grid.hy, 1, None, None)
        volume = integrate(g, grid)
    return BoundaryIntegral(wall, volume)
