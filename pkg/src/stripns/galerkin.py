"""Galerkin evolution in the Stokes eigenbasis with an energy ledger.

The modal system is::

    g' = -S g - N(g) + K g + F(t),     N(g)_l = sum_jk g_j g_k B[j, k, l]

with ``S = 2 mu int D(w_j):D(w_k)``, ``K`` the wall matrix
``int_walls k (w_j.t)(w_k.t)`` and ``F_k = int f . w_k``.  The basis is
L2-orthonormal, so every ledger term is a quadratic form in ``g`` and the
identity ``d/dt |g|^2 / 2 = -g.Sg + g.Kg + F.g`` holds exactly once ``B`` is
antisymmetric in its last two slots.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson

from . import kernels
from .grid import VectorField, integrate
from .spaces import gradient, membership
from .spectral import GalerkinBasis, basis_header

LEDGER_COLUMNS = (
    "t",
    "kinetic",
    "dissipation",
    "boundary_production",
    "forcing_power",
    "dt_norm",
    "h1_norm",
)


class BlowUpError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"non-finite modal coefficients at t={t:.6g}")
        self.t = t


@dataclass(frozen=True, eq=False)
class GalerkinState:
    coeffs: np.ndarray
    t: float
    basis: GalerkinBasis = field(repr=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.m,):
            raise ValueError(f"coefficient vector has shape {c.shape}, basis size is {self.basis.m}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    def field(self) -> VectorField:
        return reconstruct(self.basis, self.coeffs)


@dataclass(frozen=True)
class TrilinearTensor:
    B: np.ndarray
    defect: float


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    kinetic: float
    dissipation: float
    boundary_production: float
    forcing_power: float
    dt_norm: float
    h1_norm: float

    def row(self) -> tuple[float, ...]:
        return tuple(float(getattr(self, c)) for c in LEDGER_COLUMNS)


@dataclass(frozen=True, eq=False)
class ForcingSpec:
    """Body force ``f(t)`` sampled on the grid.

    ``f`` maps ``t`` to the pair of component arrays; ``dfdt`` is the exact
    time derivative when known.  ``None`` for ``f`` means no forcing.
    """

    f: Callable[[float], tuple[np.ndarray, np.ndarray]] | None = None
    dfdt: Callable[[float], tuple[np.ndarray, np.ndarray]] | None = None

    @property
    def is_zero(self) -> bool:
        return self.f is None

    def l2_norm(self, t: float, grid) -> float:
        if self.f is None:
            return 0.0
        f1, f2 = self.f(t)
        return float(np.sqrt(integrate(f1**2 + f2**2, grid)))


@dataclass(frozen=True, eq=False)
class ModalOperators:
    """Everything the modal ODE needs, assembled once per basis."""

    basis: GalerkinBasis = field(repr=False)
    S: np.ndarray
    K: np.ndarray
    G: np.ndarray
    tensor: TrilinearTensor

    @property
    def A(self) -> np.ndarray:
        return -self.S + self.K

    @property
    def m(self) -> int:
        return self.S.shape[0]

    def stability_bound(self) -> float:
        lam = np.linalg.eigvals(self.A)
        return float(2.0 / np.abs(lam).max())

    def loads(self, forcing: ForcingSpec, t: float) -> np.ndarray:
        if forcing.f is None:
            return np.zeros(self.m)
        return project_vector(self.basis, *forcing.f(t))

    def load_rates(self, forcing: ForcingSpec, t: float) -> np.ndarray | None:
        if forcing.f is None:
            return np.zeros(self.m)
        if forcing.dfdt is None:
            return None
        return project_vector(self.basis, *forcing.dfdt(t))


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    coeffs: np.ndarray
    rates: np.ndarray
    loads: np.ndarray
    load_rates: np.ndarray
    ops: ModalOperators = field(repr=False)

    def state(self, n: int) -> GalerkinState:
        return GalerkinState(self.coeffs[n], float(self.times[n]), self.ops.basis)


# ---------------------------------------------------------------------------
# assembly


def _stack_gradients(basis: GalerkinBasis) -> list[np.ndarray]:
    per = [gradient(p.field) for p in basis.pairs]
    return [np.stack([g[i] for g in per]) for i in range(4)]


def reconstruct(basis: GalerkinBasis, g: np.ndarray) -> VectorField:
    u1, u2 = basis.stacked()
    return VectorField.from_arrays(
        basis.grid, np.tensordot(g, u1, axes=1), np.tensordot(g, u2, axes=1), robin=True
    )


def project_vector(basis: GalerkinBasis, f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    u1, u2 = basis.stacked()
    w = basis.grid.weights
    return np.einsum("jxy,xy->j", u1, f1 * w) + np.einsum("jxy,xy->j", u2, f2 * w)


def viscous_matrix(basis: GalerkinBasis) -> np.ndarray:
    ux1, uy1, ux2, uy2 = _stack_gradients(basis)
    w = basis.grid.weights
    shear = uy1 + ux2

    def gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("ixy,jxy,xy->ij", a, b, w)

    s = 2.0 * basis.mu * (gram(ux1, ux1) + gram(uy2, uy2) + 0.5 * gram(shear, shear))
    return 0.5 * (s + s.T)


def boundary_matrix(basis: GalerkinBasis) -> np.ndarray:
    u1, _ = basis.stacked()
    wx = basis.grid.wx
    bottom = np.einsum("ix,jx,x->ij", u1[:, :, 0], u1[:, :, 0], wx)
    top = np.einsum("ix,jx,x->ij", u1[:, :, -1], u1[:, :, -1], wx)
    return basis.slip.k0 * bottom + basis.slip.k1 * top


def gradient_gram(basis: GalerkinBasis) -> np.ndarray:
    w = basis.grid.weights
    return sum(np.einsum("ixy,jxy,xy->ij", g, g, w) for g in _stack_gradients(basis))


def raw_trilinear(basis: GalerkinBasis, test: Sequence[VectorField] | None = None) -> np.ndarray:
    """Quadrature of ``int w_j . grad w_k . v_l`` (``v`` defaults to the basis itself)."""
    u1, u2 = basis.stacked()
    ux1, uy1, ux2, uy2 = _stack_gradients(basis)
    w = basis.grid.weights
    if test is None:
        v1, v2 = u1, u2
    else:
        v1 = np.stack([v.u1.values for v in test])
        v2 = np.stack([v.u2.values for v in test])
    # convective derivative of w_k along w_j, per component
    c1 = np.einsum("jxy,kxy->jkxy", u1, ux1) + np.einsum("jxy,kxy->jkxy", u2, uy1)
    c2 = np.einsum("jxy,kxy->jkxy", u1, ux2) + np.einsum("jxy,kxy->jkxy", u2, uy2)
    return np.einsum("jkxy,lxy->jkl", c1 * w, v1) + np.einsum("jkxy,lxy->jkl", c2 * w, v2)


def trilinear_tensor(basis: GalerkinBasis) -> TrilinearTensor:
    raw = raw_trilinear(basis)
    skew = 0.5 * (raw - raw.transpose(0, 2, 1))
    scale = np.abs(raw).max()
    defect = float(np.abs(raw + raw.transpose(0, 2, 1)).max() / (2.0 * scale)) if scale > 0 else 0.0
    return TrilinearTensor(skew, defect)


def modal_operators(basis: GalerkinBasis) -> ModalOperators:
    return ModalOperators(
        basis, viscous_matrix(basis), boundary_matrix(basis), gradient_gram(basis), trilinear_tensor(basis)
    )


# ---------------------------------------------------------------------------
# dynamics


def project_initial(
    u0: VectorField, basis: GalerkinBasis, check: bool = True, tol: float | None = None
) -> tuple[GalerkinState, float]:
    """L2 projection onto the basis; returns the state and ``||u0 - u_m(0)||``."""
    if check:
        mem = membership(u0, basis.slip, basis.mu, tol)
        if not mem.in_W:
            raise ValueError(
                "initial field is not admissible: "
                f"div={mem.divergence_residual:.2e}, normal={mem.no_penetration_residual:.2e}, "
                f"slip={mem.navier_bc_residual:.2e} (tol {mem.tol:.2e})"
            )
    g = project_vector(basis, u0.u1.values, u0.u2.values)
    um = reconstruct(basis, g)
    diff = (u0.u1.values - um.u1.values) ** 2 + (u0.u2.values - um.u2.values) ** 2
    return GalerkinState(g, 0.0, basis), float(np.sqrt(integrate(diff, basis.grid)))


def rhs(state: GalerkinState, forcing: ForcingSpec, ops: ModalOperators) -> np.ndarray:
    g = state.coeffs
    if g.shape != (ops.m,):
        raise ValueError(f"state of size {g.shape[0]} does not match operators of size {ops.m}")
    return ops.A @ g - kernels.convection(g, ops.tensor.B) + ops.loads(forcing, state.t)


def _check_dt(dt: float, ops: ModalOperators) -> None:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    bound = ops.stability_bound()
    if dt > bound:
        raise ValueError(f"dt={dt:.3e} exceeds the explicit stability bound {bound:.3e}")


def _half_step_loads(ops: ModalOperators, forcing: ForcingSpec, t0: float, dt: float, nsteps: int) -> np.ndarray:
    if forcing.is_zero:
        return np.zeros((2 * nsteps + 1, ops.m))
    return np.stack([ops.loads(forcing, t0 + 0.5 * dt * i) for i in range(2 * nsteps + 1)])


def step(state: GalerkinState, dt: float, forcing: ForcingSpec, ops: ModalOperators) -> GalerkinState:
    _check_dt(dt, ops)
    loads = _half_step_loads(ops, forcing, state.t, dt, 1)
    traj, bad = kernels.rk4_integrate(state.coeffs, ops.A, ops.tensor.B, loads, dt, 1)
    if bad >= 0:
        raise BlowUpError(state.t + dt)
    return GalerkinState(traj[1], state.t + dt, state.basis)


def integrate_run(
    state: GalerkinState, dt: float, T: float, forcing: ForcingSpec, ops: ModalOperators
) -> Trajectory:
    """RK4 from ``state.t`` to ``state.t + T``, recording every step."""
    _check_dt(dt, ops)
    nsteps = int(round(T / dt))
    if nsteps < 1 or abs(nsteps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a positive multiple of dt={dt}")
    t0 = state.t
    loads = _half_step_loads(ops, forcing, t0, dt, nsteps)
    traj, bad = kernels.rk4_integrate(state.coeffs, ops.A, ops.tensor.B, loads, dt, nsteps)
    if bad >= 0:
        raise BlowUpError(t0 + bad * dt)
    times = t0 + dt * np.arange(nsteps + 1)
    node_loads = loads[::2]
    conv = np.stack([kernels.convection(g, ops.tensor.B) for g in traj])
    rates = traj @ ops.A.T - conv + node_loads
    if forcing.is_zero:
        load_rates = np.zeros_like(node_loads)
    elif forcing.dfdt is not None:
        load_rates = np.stack([ops.load_rates(forcing, t) for t in times])
    else:
        # centred difference over the half-step samples; interior only needs one extra pair at the ends
        lo = np.vstack([ops.loads(forcing, t0 - 0.5 * dt)[None], loads[1::2]])
        hi = np.vstack([loads[1::2], ops.loads(forcing, times[-1] + 0.5 * dt)[None]])
        load_rates = (hi - lo) / dt
    return Trajectory(times, traj, rates, node_loads, load_rates, ops)


# ---------------------------------------------------------------------------
# ledger


def energy_terms(g: np.ndarray, gdot: np.ndarray, F: np.ndarray, ops: ModalOperators) -> dict[str, float]:
    return {
        "kinetic": 0.5 * float(g @ g),
        "dissipation": float(g @ ops.S @ g),
        "boundary_production": float(g @ ops.K @ g),
        "forcing_power": float(F @ g),
        "dt_norm": float(np.linalg.norm(gdot)),
        "h1_norm": float(np.sqrt(g @ g + g @ ops.G @ g)),
    }


def energy_record(state: GalerkinState, forcing: ForcingSpec, ops: ModalOperators) -> EnergyRecord:
    F = ops.loads(forcing, state.t)
    gdot = rhs(state, forcing, ops)
    return EnergyRecord(t=state.t, **energy_terms(state.coeffs, gdot, F, ops))


def ledger(traj: Trajectory) -> list[EnergyRecord]:
    ops = traj.ops
    return [
        EnergyRecord(t=float(t), **energy_terms(g, gd, F, ops))
        for t, g, gd, F in zip(traj.times, traj.coeffs, traj.rates, traj.loads)
    ]


def identity_residuals(traj: Trajectory) -> np.ndarray:
    """Per-step defect of the integrated energy identity.

    The time integral of ``r = -dissipation + boundary + forcing`` over a step
    uses the trapezoid rule with its endpoint-derivative correction, so the
    quadrature error is fifth order and the residual isolates the RK4 error.
    """
    ops = traj.ops
    g, gd, F, Fd = traj.coeffs, traj.rates, traj.loads, traj.load_rates
    A = ops.A
    r = np.einsum("ni,ij,nj->n", g, A, g) + np.einsum("ni,ni->n", F, g)
    rp = 2.0 * np.einsum("ni,ij,nj->n", g, A, gd) + np.einsum("ni,ni->n", Fd, g) + np.einsum("ni,ni->n", F, gd)
    dt = np.diff(traj.times)
    integral = 0.5 * dt * (r[:-1] + r[1:]) + dt**2 / 12.0 * (rp[:-1] - rp[1:])
    kin = 0.5 * np.einsum("ni,ni->n", g, g)
    return np.abs(np.diff(kin) - integral)


def ledger_magnitude(records: Sequence[EnergyRecord]) -> float:
    cols = ("kinetic", "dissipation", "boundary_production", "forcing_power")
    return max(abs(getattr(r, c)) for r in records for c in cols)


def ledger_rows(records: Sequence[EnergyRecord]) -> list[tuple[float, ...]]:
    return [r.row() for r in records]


# ---------------------------------------------------------------------------
# audits


def _trapz(y: np.ndarray, t: np.ndarray) -> float:
    return float(np.sum(0.5 * np.diff(t) * (y[1:] + y[:-1])))


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))])


@dataclass(frozen=True)
class GronwallReport:
    rate: float
    forcing_l2_sq: float
    sup_energy: float
    initial_energy: float
    envelope_margin: float
    integral_lhs: float
    integral_rhs: float
    h1_time_integral: float
    sup_h1_dt_sq: float
    initial_h1_dt_sq: float
    violated: bool
    first_violation_t: float | None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def gronwall_audit(
    records: Sequence[EnergyRecord],
    forcing_norms: Sequence[float] | None = None,
    rtol: float = 1e-9,
) -> GronwallReport:
    """Check ``|u|^2(t) <= e^{c t} (|u0|^2 + int ||f||^2)`` with the rate realized from the ledger.

    The rate is ``c = sup 2 * boundary / |u|^2`` (plus one when forced), i.e.
    the smallest constant for which the boundary production is dominated by
    the energy along this run.  ``forcing_norms`` are ``||f(t)||`` at the
    record times.
    """
    if len(records) < 2:
        raise ValueError("need at least two records")
    t = np.array([r.t for r in records])
    if np.ptp(np.diff(t)) > 1e-9 * max(1.0, t[-1]):
        raise ValueError("records must be uniformly spaced")
    y = np.array([2.0 * r.kinetic for r in records])
    bnd = np.array([r.boundary_production for r in records])
    diss = np.array([r.dissipation for r in records])
    fn2 = np.zeros_like(t) if forcing_norms is None else np.asarray(forcing_norms, dtype=float) ** 2
    forced = bool(np.any(fn2 > 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = np.where(y > 0, 2.0 * np.maximum(bnd, 0.0) / y, 0.0)
    c = float(rates.max()) + (1.0 if forced else 0.0)
    tt = t - t[0]
    env = np.exp(c * tt) * (y[0] + _cumtrapz(fn2, t))
    slack = rtol * max(1.0, float(env.max())) + 1e-300
    bad = np.nonzero(y > env + slack)[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = float(np.min(np.where(env > 0, (env - y) / env, 0.0)))
    # integrated energy inequality: |u(T)|^2 + 2 int diss <= |u0|^2 + int (2 bnd+ + ||f||^2 + |u|^2 [forced])
    src = 2.0 * np.maximum(bnd, 0.0) + fn2 + (y if forced else 0.0 * y)
    lhs = y[-1] + 2.0 * simpson(diss, x=t)
    rhs_int = y[0] + simpson(src, x=t)
    # allowance for quadrature error, estimated by the trapezoid/Simpson gap
    qtol = 2.0 * (abs(_trapz(diss, t) - simpson(diss, x=t)) * 2.0 + abs(_trapz(src, t) - simpson(src, x=t)))
    h1 = np.array([r.h1_norm for r in records])
    z = h1**2 + np.array([r.dt_norm for r in records]) ** 2
    integral_ok = lhs <= rhs_int + qtol + rtol * max(1.0, abs(rhs_int))
    return GronwallReport(
        rate=c,
        forcing_l2_sq=_trapz(fn2, t),
        sup_energy=float(y.max()),
        initial_energy=float(y[0]),
        envelope_margin=margin,
        integral_lhs=float(lhs),
        integral_rhs=float(rhs_int),
        h1_time_integral=_trapz(h1**2, t),
        sup_h1_dt_sq=float(z.max()),
        initial_h1_dt_sq=float(z[0]),
        violated=bool(bad.size > 0 or not integral_ok),
        first_violation_t=float(t[bad[0]]) if bad.size else None,
    )


@dataclass(frozen=True)
class UniquenessReport:
    delta: float
    times: np.ndarray = field(repr=False)
    growth: np.ndarray = field(repr=False)
    envelope: np.ndarray = field(repr=False)
    l4_constant: float
    korn_factor: float
    final_growth: float
    final_envelope: float
    within_envelope: bool

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "l4_constant": self.l4_constant,
            "korn_factor": self.korn_factor,
            "final_growth": self.final_growth,
            "final_envelope": self.final_envelope,
            "within_envelope": self.within_envelope,
        }


def perturbation_direction(m: int, seed: int) -> np.ndarray:
    p = np.random.default_rng(seed).standard_normal(m)
    return p / np.linalg.norm(p)


def _l4_ratio(ops: ModalOperators, w: np.ndarray) -> float:
    from .inequalities import ratio_l4

    lhs, rhs_ = ratio_l4(reconstruct(ops.basis, w), ops.basis.slip, ops.basis.mu)
    return lhs / rhs_ if rhs_ > 0 else 0.0


def uniqueness_experiment(
    state: GalerkinState,
    delta: float,
    dt: float,
    T: float,
    forcing: ForcingSpec,
    ops: ModalOperators,
    seed: int = 0,
    sample_every: int = 10,
) -> UniquenessReport:
    """Evolve ``g0`` and ``g0 + delta p`` and compare ``|g_a - g_b| / delta`` with the Gronwall bound.

    Envelope: ``exp(1/2 int C(s) (1 + ||u||_H1^2) ds)`` with
    ``C = C4^2 / (2 kappa mu) + max(0, 2 w.Kw / |w|^2)``.  ``C4`` is the
    realized L4 interpolation ratio of the difference field and ``kappa`` the
    realized ratio ``w.Sw / (mu |grad w|^2)``.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    p = perturbation_direction(ops.m, seed)
    run_a = integrate_run(state, dt, T, forcing, ops)
    pert = GalerkinState(state.coeffs + delta * p, state.t, state.basis)
    run_b = integrate_run(pert, dt, T, forcing, ops)
    diff = run_b.coeffs - run_a.coeffs
    times = run_a.times
    if delta == 0.0:
        growth = np.linalg.norm(diff, axis=1)
        return UniquenessReport(0.0, times, growth, np.ones_like(times), 0.0, 1.0, float(growth[-1]), 1.0, bool(np.all(growth == 0)))
    growth = np.linalg.norm(diff, axis=1) / delta
    mu = ops.basis.mu
    idx = np.arange(0, times.size, max(1, sample_every))
    c4 = 0.0
    kappa = np.inf
    for n in idx:
        w = diff[n]
        if np.linalg.norm(w) == 0:
            continue
        c4 = max(c4, _l4_ratio(ops, w))
        gw = w @ ops.G @ w
        if gw > 0:
            kappa = min(kappa, (w @ ops.S @ w) / (mu * gw))
    kappa = 1.0 if not np.isfinite(kappa) else kappa
    wn2 = np.einsum("ni,ni->n", diff, diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        bnd_rate = np.where(wn2 > 0, 2.0 * np.einsum("ni,ij,nj->n", diff, ops.K, diff) / wn2, 0.0)
    h1sq = np.maximum(
        np.einsum("ni,ni->n", run_a.coeffs, run_a.coeffs) + np.einsum("ni,ij,nj->n", run_a.coeffs, ops.G, run_a.coeffs),
        np.einsum("ni,ni->n", run_b.coeffs, run_b.coeffs) + np.einsum("ni,ij,nj->n", run_b.coeffs, ops.G, run_b.coeffs),
    )
    C = c4**2 / (2.0 * kappa * mu) * (1.0 + h1sq) + np.maximum(bnd_rate, 0.0)
    envelope = np.exp(0.5 * _cumtrapz(C, times))
    within = bool(np.all(growth <= envelope * (1.0 + 1e-9)))
    return UniquenessReport(
        delta, times, growth, envelope, float(c4), float(kappa), float(growth[-1]), float(envelope[-1]), within
    )


def weak_residual(
    traj: Trajectory, test_fields: Sequence[VectorField], forcing: ForcingSpec
) -> float:
    """Max over interior records and test fields of the weak-form residual.

    ``d/dt int u.v`` is a centred difference of neighbouring records; the
    remaining terms are quadratures on the reconstructed field.
    """
    ops = traj.ops
    basis = ops.basis
    if not test_fields:
        return 0.0
    grid = basis.grid
    w = grid.weights
    u1, u2 = basis.stacked()
    v1 = np.stack([v.u1.values for v in test_fields])
    v2 = np.stack([v.u2.values for v in test_fields])
    mass = np.einsum("jxy,lxy,xy->jl", u1, v1, w) + np.einsum("jxy,lxy,xy->jl", u2, v2, w)
    ux1, uy1, ux2, uy2 = _stack_gradients(basis)
    vg = [gradient(v) for v in test_fields]
    vx1, vy1, vx2, vy2 = (np.stack([g[i] for g in vg]) for i in range(4))
    mu = basis.mu
    visc = 2.0 * mu * (
        np.einsum("jxy,lxy,xy->jl", ux1, vx1, w)
        + np.einsum("jxy,lxy,xy->jl", uy2, vy2, w)
        + 0.5 * np.einsum("jxy,lxy,xy->jl", uy1 + ux2, vy1 + vx2, w)
    )
    wx = grid.wx
    wall = basis.slip.k0 * np.einsum("jx,lx,x->jl", u1[:, :, 0], v1[:, :, 0], wx) + basis.slip.k1 * np.einsum(
        "jx,lx,x->jl", u1[:, :, -1], v1[:, :, -1], wx
    )
    conv = raw_trilinear(basis, test_fields)
    g = traj.coeffs
    proj = g @ mass
    dt = np.diff(traj.times)
    ddt = (proj[2:] - proj[:-2]) / (dt[1:] + dt[:-1])[:, None]
    gi = g[1:-1]
    res = ddt + gi @ visc + np.einsum("nj,nk,jkl->nl", gi, gi, conv) - gi @ wall
    if not forcing.is_zero:
        fl = []
        for t in traj.times[1:-1]:
            f1, f2 = forcing.f(float(t))
            fl.append(np.einsum("lxy,xy->l", v1, f1 * w) + np.einsum("lxy,xy->l", v2, f2 * w))
        res = res - np.array(fl)
    return float(np.abs(res).max()) if res.size else 0.0


# ---------------------------------------------------------------------------
# persistence


def basis_fingerprint(basis: GalerkinBasis) -> str:
    h = hashlib.sha256(json.dumps(basis_header(basis), sort_keys=True).encode())
    for p in basis.pairs:
        h.update(np.ascontiguousarray(p.y_profile).tobytes())
    return h.hexdigest()


def checkpoint_dict(state: GalerkinState) -> dict:
    return {
        "schema": "stripns.checkpoint/1",
        "basis": basis_header(state.basis),
        "basis_sha256": basis_fingerprint(state.basis),
        "t": float(state.t),
        "coeffs": [float(c) for c in state.coeffs],
    }


def write_checkpoint(state: GalerkinState, path: str | Path) -> Path:
    from .io import write_json

    return write_json(path, checkpoint_dict(state))


def read_checkpoint(path: str | Path, basis: GalerkinBasis) -> GalerkinState:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != "stripns.checkpoint/1":
        raise ValueError(f"unsupported checkpoint schema {data.get('schema')!r}")
    if data["basis_sha256"] != basis_fingerprint(basis):
        raise ValueError("checkpoint was written for a different basis")
    return GalerkinState(np.array(data["coeffs"]), float(data["t"]), basis)
