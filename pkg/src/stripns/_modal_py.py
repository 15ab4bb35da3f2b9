"""Reference implementation of the modal kernels (NumPy only)."""

from __future__ import annotations

import numpy as np


def convection(g: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``N_l = sum_jk g_j g_k B[j, k, l]``."""
    return g @ np.tensordot(g, B, axes=(0, 0))


def rk4_integrate(
    g0: np.ndarray,
    A: np.ndarray,
    B: np.ndarray,
    loads: np.ndarray,
    dt: float,
    nsteps: int,
) -> tuple[np.ndarray, int]:
    """Classical RK4 for ``g' = A g - N(g) + F(t)``.

    ``loads`` holds ``F`` at every half step, shape ``(2 nsteps + 1, m)``.
    Returns the trajectory ``(nsteps + 1, m)`` and the index of the first
    non-finite step (``-1`` when the run stays finite).
    """
    m = g0.shape[0]
    traj = np.zeros((nsteps + 1, m))
    traj[0] = g0
    g = np.array(g0, dtype=float)
    half = 0.5 * dt
    # overflow is detected below and reported through the returned index
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(nsteps):
            f0 = loads[2 * n]
            fh = loads[2 * n + 1]
            f1 = loads[2 * n + 2]
            k1 = A @ g - convection(g, B) + f0
            y = g + half * k1
            k2 = A @ y - convection(y, B) + fh
            y = g + half * k2
            k3 = A @ y - convection(y, B) + fh
            y = g + dt * k3
            k4 = A @ y - convection(y, B) + f1
            g = g + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(g)):
                traj[n + 1 :] = np.nan
                return traj, n + 1
            traj[n + 1] = g
    return traj, -1
