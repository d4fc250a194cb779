"""Pure-numpy fallback for the hot solver kernel.

Must stay bit-identical to the compiled version in `_native.pyx`: both
evaluate the same expressions in the same association order, in float64.
"""

from __future__ import annotations

import numpy as np


def _neighbor_average(f: np.ndarray) -> np.ndarray:
    # 4-neighbor mean with replicate borders (an out-of-bounds neighbor
    # collapses onto the pixel itself).
    up = np.empty_like(f)
    up[1:, :] = f[:-1, :]
    up[0, :] = f[0, :]
    down = np.empty_like(f)
    down[:-1, :] = f[1:, :]
    down[-1, :] = f[-1, :]
    left = np.empty_like(f)
    left[:, 1:] = f[:, :-1]
    left[:, 0] = f[:, 0]
    right = np.empty_like(f)
    right[:, :-1] = f[:, 1:]
    right[:, -1] = f[:, -1]
    return (up + down + left + right) * 0.25


def coupled_jacobi(
    j11: np.ndarray,
    j12: np.ndarray,
    j22: np.ndarray,
    j13: np.ndarray,
    j23: np.ndarray,
    alpha: float,
    iterations: int,
    u0: np.ndarray,
    v0: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-point sweeps for the coupled flow update.

    Each sweep replaces every pixel's (u, v) by the exact solution of

        (alpha^2 + j11) u + j12 v = alpha^2 * u_bar - j13
        j12 u + (alpha^2 + j22) v = alpha^2 * v_bar - j23

    where u_bar, v_bar are 4-neighbor averages taken from the previous
    sweep.  With raw gradient products (rank-1 tensor) this reduces
    algebraically to the classic global-smoothness update
    u_bar - Ix*(Ix*u_bar + Iy*v_bar + It) / (alpha^2 + Ix^2 + Iy^2).
    """
    alpha2 = alpha * alpha
    a = alpha2 + j11
    c = alpha2 + j22
    det = a * c - j12 * j12
    u = np.array(u0, dtype=np.float64, copy=True)
    v = np.array(v0, dtype=np.float64, copy=True)
    for _ in range(iterations):
        ubar = _neighbor_average(u)
        vbar = _neighbor_average(v)
        ru = alpha2 * ubar - j13
        rv = alpha2 * vbar - j23
        u = (c * ru - j12 * rv) / det
        v = (a * rv - j12 * ru) / det
    return u, v
