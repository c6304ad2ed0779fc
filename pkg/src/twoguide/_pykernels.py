"""Pure-numpy implementations of the trajectory kernels.

Used when the compiled extension is unavailable, or when
TWOGUIDE_PURE_PYTHON=1 is set.  Vectorised over trajectories, looping
over time steps.
"""
import numpy as np


def eval_table(tab, knots, y):
    """Evaluate the four interpolants (P, M, P', M') at positions ``y``."""
    ncell = tab.shape[0]
    inv_h = (ncell) / (knots[-1] - knots[0])
    i = np.floor((y - knots[0]) * inv_h).astype(np.intp)
    np.clip(i, 0, ncell - 1, out=i)
    dx = (y - knots[i])[:, None]
    r = tab[i]
    vals = ((r[:, 0::4] * dx + r[:, 1::4]) * dx + r[:, 2::4]) * dx + r[:, 3::4]
    return vals[:, 0], vals[:, 1], vals[:, 2], vals[:, 3]


def velocity(tab, knots, vscale, y, c, s, floor):
    """Two-mode Bohmian velocity and a below-floor flag at positions ``y``."""
    P, M, dP, dM = eval_table(tab, knots, y)
    den = c * c * P * P + s * s * M * M
    ok = den > floor
    v = np.zeros_like(y)
    v[ok] = vscale * c * s * (P[ok] * dM[ok] - M[ok] * dP[ok]) / den[ok]
    return v, ~ok


def rk4_integrate(tab, knots, vscale, y0, stage_c, stage_s, stage_floor,
                  dt, n_steps, store_every, ylo, yhi):
    y = np.array(y0, dtype=float)
    n_store = n_steps // store_every + 1
    out = np.empty((y.size, n_store))
    out[:, 0] = y
    exited = np.zeros(y.size, dtype=bool)
    hits = 0
    half = 0.5 * dt
    for n in range(n_steps):
        c0, c1, c2 = stage_c[n]
        s0, s1, s2 = stage_s[n]
        f0, f1, f2 = stage_floor[n]
        k1, b1 = velocity(tab, knots, vscale, y, c0, s0, f0)
        k2, b2 = velocity(tab, knots, vscale, y + half * k1, c1, s1, f1)
        k3, b3 = velocity(tab, knots, vscale, y + half * k2, c1, s1, f1)
        k4, b4 = velocity(tab, knots, vscale, y + dt * k3, c2, s2, f2)
        hits += int(b1.sum() + b2.sum() + b3.sum() + b4.sum())
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        lo, hi = y < ylo, y > yhi
        if lo.any() or hi.any():
            exited |= lo | hi
            np.clip(y, ylo, yhi, out=y)
        if (n + 1) % store_every == 0:
            out[:, (n + 1) // store_every] = y
    return out, exited, hits
