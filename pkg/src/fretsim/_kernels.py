"""Compiled inner loops: the bounded OU recursion and fixed-step RK4."""
from __future__ import annotations

import numpy as np
from numba import njit

# bounding policy codes, kept in sync with noise.BoundingPolicy
POLICY_REJECT = 0
POLICY_CLIP = 1
POLICY_REFLECT = 2

# status codes returned by ou_fill
OU_DONE = 0
OU_NEED_NORMALS = 1
OU_REDRAW_LIMIT = 2

MAX_CONSECUTIVE_REDRAWS = 10_000

# status codes returned by rk4_run
RK_OK = 0
RK_DRIFT = 1
RK_NEGATIVE = 2

PER_STEP_DRIFT_LIMIT = 1e-6
NEGATIVE_TOLERANCE = -1e-12


@njit(cache=True)
def reflect_into(value, lo, hi):
    """Fold a value into [lo, hi] by mirror reflection at the bounds."""
    if lo <= value <= hi:
        return value
    if lo == -np.inf:
        return 2.0 * hi - value
    if hi == np.inf:
        return 2.0 * lo - value
    width = hi - lo
    if width <= 0.0:
        return lo
    y = (value - lo) % (2.0 * width)
    if y > width:
        y = 2.0 * width - y
    return lo + y


@njit(cache=True)
def ou_fill(values, start, xi0, decay, step_sigma, baseline, lo, hi, policy,
            normals, pos, redraws):
    """Fill ``values[start:]`` with bounded samples ``baseline + xi``.

    xi advances as ``xi' = xi * decay + step_sigma * z`` with z consumed
    from ``normals`` beginning at ``pos``. ``redraws`` carries the count
    of consecutive rejected candidates across buffer refills.

    Returns ``(next_index, xi, pos, redraws, status)``.
    """
    n = values.shape[0]
    nbuf = normals.shape[0]
    xi = xi0
    i = start
    while i < n:
        if policy == POLICY_REJECT:
            accepted = False
            while redraws < MAX_CONSECUTIVE_REDRAWS:
                if pos >= nbuf:
                    return i, xi, pos, redraws, OU_NEED_NORMALS
                cand = xi * decay + step_sigma * normals[pos]
                pos += 1
                if lo <= baseline + cand <= hi:
                    xi = cand
                    accepted = True
                    redraws = 0
                    break
                redraws += 1
            if not accepted:
                return i, xi, pos, redraws, OU_REDRAW_LIMIT
        else:
            if pos >= nbuf:
                return i, xi, pos, redraws, OU_NEED_NORMALS
            cand = xi * decay + step_sigma * normals[pos]
            pos += 1
            g = baseline + cand
            if lo <= g <= hi:
                xi = cand  # no remapping: keeps in-bounds arithmetic exact
            else:
                if policy == POLICY_CLIP:
                    g = lo if g < lo else hi
                else:
                    g = reflect_into(g, lo, hi)
                xi = g - baseline
        values[i] = baseline + xi
        i += 1
    return i, xi, pos, redraws, OU_DONE


@njit(cache=True, inline="always")
def _matvec4(m, x, out):
    for a in range(4):
        s = 0.0
        for b in range(4):
            s += m[a, b] * x[b]
        out[a] = s


@njit(cache=True)
def rk4_run(p, m0, m5, gamma5, start, n_steps, dt, i_donor, i_acceptor, record):
    """Advance the 4-entry population vector ``p`` in place over n_steps.

    The generator during step k is ``m0 + gamma5[start + k] * m5`` (the
    transfer rate is constant within a step). After every step the state
    is clamped against tiny negatives, checked for conservation drift and
    renormalized to sum 1. With ``record`` set, ``i_donor``/``i_acceptor``
    (length n_steps + 1) receive the channel intensities at every grid
    point including the initial one.

    Returns ``(status, max_drift)``.
    """
    m = np.empty((4, 4))
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    max_drift = 0.0
    if record:
        i_donor[0] = p[2] + p[3]
        i_acceptor[0] = p[1] + p[3]
    for k in range(n_steps):
        g = gamma5[start + k]
        for a in range(4):
            for b in range(4):
                m[a, b] = m0[a, b] + g * m5[a, b]
        _matvec4(m, p, k1)
        for a in range(4):
            tmp[a] = p[a] + 0.5 * dt * k1[a]
        _matvec4(m, tmp, k2)
        for a in range(4):
            tmp[a] = p[a] + 0.5 * dt * k2[a]
        _matvec4(m, tmp, k3)
        for a in range(4):
            tmp[a] = p[a] + dt * k3[a]
        _matvec4(m, tmp, k4)
        for a in range(4):
            p[a] += (dt / 6.0) * (k1[a] + 2.0 * (k2[a] + k3[a]) + k4[a])
        s = 0.0
        for a in range(4):
            if p[a] < 0.0:
                if p[a] < NEGATIVE_TOLERANCE:
                    return RK_NEGATIVE, max_drift
                p[a] = 0.0
            s += p[a]
        drift = abs(s - 1.0)
        if drift > max_drift:
            max_drift = drift
        if drift > PER_STEP_DRIFT_LIMIT:
            return RK_DRIFT, max_drift
        inv = 1.0 / s
        for a in range(4):
            p[a] *= inv
        if record:
            i_donor[k + 1] = p[2] + p[3]
            i_acceptor[k + 1] = p[1] + p[3]
    return RK_OK, max_drift
