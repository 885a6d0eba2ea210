"""Compiled inner loops.

Scalar ``math`` only, so every lane is computed the same way no matter how
work is split across threads.
"""

import math

import numba
import numpy as np

POLE_GUARD = 1e-12

STATE_UNDECIDED = 0
STATE_FATOU = 1
STATE_JULIA = 2


@numba.njit(cache=True, nogil=True)
def zeta_real(lam, x):
    return lam * x * math.exp(-x) / (x + 1.0)


@numba.njit(cache=True, nogil=True)
def sweep_rows(lams, x0, transient, samples, escape, out, valid):
    for r in range(lams.shape[0]):
        lam = lams[r]
        x = x0
        ok = True
        for _ in range(transient):
            if abs(x + 1.0) <= POLE_GUARD:
                ok = False
                break
            x = zeta_real(lam, x)
            if not math.isfinite(x) or abs(x) > escape:
                ok = False
                break
        if ok:
            for s in range(samples):
                if abs(x + 1.0) <= POLE_GUARD:
                    ok = False
                    break
                x = zeta_real(lam, x)
                if not math.isfinite(x) or abs(x) > escape:
                    ok = False
                    break
                out[r, s] = x
        valid[r] = ok


@numba.njit(cache=True, nogil=True)
def zeta_complex(lam, x, y):
    """zeta(x + iy) in real arithmetic; conjugation symmetric by construction."""
    ex = math.exp(-x)
    er = ex * math.cos(y)
    ei = -ex * math.sin(y)
    nr = lam * (x * er - y * ei)
    ni = lam * (x * ei + y * er)
    dr = x + 1.0
    den = dr * dr + y * y
    return (nr * dr + ni * y) / den, (ni * dr - nr * y) / den


@numba.njit(cache=True, nogil=True)
def _underflow_phase(lam, x, y):
    # arg of lam * z/(z+1) * exp(-z), for when the modulus underflowed
    dr = x + 1.0
    qr = x * dr + y * y
    qi = y * dr - x * y
    ph = math.atan2(qi, qr) - y
    two_pi = 2.0 * math.pi
    return ph - two_pi * math.floor(ph / two_pi + 0.5)


@numba.njit(cache=True, nogil=True)
def classify_point(lam, x, y, max_iter, escape, aware,
                   centers, radii, wedge_radius, wedge_slope, wedge_angle):
    """Return (state, iterations) for the orbit of x + iy.

    ``centers``/``radii`` describe real-centred capture disks; a positive
    ``wedge_radius`` enables the capture wedge along the positive real axis
    at the origin.
    """
    esc2 = escape * escape
    for i in range(max_iter):
        if abs(x + 1.0) <= POLE_GUARD and abs(y) <= POLE_GUARD:
            return STATE_JULIA, i
        nx, ny = zeta_complex(lam, x, y)
        if not (math.isfinite(nx) and math.isfinite(ny)) or nx * nx + ny * ny > esc2:
            return STATE_FATOU, i + 1
        if aware:
            if wedge_radius > 0.0:
                if nx == 0.0 and ny == 0.0 and (x != 0.0 or y != 0.0):
                    if abs(_underflow_phase(lam, x, y)) < wedge_angle:
                        return STATE_FATOU, i + 1
                elif (nx > 0.0 and abs(ny) < wedge_slope * nx
                      and nx * nx + ny * ny < wedge_radius * wedge_radius):
                    return STATE_FATOU, i + 1
            for k in range(centers.shape[0]):
                dx = nx - centers[k]
                if dx * dx + ny * ny < radii[k] * radii[k]:
                    return STATE_FATOU, i + 1
        x, y = nx, ny
    if abs(x + 1.0) <= POLE_GUARD and abs(y) <= POLE_GUARD:
        return STATE_JULIA, max_iter
    if aware:
        return STATE_JULIA, max_iter
    return STATE_UNDECIDED, max_iter


@numba.njit(cache=True, nogil=True)
def render_rows(lam, re_min, d_re, im_max, im_min, d_im, height, row_lo, row_hi,
                max_iter, escape, aware, centers, radii,
                wedge_radius, wedge_slope, wedge_angle, state, iters):
    width = state.shape[1]
    half = height // 2
    for j in range(row_lo, row_hi):
        # mirror rows are computed from opposite edges so that a window
        # symmetric about the real axis gives exactly negated imaginary parts
        if j < half:
            y = im_max - (j + 0.5) * d_im
        else:
            y = im_min + (height - 1 - j + 0.5) * d_im
        for i in range(width):
            x = re_min + (i + 0.5) * d_re
            s, n = classify_point(lam, x, y, max_iter, escape, aware, centers, radii,
                                  wedge_radius, wedge_slope, wedge_angle)
            state[j, i] = s
            iters[j, i] = n


def empty_centers():
    return np.zeros(0, dtype=np.float64)
