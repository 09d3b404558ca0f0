"""Pure-Python implementations of the hot kernels.

This module mirrors ``_ckernels.pyx`` operation for operation so that both
backends produce bit-identical results on IEEE-754 hardware (the extension is
built with ``-ffp-contract=off``).  Keep the two files in lockstep.
"""
import math

import numpy as np

CAPTURED = 0
TMAX = 1
BLOWUP = 2
UNDERFLOW = 3
BUDGET = 4

WENDLAND_C2 = 0
WENDLAND_C4 = 1
WENDLAND_C6 = 2
GAUSSIAN = 3

# Dormand-Prince 5(4) tableau
A21 = 1.0 / 5.0
A31 = 3.0 / 40.0
A32 = 9.0 / 40.0
A41 = 44.0 / 45.0
A42 = -56.0 / 15.0
A43 = 32.0 / 9.0
A51 = 19372.0 / 6561.0
A52 = -25360.0 / 2187.0
A53 = 64448.0 / 6561.0
A54 = -212.0 / 729.0
A61 = 9017.0 / 3168.0
A62 = -355.0 / 33.0
A63 = 46732.0 / 5247.0
A64 = 49.0 / 176.0
A65 = -5103.0 / 18656.0
A71 = 35.0 / 384.0
A73 = 500.0 / 1113.0
A74 = 125.0 / 192.0
A75 = -2187.0 / 6784.0
A76 = 11.0 / 84.0
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0


def _rhs(P, x, y, z):
    p, q, r, a, b, c, e, f, g, u, v, w = P
    fx = p * (1.0 - x / u) * x - a * x * y - b * x * z
    fy = q * (1.0 - y / v) * y - c * x * y - e * y * z
    fz = r * (1.0 - z / w) * z - f * x * z - g * y * z
    return fx, fy, fz


def _rms3(a, b, c):
    return math.sqrt((a * a + b * b + c * c) / 3.0)


def integrate_dopri5(params, x0, targets, rho, t_max, rtol, atol, lo, hi,
                     max_steps, record):
    """Adaptive DOPRI5 run that stops on capture by one of ``targets``.

    Returns ``(status, label, t, (x, y, z), n_accepted, ts, ys)``; ``label``
    is the index of the capturing target or -1, ``ts``/``ys`` are None unless
    ``record`` is true.
    """
    P = tuple(float(s) for s in params)
    T = [(float(tg[0]), float(tg[1]), float(tg[2])) for tg in targets]
    rho2 = rho * rho
    x, y, z = float(x0[0]), float(x0[1]), float(x0[2])
    t = 0.0
    ts = [t] if record else None
    ys = [(x, y, z)] if record else None

    for i, (tx, ty, tz) in enumerate(T):
        dx = x - tx
        dy = y - ty
        dz = z - tz
        if dx * dx + dy * dy + dz * dz < rho2:
            return CAPTURED, i, t, (x, y, z), 0, ts, ys

    k1x, k1y, k1z = _rhs(P, x, y, z)

    # Hairer's starting step heuristic
    sx = atol + rtol * abs(x)
    sy = atol + rtol * abs(y)
    sz = atol + rtol * abs(z)
    d0 = _rms3(x / sx, y / sy, z / sz)
    d1 = _rms3(k1x / sx, k1y / sy, k1z / sz)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    fx, fy, fz = _rhs(P, x + h0 * k1x, y + h0 * k1y, z + h0 * k1z)
    d2 = _rms3((fx - k1x) / sx, (fy - k1y) / sy, (fz - k1z) / sz) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** (1.0 / 5.0)
    h = min(100.0 * h0, h1)

    n_acc = 0
    n_try = 0
    status = TMAX
    label = -1
    while True:
        if t >= t_max:
            status = TMAX
            break
        if n_try >= max_steps:
            status = BUDGET
            break
        last = False
        if h >= t_max - t:
            h = t_max - t
            last = True
        if h <= 1e-14 * max(1.0, t):
            status = UNDERFLOW
            break
        n_try += 1

        k2x, k2y, k2z = _rhs(P, x + h * (A21 * k1x),
                             y + h * (A21 * k1y),
                             z + h * (A21 * k1z))
        k3x, k3y, k3z = _rhs(P, x + h * (A31 * k1x + A32 * k2x),
                             y + h * (A31 * k1y + A32 * k2y),
                             z + h * (A31 * k1z + A32 * k2z))
        k4x, k4y, k4z = _rhs(P, x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
                             y + h * (A41 * k1y + A42 * k2y + A43 * k3y),
                             z + h * (A41 * k1z + A42 * k2z + A43 * k3z))
        k5x, k5y, k5z = _rhs(P, x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
                             y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
                             z + h * (A51 * k1z + A52 * k2z + A53 * k3z + A54 * k4z))
        k6x, k6y, k6z = _rhs(P, x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
                             y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
                             z + h * (A61 * k1z + A62 * k2z + A63 * k3z + A64 * k4z + A65 * k5z))
        nx = x + h * (A71 * k1x + A73 * k3x + A74 * k4x + A75 * k5x + A76 * k6x)
        ny = y + h * (A71 * k1y + A73 * k3y + A74 * k4y + A75 * k5y + A76 * k6y)
        nz = z + h * (A71 * k1z + A73 * k3z + A74 * k4z + A75 * k5z + A76 * k6z)
        k7x, k7y, k7z = _rhs(P, nx, ny, nz)

        ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        ez = h * (E1 * k1z + E3 * k3z + E4 * k4z + E5 * k5z + E6 * k6z + E7 * k7z)
        sx = atol + rtol * max(abs(x), abs(nx))
        sy = atol + rtol * max(abs(y), abs(ny))
        sz = atol + rtol * max(abs(z), abs(nz))
        err = _rms3(ex / sx, ey / sy, ez / sz)

        if err != err:
            h = h * FAC_MIN
            continue
        if err > 1.0:
            h = h * max(FAC_MIN, SAFETY * err ** -0.2)
            continue

        t = t_max if last else t + h
        x = nx
        y = ny
        z = nz
        k1x = k7x
        k1y = k7y
        k1z = k7z
        n_acc += 1
        if record:
            ts.append(t)
            ys.append((x, y, z))
        if not (lo <= x <= hi and lo <= y <= hi and lo <= z <= hi):
            status = BLOWUP
            break
        hit = -1
        for i, (tx, ty, tz) in enumerate(T):
            dx = x - tx
            dy = y - ty
            dz = z - tz
            if dx * dx + dy * dy + dz * dz < rho2:
                hit = i
                break
        if hit >= 0:
            status = CAPTURED
            label = hit
            break
        if err == 0.0:
            h = h * FAC_MAX
        else:
            h = h * min(FAC_MAX, max(FAC_MIN, SAFETY * err ** -0.2))

    return status, label, t, (x, y, z), n_acc, ts, ys


def cross_kernel(X, Y, family, eps):
    """Matrix ``K[i, j] = phi(eps * |X[i] - Y[j]|)`` for point arrays (n, 3), (m, 3)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.float64)
    d0 = X[:, None, 0] - Y[None, :, 0]
    d1 = X[:, None, 1] - Y[None, :, 1]
    d2 = X[:, None, 2] - Y[None, :, 2]
    r = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    return radial(r, family, eps)


def radial(r, family, eps):
    t = eps * np.asarray(r, dtype=np.float64)
    if family == GAUSSIAN:
        return np.exp(-(t * t))
    s = np.maximum(1.0 - t, 0.0)
    s2 = s * s
    s4 = s2 * s2
    if family == WENDLAND_C2:
        return s4 * (4.0 * t + 1.0)
    if family == WENDLAND_C4:
        return s4 * s2 * (((35.0 * t + 18.0) * t + 3.0) / 3.0)
    if family == WENDLAND_C6:
        return s4 * s4 * (((32.0 * t + 25.0) * t + 8.0) * t + 1.0)
    raise ValueError(f"unknown kernel family code {family}")
