# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Mirrors ``_pykernels.py`` operation for operation."""
from libc.math cimport sqrt, pow, fabs, exp
from libc.stdlib cimport malloc, realloc, free

import numpy as np

cdef enum:
    CAPTURED = 0
    TMAX = 1
    BLOWUP = 2
    UNDERFLOW = 3
    BUDGET = 4

cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double A71 = 35.0 / 384.0
cdef double A73 = 500.0 / 1113.0
cdef double A74 = 125.0 / 192.0
cdef double A75 = -2187.0 / 6784.0
cdef double A76 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 10.0


cdef inline void _rhs(const double* P, double x, double y, double z,
                      double* out) noexcept nogil:
    out[0] = P[0] * (1.0 - x / P[9]) * x - P[3] * x * y - P[4] * x * z
    out[1] = P[1] * (1.0 - y / P[10]) * y - P[5] * x * y - P[6] * y * z
    out[2] = P[2] * (1.0 - z / P[11]) * z - P[7] * x * z - P[8] * y * z


cdef inline double _rms3(double a, double b, double c) noexcept nogil:
    return sqrt((a * a + b * b + c * c) / 3.0)


cdef inline double _dmax(double a, double b) noexcept nogil:
    # Python's max(a, b) semantics for non-NaN input
    return b if b > a else a


cdef inline double _dmin(double a, double b) noexcept nogil:
    return b if b < a else a


cdef inline int _hit(const double* T, int nt, double rho2,
                     double x, double y, double z) noexcept nogil:
    cdef int i
    cdef double dx, dy, dz
    for i in range(nt):
        dx = x - T[3 * i]
        dy = y - T[3 * i + 1]
        dz = z - T[3 * i + 2]
        if dx * dx + dy * dy + dz * dz < rho2:
            return i
    return -1


cdef struct Recorder:
    double* buf
    Py_ssize_t n
    Py_ssize_t cap


cdef int _push(Recorder* rec, double t, double x, double y, double z) noexcept nogil:
    cdef double* nb
    if rec.n == rec.cap:
        nb = <double*> realloc(rec.buf, 4 * 2 * rec.cap * sizeof(double))
        if nb == NULL:
            return -1
        rec.buf = nb
        rec.cap = 2 * rec.cap
    rec.buf[4 * rec.n] = t
    rec.buf[4 * rec.n + 1] = x
    rec.buf[4 * rec.n + 2] = y
    rec.buf[4 * rec.n + 3] = z
    rec.n += 1
    return 0


cdef int _run(const double* P, double* S, const double* T, int nt,
              double rho, double t_max, double rtol, double atol,
              double lo, double hi, long max_steps, Recorder* rec,
              int* label_out, double* t_out, long* nacc_out) noexcept nogil:
    cdef double rho2 = rho * rho
    cdef double x = S[0], y = S[1], z = S[2]
    cdef double t = 0.0
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double k5[3]
    cdef double k6[3]
    cdef double k7[3]
    cdef double f1[3]
    cdef double sx, sy, sz, d0, d1, d2, dm, h0, h1, h
    cdef double nx, ny, nz, ex, ey, ez, err
    cdef long n_acc = 0, n_try = 0
    cdef int status = TMAX, label = -1, hit
    cdef bint last

    hit = _hit(T, nt, rho2, x, y, z)
    if hit >= 0:
        label_out[0] = hit
        t_out[0] = t
        nacc_out[0] = 0
        return CAPTURED

    _rhs(P, x, y, z, k1)

    sx = atol + rtol * fabs(x)
    sy = atol + rtol * fabs(y)
    sz = atol + rtol * fabs(z)
    d0 = _rms3(x / sx, y / sy, z / sz)
    d1 = _rms3(k1[0] / sx, k1[1] / sy, k1[2] / sz)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    _rhs(P, x + h0 * k1[0], y + h0 * k1[1], z + h0 * k1[2], f1)
    d2 = _rms3((f1[0] - k1[0]) / sx, (f1[1] - k1[1]) / sy, (f1[2] - k1[2]) / sz) / h0
    dm = _dmax(d1, d2)
    if dm <= 1e-15:
        h1 = _dmax(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / dm, 1.0 / 5.0)
    h = _dmin(100.0 * h0, h1)

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
        if h <= 1e-14 * _dmax(1.0, t):
            status = UNDERFLOW
            break
        n_try += 1

        _rhs(P, x + h * (A21 * k1[0]),
             y + h * (A21 * k1[1]),
             z + h * (A21 * k1[2]), k2)
        _rhs(P, x + h * (A31 * k1[0] + A32 * k2[0]),
             y + h * (A31 * k1[1] + A32 * k2[1]),
             z + h * (A31 * k1[2] + A32 * k2[2]), k3)
        _rhs(P, x + h * (A41 * k1[0] + A42 * k2[0] + A43 * k3[0]),
             y + h * (A41 * k1[1] + A42 * k2[1] + A43 * k3[1]),
             z + h * (A41 * k1[2] + A42 * k2[2] + A43 * k3[2]), k4)
        _rhs(P, x + h * (A51 * k1[0] + A52 * k2[0] + A53 * k3[0] + A54 * k4[0]),
             y + h * (A51 * k1[1] + A52 * k2[1] + A53 * k3[1] + A54 * k4[1]),
             z + h * (A51 * k1[2] + A52 * k2[2] + A53 * k3[2] + A54 * k4[2]), k5)
        _rhs(P, x + h * (A61 * k1[0] + A62 * k2[0] + A63 * k3[0] + A64 * k4[0] + A65 * k5[0]),
             y + h * (A61 * k1[1] + A62 * k2[1] + A63 * k3[1] + A64 * k4[1] + A65 * k5[1]),
             z + h * (A61 * k1[2] + A62 * k2[2] + A63 * k3[2] + A64 * k4[2] + A65 * k5[2]), k6)
        nx = x + h * (A71 * k1[0] + A73 * k3[0] + A74 * k4[0] + A75 * k5[0] + A76 * k6[0])
        ny = y + h * (A71 * k1[1] + A73 * k3[1] + A74 * k4[1] + A75 * k5[1] + A76 * k6[1])
        nz = z + h * (A71 * k1[2] + A73 * k3[2] + A74 * k4[2] + A75 * k5[2] + A76 * k6[2])
        _rhs(P, nx, ny, nz, k7)

        ex = h * (E1 * k1[0] + E3 * k3[0] + E4 * k4[0] + E5 * k5[0] + E6 * k6[0] + E7 * k7[0])
        ey = h * (E1 * k1[1] + E3 * k3[1] + E4 * k4[1] + E5 * k5[1] + E6 * k6[1] + E7 * k7[1])
        ez = h * (E1 * k1[2] + E3 * k3[2] + E4 * k4[2] + E5 * k5[2] + E6 * k6[2] + E7 * k7[2])
        sx = atol + rtol * _dmax(fabs(x), fabs(nx))
        sy = atol + rtol * _dmax(fabs(y), fabs(ny))
        sz = atol + rtol * _dmax(fabs(z), fabs(nz))
        err = _rms3(ex / sx, ey / sy, ez / sz)

        if err != err:
            h = h * FAC_MIN
            continue
        if err > 1.0:
            h = h * _dmax(FAC_MIN, SAFETY * pow(err, -0.2))
            continue

        if last:
            t = t_max
        else:
            t = t + h
        x = nx
        y = ny
        z = nz
        k1[0] = k7[0]
        k1[1] = k7[1]
        k1[2] = k7[2]
        n_acc += 1
        if rec != NULL:
            if _push(rec, t, x, y, z) != 0:
                status = -1
                break
        if not (lo <= x and x <= hi and lo <= y and y <= hi and lo <= z and z <= hi):
            status = BLOWUP
            break
        hit = _hit(T, nt, rho2, x, y, z)
        if hit >= 0:
            status = CAPTURED
            label = hit
            break
        if err == 0.0:
            h = h * FAC_MAX
        else:
            h = h * _dmin(FAC_MAX, _dmax(FAC_MIN, SAFETY * pow(err, -0.2)))

    S[0] = x
    S[1] = y
    S[2] = z
    label_out[0] = label
    t_out[0] = t
    nacc_out[0] = n_acc
    return status


def integrate_dopri5(params, x0, targets, double rho, double t_max,
                     double rtol, double atol, double lo, double hi,
                     long max_steps, bint record):
    """Adaptive DOPRI5 run that stops on capture by one of ``targets``.

    Returns ``(status, label, t, (x, y, z), n_accepted, ts, ys)``.
    """
    cdef double P[12]
    cdef double S[3]
    cdef int i, nt, label = -1, status
    cdef double t_end = 0.0
    cdef long n_acc = 0
    cdef Recorder rec
    cdef Recorder* prec = NULL
    cdef double[:, ::1] tv

    for i in range(12):
        P[i] = float(params[i])
    for i in range(3):
        S[i] = float(x0[i])
    tarr = np.ascontiguousarray(targets, dtype=np.float64).reshape(-1, 3)
    nt = tarr.shape[0]
    if nt == 0:
        tarr = np.zeros((1, 3))
    tv = tarr

    if record:
        rec.cap = 256
        rec.n = 0
        rec.buf = <double*> malloc(4 * rec.cap * sizeof(double))
        if rec.buf == NULL:
            raise MemoryError()
        rec.buf[0] = 0.0
        rec.buf[1] = S[0]
        rec.buf[2] = S[1]
        rec.buf[3] = S[2]
        rec.n = 1
        prec = &rec
    try:
        with nogil:
            status = _run(P, S, &tv[0, 0], nt, rho, t_max, rtol, atol,
                          lo, hi, max_steps, prec, &label, &t_end, &n_acc)
        if status < 0:
            raise MemoryError()
        ts = None
        ys = None
        if record:
            out = np.empty((rec.n, 4))
            for i in range(rec.n):
                out[i, 0] = rec.buf[4 * i]
                out[i, 1] = rec.buf[4 * i + 1]
                out[i, 2] = rec.buf[4 * i + 2]
                out[i, 3] = rec.buf[4 * i + 3]
            ts = out[:, 0].tolist()
            ys = [tuple(row) for row in out[:, 1:].tolist()]
    finally:
        if record:
            free(rec.buf)
    return status, label, t_end, (S[0], S[1], S[2]), n_acc, ts, ys


cdef inline double _radial(double t, int family) noexcept nogil:
    cdef double s, s2, s4
    if family == 3:
        return exp(-(t * t))
    s = 1.0 - t
    if s < 0.0:
        s = 0.0
    s2 = s * s
    s4 = s2 * s2
    if family == 0:
        return s4 * (4.0 * t + 1.0)
    if family == 1:
        return s4 * s2 * (((35.0 * t + 18.0) * t + 3.0) / 3.0)
    return s4 * s4 * (((32.0 * t + 25.0) * t + 8.0) * t + 1.0)


def cross_kernel(X, Y, int family, double eps):
    """Matrix ``K[i, j] = phi(eps * |X[i] - Y[j]|)`` for point arrays (n, 3), (m, 3)."""
    if family < 0 or family > 3:
        raise ValueError(f"unknown kernel family code {family}")
    cdef double[:, ::1] xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[:, ::1] yv = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], m = yv.shape[0], i, j
    out = np.empty((n, m))
    cdef double[:, ::1] ov = out
    cdef double d0, d1, d2
    with nogil:
        for i in range(n):
            for j in range(m):
                d0 = xv[i, 0] - yv[j, 0]
                d1 = xv[i, 1] - yv[j, 1]
                d2 = xv[i, 2] - yv[j, 2]
                ov[i, j] = _radial(eps * sqrt(d0 * d0 + d1 * d1 + d2 * d2), family)
    return out
