# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernels; same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline double _vel(const double[:, ::1] tab, const double[::1] knots,
                        double inv_h, Py_ssize_t ncell, double vscale,
                        double y, double c, double s, double flr, int* hit) noexcept nogil:
    cdef Py_ssize_t i = <Py_ssize_t>floor((y - knots[0]) * inv_h)
    cdef double dx, P, M, dP, dM, den
    if i < 0:
        i = 0
    elif i > ncell - 1:
        i = ncell - 1
    dx = y - knots[i]
    P = ((tab[i, 0] * dx + tab[i, 1]) * dx + tab[i, 2]) * dx + tab[i, 3]
    M = ((tab[i, 4] * dx + tab[i, 5]) * dx + tab[i, 6]) * dx + tab[i, 7]
    dP = ((tab[i, 8] * dx + tab[i, 9]) * dx + tab[i, 10]) * dx + tab[i, 11]
    dM = ((tab[i, 12] * dx + tab[i, 13]) * dx + tab[i, 14]) * dx + tab[i, 15]
    den = c * c * P * P + s * s * M * M
    if den > flr:
        return vscale * c * s * (P * dM - M * dP) / den
    hit[0] += 1
    return 0.0


def velocity(tab, knots, double vscale, y, double c, double s, double floor_):
    cdef const double[:, ::1] t = np.ascontiguousarray(tab, dtype=np.float64)
    cdef const double[::1] k = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = yy.shape[0], j
    cdef Py_ssize_t ncell = t.shape[0]
    cdef double inv_h = ncell / (k[k.shape[0] - 1] - k[0])
    v = np.empty(n)
    flag = np.zeros(n, dtype=bool)
    cdef double[::1] vv = v
    cdef int hit
    for j in range(n):
        hit = 0
        vv[j] = _vel(t, k, inv_h, ncell, vscale, yy[j], c, s, floor_, &hit)
        if hit:
            flag[j] = True
    return v, flag


def rk4_integrate(tab, knots, double vscale, y0, stage_c, stage_s, stage_floor,
                  double dt, Py_ssize_t n_steps, Py_ssize_t store_every,
                  double ylo, double yhi):
    cdef const double[:, ::1] t = np.ascontiguousarray(tab, dtype=np.float64)
    cdef const double[::1] k = np.ascontiguousarray(knots, dtype=np.float64)
    cdef const double[::1] ys = np.ascontiguousarray(y0, dtype=np.float64)
    cdef const double[:, ::1] sc = np.ascontiguousarray(stage_c, dtype=np.float64)
    cdef const double[:, ::1] ss = np.ascontiguousarray(stage_s, dtype=np.float64)
    cdef const double[:, ::1] sf = np.ascontiguousarray(stage_floor, dtype=np.float64)
    cdef Py_ssize_t n_traj = ys.shape[0]
    cdef Py_ssize_t n_store = n_steps // store_every + 1
    cdef Py_ssize_t ncell = t.shape[0]
    cdef double inv_h = ncell / (k[k.shape[0] - 1] - k[0])
    out = np.empty((n_traj, n_store))
    exited = np.zeros(n_traj, dtype=np.uint8)
    cdef double[:, ::1] o = out
    cdef unsigned char[::1] ex = exited
    cdef Py_ssize_t j, n
    cdef double y, k1, k2, k3, k4, half = 0.5 * dt, sixth = dt / 6.0
    cdef int hits = 0
    with nogil:
        for j in range(n_traj):
            y = ys[j]
            o[j, 0] = y
            for n in range(n_steps):
                k1 = _vel(t, k, inv_h, ncell, vscale, y, sc[n, 0], ss[n, 0], sf[n, 0], &hits)
                k2 = _vel(t, k, inv_h, ncell, vscale, y + half * k1, sc[n, 1], ss[n, 1], sf[n, 1], &hits)
                k3 = _vel(t, k, inv_h, ncell, vscale, y + half * k2, sc[n, 1], ss[n, 1], sf[n, 1], &hits)
                k4 = _vel(t, k, inv_h, ncell, vscale, y + dt * k3, sc[n, 2], ss[n, 2], sf[n, 2], &hits)
                y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                if y < ylo:
                    y = ylo
                    ex[j] = 1
                elif y > yhi:
                    y = yhi
                    ex[j] = 1
                if (n + 1) % store_every == 0:
                    o[j, (n + 1) // store_every] = y
    return out, exited.astype(bool), hits
