# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled fixed-step RK4 kernel for i da/dt = H(t) a with
H(t) = diag(base + slope * clock(t)) + env(t) * K (CSR).

Mirrors rydchirp._rk4_fallback.rk4_propagate exactly; keep the two in sync.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


cdef inline double _chirp_clock(double t, double tc, double T, double ramp) nogil:
    cdef double u
    if t <= T:
        return t - tc
    if ramp > 0.0 and t < T + ramp:
        u = t - T
        return (T - tc) + u - u * u / (2.0 * ramp)
    return (T - tc) + ramp / 2.0


cdef void _deriv(double t, double complex[::1] y, double complex[::1] out,
                 double[::1] base, double[::1] slope,
                 double[::1] data, int[::1] indices, int[::1] indptr,
                 double tc, double tau0, double T, double ramp) nogil:
    cdef Py_ssize_t dim = y.shape[0]
    cdef double clock = _chirp_clock(t, tc, T, ramp)
    cdef double env = exp(-(t - tc) * (t - tc) / (2.0 * tau0 * tau0))
    cdef Py_ssize_t k, p
    cdef double complex acc
    for k in range(dim):
        acc = (base[k] + slope[k] * clock) * y[k]
        for p in range(indptr[k], indptr[k + 1]):
            acc = acc + env * data[p] * y[indices[p]]
        out[k] = -1j * acc


def rk4_propagate(cnp.ndarray[cnp.complex128_t, ndim=1] psi0,
                  cnp.ndarray[cnp.float64_t, ndim=1] base,
                  cnp.ndarray[cnp.float64_t, ndim=1] slope,
                  cnp.ndarray[cnp.float64_t, ndim=1] data,
                  cnp.ndarray[cnp.int32_t, ndim=1] indices,
                  cnp.ndarray[cnp.int32_t, ndim=1] indptr,
                  double t0, double dt, long nsteps,
                  double t_center, double tau0,
                  double chirp_off, double chirp_ramp,
                  cnp.ndarray[cnp.int64_t, ndim=1] sample_steps):
    """Propagate psi0 over nsteps of size dt, recording at sample_steps.

    Returns a (len(sample_steps), dim) complex array of amplitudes.
    """
    cdef Py_ssize_t dim = psi0.shape[0]
    cdef Py_ssize_t nsamp = sample_steps.shape[0]
    out_arr = np.empty((nsamp, dim), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr

    cdef double complex[::1] y = psi0.astype(np.complex128, copy=True)
    cdef double complex[::1] k1 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(dim, dtype=np.complex128)

    cdef double[::1] bv = base
    cdef double[::1] sv = slope
    cdef double[::1] dv = data
    cdef int[::1] iv = indices
    cdef int[::1] pv = indptr
    cdef long[::1] samp = sample_steps

    cdef Py_ssize_t pos = 0
    cdef long step
    cdef Py_ssize_t k
    cdef double t

    with nogil:
        while pos < nsamp and samp[pos] == 0:
            for k in range(dim):
                out[pos, k] = y[k]
            pos += 1
        for step in range(nsteps):
            t = t0 + step * dt
            _deriv(t, y, k1, bv, sv, dv, iv, pv, t_center, tau0, chirp_off, chirp_ramp)
            for k in range(dim):
                tmp[k] = y[k] + 0.5 * dt * k1[k]
            _deriv(t + 0.5 * dt, tmp, k2, bv, sv, dv, iv, pv, t_center, tau0, chirp_off, chirp_ramp)
            for k in range(dim):
                tmp[k] = y[k] + 0.5 * dt * k2[k]
            _deriv(t + 0.5 * dt, tmp, k3, bv, sv, dv, iv, pv, t_center, tau0, chirp_off, chirp_ramp)
            for k in range(dim):
                tmp[k] = y[k] + dt * k3[k]
            _deriv(t + dt, tmp, k4, bv, sv, dv, iv, pv, t_center, tau0, chirp_off, chirp_ramp)
            for k in range(dim):
                y[k] = y[k] + (dt / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
            while pos < nsamp and samp[pos] == step + 1:
                for k in range(dim):
                    out[pos, k] = y[k]
                pos += 1

    return out_arr
