"""Pure-NumPy RK4 kernel, used when the compiled extension is unavailable.

Same contract as rydchirp._rk4.rk4_propagate; keep the two in sync.
"""
from __future__ import annotations

import numpy as np

# Above this dimension the densified coupling matrix stops paying off and a
# sparse matvec wins.
_DENSE_LIMIT = 512


def _chirp_clock(t: float, tc: float, T: float, ramp: float) -> float:
    if t <= T:
        return t - tc
    if ramp > 0.0 and t < T + ramp:
        u = t - T
        return (T - tc) + u - u * u / (2.0 * ramp)
    return (T - tc) + ramp / 2.0


def rk4_propagate(psi0, base, slope, data, indices, indptr,
                  t0, dt, nsteps, t_center, tau0,
                  chirp_off, chirp_ramp, sample_steps):
    """Propagate psi0 over nsteps of size dt, recording at sample_steps."""
    dim = psi0.shape[0]
    if dim <= _DENSE_LIMIT:
        coupling = np.zeros((dim, dim))
        for row in range(dim):
            for p in range(indptr[row], indptr[row + 1]):
                coupling[row, indices[p]] = data[p]
        matvec = coupling.dot
    else:
        from scipy.sparse import csr_matrix

        matvec = csr_matrix((data, indices, indptr), shape=(dim, dim)).dot

    def deriv(t, y):
        clock = _chirp_clock(t, t_center, chirp_off, chirp_ramp)
        env = np.exp(-((t - t_center) ** 2) / (2.0 * tau0**2))
        return -1j * ((base + slope * clock) * y + env * matvec(y))

    out = np.empty((len(sample_steps), dim), dtype=np.complex128)
    y = psi0.astype(np.complex128, copy=True)
    pos = 0
    while pos < len(sample_steps) and sample_steps[pos] == 0:
        out[pos] = y
        pos += 1
    half = 0.5 * dt
    for step in range(nsteps):
        t = t0 + step * dt
        k1 = deriv(t, y)
        k2 = deriv(t + half, y + half * k1)
        k3 = deriv(t + half, y + half * k2)
        k4 = deriv(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        while pos < len(sample_steps) and sample_steps[pos] == step + 1:
            out[pos] = y
            pos += 1
    return out
