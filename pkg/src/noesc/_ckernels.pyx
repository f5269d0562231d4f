# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels.

Mirror of ``noesc._pykernels``; expressions must stay identical so both
backends produce the same floating-point results.
"""

from libc.math cimport exp, floor, isfinite

import numpy as np

from .errors import NonFiniteState

BACKEND = "compiled"


cdef inline double _max3(double a, double b, double c) nogil:
    cdef double m = a
    if b > m:
        m = b
    if c > m:
        m = c
    return m


cdef (Py_ssize_t, double) _grid(double t0, double t1, double step):
    cdef double span = t1 - t0
    cdef Py_ssize_t n = <Py_ssize_t>floor(span / step + 1e-9)
    cdef double rem = span - n * step
    if rem <= 1e-12 * _max3(1.0, abs(t0), abs(t1)):
        rem = 0.0
    return n, rem


def rk4_dense(f, double t0, double t1, v0, double step, long store_every):
    """Fixed-step RK4 with a Python right-hand-side callback."""
    cdef Py_ssize_t n, total, dim, i, j
    cdef double rem, t, h, h2, h6
    n, rem = _grid(t0, t1, step)
    total = n + (1 if rem > 0.0 else 0)
    dim = len(v0)
    v = [float(c) for c in v0]

    ts, vs, dvs = [], [], []
    for i in range(total):
        t = t0 + i * step
        h = step if i < n else rem
        k1 = f(t, v)
        if i % store_every == 0:
            ts.append(t)
            vs.append(list(v))
            dvs.append([float(c) for c in k1])
        h2 = 0.5 * h
        v2 = [v[j] + h2 * k1[j] for j in range(dim)]
        k2 = f(t + h2, v2)
        v3 = [v[j] + h2 * k2[j] for j in range(dim)]
        k3 = f(t + h2, v3)
        v4 = [v[j] + h * k3[j] for j in range(dim)]
        k4 = f(t + h, v4)
        h6 = h / 6.0
        v = [v[j] + h6 * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) for j in range(dim)]
        for c in v:
            if not isfinite(<double>c):
                raise NonFiniteState(f"state became non-finite at t={t + h}")
    kend = f(t1, v)
    ts.append(t1)
    vs.append(list(v))
    dvs.append([float(c) for c in kend])
    return (
        np.array(ts, dtype=float),
        np.array(vs, dtype=float),
        np.array(dvs, dtype=float),
    )


cdef inline (double, double) _ref_pair(
    double t, double t_k, double delta_k, double zeta_k, double a1, double c,
    double y_lo, double y_hi, double steep,
) nogil:
    cdef double tau = (t - t_k) / delta_k
    cdef double zeta = zeta_k + (a1 + c * tau) * tau
    cdef double e = exp(steep * zeta)
    cdef double den = 1.0 + e
    cdef double y = y_hi - (y_hi - y_lo) / den
    cdef double dy = (y_hi - y_lo) * steep * e / (den * den) * ((a1 + 2.0 * c * tau) / delta_k)
    return y, dy


def example_eta_endpoint(
    double rho, double y_lo, double y_hi, double steep,
    double zeta_k, double zeta_k1, double gamma, double p,
    double t_k, double delta_k, double eta0, double step,
):
    """Endpoint of the internal-dynamics window integration (no storage)."""
    cdef double c = gamma * p
    cdef double a1 = zeta_k1 - zeta_k - c
    cdef double t1 = t_k + delta_k
    cdef Py_ssize_t n, total, i
    cdef double rem, eta, t, h, h2, y, dy, k1, k2, k3, k4
    n, rem = _grid(t_k, t1, step)
    total = n + (1 if rem > 0.0 else 0)
    eta = eta0
    for i in range(total):
        t = t_k + i * step
        h = step if i < n else rem
        y, dy = _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k1 = rho * (2.0 * y * y - 2.0 * eta)
        h2 = 0.5 * h
        y, dy = _ref_pair(t + h2, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k2 = rho * (2.0 * y * y - 2.0 * (eta + h2 * k1))
        k3 = rho * (2.0 * y * y - 2.0 * (eta + h2 * k2))
        y, dy = _ref_pair(t + h, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k4 = rho * (2.0 * y * y - 2.0 * (eta + h * k3))
        eta = eta + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
        if not isfinite(eta):
            raise NonFiniteState(f"internal state became non-finite at t={t + h}")
    return eta


def example_eta_dense(
    double rho, double y_lo, double y_hi, double steep,
    double zeta_k, double zeta_k1, double gamma, double p,
    double t_k, double delta_k, double eta0, double step, long store_every,
):
    """Dense internal-dynamics window integration; returns (t, eta, deta)."""
    cdef double c = gamma * p
    cdef double a1 = zeta_k1 - zeta_k - c
    cdef double t1 = t_k + delta_k
    cdef Py_ssize_t n, total, i, pos, stored
    cdef double rem, eta, t, h, h2, y, dy, k1, k2, k3, k4
    n, rem = _grid(t_k, t1, step)
    total = n + (1 if rem > 0.0 else 0)
    stored = 0
    for i in range(total):
        if i % store_every == 0:
            stored += 1
    stored += 1

    ts_arr = np.empty(stored, dtype=float)
    vs_arr = np.empty((stored, 1), dtype=float)
    dvs_arr = np.empty((stored, 1), dtype=float)
    cdef double[:] ts = ts_arr
    cdef double[:, :] vs = vs_arr
    cdef double[:, :] dvs = dvs_arr

    eta = eta0
    pos = 0
    for i in range(total):
        t = t_k + i * step
        h = step if i < n else rem
        y, dy = _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k1 = rho * (2.0 * y * y - 2.0 * eta)
        if i % store_every == 0:
            ts[pos] = t
            vs[pos, 0] = eta
            dvs[pos, 0] = k1
            pos += 1
        h2 = 0.5 * h
        y, dy = _ref_pair(t + h2, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k2 = rho * (2.0 * y * y - 2.0 * (eta + h2 * k1))
        k3 = rho * (2.0 * y * y - 2.0 * (eta + h2 * k2))
        y, dy = _ref_pair(t + h, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k4 = rho * (2.0 * y * y - 2.0 * (eta + h * k3))
        eta = eta + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
        if not isfinite(eta):
            raise NonFiniteState(f"internal state became non-finite at t={t + h}")
    y, dy = _ref_pair(t1, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
    ts[pos] = t1
    vs[pos, 0] = eta
    dvs[pos, 0] = rho * (2.0 * y * y - 2.0 * eta)
    return ts_arr, vs_arr, dvs_arr


cdef inline double _hermite(
    const double[:] ts, const double[:] vs, const double[:] ds, double t,
) nogil:
    cdef Py_ssize_t m = ts.shape[0]
    cdef double h = ts[1] - ts[0]
    cdef Py_ssize_t i = <Py_ssize_t>floor((t - ts[0]) / h)
    if i < 0:
        i = 0
    if i > m - 2:
        i = m - 2
    cdef double w = ts[i + 1] - ts[i]
    cdef double s = (t - ts[i]) / w
    cdef double s2 = s * s
    cdef double s3 = s2 * s
    return (
        (2.0 * s3 - 3.0 * s2 + 1.0) * vs[i]
        + (s3 - 2.0 * s2 + s) * w * ds[i]
        + (-2.0 * s3 + 3.0 * s2) * vs[i + 1]
        + (s3 - s2) * w * ds[i + 1]
    )


def example_window_sim(
    double rho, double y_lo, double y_hi, double steep,
    double zeta_k, double zeta_k1, double gamma, double p,
    double t_k, double delta_k,
    eta_ts, eta_vals, eta_ders,
    double x1_0, double x2_0, double step, long store_every,
):
    """Plant window simulation under the inversion-based feedforward control."""
    cdef double c = gamma * p
    cdef double a1 = zeta_k1 - zeta_k - c
    cdef const double[:] ets = np.ascontiguousarray(eta_ts, dtype=float)
    cdef const double[:] evs = np.ascontiguousarray(eta_vals, dtype=float)
    cdef const double[:] eds = np.ascontiguousarray(eta_ders, dtype=float)
    cdef double t1 = t_k + delta_k
    cdef Py_ssize_t n, total, i, pos, stored
    cdef double rem, t, h, h2, h6, x1, x2
    cdef double y, dy, es, u, f1, g1, f2, g2, f3, g3, f4, g4
    n, rem = _grid(t_k, t1, step)
    total = n + (1 if rem > 0.0 else 0)
    stored = 0
    for i in range(total):
        if i % store_every == 0:
            stored += 1
    stored += 1

    ts_arr = np.empty(stored, dtype=float)
    xs_arr = np.empty((stored, 2), dtype=float)
    dxs_arr = np.empty((stored, 2), dtype=float)
    us_arr = np.empty(stored, dtype=float)
    cdef double[:] ts = ts_arr
    cdef double[:, :] xs = xs_arr
    cdef double[:, :] dxs = dxs_arr
    cdef double[:] us = us_arr

    x1 = x1_0
    x2 = x2_0
    pos = 0
    for i in range(total):
        t = t_k + i * step
        h = step if i < n else rem
        y, dy = _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        es = _hermite(ets, evs, eds, t)
        u = dy + es * es * es
        f1 = -x2 * x2 * x2 + u
        g1 = rho * (2.0 * x1 * x1 - 2.0 * x2)
        if i % store_every == 0:
            ts[pos] = t
            xs[pos, 0] = x1
            xs[pos, 1] = x2
            dxs[pos, 0] = f1
            dxs[pos, 1] = g1
            us[pos] = u
            pos += 1
        h2 = 0.5 * h
        y, dy = _ref_pair(t + h2, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        es = _hermite(ets, evs, eds, t + h2)
        u = dy + es * es * es
        f2 = -(x2 + h2 * g1) * (x2 + h2 * g1) * (x2 + h2 * g1) + u
        g2 = rho * (2.0 * (x1 + h2 * f1) * (x1 + h2 * f1) - 2.0 * (x2 + h2 * g1))
        f3 = -(x2 + h2 * g2) * (x2 + h2 * g2) * (x2 + h2 * g2) + u
        g3 = rho * (2.0 * (x1 + h2 * f2) * (x1 + h2 * f2) - 2.0 * (x2 + h2 * g2))
        y, dy = _ref_pair(t + h, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        es = _hermite(ets, evs, eds, t + h)
        u = dy + es * es * es
        f4 = -(x2 + h * g3) * (x2 + h * g3) * (x2 + h * g3) + u
        g4 = rho * (2.0 * (x1 + h * f3) * (x1 + h * f3) - 2.0 * (x2 + h * g3))
        h6 = h / 6.0
        x1 = x1 + h6 * (f1 + 2.0 * (f2 + f3) + f4)
        x2 = x2 + h6 * (g1 + 2.0 * (g2 + g3) + g4)
        if not (isfinite(x1) and isfinite(x2)):
            raise NonFiniteState(f"plant state became non-finite at t={t + h}")
    y, dy = _ref_pair(t1, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
    es = _hermite(ets, evs, eds, t1)
    u = dy + es * es * es
    ts[pos] = t1
    xs[pos, 0] = x1
    xs[pos, 1] = x2
    dxs[pos, 0] = -x2 * x2 * x2 + u
    dxs[pos, 1] = rho * (2.0 * x1 * x1 - 2.0 * x2)
    us[pos] = u
    return ts_arr, xs_arr, dxs_arr, us_arr
