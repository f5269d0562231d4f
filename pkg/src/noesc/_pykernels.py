"""Pure-Python integration kernels.

Mirror of the compiled module ``noesc._ckernels``; the two must stay
expression-for-expression identical so that either backend produces the
same floating-point results.
"""

from math import exp, floor, isfinite

import numpy as np

from .errors import NonFiniteState

BACKEND = "pure"


def _grid(t0, t1, step):
    """Number of full steps and the width of a trailing partial step."""
    span = t1 - t0
    n = int(floor(span / step + 1e-9))
    rem = span - n * step
    if rem <= 1e-12 * max(1.0, abs(t0), abs(t1)):
        rem = 0.0
    return n, rem


def rk4_dense(f, t0, t1, v0, step, store_every):
    """Fixed-step RK4 with a Python right-hand-side callback.

    Stores every ``store_every``-th sample plus the endpoint; returns
    (times, values, derivatives) as float arrays.
    """
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
            if not isfinite(c):
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


def _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep):
    """Reference output and its time derivative for the quadratic ansatz."""
    tau = (t - t_k) / delta_k
    zeta = zeta_k + (a1 + c * tau) * tau
    e = exp(steep * zeta)
    den = 1.0 + e
    y = y_hi - (y_hi - y_lo) / den
    dy = (y_hi - y_lo) * steep * e / (den * den) * ((a1 + 2.0 * c * tau) / delta_k)
    return y, dy


def example_eta_endpoint(
    rho, y_lo, y_hi, steep, zeta_k, zeta_k1, gamma, p, t_k, delta_k, eta0, step
):
    """Endpoint of the internal-dynamics window integration (no storage)."""
    c = gamma * p
    a1 = zeta_k1 - zeta_k - c
    t1 = t_k + delta_k
    n, rem = _grid(t_k, t1, step)
    total = n + (1 if rem > 0.0 else 0)
    eta = eta0
    for i in range(total):
        t = t_k + i * step
        h = step if i < n else rem
        y, _ = _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k1 = rho * (2.0 * y * y - 2.0 * eta)
        h2 = 0.5 * h
        y, _ = _ref_pair(t + h2, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k2 = rho * (2.0 * y * y - 2.0 * (eta + h2 * k1))
        k3 = rho * (2.0 * y * y - 2.0 * (eta + h2 * k2))
        y, _ = _ref_pair(t + h, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        k4 = rho * (2.0 * y * y - 2.0 * (eta + h * k3))
        eta = eta + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)
        if not isfinite(eta):
            raise NonFiniteState(f"internal state became non-finite at t={t + h}")
    return eta


def example_eta_dense(
    rho, y_lo, y_hi, steep, zeta_k, zeta_k1, gamma, p, t_k, delta_k, eta0, step, store_every
):
    """Dense internal-dynamics window integration; returns (t, eta, deta)."""
    c = gamma * p
    a1 = zeta_k1 - zeta_k - c

    def f(t, v):
        y, _ = _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        return (rho * (2.0 * y * y - 2.0 * v[0]),)

    return rk4_dense(f, t_k, t_k + delta_k, (eta0,), step, store_every)


def _hermite(ts, vs, ds, t):
    """Cubic Hermite evaluation on a (near) uniform grid of scalars."""
    m = len(ts)
    h = ts[1] - ts[0]
    i = int(floor((t - ts[0]) / h))
    if i < 0:
        i = 0
    if i > m - 2:
        i = m - 2
    w = ts[i + 1] - ts[i]
    s = (t - ts[i]) / w
    s2 = s * s
    s3 = s2 * s
    return (
        (2.0 * s3 - 3.0 * s2 + 1.0) * vs[i]
        + (s3 - 2.0 * s2 + s) * w * ds[i]
        + (-2.0 * s3 + 3.0 * s2) * vs[i + 1]
        + (s3 - s2) * w * ds[i + 1]
    )


def example_window_sim(
    rho,
    y_lo,
    y_hi,
    steep,
    zeta_k,
    zeta_k1,
    gamma,
    p,
    t_k,
    delta_k,
    eta_ts,
    eta_vals,
    eta_ders,
    x1_0,
    x2_0,
    step,
    store_every,
):
    """Plant window simulation under the inversion-based feedforward control.

    The internal reference trajectory is supplied as Hermite data
    (times, values, derivatives). Returns (t, x, dx, u) sample arrays
    with x of shape (m, 2).
    """
    c = gamma * p
    a1 = zeta_k1 - zeta_k - c
    ets = [float(v) for v in eta_ts]
    evs = [float(v) for v in eta_vals]
    eds = [float(v) for v in eta_ders]
    t1 = t_k + delta_k
    n, rem = _grid(t_k, t1, step)
    total = n + (1 if rem > 0.0 else 0)
    x1 = x1_0
    x2 = x2_0

    def rhs(t, a, b):
        _, dy = _ref_pair(t, t_k, delta_k, zeta_k, a1, c, y_lo, y_hi, steep)
        es = _hermite(ets, evs, eds, t)
        u = dy + es * es * es
        return -b * b * b + u, rho * (2.0 * a * a - 2.0 * b), u

    ts, xs, dxs, us = [], [], [], []
    for i in range(total):
        t = t_k + i * step
        h = step if i < n else rem
        f1, g1, u = rhs(t, x1, x2)
        if i % store_every == 0:
            ts.append(t)
            xs.append([x1, x2])
            dxs.append([f1, g1])
            us.append(u)
        h2 = 0.5 * h
        f2, g2, _ = rhs(t + h2, x1 + h2 * f1, x2 + h2 * g1)
        f3, g3, _ = rhs(t + h2, x1 + h2 * f2, x2 + h2 * g2)
        f4, g4, _ = rhs(t + h, x1 + h * f3, x2 + h * g3)
        h6 = h / 6.0
        x1 = x1 + h6 * (f1 + 2.0 * (f2 + f3) + f4)
        x2 = x2 + h6 * (g1 + 2.0 * (g2 + g3) + g4)
        if not (isfinite(x1) and isfinite(x2)):
            raise NonFiniteState(f"plant state became non-finite at t={t + h}")
    f1, g1, u = rhs(t1, x1, x2)
    ts.append(t1)
    xs.append([x1, x2])
    dxs.append([f1, g1])
    us.append(u)
    return (
        np.array(ts, dtype=float),
        np.array(xs, dtype=float),
        np.array(dxs, dtype=float),
        np.array(us, dtype=float),
    )
