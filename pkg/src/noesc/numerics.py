"""Deterministic ODE integration and single-shooting boundary value solving.

Fixed-step classical RK4 with dense cubic Hermite output, plus a damped
Newton single-shooting solver for two-point boundary value problems whose
free-parameter count equals the state dimension.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import backend
from .errors import DimensionMismatch, NoConvergence, NonFiniteState

#: Relative perturbation scale of the forward-difference shooting Jacobian.
JACOBIAN_STEP = 1e-6

#: Maximum number of step halvings in the damped Newton line search.
MAX_HALVINGS = 30


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    ``step`` should divide the integration span; a final partial step is
    taken otherwise. ``store_every`` decimates the stored samples (the
    endpoint is always kept).
    """

    step: float
    store_every: int = 1

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if self.store_every < 1:
            raise ValueError("store_every must be a positive integer")


class Trajectory:
    """Sampled vector trajectory with cubic Hermite dense output.

    Stores sample times, values and right-hand-side derivatives; evaluation
    between samples interpolates with the matching cubic Hermite piece, and
    evaluation at a sample time reproduces the sample exactly.
    """

    def __init__(self, times, values, derivatives):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.derivatives = np.asarray(derivatives, dtype=float)
        if self.times.ndim != 1 or len(self.times) < 2:
            raise ValueError("a trajectory needs at least two samples")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        if self.values.shape != (len(self.times), self.dim) or self.derivatives.shape != self.values.shape:
            raise DimensionMismatch("times, values and derivatives shapes disagree")

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.values[-1]

    def eval(self, t: float) -> np.ndarray:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), len(self.times) - 2)
        t0, t1 = self.times[i], self.times[i + 1]
        if t == t0:
            return self.values[i].copy()
        if t == t1:
            return self.values[i + 1].copy()
        w = t1 - t0
        s = (t - t0) / w
        s2 = s * s
        s3 = s2 * s
        return (
            (2.0 * s3 - 3.0 * s2 + 1.0) * self.values[i]
            + (s3 - 2.0 * s2 + s) * w * self.derivatives[i]
            + (-2.0 * s3 + 3.0 * s2) * self.values[i + 1]
            + (s3 - s2) * w * self.derivatives[i + 1]
        )


def integrate_ivp(rhs: Callable, t_span, v0, cfg: IntegratorConfig) -> Trajectory:
    """Integrate ``dv/dt = rhs(t, v)`` over ``t_span`` with fixed-step RK4.

    Raises :class:`NonFiniteState` if the state blows up.
    """
    t_a, t_b = float(t_span[0]), float(t_span[1])
    if not t_b > t_a:
        raise ValueError("t_span must satisfy t_b > t_a")
    v0 = np.asarray(v0, dtype=float)
    ts, vs, dvs = backend.kernels().rk4_dense(rhs, t_a, t_b, v0, cfg.step, cfg.store_every)
    return Trajectory(ts, vs, dvs)


@dataclass(frozen=True)
class ShootingProblem:
    """Two-point BVP with as many free parameters as state components.

    ``dynamics(t, eta, p)`` is the parameterized right-hand side. The
    optional ``endpoint_fn(p)`` / ``dense_fn(p)`` hooks let callers plug in
    a faster equivalent of the forward integration; they must agree with
    ``dynamics`` (the generic route stays available for cross-checking).
    """

    dynamics: Callable
    t_start: float
    t_end: float
    eta_start: np.ndarray
    eta_end: np.ndarray
    endpoint_fn: Optional[Callable] = None
    dense_fn: Optional[Callable] = None

    def __post_init__(self):
        object.__setattr__(self, "eta_start", np.atleast_1d(np.asarray(self.eta_start, dtype=float)))
        object.__setattr__(self, "eta_end", np.atleast_1d(np.asarray(self.eta_end, dtype=float)))
        if self.eta_start.shape != self.eta_end.shape:
            raise DimensionMismatch("boundary values must have equal dimension")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")


def _shoot_endpoint(prob: ShootingProblem, p: np.ndarray, cfg: IntegratorConfig) -> np.ndarray:
    if prob.endpoint_fn is not None:
        return np.atleast_1d(np.asarray(prob.endpoint_fn(p), dtype=float))
    sparse = IntegratorConfig(step=cfg.step, store_every=2**31 - 1)
    traj = integrate_ivp(
        lambda t, v: prob.dynamics(t, v, p),
        (prob.t_start, prob.t_end),
        prob.eta_start,
        sparse,
    )
    return traj.endpoint


def _shoot_dense(prob: ShootingProblem, p: np.ndarray, cfg: IntegratorConfig) -> Trajectory:
    if prob.dense_fn is not None:
        return prob.dense_fn(p)
    return integrate_ivp(
        lambda t, v: prob.dynamics(t, v, p),
        (prob.t_start, prob.t_end),
        prob.eta_start,
        cfg,
    )


def solve_shooting(
    prob: ShootingProblem,
    p_init,
    tol: float = 1e-8,
    max_iter: int = 25,
    cfg: Optional[IntegratorConfig] = None,
):
    """Solve the BVP by damped Newton iteration on the free parameters.

    The residual is the terminal mismatch of the forward integration from
    ``eta_start``; the Jacobian uses forward differences, and each Newton
    step is halved (up to 30 times) until the residual infinity norm
    decreases. Returns ``(p_star, eta_trajectory, info)`` with the Newton
    iteration count and final residual in ``info``.
    """
    if cfg is None:
        cfg = IntegratorConfig(step=(prob.t_end - prob.t_start) / 1000.0)
    p = np.atleast_1d(np.asarray(p_init, dtype=float)).copy()
    if p.shape != prob.eta_start.shape:
        raise DimensionMismatch("free-parameter count must equal the state dimension")
    m = len(p)

    residual = _shoot_endpoint(prob, p, cfg) - prob.eta_end
    iterations = 0
    for _ in range(max_iter):
        norm = float(np.max(np.abs(residual)))
        if norm < tol:
            break
        jac = np.empty((m, m))
        for i in range(m):
            h = JACOBIAN_STEP * (1.0 + abs(p[i]))
            pert = p.copy()
            pert[i] += h
            jac[:, i] = (_shoot_endpoint(prob, pert, cfg) - prob.eta_end - residual) / h
        try:
            dp = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(
                f"singular shooting Jacobian after {iterations} iterations",
                iterations=iterations,
                best_residual=norm,
                best_p=p,
            ) from exc
        scale = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            candidate = p + scale * dp
            try:
                cand_res = _shoot_endpoint(prob, candidate, cfg) - prob.eta_end
            except NonFiniteState:
                scale *= 0.5
                continue
            if float(np.max(np.abs(cand_res))) < norm:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            raise NoConvergence(
                f"damped Newton stalled after {iterations} iterations (residual {norm:.3e})",
                iterations=iterations,
                best_residual=norm,
                best_p=p,
            )
        p, residual = candidate, cand_res
        iterations += 1

    norm = float(np.max(np.abs(residual)))
    if norm >= tol:
        raise NoConvergence(
            f"no convergence in {max_iter} Newton iterations (residual {norm:.3e})",
            iterations=iterations,
            best_residual=norm,
            best_p=p,
        )
    traj = _shoot_dense(prob, p, cfg)
    info = {"iterations": iterations, "residual": norm}
    return p, traj, info
