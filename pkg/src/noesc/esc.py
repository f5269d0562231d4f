"""Extremum seeking orchestration.

Alternates one projected gradient step with one finite-time state
transition: optimizer iterates become boundary conditions for the internal
dynamics, the free-parameter BVP is solved by single shooting, the
inversion-based feedforward control is synthesized from the solved
internal trajectory, and the plant is simulated over the window. The
simulated endpoint (not the ideal iterate) seeds the next iteration,
closing the loop on the physical state.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import backend
from .errors import NoConvergence, NonFiniteState, OutOfRange
from .numerics import IntegratorConfig, ShootingProblem, Trajectory, solve_shooting
from .optimizer import ConstraintSet, PerformanceOracle, PgdConfig, estimate_gradient, pgd_step, project
from .plant import NormalFormPlant, to_normal
from .trajectory import AnsatzTrajectory, SaturationMap, reference_output, saturate_inverse

#: Grid resolution for the per-window reference-vs-chord deviation metric.
_CHORD_SAMPLES = 201


@dataclass(frozen=True)
class BvpConfig:
    """Shooting solver settings for the per-window boundary value problem."""

    tol: float = 1e-8
    max_iter: int = 25
    p_init: float = 1.0


@dataclass
class TransitionPlan:
    """Everything needed to steer the plant over one window."""

    k: int
    t_k: float
    t_k1: float
    x_k: np.ndarray
    x_k1: np.ndarray
    y_k: float
    y_k1: float
    eta_k: np.ndarray
    eta_k1: np.ndarray
    p_star: np.ndarray
    bvp_residual: float
    newton_iters: int
    zeta: AnsatzTrajectory
    eta_star: Trajectory
    u_star: Callable


@dataclass
class IterateRecord:
    k: int
    x: np.ndarray
    value: float
    grad_norm: float
    p_star: Optional[np.ndarray] = None
    bvp_residual: float = math.nan
    tracking_error: float = math.nan


@dataclass
class WindowMetrics:
    k: int
    ref_chord_dev: float
    max_abs_y: float
    max_abs_eta: float


@dataclass
class EscLog:
    """Full experiment record."""

    iterates: List[IterateRecord] = field(default_factory=list)
    windows: List[WindowMetrics] = field(default_factory=list)
    dense_t: np.ndarray = None
    dense_x: np.ndarray = None
    dense_u: np.ndarray = None
    dense_y: np.ndarray = None
    dense_value: np.ndarray = None
    termination: str = ""
    t0: float = 0.0
    delta_k: float = 1.0
    backend: str = ""
    config: Optional[dict] = None

    @property
    def iteration_count(self) -> int:
        return len(self.iterates) - 1

    @property
    def clean(self) -> bool:
        return self.termination == "eps0"

    @property
    def final_state(self) -> np.ndarray:
        return self.iterates[-1].x


def _fast_kernel_args(plant: NormalFormPlant, sat: SaturationMap, ansatz: AnsatzTrajectory):
    """Fixed leading arguments of the compiled example-plant kernels, or
    None when the specialization does not apply."""
    if plant.fast_tag is None or plant.fast_tag[0] != "example":
        return None
    if plant.internal_dim != 1 or len(ansatz.gamma) != 1:
        return None
    rho = plant.fast_tag[1]
    return (
        rho,
        sat.y_min_s,
        sat.y_max_s,
        sat.steepness,
        ansatz.zeta_k,
        ansatz.zeta_k1,
        float(ansatz.gamma[0]),
    )


def plan_transition(
    plant: NormalFormPlant,
    sat: SaturationMap,
    x_k,
    x_k1,
    t_k: float,
    delta_k: float,
    gamma,
    p_init,
    bvp: BvpConfig = BvpConfig(),
    ode: Optional[IntegratorConfig] = None,
    k: int = 0,
) -> TransitionPlan:
    """Plan one window: boundary values, solved free parameters, internal
    reference trajectory and the feedforward control signal."""
    x_k = np.asarray(x_k, dtype=float)
    x_k1 = np.asarray(x_k1, dtype=float)
    if ode is None:
        ode = IntegratorConfig(step=delta_k / 1000.0, store_every=1)
    y_k = plant.output(x_k)
    y_k1 = plant.output(x_k1)
    _, eta_k = to_normal(plant, x_k)
    _, eta_k1 = to_normal(plant, x_k1)
    try:
        zeta_k = saturate_inverse(sat, y_k)
        zeta_k1 = saturate_inverse(sat, y_k1)
    except OutOfRange as exc:
        raise OutOfRange(f"window {k}: {exc}") from exc

    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    p0 = np.broadcast_to(np.atleast_1d(np.asarray(p_init, dtype=float)), gamma.shape).copy()
    ansatz = AnsatzTrajectory(
        zeta_k=zeta_k, zeta_k1=zeta_k1, gamma=gamma, p=p0, t_k=t_k, delta_k=delta_k
    )

    r = plant.r

    def dynamics(t, eta, p):
        ref = reference_output(sat, ansatz.with_p(p), t, r)
        xi = np.asarray(ref[:r], dtype=float)
        eta = np.asarray(eta, dtype=float)
        u = plant.alpha_inv(xi, ref[r], eta)
        return plant.beta(xi, eta, u)

    fast = _fast_kernel_args(plant, sat, ansatz)
    endpoint_fn = dense_fn = None
    if fast is not None:
        kern = backend.kernels()
        eta0 = float(eta_k[0])

        def endpoint_fn(p):
            return np.array(
                [kern.example_eta_endpoint(*fast, float(p[0]), t_k, delta_k, eta0, ode.step)]
            )

        def dense_fn(p):
            ts, vs, dvs = kern.example_eta_dense(
                *fast, float(p[0]), t_k, delta_k, eta0, ode.step, ode.store_every
            )
            return Trajectory(ts, vs, dvs)

    problem = ShootingProblem(
        dynamics=dynamics,
        t_start=t_k,
        t_end=t_k + delta_k,
        eta_start=eta_k,
        eta_end=eta_k1,
        endpoint_fn=endpoint_fn,
        dense_fn=dense_fn,
    )
    try:
        p_star, eta_star, info = solve_shooting(problem, p0, tol=bvp.tol, max_iter=bvp.max_iter, cfg=ode)
    except NoConvergence as exc:
        raise NoConvergence(
            f"window {k}: {exc}",
            iterations=exc.iterations,
            best_residual=exc.best_residual,
            best_p=exc.best_p,
        ) from exc

    final_ansatz = ansatz.with_p(p_star)

    def u_star(t):
        ref = reference_output(sat, final_ansatz, t, r)
        eta = eta_star.eval(t)
        return plant.alpha_inv(np.asarray(ref[:r], dtype=float), ref[r], eta)

    return TransitionPlan(
        k=k,
        t_k=t_k,
        t_k1=t_k + delta_k,
        x_k=x_k,
        x_k1=x_k1,
        y_k=y_k,
        y_k1=y_k1,
        eta_k=eta_k,
        eta_k1=eta_k1,
        p_star=p_star,
        bvp_residual=info["residual"],
        newton_iters=info["iterations"],
        zeta=final_ansatz,
        eta_star=eta_star,
        u_star=u_star,
    )


def simulate_transition(plant: NormalFormPlant, sat: SaturationMap, plan: TransitionPlan, sim: IntegratorConfig):
    """Simulate the plant over one window under the planned control.

    Returns (times, states, controls) sample arrays.
    """
    fast = _fast_kernel_args(plant, sat, plan.zeta)
    if fast is not None:
        ts, xs, _, us = backend.kernels().example_window_sim(
            *fast,
            float(plan.zeta.p[0]),
            plan.t_k,
            plan.t_k1 - plan.t_k,
            plan.eta_star.times,
            plan.eta_star.values[:, 0],
            plan.eta_star.derivatives[:, 0],
            float(plan.x_k[0]),
            float(plan.x_k[1]),
            sim.step,
            sim.store_every,
        )
        return ts, xs, us
    traj = Trajectory(
        *backend.kernels().rk4_dense(
            lambda t, x: plant.original_rhs(np.asarray(x, dtype=float), plan.u_star(t)),
            plan.t_k,
            plan.t_k1,
            plan.x_k,
            sim.step,
            sim.store_every,
        )
    )
    us = np.array([plan.u_star(t) for t in traj.times])
    return traj.times, traj.values, us


def _chord_deviation(sat: SaturationMap, plan: TransitionPlan) -> float:
    """Max deviation of the reference output from the straight chord."""
    a = plan.zeta
    tau = np.linspace(0.0, 1.0, _CHORD_SAMPLES)
    coeffs = a.gamma * a.p
    zeta = a.zeta_k + (a.zeta_k1 - a.zeta_k - coeffs.sum()) * tau
    for i, ci in enumerate(coeffs):
        zeta += ci * tau ** (i + 2)
    y = sat.y_max_s - sat.span / (1.0 + np.exp(sat.steepness * zeta))
    chord = plan.y_k + tau * (plan.y_k1 - plan.y_k)
    return float(np.max(np.abs(y - chord)))


def run_esc(
    plant: NormalFormPlant,
    oracle: PerformanceOracle,
    cset: ConstraintSet,
    pgd: PgdConfig,
    sat: SaturationMap,
    gamma,
    delta_k: float,
    bvp: BvpConfig,
    sim: IntegratorConfig,
    x0,
    t0: float = 0.0,
    ode: Optional[IntegratorConfig] = None,
    config: Optional[dict] = None,
) -> EscLog:
    """Run the full seeking loop until the gradient guard fires.

    The guard tests the gradient of the measured (simulated) state; on BVP
    failure the log is returned truncated with the failure recorded in
    ``termination``.
    """
    x_meas = project(np.asarray(x0, dtype=float), cset)
    log = EscLog(t0=t0, delta_k=delta_k, backend=backend.active_name(), config=config)
    g = estimate_gradient(oracle, x_meas)
    grad_norm = float(np.linalg.norm(g))
    log.iterates.append(
        IterateRecord(k=0, x=x_meas.copy(), value=float(oracle.eval(x_meas)), grad_norm=grad_norm)
    )

    dense_t, dense_x, dense_u = [], [], []
    warm_p = bvp.p_init
    k = 0
    while True:
        if grad_norm < pgd.eps0:
            log.termination = "eps0"
            break
        if k >= pgd.max_iter:
            log.termination = "max_iter"
            break
        x_target = pgd_step(x_meas, oracle, cset, pgd, grad=g)
        t_k = t0 + k * delta_k
        try:
            plan = plan_transition(
                plant, sat, x_meas, x_target, t_k, delta_k, gamma, warm_p, bvp, ode, k=k
            )
            ts, xs, us = simulate_transition(plant, sat, plan, sim)
        except (NoConvergence, OutOfRange, NonFiniteState) as exc:
            log.termination = f"{type(exc).__name__}:k={k}"
            break
        x_end = xs[-1].copy()
        tracking = float(np.max(np.abs(x_end - x_target)))

        start = 1 if k > 0 else 0
        dense_t.append(ts[start:])
        dense_x.append(xs[start:])
        dense_u.append(us[start:])
        if plant.fast_tag is not None and plant.fast_tag[0] == "example":
            max_eta = float(np.max(np.abs(xs[:, 1])))
        else:
            max_eta = max(float(np.max(np.abs(to_normal(plant, x)[1]))) for x in xs)
        log.windows.append(
            WindowMetrics(
                k=k,
                ref_chord_dev=_chord_deviation(sat, plan),
                max_abs_y=max(abs(plant.output(x)) for x in xs),
                max_abs_eta=max_eta,
            )
        )

        x_meas = x_end
        warm_p = plan.p_star
        g = estimate_gradient(oracle, x_meas)
        grad_norm = float(np.linalg.norm(g))
        log.iterates.append(
            IterateRecord(
                k=k + 1,
                x=x_target,
                value=float(oracle.eval(x_target)),
                grad_norm=grad_norm,
                p_star=plan.p_star,
                bvp_residual=plan.bvp_residual,
                tracking_error=tracking,
            )
        )
        k += 1

    if dense_t:
        log.dense_t = np.concatenate(dense_t)
        log.dense_x = np.concatenate(dense_x)
        log.dense_u = np.concatenate(dense_u)
    else:
        log.dense_t = np.empty(0)
        log.dense_x = np.empty((0, plant.n))
        log.dense_u = np.empty(0)
    log.dense_y = np.array([plant.output(x) for x in log.dense_x])
    log.dense_value = np.array([float(oracle.eval(x)) for x in log.dense_x])
    return log
