"""Numerical-optimization extremum seeking control for output-constrained
nonlinear systems in input-output normal form.

Projected gradient descent generates a constrained state sequence toward
the minimizer of a measured performance function; an inversion-based
feedforward controller, obtained by solving a free-parameter two-point
boundary value problem for the internal dynamics, steers the plant
between consecutive sequence points in finite time.
"""

from . import backend
from .errors import (
    ConfigError,
    DimensionMismatch,
    NoConvergence,
    NoescError,
    NonFiniteState,
    NonFiniteValue,
    OutOfDomain,
    OutOfRange,
    UnsupportedOrder,
)
from .esc import BvpConfig, EscLog, TransitionPlan, plan_transition, run_esc, simulate_transition
from .numerics import IntegratorConfig, ShootingProblem, Trajectory, integrate_ivp, solve_shooting
from .optimizer import (
    Backtracking,
    ConstraintSet,
    PerformanceOracle,
    PgdConfig,
    PgdResult,
    estimate_gradient,
    pgd_step,
    project,
    rosenbrock_oracle,
    run_pgd,
)
from .plant import NormalFormPlant, example_plant, from_normal, simulate_plant, to_normal, validate_plant
from .trajectory import AnsatzTrajectory, SaturationMap, ansatz_eval, reference_output, saturate, saturate_inverse

__version__ = "0.1.0"
