"""Projected gradient descent over convex constraint sets.

Covers the constrained-optimization half of the extremum seeking scheme:
Euclidean projection, gradient estimation from performance measurements,
single projected steps and the full descent loop.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue


@dataclass(frozen=True)
class ConstraintSet:
    """Convex feasible set with an exact Euclidean projection.

    Box sets clamp componentwise (``±inf`` bounds allowed); arbitrary sets
    plug in a custom ``projector``.
    """

    dimension: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    projector: Optional[Callable] = None

    @classmethod
    def box(cls, lower, upper) -> "ConstraintSet":
        lo = np.array([-np.inf if v is None else float(v) for v in lower])
        hi = np.array([np.inf if v is None else float(v) for v in upper])
        if lo.shape != hi.shape:
            raise DimensionMismatch("lower and upper bounds must have equal length")
        if np.any(lo > hi):
            raise ValueError("box bounds must satisfy lower <= upper componentwise")
        return cls(dimension=len(lo), lower=lo, upper=hi)

    @classmethod
    def unconstrained(cls, dimension: int) -> "ConstraintSet":
        return cls.box([None] * dimension, [None] * dimension)

    @classmethod
    def custom(cls, dimension: int, projector: Callable) -> "ConstraintSet":
        return cls(dimension=dimension, projector=projector)

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        if self.projector is not None:
            return bool(np.max(np.abs(x - project(x, self))) <= tol)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))


def project(z, cset: ConstraintSet) -> np.ndarray:
    """Euclidean projection of ``z`` onto the set."""
    z = np.asarray(z, dtype=float)
    if z.shape != (cset.dimension,):
        raise DimensionMismatch(f"expected a vector of dimension {cset.dimension}")
    if cset.projector is not None:
        out = np.asarray(cset.projector(z), dtype=float)
        if out.shape != z.shape:
            raise DimensionMismatch("projector changed the vector dimension")
        return out
    return np.clip(z, cset.lower, cset.upper)


@dataclass(frozen=True)
class PerformanceOracle:
    """Measured performance value with optional analytic gradient.

    ``eval`` must be deterministic and pure; without ``grad`` the gradient
    is estimated by central differences of half-width ``fd_step``.
    """

    eval: Callable
    grad: Optional[Callable] = None
    fd_step: float = 1e-6


def estimate_gradient(oracle: PerformanceOracle, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if oracle.grad is not None:
        g = np.asarray(oracle.grad(x), dtype=float)
    else:
        h = oracle.fd_step
        g = np.empty_like(x)
        for i in range(len(x)):
            hi = x.copy()
            lo = x.copy()
            hi[i] += h
            lo[i] -= h
            g[i] = (oracle.eval(hi) - oracle.eval(lo)) / (2.0 * h)
    if not np.all(np.isfinite(g)):
        raise NonFiniteValue("gradient evaluation returned a non-finite value")
    return g


@dataclass(frozen=True)
class Backtracking:
    """Armijo line search parameters for the shrinking step rule."""

    shrink: float = 0.5
    slope: float = 1e-4
    max_shrinks: int = 60


@dataclass(frozen=True)
class PgdConfig:
    """Projected gradient descent settings.

    ``step`` is used as-is by default; with ``backtracking`` set it is the
    initial trial step of an Armijo search. :meth:`from_lipschitz` derives
    the fixed step 2/(L + 2*margin) from a gradient Lipschitz constant.
    """

    step: float
    eps0: float
    max_iter: int
    backtracking: Optional[Backtracking] = None

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if not self.eps0 > 0.0:
            raise ValueError("eps0 must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")

    @classmethod
    def from_lipschitz(cls, lipschitz: float, margin: float, eps0: float, max_iter: int) -> "PgdConfig":
        return cls(step=2.0 / (lipschitz + 2.0 * margin), eps0=eps0, max_iter=max_iter)


def pgd_step(x, oracle: PerformanceOracle, cset: ConstraintSet, cfg: PgdConfig, grad=None) -> np.ndarray:
    """One projected gradient step from a feasible point."""
    x = np.asarray(x, dtype=float)
    g = estimate_gradient(oracle, x) if grad is None else np.asarray(grad, dtype=float)
    if cfg.backtracking is None:
        return project(x - cfg.step * g, cset)
    bt = cfg.backtracking
    fx = oracle.eval(x)
    t = cfg.step
    candidate = project(x - t * g, cset)
    for _ in range(bt.max_shrinks):
        if oracle.eval(candidate) <= fx + bt.slope * float(g @ (candidate - x)):
            break
        t *= bt.shrink
        candidate = project(x - t * g, cset)
    return candidate


@dataclass
class PgdResult:
    """Iterate sequence with performance values and gradient norms."""

    iterates: List[np.ndarray] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    converged: bool = False
    termination: str = ""

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1


def run_pgd(x0, oracle: PerformanceOracle, cset: ConstraintSet, cfg: PgdConfig) -> PgdResult:
    """Iterate projected gradient descent until the gradient norm drops
    below ``eps0`` or ``max_iter`` steps were taken (flagged, not raised)."""
    x = project(np.asarray(x0, dtype=float), cset)
    result = PgdResult()
    g = estimate_gradient(oracle, x)
    result.iterates.append(x)
    result.values.append(float(oracle.eval(x)))
    result.grad_norms.append(float(np.linalg.norm(g)))
    while result.grad_norms[-1] >= cfg.eps0:
        if result.steps >= cfg.max_iter:
            result.termination = "max_iter"
            return result
        x = pgd_step(x, oracle, cset, cfg, grad=g)
        g = estimate_gradient(oracle, x)
        result.iterates.append(x)
        result.values.append(float(oracle.eval(x)))
        result.grad_norms.append(float(np.linalg.norm(g)))
    result.converged = True
    result.termination = "eps0"
    return result


def rosenbrock_oracle() -> PerformanceOracle:
    """The banana-valley benchmark performance function with its analytic
    gradient; minimum 0 at (1, 1)."""

    def value(x):
        return 100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2

    def gradient(x):
        d = x[1] - x[0] ** 2
        return np.array([-400.0 * x[0] * d - 2.0 * (1.0 - x[0]), 200.0 * d])

    return PerformanceOracle(eval=value, grad=gradient)
