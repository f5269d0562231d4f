"""Plants in input-output normal form.

A plant is described by its output chain map ``alpha`` (and inversion
``alpha_inv``), internal dynamics ``beta``, the coordinate change between
original and normal coordinates, the original vector field and the output
map with its constraint bounds. Plants are supplied already in normal
form; :func:`validate_plant` checks the supplied maps for consistency
instead of trusting them.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DimensionMismatch
from .numerics import IntegratorConfig, Trajectory, integrate_ivp


@dataclass(frozen=True)
class NormalFormPlant:
    """Single-input single-output plant with relative degree ``r``.

    ``alpha(xi, eta, u)`` gives the r-th output derivative, ``alpha_inv(xi,
    y_r, eta)`` solves it for the input, ``beta(xi, eta, u)`` is the
    internal dynamics, ``phi``/``phi_inv`` map between original state and
    ``(xi, eta)`` normal coordinates.
    """

    n: int
    r: int
    alpha: Callable
    alpha_inv: Callable
    beta: Callable
    phi: Callable
    phi_inv: Callable
    original_rhs: Callable
    output: Callable
    output_bounds: Tuple[float, float]
    fast_tag: Optional[tuple] = None

    def __post_init__(self):
        if not 0 < self.r <= self.n:
            raise ValueError("relative degree must satisfy 0 < r <= n")
        if not self.output_bounds[0] < self.output_bounds[1]:
            raise ValueError("output bounds must satisfy y_min < y_max")

    @property
    def internal_dim(self) -> int:
        return self.n - self.r


def example_plant(rho: float) -> NormalFormPlant:
    """The benchmark plant dx1 = -x2^3 + u, dx2 = rho*(2*x1^2 - 2*x2), y = x1.

    Relative degree 1; the coordinate change is the identity relabeling
    (y, eta) = (x1, x2). The internal dynamics are stable for rho > 0 and
    unstable for rho < 0.
    """
    if rho == 0.0:
        raise ValueError("rho must be nonzero")
    rho = float(rho)

    def alpha(xi, eta, u):
        return -eta[0] ** 3 + u

    def alpha_inv(xi, y_r, eta):
        return y_r + eta[0] ** 3

    def beta(xi, eta, u):
        return np.array([rho * (2.0 * xi[0] ** 2 - 2.0 * eta[0])])

    def phi(x):
        return np.array([x[0]]), np.array([x[1]])

    def phi_inv(xi, eta):
        return np.array([xi[0], eta[0]])

    def original_rhs(x, u):
        return np.array([-x[1] ** 3 + u, rho * (2.0 * x[0] ** 2 - 2.0 * x[1])])

    return NormalFormPlant(
        n=2,
        r=1,
        alpha=alpha,
        alpha_inv=alpha_inv,
        beta=beta,
        phi=phi,
        phi_inv=phi_inv,
        original_rhs=original_rhs,
        output=lambda x: float(x[0]),
        output_bounds=(-1.5, 1.5),
        fast_tag=("example", rho),
    )


def to_normal(plant: NormalFormPlant, x) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.shape != (plant.n,):
        raise DimensionMismatch(f"expected a state of dimension {plant.n}")
    xi, eta = plant.phi(x)
    return np.atleast_1d(np.asarray(xi, dtype=float)), np.atleast_1d(np.asarray(eta, dtype=float))


def from_normal(plant: NormalFormPlant, xi, eta) -> np.ndarray:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if len(xi) != plant.r or len(eta) != plant.internal_dim:
        raise DimensionMismatch("normal coordinate dimensions do not match the plant")
    x = np.asarray(plant.phi_inv(xi, eta), dtype=float)
    if x.shape != (plant.n,):
        raise DimensionMismatch("phi_inv returned a state of wrong dimension")
    return x


def simulate_plant(plant: NormalFormPlant, u_of_t: Callable, x0, t_span, cfg: IntegratorConfig) -> Trajectory:
    """Integrate the plant in original coordinates under a control signal."""
    return integrate_ivp(
        lambda t, x: plant.original_rhs(np.asarray(x, dtype=float), u_of_t(t)),
        t_span,
        x0,
        cfg,
    )


def validate_plant(plant: NormalFormPlant, states, inputs=None, tol: float = 1e-10) -> None:
    """Check the supplied normal-form maps on sample states.

    Verifies the coordinate round trip, that the first normal coordinate is
    the output, and the alpha/alpha_inv inversion identity. Raises
    ``AssertionError`` on violation.
    """
    if inputs is None:
        inputs = [0.0, 1.0, -0.7]
    for x in states:
        x = np.asarray(x, dtype=float)
        xi, eta = to_normal(plant, x)
        back = from_normal(plant, xi, eta)
        assert np.max(np.abs(back - x)) < tol, f"round trip failed at {x}"
        assert abs(xi[0] - plant.output(x)) < tol, f"phi_1 != h at {x}"
        for u in inputs:
            y_r = plant.alpha(xi, eta, u)
            u_back = plant.alpha_inv(xi, y_r, eta)
            assert abs(plant.alpha(xi, eta, u_back) - y_r) < tol, f"inversion identity failed at {x}"
