"""Constrained reference-output design.

A virtual unconstrained trajectory (a low-order polynomial ansatz carrying
the free parameters) is mapped through a strictly increasing sigmoid
saturation whose range is the relaxed open output interval, yielding a
reference output that respects the constraint for every parameter choice.
Time derivatives of the reference are available in closed form up to
order 3.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, OutOfDomain, OutOfRange, UnsupportedOrder

#: Tolerance for membership tests of the transition time window.
_TIME_SLACK = 1e-12


@dataclass(frozen=True)
class SaturationMap:
    """Sigmoid squashing of an unconstrained signal into an open interval.

    phi(z) = y_max_s - (y_max_s - y_min_s) / (1 + exp(steepness * z)); the
    range is the open interval (y_min_s, y_max_s) and phi(0) its midpoint.
    """

    y_min_s: float
    y_max_s: float
    steepness: float

    def __post_init__(self):
        if not self.y_min_s < self.y_max_s:
            raise ValueError("saturation bounds must satisfy y_min_s < y_max_s")
        if not self.steepness > 0.0:
            raise ValueError("steepness must be positive")

    @classmethod
    def from_output_bounds(
        cls, y_min: float, y_max: float, delta_y: float, steepness: Optional[float] = None
    ) -> "SaturationMap":
        """Relax the hard output bounds by ``delta_y`` on each side.

        Default steepness is 4 / (relaxed range), which gives unit slope of
        the sigmoid at its midpoint.
        """
        if not delta_y > 0.0:
            raise ValueError("delta_y must be positive")
        lo, hi = y_min - delta_y, y_max + delta_y
        if steepness is None:
            steepness = 4.0 / (hi - lo)
        return cls(y_min_s=lo, y_max_s=hi, steepness=steepness)

    @property
    def span(self) -> float:
        return self.y_max_s - self.y_min_s


def saturate(m: SaturationMap, zeta: float) -> float:
    return m.y_max_s - m.span / (1.0 + math.exp(m.steepness * zeta))


def saturate_inverse(m: SaturationMap, y: float) -> float:
    """Inverse sigmoid; ``y`` must lie strictly inside the asymptotic bounds."""
    if not (m.y_min_s < y < m.y_max_s):
        raise OutOfRange(
            f"value {y} is not strictly inside the saturation bounds "
            f"({m.y_min_s}, {m.y_max_s})"
        )
    return (math.log(y - m.y_min_s) - math.log(m.y_max_s - y)) / m.steepness


def _sigmoid_derivatives(m: SaturationMap, zeta: float, order: int) -> Tuple[float, ...]:
    """phi and its derivatives with respect to zeta, orders 0..order."""
    e = math.exp(m.steepness * zeta)
    s = e / (1.0 + e)
    q = s * (1.0 - s)
    out = [m.y_max_s - m.span / (1.0 + e)]
    if order >= 1:
        out.append(m.span * m.steepness * q)
    if order >= 2:
        out.append(m.span * m.steepness**2 * q * (1.0 - 2.0 * s))
    if order >= 3:
        out.append(m.span * m.steepness**3 * q * (1.0 - 6.0 * s + 6.0 * s * s))
    return tuple(out)


@dataclass(frozen=True)
class AnsatzTrajectory:
    """Polynomial virtual trajectory with one free parameter per monomial.

    zeta(t, p) = zeta_k + a1(p)*tau + sum_i gamma_i*p_i*tau^(i+1) with
    tau = (t - t_k)/delta_k and a1(p) = zeta_k1 - zeta_k - sum_i gamma_i*p_i,
    so both endpoint conditions hold identically in p. With m parameters
    the polynomial degree is m + 1.
    """

    zeta_k: float
    zeta_k1: float
    gamma: np.ndarray
    p: np.ndarray
    t_k: float
    delta_k: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", np.atleast_1d(np.asarray(self.gamma, dtype=float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, dtype=float)))
        if self.gamma.shape != self.p.shape:
            raise DimensionMismatch("gamma and p must have the same length")
        if np.any(self.gamma <= 0.0):
            raise ValueError("tuning parameters gamma must be positive")
        if not self.delta_k > 0.0:
            raise ValueError("transition duration must be positive")

    @property
    def t_k1(self) -> float:
        return self.t_k + self.delta_k

    def with_p(self, p) -> "AnsatzTrajectory":
        return replace(self, p=np.atleast_1d(np.asarray(p, dtype=float)))


def ansatz_eval(a: AnsatzTrajectory, t: float, order: int = 1) -> Tuple[float, ...]:
    """Virtual trajectory value and time derivatives, orders 0..order."""
    if not (a.t_k - _TIME_SLACK <= t <= a.t_k1 + _TIME_SLACK):
        raise OutOfDomain(f"t={t} outside the transition window [{a.t_k}, {a.t_k1}]")
    tau = (t - a.t_k) / a.delta_k
    coeffs = a.gamma * a.p  # monomials tau^2, tau^3, ...
    a1 = a.zeta_k1 - a.zeta_k - float(np.sum(coeffs))
    # polynomial in tau: zeta_k + a1*tau + sum coeffs[i]*tau^(i+2)
    poly = np.concatenate(([a.zeta_k, a1], coeffs))
    out = []
    for d in range(order + 1):
        acc = 0.0
        for j in range(len(poly)):
            if j < d:
                continue
            fac = 1.0
            for q in range(j, j - d, -1):
                fac *= q
            acc += poly[j] * fac * tau ** (j - d)
        out.append(acc / a.delta_k**d)
    return tuple(out)


def reference_output(m: SaturationMap, a: AnsatzTrajectory, t: float, order: int = 1) -> Tuple[float, ...]:
    """Reference output and its time derivatives, orders 0..order (max 3).

    Chains the closed-form sigmoid derivatives with the ansatz derivatives.
    """
    if order > 3:
        raise UnsupportedOrder("reference derivatives are implemented up to order 3")
    z = ansatz_eval(a, t, order)
    phi = _sigmoid_derivatives(m, z[0], order)
    out = [phi[0]]
    if order >= 1:
        out.append(phi[1] * z[1])
    if order >= 2:
        out.append(phi[2] * z[1] ** 2 + phi[1] * z[2])
    if order >= 3:
        out.append(phi[3] * z[1] ** 3 + 3.0 * phi[2] * z[1] * z[2] + phi[1] * z[3])
    return tuple(out)
