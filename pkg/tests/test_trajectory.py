"""Saturated reference-output design and its closed-form derivatives."""

import math

import numpy as np
import pytest

from noesc.errors import DimensionMismatch, OutOfDomain, OutOfRange, UnsupportedOrder
from noesc.trajectory import (
    AnsatzTrajectory,
    SaturationMap,
    ansatz_eval,
    reference_output,
    saturate,
    saturate_inverse,
)

SAT = SaturationMap(y_min_s=-2.0, y_max_s=2.0, steepness=4.0)


def test_saturate_center():
    assert saturate(SAT, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_saturate_inverse_known_values():
    assert saturate_inverse(SAT, 0.8) == pytest.approx(0.25 * (math.log(2.8) - math.log(1.2)), abs=1e-15)
    assert saturate_inverse(SAT, 1.5) == pytest.approx(0.25 * (math.log(3.5) - math.log(0.5)), abs=1e-15)


def test_saturate_round_trip_and_range():
    rng = np.random.default_rng(2)
    for zeta in rng.uniform(-3.0, 3.0, size=50):
        y = saturate(SAT, float(zeta))
        assert -2.0 < y < 2.0
        assert saturate_inverse(SAT, y) == pytest.approx(float(zeta), abs=1e-12)


def test_saturate_inverse_rejects_out_of_range():
    for y in (-2.0, 2.0, 2.5):
        with pytest.raises(OutOfRange):
            saturate_inverse(SAT, y)


def test_from_output_bounds_relaxation_and_default_steepness():
    m = SaturationMap.from_output_bounds(-1.5, 1.5, 0.5)
    assert (m.y_min_s, m.y_max_s) == (-2.0, 2.0)
    assert m.steepness == pytest.approx(1.0)  # 4 / relaxed range
    with pytest.raises(ValueError):
        SaturationMap.from_output_bounds(-1.5, 1.5, 0.0)
    with pytest.raises(ValueError):
        SaturationMap(y_min_s=1.0, y_max_s=-1.0, steepness=4.0)


def _ansatz(gamma, p, zeta_k=0.1, zeta_k1=0.9):
    return AnsatzTrajectory(zeta_k=zeta_k, zeta_k1=zeta_k1, gamma=gamma, p=p, t_k=2.0, delta_k=1.5)


def test_ansatz_boundary_identity_for_any_p():
    rng = np.random.default_rng(4)
    for m in (1, 2, 3):
        for _ in range(20):
            a = _ansatz(rng.uniform(0.1, 2.0, size=m), rng.uniform(-50.0, 50.0, size=m))
            assert ansatz_eval(a, a.t_k, 0)[0] == pytest.approx(0.1, abs=1e-12)
            assert ansatz_eval(a, a.t_k1, 0)[0] == pytest.approx(0.9, abs=1e-12)


def test_ansatz_zero_parameters_is_straight_line():
    a = _ansatz([0.5], [0.0])
    for tau in (0.0, 0.25, 0.5, 1.0):
        t = a.t_k + tau * a.delta_k
        assert ansatz_eval(a, t, 0)[0] == pytest.approx(0.1 + 0.8 * tau, abs=1e-14)


def test_ansatz_midpoint_polynomial_arithmetic():
    zeta_k = 0.25 * (math.log(2.8) - math.log(1.2))
    zeta_k1 = 0.25 * (math.log(3.5) - math.log(0.5))
    a = AnsatzTrajectory(zeta_k=zeta_k, zeta_k1=zeta_k1, gamma=[0.01], p=[1.0], t_k=0.0, delta_k=1.0)
    expected = zeta_k + (zeta_k1 - zeta_k - 0.01) * 0.5 + 0.01 * 0.25
    assert ansatz_eval(a, 0.5, 0)[0] == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(0.34665, abs=5e-6)


def test_ansatz_validation():
    with pytest.raises(ValueError):
        _ansatz([0.0], [1.0])  # gamma must be positive
    with pytest.raises(DimensionMismatch):
        _ansatz([0.1, 0.2], [1.0])
    with pytest.raises(ValueError):
        AnsatzTrajectory(zeta_k=0.0, zeta_k1=1.0, gamma=[0.1], p=[0.0], t_k=0.0, delta_k=0.0)
    a = _ansatz([0.1], [1.0])
    with pytest.raises(OutOfDomain):
        ansatz_eval(a, a.t_k1 + 0.1, 0)
    assert a.with_p([3.0]).p[0] == 3.0
    assert a.t_k1 == pytest.approx(3.5)


def test_constant_reference_under_equal_boundaries():
    a = _ansatz([0.1], [0.0], zeta_k=0.3, zeta_k1=0.3)
    for tau in (0.0, 0.5, 1.0):
        y, dy = reference_output(SAT, a, a.t_k + tau * a.delta_k, 1)
        assert y == pytest.approx(saturate(SAT, 0.3), abs=1e-14)
        assert dy == pytest.approx(0.0, abs=1e-14)


def test_reference_starts_at_boundary_output():
    zeta_k = saturate_inverse(SAT, 0.8)
    zeta_k1 = saturate_inverse(SAT, 1.5)
    a = AnsatzTrajectory(zeta_k=zeta_k, zeta_k1=zeta_k1, gamma=[0.01], p=[1.0], t_k=0.0, delta_k=1.0)
    y = reference_output(SAT, a, 0.0, 0)[0]
    assert y == pytest.approx(0.8, abs=1e-12)
    # The reference is the sigmoid of the virtual trajectory everywhere.
    zeta_mid = ansatz_eval(a, 0.5, 0)[0]
    assert reference_output(SAT, a, 0.5, 0)[0] == pytest.approx(
        2.0 - 4.0 / (1.0 + math.exp(4.0 * zeta_mid)), abs=1e-14
    )


def test_reference_derivatives_match_finite_differences():
    a = _ansatz([0.01, 0.4], [-21.0, 1.3], zeta_k=0.2118, zeta_k1=0.4865)
    h = 1e-5
    for tau in (0.11, 0.42, 0.73, 0.94):
        t = a.t_k + tau * a.delta_k
        y0, d1, d2, d3 = reference_output(SAT, a, t, 3)
        yp = reference_output(SAT, a, t + h, 2)
        ym = reference_output(SAT, a, t - h, 2)
        assert d1 == pytest.approx((yp[0] - ym[0]) / (2.0 * h), abs=1e-6)
        assert d2 == pytest.approx((yp[1] - ym[1]) / (2.0 * h), abs=1e-5)
        assert d3 == pytest.approx((yp[2] - ym[2]) / (2.0 * h), abs=1e-4)


def test_reference_order_cap():
    a = _ansatz([0.1], [1.0])
    with pytest.raises(UnsupportedOrder):
        reference_output(SAT, a, a.t_k, 4)
