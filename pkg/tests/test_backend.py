"""Compiled and pure-Python kernels must agree."""

import math

import numpy as np
import pytest

from noesc import backend
from noesc.esc import plan_transition, simulate_transition
from noesc.numerics import IntegratorConfig, integrate_ivp
from noesc.plant import example_plant
from noesc.trajectory import SaturationMap

needs_compiled = pytest.mark.skipif(
    not backend.compiled_available(), reason="compiled kernels not built"
)


@pytest.fixture
def restore_backend():
    previous = backend.active_name()
    yield
    backend.use(previous)


def test_switching_and_names(restore_backend):
    backend.use("pure")
    assert backend.active_name() == "pure"
    assert backend.kernels().BACKEND == "pure"
    with pytest.raises(ValueError):
        backend.use("vectorized")


@needs_compiled
def test_compiled_selected_by_default(restore_backend):
    backend.use("auto")
    assert backend.active_name() == "compiled"


@needs_compiled
def test_rk4_agreement(restore_backend):
    def run():
        traj = integrate_ivp(
            lambda t, v: [math.sin(t) - v[0], v[0] - 0.5 * v[1]],
            (0.0, 2.0),
            [1.0, -0.3],
            IntegratorConfig(step=1e-3, store_every=7),
        )
        return traj.times, traj.values

    backend.use("pure")
    t_pure, v_pure = run()
    backend.use("compiled")
    t_comp, v_comp = run()
    assert np.array_equal(t_pure, t_comp)
    assert np.max(np.abs(v_pure - v_comp)) < 1e-12


@needs_compiled
def test_window_agreement(restore_backend):
    plant = example_plant(1.0)
    sat = SaturationMap.from_output_bounds(-1.5, 1.5, 0.5, 4.0)

    def run():
        plan = plan_transition(plant, sat, [0.8, 3.0], [1.5, 2.056], 0.0, 1.0, [0.01], 1.0)
        ts, xs, us = simulate_transition(
            plant, sat, plan, IntegratorConfig(step=1e-3, store_every=10)
        )
        return plan.p_star, xs, us

    backend.use("pure")
    p_pure, x_pure, u_pure = run()
    backend.use("compiled")
    p_comp, x_comp, u_comp = run()
    assert abs(p_pure[0] - p_comp[0]) < 1e-9
    assert np.max(np.abs(x_pure - x_comp)) < 1e-10
    assert np.max(np.abs(u_pure - u_comp)) < 1e-9
