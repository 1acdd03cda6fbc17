import math

import numpy as np
import pytest
from scipy.linalg import expm

from ltvobs.plant import (MeasurementUnavailable, SystemSpec, example_system, init_plant,
                          measure, plant_step, theta_true)

H = 1e-3


def test_theta_examples():
    spec = example_system()
    assert theta_true(spec, 0.0) == pytest.approx(1.732, abs=5e-4)
    # generator state (theta, theta') at t = 0 is (1.732, 3)
    dtheta = (theta_true(spec, 1e-6) - theta_true(spec, -1e-6)) / 2e-6
    assert dtheta == pytest.approx(3.0, abs=1e-6)
    assert theta_true(example_system(a1=0.0, a2=0.0), 12.3) == 0.0
    assert theta_true(example_system(a1=1.0, a2=0.0), math.pi / 6) == pytest.approx(1.0)


def test_theta_satisfies_generator(rng):
    spec = example_system()
    dt = 1e-4
    for t in rng.uniform(0, 40, size=50):
        th = [theta_true(spec, t + k * dt) for k in (-1, 0, 1)]
        second = (th[0] - 2 * th[1] + th[2]) / dt ** 2
        assert second == pytest.approx(-spec.omega ** 2 * th[1], abs=1e-5)


def test_zero_dynamics():
    spec = SystemSpec(A=lambda t: np.zeros((2, 2)), B=lambda t: np.zeros(2), u=lambda t: 0.0,
                      x0=[1.0, 2.0], a1=0.0, a2=0.0)
    s = init_plant(spec, H)
    for _ in range(10):
        plant_step(spec, s)
    np.testing.assert_array_equal(s.x, [1.0, 2.0])


def test_one_step_matches_fine_reference():
    spec = example_system(d=0.0)
    s = init_plant(spec, H)
    plant_step(spec, s)
    fine = init_plant(spec, 1e-6)
    for _ in range(1000):
        plant_step(spec, fine)
    np.testing.assert_allclose(s.x, fine.x, atol=1e-10, rtol=0)


def test_lti_matches_matrix_exponential():
    A = np.array([[0.0, 1.0], [-2.0, -1.0]])
    spec = SystemSpec(A=lambda t: A, B=lambda t: np.zeros(2), u=lambda t: 0.0,
                      x0=[1.0, 2.0], a1=0.0, a2=0.0)
    s = init_plant(spec, H)
    for k in range(1, 1001):
        plant_step(spec, s)
        if k % 100 == 0:
            np.testing.assert_allclose(s.x, expm(A * k * H) @ spec.x0, atol=1e-8)


def test_measure_without_delay_is_state():
    spec = example_system(d=0.0)
    s = init_plant(spec, H)
    for _ in range(50):
        plant_step(spec, s)
        assert np.array_equal(measure(s, 0.0), s.x)


def test_measure_with_delay():
    spec = example_system(d=2.0)
    s = init_plant(spec, H)
    with pytest.raises(MeasurementUnavailable):
        measure(s, 2.0)
    for _ in range(2000):
        plant_step(spec, s)
    np.testing.assert_array_equal(measure(s, 2.0), [1.0, 2.0])
    plant_step(spec, s)
    np.testing.assert_array_equal(measure(s, 2.0), s.history.sample_index(1))


def test_constant_state_measure():
    spec = SystemSpec(A=lambda t: np.zeros((2, 2)), B=lambda t: np.zeros(2), u=lambda t: 0.0,
                      x0=[1.0, 2.0], a1=0.0, a2=0.0, d=0.5)
    s = init_plant(spec, H)
    for _ in range(700):
        plant_step(spec, s)
    np.testing.assert_array_equal(measure(s, 0.5), [1.0, 2.0])


def test_bounded_over_horizon():
    spec = example_system(d=2.0)
    s = init_plant(spec, H)
    peak = 0.0
    for _ in range(40000):
        plant_step(spec, s)
        peak = max(peak, float(np.abs(s.x).max()))
    assert np.isfinite(peak) and peak < 100.0


def test_invalid_spec():
    with pytest.raises(ValueError):
        example_system(omega=0.0)
    with pytest.raises(ValueError):
        example_system(d=-1.0)
