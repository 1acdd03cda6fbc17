import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ltvobs.filtbank import (FilterBank, FilterSpec, canonical_form, derivative_lag, filter_step,
                             lag_power, realize)

H = 1e-3
LAM = 10.0


def estimator_filters():
    out = {f"lag3_p{m}": derivative_lag(LAM, m) for m in range(4)}
    out["lag1"] = FilterSpec((LAM,), (LAM, 1.0))
    out["lag1_p"] = FilterSpec((0.0, LAM), (LAM, 1.0))
    return out


def steady_response(spec, w, h=H):
    """Drive with sin(w t) and least-squares fit the settled output."""
    f = realize(spec, h)
    periods = 2
    t_settle = 6.0
    n = int(round((t_settle + periods * 2 * math.pi / w) / h))
    t = np.arange(n + 1) * h
    y = np.array([f.step(math.sin(w * tk)) for tk in t])
    keep = t >= t_settle
    basis = np.column_stack([np.sin(w * t[keep]), np.cos(w * t[keep])])
    c, *_ = np.linalg.lstsq(basis, y[keep], rcond=None)
    return complex(c[0], c[1])


def test_lag_power():
    assert lag_power(10.0, 3) == (1000.0, 300.0, 30.0, 1.0)


def test_canonical_form_first_order():
    A, B, C, D = canonical_form(FilterSpec((LAM,), (LAM, 1.0)))
    np.testing.assert_array_equal(A, [[-LAM]])
    np.testing.assert_array_equal(B, [1.0])
    np.testing.assert_array_equal(C, [LAM])
    assert D == 0.0


def test_canonical_form_biproper_feedthrough():
    A, B, C, D = canonical_form(FilterSpec((0.0, LAM), (LAM, 1.0)))
    assert D == LAM
    np.testing.assert_array_equal(C, [-LAM * LAM])


def test_canonical_form_third_order():
    A, B, C, D = canonical_form(derivative_lag(LAM, 0))
    np.testing.assert_array_equal(A, [[0, 1, 0], [0, 0, 1], [-1000, -300, -30]])
    np.testing.assert_array_equal(B, [0, 0, 1])
    np.testing.assert_array_equal(C, [1000, 0, 0])


def test_canonical_form_realizes_transfer_function(rng):
    for spec in estimator_filters().values():
        A, B, C, D = canonical_form(spec)
        for w in rng.uniform(0.1, 50, 5):
            g = C @ np.linalg.solve(1j * w * np.eye(len(A)) - A, B) + D
            assert g == pytest.approx(spec.response(w), rel=1e-10)


def test_improper_rejected():
    with pytest.raises(ValueError):
        FilterSpec((0.0, 0.0, 1.0), (1.0, 1.0))


@pytest.mark.parametrize("name", list(estimator_filters()))
@pytest.mark.parametrize("w", [1.0, 3.0, 10.0])
def test_frequency_response_fidelity(name, w):
    spec = estimator_filters()[name]
    g_num = steady_response(spec, w)
    g = spec.response(w)
    assert abs(g_num) == pytest.approx(abs(g), rel=1e-3)
    assert abs(np.angle(g_num / g)) < 1e-3


def test_dc_gain_unity():
    for name in ("lag3_p0", "lag1"):
        f = realize(estimator_filters()[name], H)
        for _ in range(5000):
            y = f.step(2.5)
        assert y == pytest.approx(2.5, rel=1e-9)


def test_filter_step_wrapper():
    f = realize(estimator_filters()["lag1"], H)
    f2, y = filter_step(f, 1.0, H)
    assert f2 is f and y == 0.0
    with pytest.raises(ValueError):
        filter_step(f, 1.0, 2 * H)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 3))
def test_linearity(a, b, m):
    spec = derivative_lag(LAM, m)
    t = np.arange(300) * H
    u1, u2 = np.sin(3 * t), np.cos(7 * t) + t
    lhs = _run(spec, a * u1 + b * u2)
    rhs = a * _run(spec, u1) + b * _run(spec, u2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))


def _run(spec, u):
    f = realize(spec, H)
    return np.array([f.step(v) for v in u])


def test_derivative_chain_identity():
    # p^3/(p+l)^3 u = p (p^2/(p+l)^3 u): compare the shifted filters by finite differences
    t = np.arange(6000) * H
    u = np.sin(3 * t) + 0.5 * np.cos(t)
    y3 = _run(derivative_lag(LAM, 3), u)
    y2 = _run(derivative_lag(LAM, 2), u)
    dy2 = np.gradient(y2, H)
    settled = slice(3000, -1)
    np.testing.assert_allclose(y3[settled], dy2[settled], atol=1e-4 * np.abs(y3[settled]).max())


def test_bank_matches_individual_filters():
    t = np.arange(1000) * H
    u = np.column_stack([np.sin(2 * t), np.exp(-t)])
    nums = [[0, 0, 0, 1000], [0, 0, 1000], [0, 1000], [1000]]
    bank = FilterBank(lag_power(LAM, 3), nums, channels=2, h=H)
    out = np.array([bank.step(row) for row in u])
    for i, num in enumerate(nums):
        for c in range(2):
            ref = _run(FilterSpec(tuple(num), lag_power(LAM, 3)), u[:, c])
            np.testing.assert_allclose(out[:, i, c], ref, rtol=1e-12, atol=1e-12)


def test_bank_dc_init_starts_at_equilibrium():
    bank = FilterBank(lag_power(LAM, 3), [[1000], [0, 1000]], channels=1, h=H, init="dc")
    for _ in range(10):
        out = bank.step([4.0])
        np.testing.assert_allclose(out[:, 0], [4.0, 0.0], atol=1e-12)
