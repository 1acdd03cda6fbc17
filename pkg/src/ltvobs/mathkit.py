"""Small dense linear algebra and a fixed-step RK4 kernel.

Matrices and vectors are plain ``numpy`` arrays. Determinant and adjugate use
explicit cofactor formulas: the estimators only ever see 1x1 to 3x3 matrices,
where closed forms are exact and cheaper than a factorisation.
"""

import math

import numpy as np

from ltvobs.errors import DimensionError, IntegrationError


def _square(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def _minor(M, i, j):
    return np.delete(np.delete(M, i, axis=0), j, axis=1)


def det(M):
    """Determinant by cofactor expansion (closed form for n <= 3)."""
    M = _square(M)
    n = M.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return float(M[0, 0])
    if n == 2:
        return float(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    if n == 3:
        a, b, c = M[0]
        d, e, f = M[1]
        g, h, i = M[2]
        return float(a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g))
    return float(sum((-1) ** j * M[0, j] * det(_minor(M, 0, j)) for j in range(n)))


def adjugate(M):
    """Transpose of the cofactor matrix, so that ``adjugate(M) @ M == det(M) * I``."""
    M = _square(M)
    n = M.shape[0]
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])
    if n == 3:
        a, b, c = M[0]
        d, e, f = M[1]
        g, h, i = M[2]
        return np.array([
            [e * i - f * h, c * h - b * i, b * f - c * e],
            [f * g - d * i, a * i - c * g, c * d - a * f],
            [d * h - e * g, b * g - a * h, a * e - b * d],
        ])
    cof = np.empty_like(M)
    for i in range(n):
        for j in range(n):
            cof[i, j] = (-1) ** (i + j) * det(_minor(M, i, j))
    return cof.T


def det2(m00, m01, m10, m11):
    return m00 * m11 - m01 * m10


def rk4_step(f, t, x, h):
    """One classical Runge-Kutta step of ``x' = f(t, x)`` over ``[t, t + h]``.

    Raises
    ------
    IntegrationError
        If the update is not finite; carries the step start time.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    half = 0.5 * h
    k1 = f(t, x)
    k2 = f(t + half, x + half * k1)
    k3 = f(t + half, x + half * k2)
    k4 = f(t + h, x + h * k3)
    incr = k1 + 2.0 * k2 + 2.0 * k3 + k4
    # a non-finite stage always leaves a non-finite sum
    if not math.isfinite(float(incr.sum())):
        raise IntegrationError(t, "derivative")
    return x + (h / 6.0) * incr


def linear_rk4_step(a0, a1, b0, b1, x, h):
    """RK4 step of the scalar linear ODE ``x' = -a(t) x + b(t)``.

    ``a`` and ``b`` are interpolated linearly between their values at the two
    ends of the step. Works elementwise, so ``x``, ``b0``, ``b1`` may be arrays
    sharing a scalar decay ``a``.
    """
    am = 0.5 * (a0 + a1)
    bm = 0.5 * (b0 + b1)
    half = 0.5 * h
    k1 = b0 - a0 * x
    k2 = bm - am * (x + half * k1)
    k3 = bm - am * (x + half * k2)
    k4 = b1 - a1 * (x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def linear_rk4_coeffs(a, h):
    """Scalars ``(m, n0, n1)`` with
    ``linear_rk4_step(a, a, b0, b1, x, h) == m * x + n0 * b0 + n1 * b1``
    for a constant decay rate ``a``."""
    return (linear_rk4_step(a, a, 0.0, 0.0, 1.0, h),
            linear_rk4_step(a, a, 1.0, 0.0, 0.0, h),
            linear_rk4_step(a, a, 0.0, 1.0, 0.0, h))


def relax_step(a0, a1, b0, b1, x, h):
    """Exponential step of ``x' = -a(t) x + b(t)`` with ``a >= 0``.

    Uses the step averages of ``a`` and ``b``; unconditionally stable, so
    high-gain gradient flows (``a * h`` well beyond RK4's stability bound of
    about 2.8) stay bounded. When ``b = a * c`` for a constant ``c`` the
    relaxation toward ``c`` is exact up to the trapezoid rule in ``a``.
    """
    a = 0.5 * (a0 + a1)
    b = 0.5 * (b0 + b1)
    ah = a * h
    decay = math.exp(-ah)
    # (1 - e^{-ah}) / a, computed without cancellation for small ah
    gain = -math.expm1(-ah) / a if ah > 1e-12 else h * (1.0 - 0.5 * ah)
    return decay * x + gain * b
