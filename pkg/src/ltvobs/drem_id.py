"""Amplitude identification with dynamic regressor extension and mixing.

The ``lam2 / (p + lam2)`` filtered delayed dynamics give
``Y1 = a1 psi11 + a2 psi21`` (first state row only). The extension

    Y'     = -lam3 Y     + lam3 Psi' Y1
    Omega' = -lam3 Omega + lam3 Psi' Psi

followed by mixing with ``adj(Omega)`` decouples the two amplitudes:
``Z = adj(Omega) Y = Delta a`` with ``Delta = det(Omega)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ltvobs.errors import DivergenceError
from ltvobs.filtbank import FilterBank
from ltvobs.mathkit import adjugate, det, linear_rk4_coeffs, relax_step


@dataclass(frozen=True)
class Chi:
    chi1: float
    chi2: float


def chi_eval(omega_hat, t, d):
    arg = omega_hat * (t - d)
    return Chi(math.sin(arg), math.cos(arg))


def theta_hat(a_hat, omega_hat, t):
    """Delay-compensated estimate ``a1 sin(w t) + a2 cos(w t)``."""
    return a_hat[0] * math.sin(omega_hat * t) + a_hat[1] * math.cos(omega_hat * t)


@dataclass
class Regression:
    """Filtered regression for every state row; row 0 feeds the estimator."""

    Y: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray

    @property
    def Y1(self):
        return float(self.Y[0])

    @property
    def psi11(self):
        return float(self.psi1[0])

    @property
    def psi21(self):
        return float(self.psi2[0])


@dataclass
class DremState:
    n: int = 2
    lambda2: float = 10.0
    lambda3: float = 10.0
    gamma2: float = 10.0
    h: float = 1e-3
    Y: np.ndarray = field(default_factory=lambda: np.zeros(2))
    Omega: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))
    a_hat: np.ndarray = field(default_factory=lambda: np.zeros(2))
    Delta: float = 0.0
    Z: np.ndarray = field(default_factory=lambda: np.zeros(2))
    filter_init: str = "zero"
    bank: FilterBank = field(init=False, repr=False)
    _prev: tuple = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.gamma2 <= 0 or self.lambda3 <= 0 or self.lambda2 <= 0:
            raise ValueError("gamma2, lambda2 and lambda3 must be positive")
        lam = self.lambda2
        # channels: x_d, A_d x_d + B_d u_d, chi1 x_d, chi2 x_d
        self.bank = FilterBank((lam, 1.0), [[0.0, lam], [lam]], channels=4 * self.n, h=self.h,
                               init=self.filter_init)
        self._ext = linear_rk4_coeffs(self.lambda3, self.h)


def build_regression(st, x_d, A_d, B_d, u_d, chi, t=float("nan")):
    n = st.n
    x_d = np.asarray(x_d, dtype=float)
    u = np.empty(4 * n)
    u[:n] = x_d
    u[n:2 * n] = A_d @ x_d + B_d * u_d
    u[2 * n:3 * n] = chi.chi1 * x_d
    u[3 * n:] = chi.chi2 * x_d
    out = st.bank.step(u)
    reg = Regression(
        Y=out[0, :n] - out[1, n:2 * n],
        psi1=out[1, 2 * n:3 * n],
        psi2=out[1, 3 * n:],
    )
    if not math.isfinite(float(reg.Y.sum())):
        raise DivergenceError(t, "amplitude regressor")
    return reg


def drem_step(st, Y1, psi11, psi21, t=float("nan")):
    """Advance the extension, mix, and take one gradient step on ``a_hat``."""
    lam = st.lambda3
    # [Y | Omega] integrated together: same forgetting rate
    b = np.empty((2, 3))
    b[0, 0] = psi11 * Y1
    b[1, 0] = psi21 * Y1
    b[0, 1] = psi11 * psi11
    b[0, 2] = b[1, 1] = psi11 * psi21
    b[1, 2] = psi21 * psi21
    b *= lam
    if st._prev is None:
        st._prev = b
        return st
    S = np.empty((2, 3))
    S[:, 0] = st.Y
    S[:, 1:] = st.Omega
    m, n0, n1 = st._ext
    S = m * S + n0 * st._prev + n1 * b
    st._prev = b
    st.Y = S[:, 0]
    st.Omega = S[:, 1:]
    (o00, o01), (o10, o11) = st.Omega
    y0, y1 = st.Y
    Delta = o00 * o11 - o01 * o10
    Z = np.array([o11 * y0 - o01 * y1, o00 * y1 - o10 * y0])  # adj(Omega) @ Y
    g = st.gamma2
    st.a_hat = relax_step(g * st.Delta ** 2, g * Delta ** 2, g * st.Delta * st.Z,
                          g * Delta * Z, st.a_hat, st.h)
    st.Delta, st.Z = Delta, Z
    if not math.isfinite(float(st.a_hat.sum())):
        raise DivergenceError(t, "a_hat")
    return st


def mixed(st):
    """``(Delta, Z)`` recomputed from the stored extension with the generic adjugate."""
    return det(st.Omega), adjugate(st.Omega) @ st.Y
