"""Frequency identification from the delayed state.

With ``V = y'y`` and ``xi = ln V`` the delayed harmonic term satisfies
``eta = (xi' + beta) / 2`` where ``beta = -alpha / V``. Passing the generator
equation ``eta'' = -omega^2 eta`` through ``lam^3 / (p + lam)^3`` gives the
scalar regression ``q = phi * k`` with ``k = -omega^2``, which a gradient
law identifies.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ltvobs.errors import DivergenceError
from ltvobs.filtbank import FilterBank, lag_power
from ltvobs.mathkit import relax_step


@dataclass
class RegressorSample:
    q: float
    phi: float
    t: float
    v_floor_active: bool = False


def compute_V(y):
    y = np.asarray(y, dtype=float)
    return float(y @ y)


def compute_alpha(x_d, A_d, B_d, u_d):
    """``x_d' (A_d' + A_d) x_d + 2 u_d x_d' B_d``."""
    x_d = np.asarray(x_d, dtype=float)
    A_d = np.asarray(A_d, dtype=float)
    B_d = np.asarray(B_d, dtype=float)
    if A_d.shape != (x_d.size, x_d.size) or B_d.shape != x_d.shape:
        raise ValueError(f"dimension mismatch: x_d {x_d.shape}, A_d {A_d.shape}, B_d {B_d.shape}")
    return float(2.0 * (x_d @ A_d @ x_d) + 2.0 * u_d * (x_d @ B_d))


def compute_beta(alpha, V, v_floor=1e-8):
    return -alpha / max(V, v_floor)


def omega_hat(k_hat):
    return math.sqrt(abs(k_hat))


@dataclass
class FreqIdState:
    lambda1: float = 10.0
    gamma1: float = 10.0
    v_floor: float = 1e-8
    h: float = 1e-3
    k_hat: float = 0.0
    filter_init: str = "zero"
    bank: FilterBank = field(init=False, repr=False)
    _prev: tuple = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.gamma1 <= 0:
            raise ValueError("gamma1 must be positive")
        lam = self.lambda1
        g = lam ** 3
        # rows: p^3, p^2, p^1, p^0 numerators; columns: xi, beta
        nums = [[0, 0, 0, g], [0, 0, g], [0, g], [g]]
        self.bank = FilterBank(lag_power(lam, 3), nums, channels=2, h=self.h, init=self.filter_init)

    @property
    def omega_hat(self):
        return omega_hat(self.k_hat)

    def update(self, q, phi):
        """Advance ``k_hat' = gamma1 phi (q - phi k_hat)`` across the last step."""
        g = self.gamma1
        if self._prev is not None:
            q0, phi0 = self._prev
            self.k_hat = relax_step(g * phi0 * phi0, g * phi * phi, g * phi0 * q0,
                                         g * phi * q, self.k_hat, self.h)
        self._prev = (q, phi)
        return self.k_hat


def freq_id_step(st, y, A_d, B_d, u_d, t, h=None):
    """Feed one delayed sample; returns the regressor pair ``(q, phi)``."""
    if h is not None and h != st.h:
        raise ValueError("freq_id state built for a different grid step")
    V = compute_V(y)
    floored = V < st.v_floor
    Vf = max(V, st.v_floor)
    xi = math.log(Vf)
    beta = compute_beta(compute_alpha(y, A_d, B_d, u_d), Vf, st.v_floor)
    out = st.bank.step((xi, beta))
    q = out[0, 0] + out[1, 1]
    phi = out[2, 0] + out[3, 1]
    if not (math.isfinite(q) and math.isfinite(phi)):
        raise DivergenceError(t, "frequency regressor")
    st.update(q, phi)
    if not math.isfinite(st.k_hat):
        raise DivergenceError(t, "k_hat")
    return RegressorSample(q=float(q), phi=float(phi), t=t, v_floor_active=floored)
