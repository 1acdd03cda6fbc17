"""State observer built on the fundamental matrix of the estimated dynamics.

``xi`` copies the plant with ``theta_hat`` in place of ``theta`` and starts at
zero; ``Phi`` solves ``Phi' = (A + theta_hat I) Phi`` from the identity. Then
``x - xi = Phi e0`` for the unknown constant ``e0``, and the delayed version
``q = y - xi(t - d) = Phi(t - d) e0`` is a regression in ``e0``. Mixing with
``adj(Phi(t - d))`` turns it into ``R = P e0`` with scalar ``P = det Phi(t - d)``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ltvobs.delayline import DelayLine
from ltvobs.errors import DivergenceError, IntegrationError
from ltvobs.mathkit import adjugate, det, relax_step, rk4_step

log = logging.getLogger(__name__)

P_RANGE = (1e-12, 1e12)


@dataclass
class StateEstimate:
    x_hat: np.ndarray
    t_c_reached: bool


@dataclass
class GpeboState:
    n: int = 2
    h: float = 1e-3
    d: float = 0.0
    gamma3: float = 100.0
    gamma_w: float = 100.0
    mu: float = 0.01
    origin: float = 0.0
    margin: float = 1.0
    xi: np.ndarray = None
    Phi: np.ndarray = None
    e_hat: np.ndarray = None
    e_hat0: np.ndarray = None
    w: float = 1.0
    w_c: float = None
    e_ft: np.ndarray = None
    t_c_reached: bool = False
    t_c: float = None
    k: int = 0
    xi_hist: DelayLine = field(init=False, repr=False)
    phi_hist: DelayLine = field(init=False, repr=False)
    conditioning_warned: bool = False
    _prev_e: tuple = field(default=None, init=False, repr=False)
    _prev_w: float = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.gamma3 <= 0 or self.gamma_w <= 0:
            raise ValueError("gamma3 and gamma_w must be positive")
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0,1)")
        n = self.n
        self.xi = np.zeros(n) if self.xi is None else np.asarray(self.xi, dtype=float)
        self.Phi = np.eye(n) if self.Phi is None else np.asarray(self.Phi, dtype=float)
        self.e_hat = np.zeros(n) if self.e_hat is None else np.asarray(self.e_hat, dtype=float)
        self.e_hat0 = self.e_hat.copy()
        self.e_ft = self.e_hat.copy()
        self.w_c = min(self.w, 1.0 - self.mu)
        self.xi_hist = DelayLine(self.h, n, self.d, self.margin, origin=self.origin)
        self.phi_hist = DelayLine(self.h, n * n, self.d, self.margin, origin=self.origin)
        self.xi_hist.push(self.origin, self.xi)
        self.phi_hist.push(self.origin, self.Phi.ravel())

    @property
    def t(self):
        return self.origin + self.k * self.h

    def restart_estimator(self):
        """Store the current ``e_hat`` as the initial estimate for the finite-time combination."""
        self.e_hat0 = self.e_hat.copy()
        self.w = 1.0
        self.w_c = 1.0 - self.mu
        self._prev_e = None
        self._prev_w = None


def gpebo_step(st, A, B, u, theta_hat):
    """Propagate ``xi`` and ``Phi`` one step and record them.

    ``A``, ``B``, ``u`` are callables of time. ``theta_hat`` is either a
    callable of time or a number held over the step.
    """
    n = st.n
    th = theta_hat if callable(theta_hat) else (lambda t, c=float(theta_hat): c)

    def rhs(t, X):
        out = A(t) @ X
        out += th(t) * X
        out[:, 0] += B(t) * u(t)
        return out

    t = st.t
    X = np.empty((n, n + 1))
    X[:, 0] = st.xi
    X[:, 1:] = st.Phi
    try:
        X = rk4_step(rhs, t, X, st.h)
    except IntegrationError as exc:
        raise DivergenceError(exc.t, "observer state") from None
    return commit_observer(st, X[:, 0].copy(), X[:, 1:].copy())


def commit_observer(st, xi, Phi):
    """Accept ``(xi, Phi)`` as the values one grid step after ``st.t``."""
    st.k += 1
    st.xi = xi
    st.Phi = Phi
    st.xi_hist.push(st.t, xi)
    st.phi_hist.push(st.t, Phi.ravel())
    return st


def delayed_regression(st, y, t, d):
    """Return ``(q, P, R)``: ``q = y - xi(t-d)``, ``P = det Phi(t-d)``, ``R = adj(Phi(t-d)) q``."""
    n = st.n
    xi_d = st.xi_hist.sample(t - d)
    Phi_d = st.phi_hist.sample(t - d).reshape(n, n)
    q = np.asarray(y, dtype=float) - xi_d
    P = det(Phi_d)
    R = adjugate(Phi_d) @ q
    lo, hi = P_RANGE
    if not lo <= abs(P) <= hi and not st.conditioning_warned:
        log.warning("det Phi(t-d) = %.3g at t=%.3f is outside [%g, %g]", P, t, lo, hi)
        st.conditioning_warned = True
    return q, P, R


def e_gradient_step(st, P, R):
    """``e_hat' = -gamma3 P (P e_hat - R)`` across the last grid step."""
    g = st.gamma3
    R = np.asarray(R, dtype=float)
    if st._prev_e is not None:
        P0, R0 = st._prev_e
        st.e_hat = relax_step(g * P0 * P0, g * P * P, g * P0 * R0, g * P * R, st.e_hat, st.h)
    st._prev_e = (P, R)
    return st


def finite_time_update(st, P):
    """Decay the weight ``w' = -gamma_w P^2 w`` and form the clipped combination."""
    if st._prev_w is not None:
        g = st.gamma_w
        st.w = relax_step(g * st._prev_w ** 2, g * P * P, 0.0, 0.0, st.w, st.h)
    st._prev_w = P
    st.w_c = min(st.w, 1.0 - st.mu)
    st.e_ft = (st.e_hat - st.w_c * st.e_hat0) / (1.0 - st.w_c)
    if not st.t_c_reached and st.w <= 1.0 - st.mu:
        st.t_c_reached = True
        st.t_c = st.t
    return st


def state_estimate(st):
    return StateEstimate(x_hat=st.xi + st.Phi @ st.e_ft, t_c_reached=st.t_c_reached)
