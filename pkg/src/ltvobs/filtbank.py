"""Controllable-canonical realisations of the scalar transfer functions used
by the estimators, stepped on the shared grid.

Inputs are grid signals. Between two grid samples the input is taken as the
straight line joining them (first-order hold), so a step needs the new input
sample and the output is reported at the new grid time. With a plain
zero-order hold the phase lag is ``omega * h / 2``, which is already 5e-3 rad
at 10 rad/s and h = 1e-3.
"""

from dataclasses import dataclass
import math
from math import comb

import numpy as np

from ltvobs.errors import DivergenceError


@dataclass(frozen=True)
class FilterSpec:
    """``num(p) / den(p)`` with coefficients in ascending powers of ``p``."""

    num: tuple
    den: tuple

    def __post_init__(self):
        num = np.trim_zeros(np.asarray(self.num, dtype=float), "b")
        den = np.trim_zeros(np.asarray(self.den, dtype=float), "b")
        if den.size == 0:
            raise ValueError("denominator is zero")
        if num.size > den.size:
            raise ValueError("improper transfer function: deg(num) > deg(den)")
        object.__setattr__(self, "num", tuple(num))
        object.__setattr__(self, "den", tuple(den))

    @property
    def order(self):
        return len(self.den) - 1

    def response(self, w):
        """Complex frequency response at ``p = j w``."""
        s = 1j * np.asarray(w, dtype=float)
        return np.polyval(self.num[::-1], s) / np.polyval(self.den[::-1], s)


def lag_power(lam, order):
    """Ascending coefficients of ``(p + lam)^order``."""
    return tuple(comb(order, k) * lam ** (order - k) for k in range(order + 1))


def derivative_lag(lam, m, order=3):
    """``lam^order p^m / (p + lam)^order``, e.g. the third-order derivative filters."""
    num = [0.0] * m + [lam ** order]
    return FilterSpec(tuple(num), lag_power(lam, order))


def canonical_form(spec):
    """Return ``(A_f, B_f, C_f, D_f)`` of the controllable canonical form."""
    den = np.asarray(spec.den)
    lead = den[-1]
    den = den / lead
    num = np.zeros(len(den))
    num[: len(spec.num)] = np.asarray(spec.num) / lead
    m = len(den) - 1
    D = float(num[m])
    A = np.zeros((m, m))
    if m:
        A[:-1, 1:] = np.eye(m - 1)
        A[-1, :] = -den[:m]
    B = np.zeros(m)
    if m:
        B[-1] = 1.0
    C = num[:m] - D * den[:m]
    return A, B, C, D


def foh_rk4_matrices(A, B, h):
    """``(M, N0, N1)`` with ``z+ = M z + N0 u0 + N1 u1``: one RK4 step of
    ``z' = A z + B u`` where ``u`` runs linearly from ``u0`` to ``u1``."""
    m = A.shape[0]

    def step(z, u0, u1):
        um = 0.5 * (u0 + u1)
        k1 = A @ z + B * u0
        k2 = A @ (z + 0.5 * h * k1) + B * um
        k3 = A @ (z + 0.5 * h * k2) + B * um
        k4 = A @ (z + h * k3) + B * u1
        return z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    M = np.column_stack([step(e, 0.0, 0.0) for e in np.eye(m)]) if m else np.zeros((0, 0))
    zero = np.zeros(m)
    return M, step(zero, 1.0, 0.0), step(zero, 0.0, 1.0)


class FilterState:
    """One scalar filter with its internal state (zero initially).

    The first call to :meth:`step` only latches the input; each later call
    advances the state by one grid step.
    """

    def __init__(self, spec, h):
        self.spec = spec
        self.h = h
        self.A, self.B, self.C, self.D = canonical_form(spec)
        self._M, self._N0, self._N1 = foh_rk4_matrices(self.A, self.B, h)
        self.z = np.zeros(spec.order)
        self.u_prev = None

    def reset(self):
        self.z[:] = 0.0
        self.u_prev = None

    def step(self, u):
        if self.u_prev is not None:
            self.z = self._M @ self.z + self._N0 * self.u_prev + self._N1 * u
        self.u_prev = u
        y = float(self.C @ self.z + self.D * u)
        if y != y or abs(y) == float("inf"):
            raise DivergenceError(float("nan"), "filter output")
        return y


def realize(spec, h=1e-3):
    return FilterState(spec, h)


def filter_step(f, u, h=None):
    if h is not None and h != f.h:
        raise ValueError(f"filter was discretised for h={f.h}, got h={h}")
    return f, f.step(u)


class FilterBank:
    """Several numerators over one shared denominator, applied to several
    input channels at once. Filters on the same input and denominator share
    their state, so one state matrix serves every numerator.

    ``step(u)`` takes one sample per channel and returns an array of shape
    ``(len(nums), channels)``.
    """

    def __init__(self, den, nums, channels, h, init="zero"):
        self.h = h
        self.init = init
        specs = [FilterSpec(tuple(n), tuple(den)) for n in nums]
        forms = [canonical_form(s) for s in specs]
        A, B = forms[0][0], forms[0][1]
        self.C = np.array([f[2] for f in forms])
        self.D = np.array([f[3] for f in forms])
        self._M, self._N0, self._N1 = foh_rk4_matrices(A, B, h)
        self._dc = -np.linalg.solve(A, B) if init == "dc" else None
        self._N0c = self._N0[:, None]
        self._N1c = self._N1[:, None]
        self._Dc = self.D[:, None]
        self.Z = np.zeros((A.shape[0], channels))
        self.u_prev = None

    def step(self, u):
        u = np.asarray(u, dtype=float)
        if self.u_prev is not None:
            self.Z = self._M @ self.Z + self._N0c * self.u_prev + self._N1c * u
        elif self._dc is not None:
            self.Z = np.outer(self._dc, u)
        self.u_prev = u
        out = self.C @ self.Z + self._Dc * u
        if not math.isfinite(float(out.sum())):
            raise DivergenceError(float("nan"), "filter output")
        return out
