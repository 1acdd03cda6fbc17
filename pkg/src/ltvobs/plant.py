"""True LTV plant ``x' = A(t) x + theta(t) x + B(t) u(t)`` with delayed
full-state measurement ``y(t) = x(t - d)``."""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ltvobs.delayline import DelayLine
from ltvobs.errors import DivergenceError, IntegrationError
from ltvobs.mathkit import rk4_step


class MeasurementUnavailable(LookupError):
    """Raised for ``t < d``: no delayed sample exists yet."""


@dataclass
class SystemSpec:
    A: Callable[[float], np.ndarray]
    B: Callable[[float], np.ndarray]
    u: Callable[[float], float]
    x0: np.ndarray
    a1: float = 1.0
    a2: float = math.sqrt(3.0)
    omega: float = 3.0
    d: float = 0.0

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.d < 0:
            raise ValueError("delay must be non-negative")

    @property
    def n(self):
        return self.x0.shape[0]

    def theta(self, t):
        return self.a1 * math.sin(self.omega * t) + self.a2 * math.cos(self.omega * t)

    def rhs(self, t, x, theta=None):
        th = self.theta(t) if theta is None else theta(t)
        return self.A(t) @ x + th * x + self.B(t) * self.u(t)


def example_A(t):
    return np.array([[0.0, 1.0 + 0.1 * math.sin(t)], [-2.0, -1.0 + 0.5 * math.cos(2.0 * t)]])


_B = np.array([0.0, 1.0])


def example_B(t):
    return _B


def example_system(d=2.0, omega=3.0, a1=1.0, a2=math.sqrt(3.0), x0=(1.0, 2.0),
                   u_amp=2.0, u_freq=1.0):
    """The two-state benchmark: time-varying ``A(t)``, ``B = [0, 1]``, ``u = 2 sin t``.

    The amplitude pair ``(a1, a2) = (1, sqrt 3)`` corresponds to the generator
    state ``(theta(0), theta'(0)) = (1.732, 3)`` at ``omega = 3``.
    """
    def u(t):
        return u_amp * math.sin(u_freq * t)

    return SystemSpec(A=example_A, B=example_B, u=u, x0=np.array(x0, dtype=float),
                      a1=a1, a2=a2, omega=omega, d=d)


def theta_true(spec, t):
    return spec.theta(t)


@dataclass
class PlantState:
    x: np.ndarray
    history: DelayLine
    k: int = 0
    h: float = 1e-3
    t: float = field(init=False)

    def __post_init__(self):
        self.t = self.k * self.h


def init_plant(spec, h, margin=1.0):
    hist = DelayLine(h, spec.n, delay=spec.d, margin=margin)
    x = spec.x0.copy()
    hist.push(0.0, x)
    return PlantState(x=x, history=hist, h=h)


def plant_step(spec, s, h=None):
    """Advance the plant one RK4 step and record the new state in its history."""
    h = s.h if h is None else h
    try:
        x = rk4_step(spec.rhs, s.t, s.x, h)
    except IntegrationError as exc:
        raise DivergenceError(exc.t, "plant state") from None
    if not np.all(np.isfinite(x)):
        raise DivergenceError(s.t + h, "plant state")
    return commit_plant(s, x)


def commit_plant(s, x):
    """Accept ``x`` as the state one grid step after ``s.t``."""
    s.k += 1
    s.t = s.k * s.h
    s.x = x
    s.history.push(s.t, x)
    return s


def measure(s, d):
    """Delayed measurement ``y = x(t - d)``."""
    if s.t < d - 1e-12:
        raise MeasurementUnavailable(f"no measurement before t=d ({s.t:.6g} < {d:.6g})")
    return s.history.sample(max(s.t - d, 0.0))
