"""Uniform-grid history buffer serving delayed lookups ``v(t - d)``."""

import math

import numpy as np

from ltvobs.errors import GridAlignmentError, OutOfRangeError

GRID_TOL = 1e-9


class DelayLine:
    """Ring buffer of vector snapshots taken on the grid ``origin + k * step``.

    Parameters
    ----------
    step : float
        Grid spacing, equal to the integrator step.
    dim : int
        Length of every stored vector.
    delay : float
        Largest lag that will be queried.
    margin : float
        Extra retained span beyond ``delay`` (seconds).
    origin : float
        Time of the first sample.
    """

    def __init__(self, step, dim, delay=0.0, margin=1.0, origin=0.0):
        if step <= 0:
            raise ValueError("step must be positive")
        self.step = float(step)
        self.dim = int(dim)
        self.origin = float(origin)
        self.capacity = math.ceil((delay + margin) / step) + 2
        self._buf = np.empty((self.capacity, self.dim))
        self.count = 0

    def __len__(self):
        return min(self.count, self.capacity)

    @property
    def latest_time(self):
        return self.origin + (self.count - 1) * self.step

    @property
    def earliest_time(self):
        return self.origin + max(0, self.count - self.capacity) * self.step

    def push(self, t, v):
        expected = self.origin + self.count * self.step
        if abs(t - expected) > GRID_TOL:
            raise GridAlignmentError(f"push at t={t!r}, next grid point is {expected!r}")
        self._buf[self.count % self.capacity] = v
        self.count += 1
        return self

    def _row(self, k):
        return self._buf[k % self.capacity]

    def sample(self, t_query):
        """Value at ``t_query``; exact on grid points, linear in between."""
        if self.count == 0:
            raise OutOfRangeError("empty delay line")
        pos = (t_query - self.origin) / self.step
        k = round(pos)
        first = max(0, self.count - self.capacity)
        if abs(pos - k) * self.step <= GRID_TOL:
            if not first <= k < self.count:
                raise OutOfRangeError(f"t={t_query!r} outside stored span")
            return self._row(k).copy()
        k0 = math.floor(pos)
        if not first <= k0 < self.count - 1:
            raise OutOfRangeError(f"t={t_query!r} outside stored span")
        frac = pos - k0
        return (1.0 - frac) * self._row(k0) + frac * self._row(k0 + 1)

    def sample_index(self, k):
        """Value at grid index ``k`` (bit-exact, no interpolation)."""
        first = max(0, self.count - self.capacity)
        if not first <= k < self.count:
            raise OutOfRangeError(f"grid index {k} outside stored span")
        return self._row(k)
